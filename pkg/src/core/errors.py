# src/core/errors.py
from __future__ import annotations


class ContractViolation(ValueError):
    """Et API-kall brøt en forhåndsbetingelse (feil bredde, dobbel input, ukjent hendelse osv.)."""


class ThresholdError(ContractViolation):
    """t ligger utenfor terskelen protokollen er bevist for."""


class UnsupportedWidth(ContractViolation):
    """Ingen støttet kropps- eller symbolbredde er stor nok."""


class GraphPreconditionError(ContractViolation):
    """Grafinstansen oppfyller ikke forutsetningene til graf-lemmaet."""


class CorruptionBudgetExceeded(RuntimeError):
    """Motstanderen ba om flere enn t korrupsjoner."""


class ConfigError(ContractViolation):
    """Scenariofilen er ugyldig; meldingen peker på linje/kolonne eller feltsti."""
