# core/config.py
from __future__ import annotations
from typing import Any, Dict, Optional
from pydantic_settings import BaseSettings, SettingsConfigDict
from pathlib import Path
import os

def _find_env_file() -> Optional[str]:
    """
    Finn .env ved å gå oppover fra denne filen til prosjektroten.
    Stopper ved første treff; src/core/config.py ligger to nivåer under roten.
    """
    # Tillat manuell overstyring via miljøvariabel
    manual = os.getenv("ABA__ENV_FILE")
    if manual and Path(manual).is_file():
        return manual

    here = Path(__file__).resolve()
    for parent in [here.parent] + list(here.parents):
        if (parent / ".env").is_file():
            return str(parent / ".env")
    return None


class Settings(BaseSettings):
    # --- Drift ---
    log_level: str = "INFO"
    out_dir: str = "out"
    golden_dir: str = "tests/golden"

    # --- Protokolldefaults ---
    default_lambda: int = 32

    # --- Simulator ---
    fairness_factor: int = 16          # K = fairness_factor * n^2
    event_cap: Optional[int] = None    # None = ingen grense utover stillstand

    # --- Binær BA ---
    ba_backend: str = "oracle"
    oracle_tie_break: int = 0
    oracle_quorum: Optional[int] = None
    coin_max_rounds: int = 64

    # --- Kompleksitetskonstanter ("CA1:7,EXT:3") ---
    message_constants_raw: Optional[str] = None
    bit_constants_raw: Optional[str] = None

    model_config = SettingsConfigDict(
        env_prefix="ABA__",
        env_file=_find_env_file() or ".env",
        extra="ignore",
    )

    # caches
    _message_constants: Dict[str, int] = {}
    _bit_constants: Dict[str, float] = {}

    def __init__(self, **data):
        super().__init__(**data)
        self._message_constants = {k: int(v) for k, v in self._parse_float_map(self.message_constants_raw).items()}
        self._bit_constants = self._parse_float_map(self.bit_constants_raw)

    @staticmethod
    def _parse_float_map(raw: Optional[str]) -> Dict[str, float]:
        out: Dict[str, float] = {}
        if not raw:
            return out
        for part in [p.strip() for p in raw.split(",") if p.strip()]:
            if ":" not in part:
                continue
            k, v = (s.strip() for s in part.split(":", 1))
            try:
                out[k.upper()] = float(v)
            except ValueError:
                continue
        return out

    @property
    def message_constants(self) -> Dict[str, int]:
        return dict(self._message_constants)

    @property
    def bit_constants(self) -> Dict[str, float]:
        return dict(self._bit_constants)

    def simulator_settings(self) -> Dict[str, Any]:
        """Utdrag som maskiner og simulator leser via PartyContext.settings."""
        return {
            "fairness_factor": self.fairness_factor,
            "oracle_tie_break": self.oracle_tie_break,
            "oracle_quorum": self.oracle_quorum,
            "coin_max_rounds": self.coin_max_rounds,
        }


# Global settings
settings = Settings()
