# core/logging.py
import logging
import sys
from typing import Optional

FORMAT = "%(asctime)s | %(levelname)s | %(name)s | %(message)s"


def setup_logging(level: Optional[str] = None):
    """Setter opp logging til stdout med fast format. Uten nivå brukes settings.log_level."""
    if level is None:
        from core.config import settings
        level = settings.log_level
    root = logging.getLogger()
    if not root.handlers:
        handler = logging.StreamHandler(sys.stdout)
        handler.setFormatter(logging.Formatter(FORMAT))
        root.addHandler(handler)

    root.setLevel(level.upper())
