"""
Settings and Logging Configuration
Process-level settings shared by the API, the CLI and the library modules
"""

import logging
import os
from typing import List, Optional

from dotenv import load_dotenv

# Load environment variables
load_dotenv()

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

_logging_configured = False


def _get_float(name: str, default: float) -> float:
    value = os.getenv(name)
    if value is None or value.strip() == "":
        return default
    return float(value)


def _get_int(name: str, default: int) -> int:
    value = os.getenv(name)
    if value is None or value.strip() == "":
        return default
    return int(value)


def _get_bool(name: str, default: bool) -> bool:
    value = os.getenv(name)
    if value is None:
        return default
    return value.strip().lower() in ("1", "true", "yes", "on")


# API configuration
API_HOST = os.getenv("API_HOST", "0.0.0.0")
API_PORT = _get_int("API_PORT", 8000)
API_RELOAD = _get_bool("API_RELOAD", True)

# Output and reproducibility
OUTPUT_DIR = os.getenv("OUTPUT_DIR", "output")
DEFAULT_SEED = _get_int("DEFAULT_SEED", 20240601)

# Coherence analysis defaults
COHERENCE_MAX_PAIRS = _get_int("COHERENCE_MAX_PAIRS", 4_000_000)
PERIOD_TOLERANCE = _get_int("PERIOD_TOLERANCE", 1)
LINE_ALPHA = _get_float("LINE_ALPHA", 0.01)
FALSE_POSITIVE_FACTOR = _get_float("FALSE_POSITIVE_FACTOR", 1.5)
NULL_REPLICATES = _get_int("NULL_REPLICATES", 20)

# Condition checker
LOG_MOMENT_RULE = os.getenv("LOG_MOMENT_RULE", "weighted")


def get_allowed_origins() -> List[str]:
    """
    Origins allowed by CORS, from ALLOWED_ORIGINS or local development defaults
    """
    allowed_origins_env = os.getenv("ALLOWED_ORIGINS", "")
    if allowed_origins_env:
        return [origin.strip() for origin in allowed_origins_env.split(",") if origin.strip()]
    return [
        "http://localhost:3000",
        "http://localhost:3001",
        "http://127.0.0.1:3000",
        "http://127.0.0.1:3001",
    ]


def configure_logging(level: Optional[str] = None) -> None:
    """
    Configure root logging once, from LOG_LEVEL unless a level is given
    """
    global _logging_configured

    if _logging_configured and level is None:
        return

    level_name = (level or os.getenv("LOG_LEVEL", "INFO")).upper()
    logging.basicConfig(level=getattr(logging, level_name, logging.INFO), format=LOG_FORMAT, force=True)
    _logging_configured = True
