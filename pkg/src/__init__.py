"""
CQT-MSF speech emotion toolkit
"""

import os
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv


def _load_dotenv():
    """Load .env from nearest parents with safe fallback."""
    here = Path(__file__).resolve()

    # Note: override=False keeps the real environment (CI, batch hosts) as source of truth.
    for p in here.parents:
        env_path = p / ".env"
        if env_path.exists():
            load_dotenv(env_path, override=False)
            return

    cwd_env = Path.cwd() / ".env"
    if cwd_env.exists():
        load_dotenv(cwd_env, override=False)


def get_env(name: str) -> str:
    """Get required env var, raise if missing/empty."""
    value = os.getenv(name)
    if value is None or str(value).strip() == "":
        raise RuntimeError(f"Missing required env var: {name}")
    return value


def get_env_int(name: str) -> int:
    """Get required int env var, raise if missing/invalid."""
    raw = get_env(name)
    try:
        return int(raw)
    except Exception as e:
        raise RuntimeError(f"Invalid int env var {name}={raw!r}") from e


_TRUE_VALUES = ("1", "true", "yes", "y", "on")
_FALSE_VALUES = ("0", "false", "no", "n", "off")


def get_env_bool(name: str) -> bool:
    """Get required bool env var, raise if missing/invalid."""
    raw = get_env(name).strip().lower()
    if raw in _TRUE_VALUES:
        return True
    if raw in _FALSE_VALUES:
        return False
    raise RuntimeError(f"Invalid bool env var {name}={raw!r}")


def get_env_optional(name: str, default: Optional[str] = None) -> Optional[str]:
    """Get optional env var; return default if missing/empty."""
    raw = os.getenv(name)
    if raw is None or str(raw).strip() == "":
        return default
    return raw.strip()


def get_env_int_optional(name: str, default: int) -> int:
    """Parse optional int env var; a present but invalid value is an error."""
    raw = get_env_optional(name)
    if raw is None:
        return default
    try:
        return int(raw)
    except Exception as e:
        raise RuntimeError(f"Invalid int env var {name}={raw!r}") from e


def get_env_float_optional(name: str, default: float) -> float:
    """Parse optional float env var; a present but invalid value is an error."""
    raw = get_env_optional(name)
    if raw is None:
        return default
    try:
        return float(raw)
    except Exception as e:
        raise RuntimeError(f"Invalid float env var {name}={raw!r}") from e


def get_env_bool_optional(name: str, default: bool) -> bool:
    """Parse optional bool env var; return default if missing."""
    raw = get_env_optional(name)
    if raw is None:
        return default
    v = raw.lower()
    if v in _TRUE_VALUES:
        return True
    if v in _FALSE_VALUES:
        return False
    raise RuntimeError(f"Invalid bool env var {name}={raw!r}")


_load_dotenv()

__version__ = "1.0.0"
