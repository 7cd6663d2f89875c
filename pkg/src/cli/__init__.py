"""
Command line package exports
"""

from .app import build_config, build_parser, main
from .schemas import RunConfig

__all__ = ["RunConfig", "build_config", "build_parser", "main"]
