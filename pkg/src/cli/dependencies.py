"""
Shared CLI resources

Uses lazily created singletons for objects that are costly to build (filter
banks) or must be configured once per process (logging, metrics).
"""

import logging
from typing import Dict, Optional

from src import get_env_int_optional, get_env_optional
from src.features.pipeline import FeatureExtractor
from src.metrics import METRICS_PORT, METRICS_TEXTFILE, start_metrics_server, write_metrics_textfile

from .schemas import RunConfig

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

# Lazy-initialized singletons
_extractors: Dict[str, FeatureExtractor] = {}
_logging_configured = False
_metrics_started = False


def default_log_level() -> str:
    return get_env_optional("CQTMSF_LOG_LEVEL", "INFO").upper()


def default_workers() -> int:
    return max(1, get_env_int_optional("CQTMSF_WORKERS", 1))


def configure_logging(level: Optional[str] = None):
    """Configure root logging once per process"""
    global _logging_configured
    if _logging_configured:
        logging.getLogger().setLevel((level or default_log_level()).upper())
        return
    logging.basicConfig(level=(level or default_log_level()).upper(), format=LOG_FORMAT)
    _logging_configured = True


def get_extractor(config: RunConfig) -> FeatureExtractor:
    """Get or create the FeatureExtractor for this extraction config (singleton per config)"""
    extraction = config.to_extraction_config()
    key = repr(sorted(extraction.to_dict().items()))
    if key not in _extractors:
        _extractors[key] = FeatureExtractor(extraction)
    return _extractors[key]


def start_observability():
    """Serve Prometheus metrics when METRICS_PORT is set"""
    global _metrics_started
    if METRICS_PORT and not _metrics_started:
        _metrics_started = start_metrics_server(METRICS_PORT)


def flush_observability():
    """Write the metrics registry to METRICS_TEXTFILE when set"""
    if METRICS_TEXTFILE:
        write_metrics_textfile(METRICS_TEXTFILE)
