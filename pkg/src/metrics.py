"""
Prometheus metrics for the CQT-MSF pipeline
"""

import logging
import time
from contextlib import contextmanager
from typing import Callable, Optional

from src import get_env_int_optional, get_env_optional

logger = logging.getLogger(__name__)

# Optional pull-mode port / textfile target for long batch runs
METRICS_PORT = get_env_int_optional("METRICS_PORT", 0)
METRICS_TEXTFILE = get_env_optional("METRICS_TEXTFILE")

# Lazy initialization flags
_initialized = False
_fallback_warned = False
_metrics = {}


def _init_metrics():
    """Initialize Prometheus metrics (lazy loading)"""
    global _initialized, _fallback_warned, _metrics

    if _initialized:
        return True

    try:
        from prometheus_client import Counter, Histogram, Gauge

        _metrics["utterances_extracted"] = Counter(
            "cqtmsf_utterances_extracted_total",
            "Utterances processed by feature extraction",
            ["status"]  # success, error
        )
        _metrics["extraction_latency"] = Histogram(
            "cqtmsf_extraction_latency_seconds",
            "Per-utterance feature extraction latency",
            buckets=[0.05, 0.1, 0.25, 0.5, 1.0, 2.5, 5.0, 10.0]
        )
        _metrics["training_epochs"] = Counter(
            "cqtmsf_training_epochs_total",
            "Completed training epochs"
        )
        _metrics["epoch_latency"] = Histogram(
            "cqtmsf_epoch_latency_seconds",
            "Training epoch latency",
            buckets=[1.0, 5.0, 15.0, 60.0, 300.0, 1200.0]
        )
        _metrics["validation_uar"] = Gauge(
            "cqtmsf_validation_uar",
            "Validation UAR of the last finished epoch"
        )
        _metrics["folds_completed"] = Counter(
            "cqtmsf_folds_completed_total",
            "Completed LOSO folds",
            ["framework"]  # dnn, dnn-svm
        )
        _metrics["smo_iterations"] = Histogram(
            "cqtmsf_smo_iterations",
            "SMO iterations per binary machine",
            buckets=[10, 100, 1000, 10000, 100000]
        )

        _initialized = True
        return True

    except ImportError:
        if not _fallback_warned:
            logger.warning("[Metrics] prometheus_client not installed, metrics disabled")
            _fallback_warned = True
        return False


def start_metrics_server(port: Optional[int] = None) -> bool:
    """Start Prometheus metrics HTTP server (for pull mode)"""
    if not _init_metrics():
        return False

    try:
        from prometheus_client import start_http_server
        port = port or METRICS_PORT
        start_http_server(port)
        logger.info("[Metrics] Server started on port %s", port)
        return True
    except Exception as e:
        logger.warning("[Metrics] Failed to start server: %s", e)
        return False


def write_metrics_textfile(path: Optional[str] = None) -> bool:
    """Dump the default registry in text exposition format (node-exporter textfile style)"""
    path = path or METRICS_TEXTFILE
    if not path or not _init_metrics():
        return False

    try:
        from prometheus_client import REGISTRY, write_to_textfile
        write_to_textfile(path, REGISTRY)
        return True
    except Exception as e:
        logger.warning("[Metrics] Failed to write %s: %s", path, e)
        return False


# Metric recording functions (safe to call even if prometheus not installed)

def inc_utterance(status: str = "success"):
    """Increment extracted-utterance counter (status: success/error)"""
    if _init_metrics():
        _metrics["utterances_extracted"].labels(status=status).inc()


def observe_extraction_latency(seconds: float):
    """Record per-utterance extraction latency"""
    if _init_metrics():
        _metrics["extraction_latency"].observe(seconds)


def inc_training_epoch():
    if _init_metrics():
        _metrics["training_epochs"].inc()


def observe_epoch_latency(seconds: float):
    if _init_metrics():
        _metrics["epoch_latency"].observe(seconds)


def set_validation_uar(value: float):
    if _init_metrics():
        _metrics["validation_uar"].set(value)


def inc_fold_completed(framework: str):
    """Increment completed fold counter (framework: dnn/dnn-svm)"""
    if _init_metrics():
        _metrics["folds_completed"].labels(framework=framework).inc()


def observe_smo_iterations(count: int):
    if _init_metrics():
        _metrics["smo_iterations"].observe(count)


@contextmanager
def track_latency(observe_fn: Callable[[float], None]):
    """Context manager to track operation latency"""
    start = time.time()
    try:
        yield
    finally:
        observe_fn(time.time() - start)
