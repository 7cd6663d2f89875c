import logging
import sys

import pytest

from src import metrics


@pytest.fixture
def without_prometheus(monkeypatch):
    monkeypatch.setitem(sys.modules, "prometheus_client", None)
    monkeypatch.setattr(metrics, "_initialized", False)
    monkeypatch.setattr(metrics, "_fallback_warned", False)
    monkeypatch.setattr(metrics, "_metrics", {})


def test_missing_client_warns_once(without_prometheus, caplog):
    with caplog.at_level(logging.WARNING, logger="src.metrics"):
        for _ in range(3):
            metrics.inc_training_epoch()
            metrics.set_validation_uar(0.5)
        assert metrics.start_metrics_server(9) is False
    warnings = [r for r in caplog.records if "not installed" in r.getMessage()]
    assert len(warnings) == 1


def test_textfile_skipped_without_client(without_prometheus, tmp_path):
    assert metrics.write_metrics_textfile(str(tmp_path / "m.prom")) is False
    assert not (tmp_path / "m.prom").exists()


def test_epoch_counter_moves():
    client = pytest.importorskip("prometheus_client")
    before = client.REGISTRY.get_sample_value("cqtmsf_training_epochs_total") or 0.0
    metrics.inc_training_epoch()
    assert client.REGISTRY.get_sample_value("cqtmsf_training_epochs_total") == before + 1
