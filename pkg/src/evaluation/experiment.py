"""
LOSO experiment runner for the DNN and DNN-SVM frameworks
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from .folds import LosoFold, loso_folds
from .scoring import ConfusionMatrix, accuracy, confusion_matrix, uar
from src.audio.models import DatasetManifest
from src.audio.segment import segment_features
from src.errors import ConfigurationError, FoldError
from src.features.models import FeatureKind, FusedFeature
from src.features.pipeline import ExtractionConfig, FeatureExtractor, extract_manifest
from src.metrics import inc_fold_completed
from src.model.checkpoint import save_checkpoint
from src.model.network import NetworkModel, NetworkSpec, extract_embedding, predict_utterance
from src.model.svm import save_svm, svm_predict, train_svm
from src.model.training import EpochRecord, TrainConfig, train

logger = logging.getLogger(__name__)

FRAMEWORKS = ("dnn", "dnn-svm")


@dataclass
class ExperimentConfig:
    """Everything a LOSO run needs besides the manifest"""
    extraction: ExtractionConfig = field(default_factory=ExtractionConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    kernel_sizes: Tuple[int, ...] = (5, 3, 3, 1)
    n_filters: int = 128
    fc_units: int = 64
    input_norm: str = "instance"
    seg_len: int = 100
    overlap_fraction: float = 0.5
    svm_C: float = 1.0
    svm_gamma: float = 0.001
    svm_standardize: bool = False
    seed: int = 0
    workers: int = 1
    checkpoint_dir: Optional[Path] = None
    config_json: Optional[str] = None  # echo written next to every artifact


@dataclass
class FoldResult:
    index: int
    test_speaker: str
    val_speaker: str
    accuracy: float
    uar: float
    confusion: ConfusionMatrix
    history: List[EpochRecord] = field(default_factory=list)


@dataclass
class EvaluationReport:
    """Per-fold metrics and their unweighted means"""
    feature_kind: str
    framework: str
    folds: List[FoldResult]
    config_json: Optional[str] = None

    @property
    def aggregate_accuracy(self) -> float:
        return float(np.mean([f.accuracy for f in self.folds]))

    @property
    def aggregate_uar(self) -> float:
        return float(np.mean([f.uar for f in self.folds]))


def pooled_confusion(report: EvaluationReport) -> ConfusionMatrix:
    """Element-wise sum of all fold confusion matrices."""
    if not report.folds:
        raise ConfigurationError("Report has no folds")
    total = report.folds[0].confusion
    for f in report.folds[1:]:
        total = total + f.confusion
    return total


def _labeled(records, features: Dict[str, FusedFeature], manifest: DatasetManifest):
    return [(features[r.path].values, manifest.label_index(r.emotion)) for r in records]


def _segments(records, features, manifest, cfg: ExperimentConfig):
    out = []
    for r in records:
        y = manifest.label_index(r.emotion)
        out.extend((seg, y) for seg in segment_features(features[r.path], cfg.seg_len, cfg.overlap_fraction))
    return out


def run_fold(fold: LosoFold, manifest: DatasetManifest, features: Dict[str, FusedFeature], framework: str,
             cfg: ExperimentConfig) -> FoldResult:
    labels = manifest.label_set
    train_set = _segments(fold.train_records, features, manifest, cfg)
    val_set = _labeled(fold.val_records, features, manifest)
    test_set = _labeled(fold.test_records, features, manifest)

    spec = NetworkSpec(n_classes=len(labels), kernel_sizes=cfg.kernel_sizes, n_filters=cfg.n_filters,
                       fc_units=cfg.fc_units, dropout_p=cfg.train.dropout_p, input_norm=cfg.input_norm)
    model = NetworkModel.initialize(spec, seed=cfg.seed, label_set=labels)
    logger.info("[LOSO] fold %d test=%s val=%s: %d train segments, %d val, %d test utterances",
                fold.index, fold.test_speaker, fold.val_speaker, len(train_set), len(val_set), len(test_set))

    best, history = train(model, train_set, val_set, cfg.train)

    if framework == "dnn":
        preds = [int(np.argmax(predict_utterance(best, x))) for x, _ in test_set]
        svm_model = None
    else:
        train_emb = [extract_embedding(best, x) for x, _ in train_set]
        svm_model = train_svm(train_emb, [y for _, y in train_set], C=cfg.svm_C, gamma=cfg.svm_gamma,
                              standardize=cfg.svm_standardize)
        preds = [svm_predict(svm_model, extract_embedding(best, x))[0] for x, _ in test_set]

    if cfg.checkpoint_dir is not None:
        stem = Path(cfg.checkpoint_dir) / f"fold_{fold.index:02d}_{fold.test_speaker}"
        save_checkpoint(stem.with_suffix(".msfnet"), best, cfg.config_json)
        if svm_model is not None:
            save_svm(stem.with_suffix(".msfsvm"), svm_model)

    truth = [labels[y] for _, y in test_set]
    cm = confusion_matrix(truth, [labels[p] for p in preds], labels)
    return FoldResult(index=fold.index, test_speaker=fold.test_speaker, val_speaker=fold.val_speaker,
                      accuracy=accuracy(cm), uar=uar(cm), confusion=cm, history=history)


def run_experiment(manifest: DatasetManifest, feature_kind: Union[FeatureKind, str], framework: str,
                   cfg: Optional[ExperimentConfig] = None,
                   features: Optional[Dict[str, FusedFeature]] = None) -> EvaluationReport:
    """
    Leave-one-speaker-out evaluation.

    Features are extracted once per utterance unless supplied. A failing fold
    aborts the run with a FoldError naming the test speaker.
    """
    cfg = cfg or ExperimentConfig()
    kind = FeatureKind(feature_kind)
    if framework not in FRAMEWORKS:
        raise ConfigurationError(f"Unknown framework {framework!r}, expected one of {FRAMEWORKS}")

    folds = loso_folds(manifest)

    if features is None:
        extracted = extract_manifest(manifest, kind, FeatureExtractor(cfg.extraction), workers=cfg.workers)
        if not extracted.ok:
            path, error = next(iter(extracted.failures.items()))
            raise ConfigurationError(f"Feature extraction failed for {len(extracted.failures)} utterances, "
                                     f"first {path}: {error}")
        features = extracted.features
    missing = [r.path for r in manifest.records if r.path not in features]
    if missing:
        raise ConfigurationError(f"No features for {len(missing)} utterances, first {missing[0]}")

    results = []
    for fold in folds:
        try:
            result = run_fold(fold, manifest, features, framework, cfg)
        except Exception as e:
            raise FoldError(fold.test_speaker, e) from e
        results.append(result)
        inc_fold_completed(framework)
        logger.info("[LOSO] fold %d (%s): accuracy=%.4f uar=%.4f", fold.index, fold.test_speaker,
                    result.accuracy, result.uar)

    report = EvaluationReport(feature_kind=kind.value, framework=framework, folds=results,
                              config_json=cfg.config_json)
    logger.info("[LOSO] %s/%s aggregate accuracy=%.4f uar=%.4f", kind.value, framework,
                report.aggregate_accuracy, report.aggregate_uar)
    return report


def report_frame(report: EvaluationReport) -> pd.DataFrame:
    rows = [{"fold": f.index, "test_speaker": f.test_speaker, "accuracy": f.accuracy, "uar": f.uar}
            for f in report.folds]
    rows.append({"fold": "aggregate", "test_speaker": "", "accuracy": report.aggregate_accuracy,
                 "uar": report.aggregate_uar})
    return pd.DataFrame(rows, columns=["fold", "test_speaker", "accuracy", "uar"])


def write_report(report: EvaluationReport, out_dir: Union[str, Path]) -> Path:
    """report.csv, confusion_<fold>.csv, history_<fold>.csv and config.json under out_dir."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    report_frame(report).to_csv(out_dir / "report.csv", index=False)
    for f in report.folds:
        cm = pd.DataFrame(f.confusion.counts, index=f.confusion.labels, columns=f.confusion.labels)
        cm.index.name = "true\\pred"
        cm.to_csv(out_dir / f"confusion_{f.index:02d}.csv")
        if f.history:
            pd.DataFrame([vars(h) for h in f.history]).to_csv(out_dir / f"history_{f.index:02d}.csv", index=False)

    echo = json.loads(report.config_json) if report.config_json else {}
    echo.update({"feature_kind": report.feature_kind, "framework": report.framework})
    (out_dir / "config.json").write_text(json.dumps(echo, indent=2, sort_keys=True), encoding="utf-8")
    return out_dir / "report.csv"
