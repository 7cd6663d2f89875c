"""
CQT-MSF command line

Batch entry points over the feature pipeline, the LOSO evaluator and the
analysis tools.

Flow:
    manifest.csv -> extract -> <out>/<path>.cqtmsf + index.csv
                 -> evaluate -> report.csv, confusion_XX.csv, checkpoints/
                 -> analyze  -> AF x MF / ESD CSV grids
    checkpoint + feature file -> gradcam -> saliency CSV

Exit codes: 0 success, 1 per-utterance or fold failure, 2 bad configuration
or input.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import ValidationError

from src.analysis import (
    energy_spectral_density,
    f_ratio,
    f_ratio_against_reference,
    filterbank_response,
    grad_cam,
    scale_center_frequencies,
    time_average_msf,
    write_curve_csv,
    write_grid_csv,
)
from src.audio import generate_am_corpus, load_manifest, read_wav
from src.errors import ConfigurationError, CqtMsfError, ManifestError
from src.evaluation import run_experiment, write_report
from src.features import extract_manifest, read_feature_file, write_feature_file
from src.features.modulation import design_modulation_filterbank
from src.model import load_checkpoint

from .dependencies import (
    configure_logging,
    default_log_level,
    default_workers,
    flush_observability,
    get_extractor,
    start_observability,
)
from .schemas import RunConfig

logger = logging.getLogger(__name__)

FEATURE_SUFFIX = ".cqtmsf"
ANALYZE_MODES = ("msf-mean", "f-ratio", "f-ratio-ref", "esd")

# (flag dest, path inside RunConfig)
_OVERRIDES = [
    ("feature", ("feature",)),
    ("framework", ("framework",)),
    ("rate", ("rate",)),
    ("f_min", ("cqt", "f_min")),
    ("f_max", ("cqt", "f_max")),
    ("bins_per_octave", ("cqt", "bins_per_octave")),
    ("q", ("cqt", "q")),
    ("hop", ("cqt", "hop")),
    ("cqt_method", ("cqt", "method")),
    ("mod_f0", ("modulation", "f0")),
    ("mod_channels", ("modulation", "channels")),
    ("q_mod", ("modulation", "q_mod")),
    ("envelope_mean_removal", ("modulation", "envelope_mean_removal")),
    ("n_mel", ("spectral", "n_filters")),
    ("frame_len", ("spectral", "frame_len")),
    ("stft_hop", ("spectral", "hop")),
    ("n_fft", ("spectral", "n_fft")),
    ("filters", ("network", "n_filters")),
    ("kernel_sizes", ("network", "kernel_sizes")),
    ("fc_units", ("network", "fc_units")),
    ("input_norm", ("network", "input_norm")),
    ("lr", ("train", "learning_rate")),
    ("batch_size", ("train", "batch_size")),
    ("dropout", ("train", "dropout_p")),
    ("epochs", ("train", "epochs")),
    ("optimizer", ("train", "optimizer")),
    ("momentum", ("train", "momentum")),
    ("seg_len", ("train", "seg_len")),
    ("overlap", ("train", "overlap_fraction")),
    ("svm_c", ("svm", "C")),
    ("svm_gamma", ("svm", "gamma")),
    ("svm_standardize", ("svm", "standardize")),
    ("seed", ("seed",)),
]


def _add_config_flags(p: argparse.ArgumentParser):
    g = p.add_argument_group("run configuration (overrides --config)")
    g.add_argument("--config", type=Path, help="JSON run configuration")
    g.add_argument("--seed", type=int)
    g.add_argument("--feature", choices=["cqt", "mfsc", "gmt", "cqt-msf", "mfsc-msf", "gmt-msf",
                                         "msf-only-cqt", "msf-only-mfsc"])
    g.add_argument("--framework", choices=["dnn", "dnn-svm"])
    g.add_argument("--rate", type=float, help="Working sampling rate (Hz)")
    g.add_argument("--f-min", type=float)
    g.add_argument("--f-max", type=float)
    g.add_argument("--bins-per-octave", type=int)
    g.add_argument("--q", type=float)
    g.add_argument("--hop", type=int)
    g.add_argument("--cqt-method", choices=["direct", "fft", "decimated"])
    g.add_argument("--mod-f0", type=float)
    g.add_argument("--mod-channels", type=int)
    g.add_argument("--q-mod", type=float)
    g.add_argument("--envelope-mean-removal", action=argparse.BooleanOptionalAction, default=None)
    g.add_argument("--n-mel", type=int, help="Filters of the MFSC / gammatone front-ends")
    g.add_argument("--frame-len", type=int)
    g.add_argument("--stft-hop", type=int)
    g.add_argument("--n-fft", type=int)
    g.add_argument("--filters", type=int, help="Filters per conv layer")
    g.add_argument("--kernel-sizes", type=int, nargs="+")
    g.add_argument("--fc-units", type=int)
    g.add_argument("--input-norm", choices=["none", "instance"])
    g.add_argument("--lr", type=float)
    g.add_argument("--batch-size", type=int)
    g.add_argument("--dropout", type=float)
    g.add_argument("--epochs", type=int)
    g.add_argument("--optimizer", choices=["sgd", "momentum", "adam"])
    g.add_argument("--momentum", type=float)
    g.add_argument("--seg-len", type=int)
    g.add_argument("--overlap", type=float)
    g.add_argument("--svm-c", type=float)
    g.add_argument("--svm-gamma", type=float)
    g.add_argument("--svm-standardize", action="store_const", const=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cqtmsf", description="CQT modulation spectral features for speech emotion")
    parser.add_argument("--log-level", default=None, help="Logging level (CQTMSF_LOG_LEVEL)")
    parser.add_argument("--workers", type=int, default=None, help="Extraction threads (CQTMSF_WORKERS)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="Write one feature file per manifest utterance")
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--out-dir", type=Path, required=True)
    _add_config_flags(p)

    p = sub.add_parser("evaluate", help="Leave-one-speaker-out evaluation")
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--out-dir", type=Path, required=True)
    p.add_argument("--features-dir", type=Path, help="Read features written by `extract` instead of extracting")
    _add_config_flags(p)

    p = sub.add_parser("analyze", help="Time-averaged MSF maps, F-ratios and energy spectral density")
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--mode", choices=ANALYZE_MODES, required=True)
    p.add_argument("--out", type=Path, required=True, help="CSV file (directory for f-ratio-ref)")
    p.add_argument("--front", choices=["cqt", "mfsc", "gmt"], default="cqt")
    p.add_argument("--label", help="Restrict msf-mean / esd to one class")
    p.add_argument("--classes", nargs=2, metavar=("A", "B"), help="Class pair for f-ratio")
    p.add_argument("--reference", help="Reference class for f-ratio-ref")
    _add_config_flags(p)

    p = sub.add_parser("gradcam", help="Grad-CAM saliency of one feature file")
    p.add_argument("--checkpoint", type=Path, required=True)
    p.add_argument("--feature-file", type=Path, required=True)
    p.add_argument("--class", dest="target_class", required=True, help="Class index or label")
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("synth", help="Write a synthetic AM-tone corpus with manifest.csv")
    p.add_argument("--out-dir", type=Path, required=True)
    p.add_argument("--speakers", type=int, default=6)
    p.add_argument("--per-speaker", type=int, default=40)
    p.add_argument("--duration", type=float, default=2.0)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("filters", help="Filterbank responses and frequency-scale centres")
    p.add_argument("--out-dir", type=Path, required=True)
    p.add_argument("--n-points", type=int, default=1024)
    p.add_argument("--scale-bins", type=int, default=96)
    _add_config_flags(p)

    return parser


def build_config(args: argparse.Namespace) -> RunConfig:
    """--config file (or defaults) with command-line overrides applied."""
    path: Optional[Path] = getattr(args, "config", None)
    if path is not None:
        if not path.is_file():
            raise ConfigurationError(f"Config file not found: {path}")
        base = RunConfig.model_validate_json(path.read_text(encoding="utf-8"))
    else:
        base = RunConfig()

    data: Dict[str, Any] = base.model_dump(mode="json")
    for dest, keys in _OVERRIDES:
        value = getattr(args, dest, None)
        if value is None:
            continue
        node = data
        for k in keys[:-1]:
            node = node[k]
        node[keys[-1]] = value
    return RunConfig.model_validate(data)


def feature_file_path(out_dir: Path, record_path: str) -> Path:
    """Mirror of the manifest-relative audio path with the feature suffix."""
    rel = Path(record_path)
    if rel.is_absolute():
        rel = Path(rel.name)
    return out_dir / rel.with_suffix(FEATURE_SUFFIX)


def _workers(args) -> int:
    return max(1, args.workers) if args.workers else default_workers()


def cmd_extract(args, config: RunConfig) -> int:
    manifest = load_manifest(args.manifest)
    kind = config.feature.value
    result = extract_manifest(manifest, kind, get_extractor(config), workers=_workers(args))
    config_json = config.model_dump_json()

    rows = []
    for record in manifest.records:
        row = {"path": record.path, "speaker": record.speaker, "emotion": record.emotion,
               "feature_file": "", "rows": 0, "cols": 0, "status": "ok", "error": ""}
        feat = result.features.get(record.path)
        if feat is None:
            row.update(status="error", error=result.failures.get(record.path, "not extracted"))
        else:
            target = feature_file_path(args.out_dir, record.path)
            write_feature_file(target, feat, kind, config_json)
            row.update(feature_file=str(target.relative_to(args.out_dir)), rows=feat.n_rows, cols=feat.n_frames)
        rows.append(row)

    args.out_dir.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(rows).to_csv(args.out_dir / "index.csv", index=False)
    logger.info("[Extract] %d/%d utterances written to %s", len(result.features), len(manifest.records),
                args.out_dir)
    if not result.ok:
        logger.error("[Extract] %d utterances failed", len(result.failures))
        return 1
    return 0


def load_feature_dir(manifest, features_dir: Path, kind: str):
    features = {}
    for record in manifest.records:
        path = feature_file_path(features_dir, record.path)
        if not path.is_file():
            raise ConfigurationError(f"Missing feature file {path}; run `extract` first")
        ff = read_feature_file(path)
        if ff.kind is not None and ff.kind.value != kind:
            raise ConfigurationError(f"{path} holds {ff.kind.value} features, expected {kind}")
        features[record.path] = ff.feature
    return features


def cmd_evaluate(args, config: RunConfig) -> int:
    manifest = load_manifest(args.manifest)
    kind = config.feature.value
    features = load_feature_dir(manifest, args.features_dir, kind) if args.features_dir else None

    exp_cfg = config.to_experiment_config(workers=_workers(args), checkpoint_dir=args.out_dir / "checkpoints")
    report = run_experiment(manifest, kind, config.framework.value, exp_cfg, features=features)
    write_report(report, args.out_dir)
    print(f"{kind}/{config.framework.value}: accuracy={report.aggregate_accuracy:.4f} "
          f"uar={report.aggregate_uar:.4f} ({len(report.folds)} folds)")
    return 0


def _linear_maps(manifest, records, extractor, front: str):
    """Time-averaged linear MSF map per record."""
    maps = []
    for record in records:
        tf = extractor.auditory(read_wav(manifest.audio_path(record)).require_samples(), front)
        maps.append(time_average_msf(extractor.modulation(tf)))
    return maps


def _require_label(manifest, label: str) -> str:
    if label not in manifest.label_set:
        raise ConfigurationError(f"Unknown class {label!r}, expected one of {manifest.label_set}")
    return label


def cmd_analyze(args, config: RunConfig) -> int:
    manifest = load_manifest(args.manifest)
    extractor = get_extractor(config)
    records = manifest.records
    if args.label is not None:
        label = _require_label(manifest, args.label)
        records = [r for r in records if r.emotion == label]

    if args.mode == "msf-mean":
        maps = _linear_maps(manifest, records, extractor, args.front)
        if not maps:
            raise ConfigurationError("No utterances selected")
        mean = np.mean([m.values for m in maps], axis=0)
        write_grid_csv(args.out, mean, maps[0].af_freqs, maps[0].mf_freqs)

    elif args.mode == "f-ratio":
        if not args.classes:
            raise ConfigurationError("f-ratio needs --classes A B")
        a, b = (_require_label(manifest, c) for c in args.classes)
        ratio = f_ratio(_linear_maps(manifest, [r for r in manifest.records if r.emotion == a], extractor, args.front),
                        _linear_maps(manifest, [r for r in manifest.records if r.emotion == b], extractor, args.front))
        write_grid_csv(args.out, ratio.values, ratio.af_freqs, ratio.mf_freqs)

    elif args.mode == "f-ratio-ref":
        if not args.reference:
            raise ConfigurationError("f-ratio-ref needs --reference")
        ref = _require_label(manifest, args.reference)
        by_label = {label: _linear_maps(manifest, [r for r in manifest.records if r.emotion == label],
                                        extractor, args.front)
                    for label in manifest.label_set}
        for label, ratio in f_ratio_against_reference(by_label, ref).items():
            write_grid_csv(args.out / f"f_ratio_{label}_vs_{ref}.csv", ratio.values, ratio.af_freqs, ratio.mf_freqs)

    else:
        tfs = [extractor.auditory(read_wav(manifest.audio_path(r)).require_samples(), args.front) for r in records]
        if not tfs:
            raise ConfigurationError("No utterances selected")
        write_curve_csv(args.out, tfs[0].bin_freqs, energy_spectral_density(tfs), value_name="esd")

    logger.info("[Analyze] %s written to %s", args.mode, args.out)
    return 0


def _resolve_class(model, target: str) -> int:
    if target.lstrip("-").isdigit():
        return int(target)
    if target in model.label_set:
        return model.label_set.index(target)
    raise ConfigurationError(f"Unknown class {target!r}, checkpoint labels are {model.label_set}")


def cmd_gradcam(args, config: Optional[RunConfig] = None) -> int:
    model = load_checkpoint(args.checkpoint)
    feat = read_feature_file(args.feature_file).feature
    if model.input_rows and feat.n_rows != model.input_rows:
        raise ConfigurationError(f"{args.feature_file} has {feat.n_rows} rows, checkpoint expects {model.input_rows}")
    cam = grad_cam(model, feat, _resolve_class(model, args.target_class))
    write_grid_csv(args.out, cam.values, row_name="row")
    logger.info("[GradCAM] class %d map %s written to %s", cam.target_class, cam.values.shape, args.out)
    return 0


def cmd_synth(args, config: Optional[RunConfig] = None) -> int:
    manifest = generate_am_corpus(args.out_dir, n_speakers=args.speakers, per_speaker=args.per_speaker,
                                  duration_s=args.duration, seed=args.seed)
    print(f"{len(manifest.records)} utterances, manifest at {args.out_dir / 'manifest.csv'}")
    return 0


def cmd_filters(args, config: RunConfig) -> int:
    extraction = config.to_extraction_config()
    fb = design_modulation_filterbank(extraction.mod_f0, extraction.mod_channels, extraction.q_mod,
                                      env_rate=extraction.rate / extraction.hop)
    freqs, responses = filterbank_response(fb.kernels, fb.env_rate, n_points=args.n_points)
    write_grid_csv(args.out_dir / "modulation_response.csv", responses.T, freqs, fb.centers, row_name="freq_hz")

    atoms = get_extractor(config).atoms
    freqs, responses = filterbank_response([a.kernel for a in atoms.atoms], extraction.rate, n_points=args.n_points)
    write_grid_csv(args.out_dir / "cqt_response.csv", responses.T, freqs, atoms.freqs, row_name="freq_hz")

    centers = scale_center_frequencies(args.scale_bins, extraction.f_min, extraction.rate)
    frame = pd.DataFrame(centers)
    frame.index.name = "bin"
    frame.to_csv(args.out_dir / "scale_centers.csv", float_format="%.10g")
    logger.info("[Filters] responses written to %s", args.out_dir)
    return 0


COMMANDS = {
    "extract": cmd_extract,
    "evaluate": cmd_evaluate,
    "analyze": cmd_analyze,
    "gradcam": cmd_gradcam,
    "synth": cmd_synth,
    "filters": cmd_filters,
}

_NEEDS_CONFIG = {"extract", "evaluate", "analyze", "filters"}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    configure_logging(args.log_level or default_log_level())
    start_observability()
    try:
        config = build_config(args) if args.command in _NEEDS_CONFIG else None
        return COMMANDS[args.command](args, config)
    except (ConfigurationError, ManifestError, ValidationError) as e:
        logger.error("[CLI] %s: %s", args.command, e)
        print(f"error: {e}", file=sys.stderr)
        return 2
    except CqtMsfError as e:
        logger.error("[CLI] %s failed: %s", args.command, e)
        print(f"error: {e}", file=sys.stderr)
        return 1
    except Exception as e:
        logger.exception("[CLI] %s failed unexpectedly: %s", args.command, e)
        return 1
    finally:
        flush_observability()


def run(argv: Optional[List[str]] = None):
    sys.exit(main(argv))
