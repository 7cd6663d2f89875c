"""
Pydantic run configuration models

Defaults are the published CQT-MSF settings: 16 kHz audio, CQT from 32.7 Hz
with 3 bins per octave and hop 64, 8 modulation channels from 0.5 Hz, a
24-filter MFSC front-end on a 320/64/512 STFT, SGD at lr 0.001 with batch 64
and dropout 0.3 for 50 epochs, and an RBF SVM with C = 1, gamma = 0.001.
"""

from enum import Enum
from pathlib import Path
from typing import List, Optional

from pydantic import BaseModel, Field, field_validator

from src import get_env_int_optional
from src.evaluation.experiment import ExperimentConfig
from src.features.pipeline import ExtractionConfig
from src.model.training import TrainConfig


class FeatureKindEnum(str, Enum):
    """Feature pipeline"""
    cqt = "cqt"
    mfsc = "mfsc"
    gmt = "gmt"
    cqt_msf = "cqt-msf"
    mfsc_msf = "mfsc-msf"
    gmt_msf = "gmt-msf"
    msf_only_cqt = "msf-only-cqt"
    msf_only_mfsc = "msf-only-mfsc"


class FrameworkEnum(str, Enum):
    """Classifier back-end"""
    dnn = "dnn"
    dnn_svm = "dnn-svm"


class CqtMethodEnum(str, Enum):
    direct = "direct"
    fft = "fft"
    decimated = "decimated"


class InputNormEnum(str, Enum):
    none = "none"
    instance = "instance"


class OptimizerEnum(str, Enum):
    sgd = "sgd"
    momentum = "momentum"
    adam = "adam"


class CqtParams(BaseModel):
    """Constant-Q front-end"""
    f_min: float = Field(32.7, gt=0, description="Lowest bin centre (Hz)")
    f_max: Optional[float] = Field(None, gt=0, description="Highest allowed centre (Hz); Nyquist if unset")
    bins_per_octave: int = Field(3, ge=1, description="Bins per octave B")
    q: float = Field(1.0, gt=0, description="Filter scaling factor")
    hop: int = Field(64, ge=1, description="Hop in samples")
    method: CqtMethodEnum = Field(CqtMethodEnum.direct, description="Evaluation strategy")


class ModulationParams(BaseModel):
    """Modulation filterbank over envelope trajectories"""
    f0: float = Field(0.5, gt=0, description="Lowest modulation centre (Hz)")
    channels: int = Field(8, ge=1, description="Octave-spaced channels")
    q_mod: float = Field(1.0, gt=0, description="Modulation filter scaling factor")
    envelope_mean_removal: bool = Field(True, description="Subtract each envelope mean before filtering")


class SpectralParams(BaseModel):
    """STFT front-ends (MFSC / gammatone)"""
    n_filters: int = Field(24, ge=1)
    frame_len: int = Field(320, ge=1)
    hop: int = Field(64, ge=1)
    n_fft: int = Field(512, ge=2)


class NetworkParams(BaseModel):
    n_filters: int = Field(128, ge=1, description="Filters per conv layer")
    kernel_sizes: List[int] = Field(default_factory=lambda: [5, 3, 3, 1])
    fc_units: int = Field(64, ge=1)
    input_norm: InputNormEnum = Field(InputNormEnum.instance, description="Per-input standardisation")

    @field_validator("kernel_sizes")
    @classmethod
    def _kernels_positive(cls, v: List[int]) -> List[int]:
        if not v or any(k < 1 for k in v):
            raise ValueError("kernel_sizes must be a non-empty list of positive integers")
        return v


class TrainParams(BaseModel):
    learning_rate: float = Field(0.001, ge=0)
    batch_size: int = Field(64, ge=1)
    dropout_p: float = Field(0.3, ge=0, lt=1)
    epochs: int = Field(50, ge=1)
    seg_len: int = Field(100, ge=1, description="Training segment length (frames)")
    overlap_fraction: float = Field(0.5, ge=0, lt=1)
    optimizer: OptimizerEnum = Field(OptimizerEnum.sgd, description="Parameter update rule")
    momentum: float = Field(0.9, ge=0, lt=1, description="Momentum coefficient (optimizer=momentum)")


class SvmParams(BaseModel):
    C: float = Field(1.0, gt=0)
    gamma: float = Field(0.001, gt=0)
    standardize: bool = Field(False, description="Standardise embeddings before the SVM")


class RunConfig(BaseModel):
    """Complete, echo-able run configuration"""
    feature: FeatureKindEnum = Field(FeatureKindEnum.cqt_msf)
    framework: FrameworkEnum = Field(FrameworkEnum.dnn)
    rate: float = Field(16000.0, gt=0, description="Working sampling rate (Hz)")
    cqt: CqtParams = Field(default_factory=CqtParams)
    modulation: ModulationParams = Field(default_factory=ModulationParams)
    spectral: SpectralParams = Field(default_factory=SpectralParams)
    network: NetworkParams = Field(default_factory=NetworkParams)
    train: TrainParams = Field(default_factory=TrainParams)
    svm: SvmParams = Field(default_factory=SvmParams)
    seed: int = Field(default_factory=lambda: get_env_int_optional("CQTMSF_SEED", 0))

    class Config:
        json_schema_extra = {
            "example": {
                "feature": "cqt-msf",
                "framework": "dnn-svm",
                "cqt": {"f_min": 32.7, "bins_per_octave": 3, "hop": 64},
                "train": {"epochs": 50},
                "seed": 0,
            }
        }

    def to_extraction_config(self) -> ExtractionConfig:
        return ExtractionConfig(
            rate=self.rate,
            f_min=self.cqt.f_min,
            f_max=self.cqt.f_max,
            bins_per_octave=self.cqt.bins_per_octave,
            q=self.cqt.q,
            hop=self.cqt.hop,
            cqt_method=self.cqt.method.value,
            n_filters=self.spectral.n_filters,
            frame_len=self.spectral.frame_len,
            stft_hop=self.spectral.hop,
            n_fft=self.spectral.n_fft,
            mod_f0=self.modulation.f0,
            mod_channels=self.modulation.channels,
            q_mod=self.modulation.q_mod,
            envelope_mean_removal=self.modulation.envelope_mean_removal,
        )

    def to_train_config(self) -> TrainConfig:
        t = self.train
        return TrainConfig(learning_rate=t.learning_rate, batch_size=t.batch_size, dropout_p=t.dropout_p,
                           epochs=t.epochs, seed=self.seed, optimizer=t.optimizer.value, momentum=t.momentum)

    def to_experiment_config(self, workers: int = 1, checkpoint_dir: Optional[Path] = None) -> ExperimentConfig:
        return ExperimentConfig(
            extraction=self.to_extraction_config(),
            train=self.to_train_config(),
            kernel_sizes=tuple(self.network.kernel_sizes),
            n_filters=self.network.n_filters,
            fc_units=self.network.fc_units,
            input_norm=self.network.input_norm.value,
            seg_len=self.train.seg_len,
            overlap_fraction=self.train.overlap_fraction,
            svm_C=self.svm.C,
            svm_gamma=self.svm.gamma,
            svm_standardize=self.svm.standardize,
            seed=self.seed,
            workers=workers,
            checkpoint_dir=checkpoint_dir,
            config_json=self.model_dump_json(),
        )
