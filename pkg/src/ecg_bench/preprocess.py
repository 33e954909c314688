"""Signal conditioning pipeline: denoise, PCA across leads, resample, z-score.

Per record: each of the 12 leads is wavelet-denoised, the lead dimension is
reduced with PCA, the result is resampled to a fixed number of time steps,
and finally z-scored per channel. PCA and the normalization statistics are
fitted only on a designated fit subset (normally the training split) and then
applied to every record, so no information leaks from validation or test
data into the features.
"""
from dataclasses import dataclass, field

import numpy as np

from .data_model import DataError, DatasetManifest, FeatureTensor, load_record
from .pca import PcaModel, fit_pca, pca_from_covariance, pca_project
from .util import canonical_json, fnv1a64_hex
from .wavelets import WaveletSpec, wavelet_denoise

EPS_STD = 1e-8


@dataclass
class NormStats:
    """Per-channel mean and std (std floored at EPS_STD)."""
    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=np.float64)
        self.std = np.maximum(np.asarray(self.std, dtype=np.float64), EPS_STD)


@dataclass(frozen=True)
class PreprocessConfig:
    wavelet: WaveletSpec = field(default_factory=WaveletSpec)
    threshold_mode: str = "soft"
    pca_k: int = 3
    target_length_T: int = 512
    normalization: str = "zscore"

    def __post_init__(self):
        if self.threshold_mode != "soft":
            raise ValueError(f"unsupported threshold mode {self.threshold_mode!r}")
        if self.normalization != "zscore":
            raise ValueError(f"unsupported normalization {self.normalization!r}")
        if not 1 <= self.pca_k <= 12:
            raise ValueError("pca_k must be in 1..12")
        if self.target_length_T < 8:
            raise ValueError("target_length_T must be >= 8")

    def as_dict(self):
        return {
            "wavelet": {"family": self.wavelet.family, "levels": self.wavelet.levels},
            "threshold_mode": self.threshold_mode,
            "pca_k": self.pca_k,
            "target_length_T": self.target_length_T,
            "normalization": self.normalization,
        }

    def content_hash(self) -> str:
        return fnv1a64_hex(canonical_json(self.as_dict()).encode())

    @classmethod
    def from_dict(cls, d: dict) -> "PreprocessConfig":
        wav = d.get("wavelet", {})
        return cls(
            wavelet=WaveletSpec(wav.get("family", "db4"), wav.get("levels", 4)),
            threshold_mode=d.get("threshold_mode", "soft"),
            pca_k=d.get("pca_k", 3),
            target_length_T=d.get("target_length_T", 512),
            normalization=d.get("normalization", "zscore"),
        )


def fit_norm_stats(train_samples) -> NormStats:
    """Per-channel stats over training-split samples only (x: (S, T, C))."""
    x = np.asarray(train_samples, dtype=np.float64)
    if x.size == 0:
        raise ValueError("cannot fit normalization on an empty training subset")
    flat = x.reshape(-1, x.shape[-1])
    return NormStats(flat.mean(axis=0), flat.std(axis=0))


def apply_norm(stats: NormStats, data) -> np.ndarray:
    """Z-score per channel; channels floored at EPS_STD map to ~0."""
    x = np.asarray(data, dtype=np.float64)
    return (x - stats.mean) / stats.std


def resample_to_length(signal, target_len: int) -> np.ndarray:
    """Linear interpolation of (N, C) rows onto a uniform grid of T points
    spanning [0, N-1]; endpoints are preserved exactly."""
    x = np.asarray(signal, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    n = x.shape[0]
    if n < 2:
        raise ValueError("need at least 2 samples to resample")
    if target_len < 2:
        raise ValueError("target length must be >= 2")
    if target_len == n:
        return x.copy()
    grid = np.linspace(0.0, n - 1.0, target_len)
    lo = np.floor(grid).astype(np.int64)
    lo = np.minimum(lo, n - 2)
    frac = (grid - lo)[:, None]
    return x[lo] * (1.0 - frac) + x[lo + 1] * frac


def denoise_record_leads(samples: np.ndarray, config: PreprocessConfig) -> np.ndarray:
    """Wavelet-denoise each lead column of an (N, 12) record."""
    out = np.empty_like(samples)
    for lead in range(samples.shape[1]):
        out[:, lead] = wavelet_denoise(samples[:, lead], config.wavelet)
    return out


def preprocess_dataset(manifest: DatasetManifest, config: PreprocessConfig,
                       fit_indices=None) -> FeatureTensor:
    """Run the full conditioning chain over a manifest.

    ``fit_indices`` selects the records (manifest positions) whose samples fit
    the PCA model and normalization statistics; ``None`` fits on all records.
    Two passes keep memory flat: the first accumulates lead-space covariance
    over the fit records, the second projects and resamples every record.
    The reduction is strictly sequential in manifest order so the output is
    bit-reproducible.
    """
    paths = manifest.record_paths()
    if not paths:
        raise DataError("manifest has no entries")
    if fit_indices is None:
        fit_indices = range(len(paths))
    fit_set = sorted(set(int(i) for i in fit_indices))
    if not fit_set:
        raise DataError("empty fit subset")
    if fit_set[0] < 0 or fit_set[-1] >= len(paths):
        raise DataError("fit index out of manifest range")

    # pass 1: streaming covariance of denoised lead samples over fit records
    n_rows = 0
    total = None
    total_sq = None
    for i in fit_set:
        denoised = _load_denoised(paths[i], config)
        if total is None:
            total = denoised.sum(axis=0)
            total_sq = denoised.T @ denoised
        else:
            total += denoised.sum(axis=0)
            total_sq += denoised.T @ denoised
        n_rows += denoised.shape[0]
    if n_rows < 2:
        raise DataError("fit subset holds fewer than 2 sample rows")
    mean = total / n_rows
    cov = (total_sq - n_rows * np.outer(mean, mean)) / (n_rows - 1)
    model = pca_from_covariance(mean, cov)

    # pass 2: project, resample
    feats = np.empty((len(paths), config.target_length_T, config.pca_k))
    for i, path in enumerate(paths):
        denoised = _load_denoised(path, config)
        projected = pca_project(model, denoised, config.pca_k)
        feats[i] = resample_to_length(projected, config.target_length_T)

    stats = fit_norm_stats(feats[fit_set])
    feats = apply_norm(stats, feats)
    if not np.all(np.isfinite(feats)):
        raise DataError("preprocessing produced non-finite features")
    return FeatureTensor(feats, manifest.labels(), config_hash=config.content_hash())


def _load_denoised(path: str, config: PreprocessConfig) -> np.ndarray:
    try:
        record = load_record(path)
        return denoise_record_leads(record.samples, config)
    except (DataError, ValueError) as exc:
        raise DataError(f"record {path}: {exc}") from None
