"""Orthonormal discrete wavelet transform with soft-threshold denoising.

Boundary handling is half-sample symmetric extension (``... x1 x0 | x0 x1 ...``)
by ``L - 1`` samples per side, so each analysis level keeps
``floor((n + L - 1) / 2)`` coefficients and the inverse reconstructs the
original signal exactly (up to rounding) for any length, even or odd.
"""
from dataclasses import dataclass

import numpy as np

SQRT2 = np.sqrt(2.0)

# Scaling (reconstruction lowpass) coefficients per family.
_REC_LO = {
    "haar": np.array([1.0, 1.0]) / SQRT2,
    # 8-tap Daubechies filter with 4 vanishing moments
    "db4": np.array([
        0.23037781330885523,
        0.7148465705525415,
        0.6308807679295904,
        -0.02798376941698385,
        -0.18703481171888114,
        0.030841381835986965,
        0.032883011666982945,
        -0.010597401784997278,
    ]),
}

FAMILIES = ("haar", "db4")
_ALIASES = {"haar": "haar", "daubechies4": "db4", "db4": "db4"}


def _bank(family: str):
    """(dec_lo, dec_hi, rec_lo, rec_hi) quadrature-mirror filter bank."""
    rec_lo = _REC_LO[family]
    dec_lo = rec_lo[::-1].copy()
    signs = np.where(np.arange(len(rec_lo)) % 2 == 0, 1.0, -1.0)
    rec_hi = signs * dec_lo
    dec_hi = rec_hi[::-1].copy()
    return dec_lo, dec_hi, rec_lo, rec_hi


def canonical_family(name: str) -> str:
    key = name.strip().lower()
    if key not in _ALIASES:
        raise ValueError(f"unknown wavelet family {name!r} (use Haar or Daubechies4)")
    return _ALIASES[key]


@dataclass(frozen=True)
class WaveletSpec:
    family: str = "db4"
    levels: int = 4

    def __post_init__(self):
        object.__setattr__(self, "family", canonical_family(self.family))
        if self.levels < 1:
            raise ValueError("levels must be >= 1")


@dataclass
class CoefficientPyramid:
    """Multi-level DWT output: coarsest approximation plus detail bands.

    ``details`` is ordered coarsest first, finest last.
    """
    approx: np.ndarray
    details: list
    original_length: int
    spec: WaveletSpec


def _level_lengths(n: int, filt_len: int, levels: int) -> list:
    lengths = [n]
    for _ in range(levels):
        lengths.append((lengths[-1] + filt_len - 1) // 2)
    return lengths


def _check_depth(n: int, spec: WaveletSpec, filt_len: int) -> None:
    padded = n + (n % 2)
    if padded < 2 ** spec.levels:
        raise ValueError(
            f"{spec.levels} levels too deep for signal of length {n}")
    length = n
    for level in range(spec.levels):
        if length < max(2, filt_len - 1):
            raise ValueError(
                f"level {level + 1} too deep: band of {length} samples is "
                f"shorter than the {spec.family} support")
        length = (length + filt_len - 1) // 2


def _sym_ext(x: np.ndarray, n: int) -> np.ndarray:
    if n == 0:
        return x
    return np.concatenate([x[:n][::-1], x, x[-n:][::-1]])


def _analyze(v: np.ndarray, dec_lo: np.ndarray, dec_hi: np.ndarray):
    ext = _sym_ext(v, len(dec_lo) - 1)
    ca = np.convolve(ext, dec_lo, mode="valid")[1::2]
    cd = np.convolve(ext, dec_hi, mode="valid")[1::2]
    return ca, cd


def _synthesize(ca, cd, rec_lo, rec_hi, out_len: int) -> np.ndarray:
    filt_len = len(rec_lo)
    up_a = np.zeros(2 * len(ca))
    up_d = np.zeros(2 * len(cd))
    up_a[::2] = ca
    up_d[::2] = cd
    full = np.convolve(up_a, rec_lo) + np.convolve(up_d, rec_hi)
    start = filt_len - 2
    return full[start:start + out_len]


def dwt_forward(signal, spec: WaveletSpec) -> CoefficientPyramid:
    """Decompose a 1-d signal into a coefficient pyramid."""
    x = np.asarray(signal, dtype=np.float64)
    if x.ndim != 1 or x.size < 2:
        raise ValueError("signal must be a 1-d vector of length >= 2")
    if not np.all(np.isfinite(x)):
        raise ValueError("signal contains non-finite values")
    dec_lo, dec_hi, _, _ = _bank(spec.family)
    _check_depth(x.size, spec, len(dec_lo))
    details = []
    band = x
    for _ in range(spec.levels):
        band, cd = _analyze(band, dec_lo, dec_hi)
        details.append(cd)
    details.reverse()  # coarsest first, finest last
    return CoefficientPyramid(band, details, x.size, spec)


def dwt_inverse(pyramid: CoefficientPyramid) -> np.ndarray:
    """Reconstruct the signal; exact inverse of :func:`dwt_forward`."""
    spec = pyramid.spec
    _, _, rec_lo, rec_hi = _bank(spec.family)
    filt_len = len(rec_lo)
    lengths = _level_lengths(pyramid.original_length, filt_len, spec.levels)
    if len(pyramid.details) != spec.levels:
        raise ValueError(
            f"pyramid has {len(pyramid.details)} detail bands for "
            f"{spec.levels} levels")
    expected = lengths[::-1]  # coarsest first
    if len(pyramid.approx) != expected[0]:
        raise ValueError(
            f"approx band length {len(pyramid.approx)} != expected {expected[0]}")
    band = np.asarray(pyramid.approx, dtype=np.float64)
    for i, cd in enumerate(pyramid.details):
        if len(cd) != expected[i]:
            raise ValueError(
                f"detail band {i} length {len(cd)} != expected {expected[i]}")
        band = _synthesize(band, cd, rec_lo, rec_hi, expected[i + 1])
    return band


def universal_threshold(pyramid: CoefficientPyramid) -> float:
    """VisuShrink lambda: sigma * sqrt(2 ln N), sigma = MAD of finest details."""
    finest = pyramid.details[-1]
    sigma = np.median(np.abs(finest)) / 0.6745
    return float(sigma * np.sqrt(2.0 * np.log(pyramid.original_length)))


def soft_threshold(values: np.ndarray, lam: float) -> np.ndarray:
    return np.sign(values) * np.maximum(np.abs(values) - lam, 0.0)


def wavelet_denoise(signal, spec: WaveletSpec) -> np.ndarray:
    """Shrink detail coefficients by the universal soft threshold.

    The approximation band is left untouched; output length equals input
    length.
    """
    pyramid = dwt_forward(signal, spec)
    lam = universal_threshold(pyramid)
    pyramid.details = [soft_threshold(cd, lam) for cd in pyramid.details]
    return dwt_inverse(pyramid)
