"""Long-range dependence: wavelet spectra, Hurst estimation and fGn synthesis."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import linalg

from .errors import LengthMismatch, NonPositiveDefinite, TooFlat, TooShort
from .filterbank import FirFilterPair, daubechies4_filters, dwt_level
from .transform import _as_window

MIN_COEFFS = 8
ENERGY_FLOOR = 1e-300
EXACT_MAX_N = 4096


@dataclass(frozen=True)
class WaveletSpectrum:
    scales: np.ndarray  # j = 1..J
    s: np.ndarray  # log2 mean squared detail at scale j
    counts: np.ndarray  # n_j


@dataclass(frozen=True)
class HurstEstimate:
    h: float
    ci_low: float
    ci_high: float
    j1: int
    j2: int
    per_scale: list[tuple[int, float, float]]  # (j, y_j, weight)

    @property
    def beta(self) -> float:
        """Autocorrelation decay exponent ``2 - 2H``."""
        return 2.0 - 2.0 * self.h


def _detail_energies(x: np.ndarray, J: int, f: FirFilterPair) -> tuple[np.ndarray, np.ndarray]:
    energies, counts = [], []
    approx = x
    for _ in range(J):
        # odd lengths drop their last sample so that n_j = floor(N / 2**j)
        approx = approx[: approx.size - approx.size % 2]
        approx, d = dwt_level(approx, f)
        energies.append(float(np.mean(d * d)))
        counts.append(d.size)
    return np.array(energies), np.array(counts)


def max_scale(n: int) -> int:
    """Largest ``j`` with at least eight detail coefficients."""
    j = 0
    while n >> (j + 1) >= MIN_COEFFS:
        j += 1
    return j


def wavelet_spectrum(x, J: int, f: FirFilterPair | None = None) -> WaveletSpectrum:
    """``S_j = log2 mean(d_j^2)`` for ``j = 1..J`` using the periodic DWT."""
    x = _as_window(x)
    f = f or daubechies4_filters()
    if J < 1 or x.size < (1 << J) * MIN_COEFFS:
        raise TooShort(f"need at least {MIN_COEFFS * (1 << max(J, 1))} samples for J={J}, got {x.size}")
    energies, counts = _detail_energies(x, J, f)
    if np.any(energies <= ENERGY_FLOOR):
        raise TooFlat("detail energy vanishes at some scale; spectrum undefined")
    return WaveletSpectrum(np.arange(1, J + 1), np.log2(energies), counts)


def hurst_av(x, j1: int = 3, j2: int | None = None, f: FirFilterPair | None = None) -> HurstEstimate:
    """Abry-Veitch estimate of the Hurst exponent.

    Weighted least squares of ``y_j`` on ``j`` over ``[j1, j2]`` with
    ``var(y_j) ~ 2 / (n_j ln(2)^2)``; slope ``a`` gives ``H = (a + 1) / 2``
    and a Gaussian 95% interval.
    """
    x = _as_window(x)
    jmax = max_scale(x.size)
    j2 = jmax if j2 is None else j2
    if j2 > jmax:
        raise TooShort(f"scale {j2} has fewer than {MIN_COEFFS} coefficients (max usable {jmax})")
    if not 1 <= j1 < j2:
        raise TooShort(f"need 1 <= j1 < j2, got j1={j1}, j2={j2}")
    spec = wavelet_spectrum(x, j2, f)
    sel = slice(j1 - 1, j2)
    j = spec.scales[sel].astype(float)
    y = spec.s[sel]
    w = spec.counts[sel] * np.log(2.0) ** 2 / 2.0
    s0, s1, s2 = w.sum(), (w * j).sum(), (w * j * j).sum()
    det = s0 * s2 - s1 * s1
    slope = (s0 * (w * j * y).sum() - s1 * (w * y).sum()) / det
    se = np.sqrt(s0 / det)
    h = (slope + 1.0) / 2.0
    half = 1.96 * se / 2.0
    per_scale = [(int(a), float(b), float(c)) for a, b, c in zip(spec.scales[sel], y, w)]
    return HurstEstimate(float(h), float(h - half), float(h + half), j1, j2, per_scale)


def delta_h(original, reconstructed, j1: int = 3, j2: int | None = None,
            f: FirFilterPair | None = None) -> float:
    """``H(reconstructed) - H(original)`` with identical estimator settings."""
    original = np.asarray(original, dtype=float)
    reconstructed = np.asarray(reconstructed, dtype=float)
    if original.shape != reconstructed.shape:
        raise LengthMismatch("original and reconstruction differ in length")
    if j2 is None:
        j2 = max_scale(original.size)
    return hurst_av(reconstructed, j1, j2, f).h - hurst_av(original, j1, j2, f).h


# -- fractional Gaussian noise -------------------------------------------------

def fgn_autocovariance(k, h: float) -> np.ndarray:
    k = np.abs(np.asarray(k, dtype=float))
    e = 2.0 * h
    return 0.5 * (np.abs(k + 1) ** e - 2 * k ** e + np.abs(k - 1) ** e)


@lru_cache(maxsize=8)
def _cholesky_factor(n: int, h: float) -> np.ndarray:
    cov = linalg.toeplitz(fgn_autocovariance(np.arange(n), h))
    try:
        return linalg.cholesky(cov, lower=True)
    except linalg.LinAlgError:
        raise NonPositiveDefinite(f"fGn covariance not positive definite (n={n}, H={h})") from None


def _circulant_eigenvalues(n: int, h: float, m: int) -> np.ndarray:
    """Eigenvalues of the size-``m`` circulant embedding (``m >= 2n``)."""
    half = m // 2
    row = fgn_autocovariance(np.arange(half + 1), h)
    row = np.concatenate([row, row[half - 1:0:-1]])
    return np.fft.fft(row).real


def fgn_generate(n: int, h: float, seed=None, method: str = "auto") -> np.ndarray:
    """Unit-variance fractional Gaussian noise of length ``n``.

    ``method`` is ``"circulant"`` (Davies-Harte embedding, FFT size a power
    of two), ``"exact"`` (Cholesky of the Toeplitz covariance, ``n <= 4096``)
    or ``"auto"`` (circulant when ``n`` is a power of two, else exact).
    """
    if not 0.0 < h < 1.0:
        raise ValueError(f"Hurst exponent must lie in (0, 1), got {h}")
    if n < 1:
        raise ValueError("n must be positive")
    rng = np.random.default_rng(seed)
    pow2 = n & (n - 1) == 0
    if method == "auto":
        method = "circulant" if pow2 else "exact"
    if method == "exact":
        if n > EXACT_MAX_N:
            raise ValueError(f"exact method limited to n <= {EXACT_MAX_N}")
        return _cholesky_factor(n, float(h)) @ rng.standard_normal(n)
    if method != "circulant":
        raise ValueError(f"unknown method {method!r}")
    if not pow2:
        raise ValueError("circulant method needs n to be a power of two")

    m = 2 * n
    for _ in range(4):
        lam = _circulant_eigenvalues(n, h, m)
        if lam.min() >= -1e-10 * lam.max():
            break
        m *= 2
    else:
        raise NonPositiveDefinite(f"circulant embedding failed after 3 doublings (n={n}, H={h})")
    lam = np.clip(lam, 0.0, None)
    z = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    y = np.fft.fft(np.sqrt(lam / m) * z)
    return y.real[:n].copy()
