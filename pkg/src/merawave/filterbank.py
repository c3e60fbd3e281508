"""Filter-bank view of the cascade and a fixed-wavelet baseline DWT.

Every orthogonal 2x2 block is a two-channel paraunitary filter bank with
constant polyphase matrix: the first row gives the low-pass taps ``g`` and
the second the high-pass taps ``h``. This module converts between the two
views, evaluates frequency responses, and provides a naive
convolve-then-decimate reference path for checking the block transform.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import IndivisibleLength, NonOrthonormalFilters, OddLength, ShapeMismatch
from .transform import CoefficientPyramid, _as_stack, _as_window, orthogonal_pair

FILTER_TOL = 1e-10


@dataclass(frozen=True)
class FirFilterPair:
    """Analysis low-pass ``g`` and high-pass ``h`` taps of equal length."""

    g: np.ndarray
    h: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.g, dtype=float)
        h = np.asarray(self.h, dtype=float)
        if g.ndim != 1 or g.shape != h.shape or g.size < 2:
            raise ShapeMismatch("g and h must be 1-D tap sequences of equal length >= 2")
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "h", h)

    @property
    def taps(self) -> int:
        return self.g.size

    def is_orthonormal(self, tol: float = FILTER_TOL) -> bool:
        """Double-shift orthonormality of ``g`` and ``h`` (and mutual orthogonality)."""
        n = self.taps
        for shift in range(0, n, 2):
            want = 1.0 if shift == 0 else 0.0
            gg = self.g[: n - shift] @ self.g[shift:]
            hh = self.h[: n - shift] @ self.h[shift:]
            if abs(gg - want) > tol or abs(hh - want) > tol:
                return False
        for shift in range(-(n - 2), n - 1, 2):
            lo, hi = max(0, -shift), min(n, n - shift)
            if abs(self.g[lo:hi] @ self.h[lo + shift:hi + shift]) > tol:
                return False
        return True


class FrequencyResponse(NamedTuple):
    omega: np.ndarray
    magnitude: np.ndarray


def filters_from_matrix(u) -> FirFilterPair:
    u = orthogonal_pair(u)
    return FirFilterPair(u[0].copy(), u[1].copy())


def _dtft(taps: np.ndarray, omega: np.ndarray) -> np.ndarray:
    n = np.arange(taps.size)
    return np.exp(-1j * np.outer(omega, n)) @ taps


def frequency_response(f: FirFilterPair, grid_size: int = 512) -> tuple[FrequencyResponse, FrequencyResponse]:
    """Magnitude responses of ``g`` and ``h`` on a uniform grid over ``[0, pi]``."""
    if grid_size < 2:
        raise ValueError("grid_size must be >= 2")
    omega = np.linspace(0.0, np.pi, grid_size)
    return (
        FrequencyResponse(omega, np.abs(_dtft(f.g, omega))),
        FrequencyResponse(omega, np.abs(_dtft(f.h, omega))),
    )


def polyphase_analyze_oracle(x, u) -> tuple[np.ndarray, np.ndarray]:
    """Reference analysis: full linear convolution with the time-reversed
    two-tap filters, then keep every other output sample.

    Deliberately naive (explicit loops) so that it shares no code path with
    :func:`merawave.transform.layer_analyze`.
    """
    x = [float(v) for v in np.asarray(x, dtype=float).ravel()]
    if len(x) % 2 or len(x) < 2:
        raise OddLength(f"input must have even length >= 2, got {len(x)}")
    u = np.asarray(u, dtype=float)
    g = [float(u[0, 0]), float(u[0, 1])]
    h = [float(u[1, 0]), float(u[1, 1])]

    def filter_decimate(taps):
        # analysis filter g(-m): y[m] = sum_n taps[n] * x[m + n]
        rev = taps[::-1]
        conv = [0.0] * (len(x) + len(rev) - 1)
        for i, xv in enumerate(x):
            for j, tv in enumerate(rev):
                conv[i + j] += xv * tv
        # conv[m + len(rev) - 1] == y[m]; keep even m
        offset = len(rev) - 1
        return np.array([conv[m + offset] for m in range(0, len(x), 2)])

    return filter_decimate(g), filter_decimate(h)


def qmf_check(u, tol: float = 1e-10) -> bool:
    """True when ``u`` has the mirror form ``[[g0, g1], [g1, -g0]]``."""
    u = np.asarray(u, dtype=float)
    return bool(abs(u[1, 0] - u[0, 1]) <= tol and abs(u[1, 1] + u[0, 0]) <= tol)


def qmf_member(theta: float) -> np.ndarray:
    """Reflection ``[[cos t, sin t], [sin t, -cos t]]``; ``t = pi/4`` is Haar."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, s], [s, -c]])


def dc_gain_over_qmf_family(theta_grid_size: int = 4096) -> tuple[float, float]:
    """Grid-search the low-pass DC gain ``|g0 + g1|`` over the mirror family.

    Returns the maximizing angle restricted to ``[0, pi/2]`` and its gain.
    """
    if theta_grid_size < 8:
        raise ValueError("theta_grid_size must be >= 8")
    theta = 2.0 * np.pi * np.arange(theta_grid_size) / theta_grid_size
    gain = np.abs(np.cos(theta) + np.sin(theta))
    quarter = theta <= np.pi / 2
    i = int(np.argmax(np.where(quarter, gain, -np.inf)))
    return float(theta[i]), float(gain[i])


def daubechies4_filters() -> FirFilterPair:
    """Four-tap Daubechies pair (two vanishing moments)."""
    r3 = np.sqrt(3.0)
    g = np.array([1 + r3, 3 + r3, 3 - r3, 1 - r3]) / (4 * np.sqrt(2.0))
    h = np.array([(-1) ** n * g[3 - n] for n in range(4)])
    return FirFilterPair(g, h)


def haar_filters() -> FirFilterPair:
    g = np.array([1.0, 1.0]) / np.sqrt(2.0)
    return FirFilterPair(g, np.array([g[1], -g[0]]))


def _periodic_index(n: int, taps: int) -> np.ndarray:
    return (2 * np.arange(n // 2)[:, None] + np.arange(taps)[None, :]) % n


def dwt_level(x: np.ndarray, f: FirFilterPair) -> tuple[np.ndarray, np.ndarray]:
    """One periodic analysis step: ``a[k] = sum_n g[n] x[(2k+n) mod N]``."""
    n = x.size
    if n % 2 or n < 2:
        raise OddLength(f"level input must have even length >= 2, got {n}")
    blocks = x[_periodic_index(n, f.taps)]
    return blocks @ f.g, blocks @ f.h


def idwt_level(a: np.ndarray, d: np.ndarray, f: FirFilterPair) -> np.ndarray:
    """Adjoint of :func:`dwt_level`; its inverse for orthonormal filters."""
    n = 2 * a.size
    idx = _periodic_index(n, f.taps)
    out = np.zeros(n)
    np.add.at(out, idx.ravel(), (np.outer(a, f.g) + np.outer(d, f.h)).ravel())
    return out


def _check_orthonormal(f: FirFilterPair):
    if f.taps % 2:
        raise NonOrthonormalFilters("tap count must be even")
    if not f.is_orthonormal():
        raise NonOrthonormalFilters("filter pair is not orthonormal; reconstruction contract void")


def baseline_dwt(x, f: FirFilterPair, levels: int) -> CoefficientPyramid:
    """Cascaded two-channel DWT with circular boundary extension."""
    x = _as_window(x)
    _check_orthonormal(f)
    if levels < 1 or x.size == 0 or x.size % (1 << levels):
        raise IndivisibleLength(x.size, levels)
    approx = x
    details = []
    for _ in range(levels):
        approx, d = dwt_level(approx, f)
        details.append(d)
    return CoefficientPyramid(approx, details)


def baseline_idwt(p: CoefficientPyramid, f: FirFilterPair) -> np.ndarray:
    _check_orthonormal(f)
    approx = np.asarray(p.approx, dtype=float)
    for d in p.details[::-1]:
        if d.size != approx.size:
            raise ShapeMismatch("pyramid detail/approximation sizes are inconsistent")
        approx = idwt_level(approx, np.asarray(d, dtype=float), f)
    return approx


def export_filters(stack) -> list[dict]:
    """Per-level JSON-ready description of a filter stack."""
    s = _as_stack(stack)
    out = []
    for lev, u in enumerate(s, start=1):
        out.append({
            "level": lev,
            "g": [float(v) for v in u[0]],
            "h": [float(v) for v in u[1]],
            "det": float(np.linalg.det(u)),
            "qmf": qmf_check(u),
        })
    return out
