"""Top-k coefficient thresholding, PSNR, and rate-distortion sweeps."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Protocol, Sequence

import numpy as np

from .errors import AllZeroReference, ConfigError, LengthMismatch, ShapeMismatch
from .filterbank import FirFilterPair, baseline_dwt, baseline_idwt
from .transform import CoefficientPyramid, _as_stack, analyze, synthesize

DEFAULT_RHOS = (0.01, 0.02, 0.05, 0.1, 0.2, 0.4, 0.8)


def check_rho(rho: float) -> float:
    rho = float(rho)
    if not 0.0 < rho <= 1.0:
        raise ConfigError(f"retention ratio must lie in (0, 1], got {rho}")
    return rho


def kept_count(rho: float, n: int) -> int:
    """``ceil(rho * n)``, rounding away float noise such as ``0.07 * 100``."""
    return min(n, math.ceil(round(check_rho(rho) * n, 9)))


def threshold_compress(p: CoefficientPyramid, rho: float) -> CoefficientPyramid:
    """Keep the ``ceil(rho * N)`` largest-magnitude coefficients, zero the rest.

    Coefficients are ranked in ``[approx, d^(L), ..., d^(1)]`` order; equal
    magnitudes are resolved in favour of the lower flattened index.
    """
    c = p.flatten()
    k = kept_count(rho, c.size)
    keep = np.argsort(-np.abs(c), kind="stable")[:k]
    out = np.zeros_like(c)
    out[keep] = c[keep]
    return CoefficientPyramid.from_flat(out, p.levels)


def psnr(x, x_hat) -> float:
    """Peak SNR in dB with the peak taken from the original window.

    Returns ``math.inf`` when the reconstruction is exact.
    """
    x = np.asarray(x, dtype=float)
    x_hat = np.asarray(x_hat, dtype=float)
    if x.shape != x_hat.shape:
        raise LengthMismatch(f"lengths differ: {x.size} vs {x_hat.size}")
    peak = float(np.max(np.abs(x))) if x.size else 0.0
    if peak == 0.0:
        raise AllZeroReference("reference window is identically zero")
    mse = float(np.mean((x - x_hat) ** 2))
    if mse < 1e-300:
        return math.inf
    return 10.0 * math.log10(peak * peak / mse)


class Transform(Protocol):
    def analyze(self, x) -> CoefficientPyramid: ...

    def synthesize(self, p: CoefficientPyramid) -> np.ndarray: ...


class StackTransform:
    """The learned cascade with a fixed filter stack."""

    def __init__(self, stack):
        self.stack = _as_stack(stack)

    def analyze(self, x) -> CoefficientPyramid:
        return analyze(x, self.stack)

    def synthesize(self, p: CoefficientPyramid) -> np.ndarray:
        return synthesize(p, self.stack)


class FilterBankTransform:
    """A fixed wavelet applied with :func:`baseline_dwt`."""

    def __init__(self, filters: FirFilterPair, levels: int):
        self.filters = filters
        self.levels = levels

    def analyze(self, x) -> CoefficientPyramid:
        return baseline_dwt(x, self.filters, self.levels)

    def synthesize(self, p: CoefficientPyramid) -> np.ndarray:
        return baseline_idwt(p, self.filters)


def compress_window(x, transform: Transform, rho: float) -> tuple[np.ndarray, float]:
    """Analyze, threshold and resynthesize; also returns the dropped energy."""
    p = transform.analyze(x)
    q = threshold_compress(p, rho)
    dropped = p.flatten() - q.flatten()
    if kept_count(rho, p.size) == p.size:
        # nothing discarded: perfect reconstruction returns the input
        return np.array(x, dtype=float), 0.0
    return transform.synthesize(q), float(dropped @ dropped)


@dataclass(frozen=True)
class RateDistortionPoint:
    rho: float
    psnr_db: float
    kept: int
    label: str


@dataclass
class SweepTable:
    """Mean-over-windows PSNR per (transform, rho) with deltas vs baselines."""

    points: list[RateDistortionPoint]
    reference: str
    baselines: list[str]

    def psnr(self, label: str, rho: float) -> float:
        for pt in self.points:
            if pt.label == label and math.isclose(pt.rho, rho):
                return pt.psnr_db
        raise KeyError((label, rho))

    def delta(self, label: str, baseline: str, rho: float) -> float:
        return delta_psnr(self.psnr(label, rho), self.psnr(baseline, rho))

    def rows(self) -> list[dict]:
        out = []
        for pt in self.points:
            row = {"transform": pt.label, "rho": pt.rho, "psnr_db": pt.psnr_db, "kept": pt.kept}
            for b in self.baselines:
                row[f"delta_psnr_vs_{b}"] = self.delta(pt.label, b, pt.rho)
            out.append(row)
        return out


def delta_psnr(a: float, b: float) -> float:
    if math.isinf(a) and math.isinf(b) and a == b:
        return 0.0
    return a - b


def rd_sweep(windows: Sequence, transforms: Mapping[str, Transform | Sequence[Transform]],
             rhos: Sequence[float] = DEFAULT_RHOS, reference: str | None = None) -> SweepTable:
    """Rate-distortion table over windows for several transforms.

    ``transforms`` maps a label to either one transform used on every window
    or a per-window sequence (e.g. stacks trained window by window).
    ``reference`` names the transform whose deltas are of interest; every
    other label is treated as a baseline.
    """
    windows = [np.asarray(w, dtype=float) for w in windows]
    if not windows:
        raise ShapeMismatch("need at least one window")
    rhos = [check_rho(r) for r in rhos]
    labels = list(transforms)
    reference = reference or labels[0]
    points = []
    for label in labels:
        tr = transforms[label]
        per_window = list(tr) if isinstance(tr, (list, tuple)) else [tr] * len(windows)
        if len(per_window) != len(windows):
            raise ShapeMismatch(f"{label}: {len(per_window)} transforms for {len(windows)} windows")
        for rho in rhos:
            vals = [psnr(w, compress_window(w, t, rho)[0]) for w, t in zip(windows, per_window)]
            points.append(RateDistortionPoint(rho, float(np.mean(vals)), kept_count(rho, windows[0].size), label))
    return SweepTable(points, reference, [b for b in labels if b != reference])
