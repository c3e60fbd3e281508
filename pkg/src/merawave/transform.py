"""Multiscale analysis/synthesis cascade built from 2x2 orthogonal blocks.

A filter stack is an array of shape ``(L, 2, 2)``; level ``l`` (1-based)
uses ``stack[l - 1]``. Each level maps disjoint sample pairs
``(x[2k], x[2k+1])`` through its matrix, the first output row becoming the
approximation and the second the detail. The approximation feeds the next
level.

The cascade functions accept any 2x2 matrices so that gradients and
finite differences can be taken off the orthogonal group. Perfect
reconstruction and energy conservation only hold for orthogonal stacks;
use :func:`orthogonal_pair` / :func:`filter_stack` to validate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    IndivisibleLength,
    LengthMismatch,
    NonFinite,
    NotOrthogonal,
    OddLength,
    ShapeMismatch,
)

ORTHO_TOL = 1e-12

HAAR = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)
HAAR.setflags(write=False)


def orthogonality_error(u) -> float:
    """Frobenius norm of ``u.T @ u - I``."""
    u = np.asarray(u, dtype=float)
    return float(np.linalg.norm(u.T @ u - np.eye(2)))


def orthogonal_pair(u, tol: float = ORTHO_TOL) -> np.ndarray:
    """Validate and return a 2x2 orthogonal matrix as a float array."""
    u = np.array(u, dtype=float)
    if u.shape != (2, 2):
        raise ShapeMismatch(f"expected a 2x2 matrix, got shape {u.shape}")
    if not np.all(np.isfinite(u)):
        raise NonFinite("matrix entries must be finite")
    err = orthogonality_error(u)
    if err > tol:
        raise NotOrthogonal(f"||U^T U - I||_F = {err:.3e} exceeds {tol:.1e}")
    if abs(abs(np.linalg.det(u)) - 1.0) > tol:
        raise NotOrthogonal(f"|det U| = {abs(np.linalg.det(u))!r} is not 1")
    return u


def filter_stack(levels, tol: float = ORTHO_TOL) -> np.ndarray:
    """Validate a sequence of orthogonal pairs and stack it to ``(L, 2, 2)``."""
    mats = [orthogonal_pair(u, tol) for u in levels]
    if not mats:
        raise ShapeMismatch("a filter stack needs at least one level")
    return np.stack(mats)


def haar_stack(levels: int) -> np.ndarray:
    if levels < 1:
        raise ShapeMismatch("levels must be >= 1")
    return np.repeat(HAAR[None], levels, axis=0)


def _as_stack(stack) -> np.ndarray:
    s = np.asarray(stack, dtype=float)
    if s.ndim == 2:
        s = s[None]
    if s.ndim != 3 or s.shape[1:] != (2, 2) or s.shape[0] < 1:
        raise ShapeMismatch(f"filter stack must have shape (L, 2, 2), got {s.shape}")
    return s


def _as_window(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ShapeMismatch(f"signal must be one-dimensional, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise NonFinite("signal contains non-finite samples")
    return x


@dataclass
class CoefficientPyramid:
    """Approximation at the coarsest level plus details, finest first.

    ``details[0]`` is level 1 (length ``N/2``), ``details[-1]`` is level L.
    """

    approx: np.ndarray
    details: list[np.ndarray] = field(default_factory=list)

    @property
    def levels(self) -> int:
        return len(self.details)

    @property
    def size(self) -> int:
        return self.approx.size + sum(d.size for d in self.details)

    def energy(self) -> float:
        return float(self.approx @ self.approx + sum(d @ d for d in self.details))

    def flatten(self) -> np.ndarray:
        """Coefficients ordered ``[approx, d^(L), ..., d^(1)]``."""
        return np.concatenate([self.approx, *self.details[::-1]])

    @classmethod
    def from_flat(cls, c, levels: int) -> "CoefficientPyramid":
        c = np.asarray(c, dtype=float)
        n = c.size
        if levels < 1 or n % (1 << levels):
            raise IndivisibleLength(n, levels)
        pos = n >> levels
        approx = c[:pos].copy()
        coarse_first = []
        for lev in range(levels, 0, -1):
            m = n >> lev
            coarse_first.append(c[pos:pos + m].copy())
            pos += m
        return cls(approx, coarse_first[::-1])

    def copy(self) -> "CoefficientPyramid":
        return CoefficientPyramid(self.approx.copy(), [d.copy() for d in self.details])

    def scaled(self, alpha: float) -> "CoefficientPyramid":
        return CoefficientPyramid(alpha * self.approx, [alpha * d for d in self.details])


def layer_analyze(x, u) -> tuple[np.ndarray, np.ndarray]:
    """One cascade level: ``[a_k, d_k] = u @ [x_2k, x_2k+1]``."""
    x = _as_window(x)
    if x.size % 2 or x.size < 2:
        raise OddLength(f"layer input must have even length >= 2, got {x.size}")
    u = np.asarray(u, dtype=float)
    pairs = x.reshape(-1, 2)
    out = pairs @ u.T
    return out[:, 0].copy(), out[:, 1].copy()


def layer_synthesize(a, d, u) -> np.ndarray:
    """Invert :func:`layer_analyze` by applying ``u.T`` pairwise and interleaving."""
    a = np.asarray(a, dtype=float)
    d = np.asarray(d, dtype=float)
    if a.shape != d.shape:
        raise LengthMismatch(f"approximation length {a.size} != detail length {d.size}")
    u = np.asarray(u, dtype=float)
    pairs = np.stack([a, d], axis=1) @ u
    return pairs.reshape(-1)


def analyze(x, stack) -> CoefficientPyramid:
    """Full L-level cascade of :func:`layer_analyze`."""
    x = _as_window(x)
    s = _as_stack(stack)
    levels = s.shape[0]
    if x.size == 0 or x.size % (1 << levels):
        raise IndivisibleLength(x.size, levels)
    approx = x
    details = []
    for u in s:
        approx, d = layer_analyze(approx, u)
        details.append(d)
    return CoefficientPyramid(approx, details)


def synthesize(p: CoefficientPyramid, stack) -> np.ndarray:
    s = _as_stack(stack)
    if p.levels != s.shape[0]:
        raise ShapeMismatch(f"pyramid has {p.levels} levels, stack has {s.shape[0]}")
    approx = np.asarray(p.approx, dtype=float)
    for lev in range(p.levels, 0, -1):
        d = np.asarray(p.details[lev - 1], dtype=float)
        if d.size != approx.size:
            raise ShapeMismatch(
                f"level {lev}: detail length {d.size} != approximation length {approx.size}"
            )
        approx = layer_synthesize(approx, d, s[lev - 1])
    return approx


def analysis_matrix(n: int, stack) -> np.ndarray:
    """Dense ``n x n`` analysis operator, rows in flattened coefficient order.

    Built by analyzing unit vectors; meant for small ``n`` only.
    """
    cols = [analyze(e, stack).flatten() for e in np.eye(n)]
    return np.array(cols).T
