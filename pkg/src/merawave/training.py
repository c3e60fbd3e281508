"""Sparsity-driven training of a filter stack on the orthogonal group.

Each iteration evaluates the loss, backpropagates through the cascade by
hand (the graph is tiny and fixed), takes an Adam step in the ambient
2x2 space and then maps every level back onto O(2) with the polar
projection.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigError, IndivisibleLength, MissingReconstruction, ShapeMismatch, SingularMatrix
from .transform import (
    CoefficientPyramid,
    _as_stack,
    _as_window,
    filter_stack,
    haar_stack,
    synthesize,
)

log = logging.getLogger(__name__)

NORMALIZATIONS = ("per_scale", "global")
INIT_MODES = ("haar", "random")


@dataclass(frozen=True)
class TrainingConfig:
    levels: int = 5
    stage1: int = 50
    stage2: int = 50
    lr1: float = 5e-3
    lr2: float = 2.5e-3
    lambda_sparse: float = 1.0
    lambda_mse: float = 0.0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    init: str = "haar"
    seed: int = 12345
    normalization: str = "per_scale"

    def __post_init__(self):
        if not isinstance(self.levels, int) or self.levels < 1:
            raise ConfigError(f"levels must be a positive integer, got {self.levels!r}")
        for name in ("stage1", "stage2"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 0:
                raise ConfigError(f"{name} must be a non-negative integer, got {v!r}")
        if not (self.lr1 > 0 and self.lr2 > 0):
            raise ConfigError("learning rates must be positive")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ConfigError("beta1 and beta2 must lie in [0, 1)")
        if not self.eps > 0:
            raise ConfigError("eps must be positive")
        if self.lambda_sparse < 0 or self.lambda_mse < 0:
            raise ConfigError("loss weights must be non-negative")
        if self.init not in INIT_MODES:
            raise ConfigError(f"init must be one of {INIT_MODES}, got {self.init!r}")
        if self.normalization not in NORMALIZATIONS:
            raise ConfigError(f"normalization must be one of {NORMALIZATIONS}, got {self.normalization!r}")

    @property
    def iterations(self) -> int:
        return self.stage1 + self.stage2

    def lr_at(self, k: int) -> float:
        """Step size for 0-based iteration ``k``."""
        return self.lr1 if k < self.stage1 else self.lr2

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "TrainingConfig":
        """Build from a mapping of field names.

        ``iterations`` is accepted as a shorthand for a total count split
        evenly between the stages (first stage takes the odd one).
        """
        d = dict(d)
        if "iterations" in d:
            total = _coerce("iterations", d.pop("iterations"), int)
            if total < 0:
                raise ConfigError("iterations must be non-negative")
            d.setdefault("stage1", (total + 1) // 2)
            d.setdefault("stage2", total // 2)
        types = {f.name: f.type for f in dataclasses.fields(cls)}
        unknown = set(d) - set(types)
        if unknown:
            raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
        kinds = {"int": int, "float": float, "str": str}
        return cls(**{k: _coerce(k, v, kinds[types[k]]) for k, v in d.items()})

    def replace(self, **changes) -> "TrainingConfig":
        return TrainingConfig.from_dict({**self.to_dict(), **changes})


def _coerce(key, value, kind):
    if kind is int:
        if isinstance(value, bool):
            raise ConfigError(f"{key} must be an integer")
        if isinstance(value, float) and not value.is_integer():
            raise ConfigError(f"{key} must be an integer, got {value!r}")
    try:
        return kind(value)
    except (TypeError, ValueError):
        raise ConfigError(f"cannot interpret {key}={value!r} as {kind.__name__}") from None


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def zeros(cls, levels: int) -> "AdamState":
        return cls(np.zeros((levels, 2, 2)), np.zeros((levels, 2, 2)), 0)


@dataclass(frozen=True)
class LossBreakdown:
    sparsity: float
    mse: float
    total: float


# -- polar projection ---------------------------------------------------------

def polar_project(m) -> np.ndarray:
    """Nearest orthogonal matrix to a full-rank 2x2 ``m`` (Frobenius norm).

    Uses the 2x2 identity ``m + sign(det m) * cof(m) = (s1 + s2) W V^T`` where
    ``m = W diag(s1, s2) V^T``, so no SVD is needed.
    """
    m = np.asarray(m, dtype=float)
    if m.shape != (2, 2):
        raise ShapeMismatch(f"expected a 2x2 matrix, got {m.shape}")
    (a, b), (c, d) = m
    det = a * d - b * c
    fro2 = a * a + b * b + c * c + d * d
    s_max = 0.5 * (math.sqrt(fro2 + 2 * abs(det)) + math.sqrt(max(fro2 - 2 * abs(det), 0.0)))
    if not math.isfinite(s_max) or s_max == 0.0 or abs(det) / s_max <= 1e-12 * s_max:
        raise SingularMatrix("matrix is rank-deficient; polar factor is not unique")
    sign = 1.0 if det > 0 else -1.0
    q = m + sign * np.array([[d, -c], [-b, a]])
    return q / (np.linalg.norm(q) / math.sqrt(2.0))


# -- loss and gradient --------------------------------------------------------

def _detail_weights(n: int, levels: int, normalization: str) -> list[float]:
    if normalization == "per_scale":
        return [1.0 / (n >> lev) for lev in range(1, levels + 1)]
    n_d = sum(n >> lev for lev in range(1, levels + 1))
    return [1.0 / n_d] * levels


def loss(p: CoefficientPyramid, x, x_hat=None, cfg: TrainingConfig | None = None) -> LossBreakdown:
    """Weighted l1 detail sparsity plus optional reconstruction MSE."""
    cfg = cfg or TrainingConfig()
    x = np.asarray(x, dtype=float)
    n = x.size
    if p.size != n:
        raise ShapeMismatch(f"pyramid holds {p.size} coefficients for a window of {n}")
    weights = _detail_weights(n, p.levels, cfg.normalization)
    sparsity = float(sum(w * np.abs(d).sum() for w, d in zip(weights, p.details)))
    mse = 0.0
    if cfg.lambda_mse > 0:
        if x_hat is None:
            raise MissingReconstruction("lambda_mse > 0 requires a reconstruction")
        r = np.asarray(x_hat, dtype=float) - x
        mse = float(r @ r) / n
    return LossBreakdown(sparsity, mse, cfg.lambda_sparse * sparsity + cfg.lambda_mse * mse)


def _loss_and_grad(x: np.ndarray, s: np.ndarray, cfg: TrainingConfig) -> tuple[LossBreakdown, np.ndarray]:
    n = x.size
    levels = s.shape[0]
    grad = np.zeros_like(s)

    # forward analysis, caching each level's input pairs
    pairs_in = []
    approx = x
    details = []
    for u in s:
        pairs = approx.reshape(-1, 2)
        pairs_in.append(pairs)
        out = pairs @ u.T
        approx = out[:, 0]
        details.append(out[:, 1])
    p = CoefficientPyramid(approx, details)

    weights = _detail_weights(n, levels, cfg.normalization)
    g_details = [cfg.lambda_sparse * w * np.sign(d) for w, d in zip(weights, details)]
    g_approx = np.zeros_like(approx)

    x_hat = None
    if cfg.lambda_mse > 0:
        # forward synthesis, caching (approx, detail) inputs per level
        synth_in = [None] * levels
        y = approx
        for lev in range(levels, 0, -1):
            v = np.stack([y, details[lev - 1]], axis=1)
            synth_in[lev - 1] = v
            y = (v @ s[lev - 1]).reshape(-1)
        x_hat = y
        gy = cfg.lambda_mse * 2.0 / n * (x_hat - x)
        for lev in range(1, levels + 1):
            v = synth_in[lev - 1]
            gpair = gy.reshape(-1, 2)
            grad[lev - 1] += v.T @ gpair
            gv = gpair @ s[lev - 1].T
            g_details[lev - 1] = g_details[lev - 1] + gv[:, 1]
            gy = gv[:, 0]
        g_approx = g_approx + gy

    ga = g_approx
    for lev in range(levels, 0, -1):
        gout = np.stack([ga, g_details[lev - 1]], axis=1)
        grad[lev - 1] += gout.T @ pairs_in[lev - 1]
        ga = (gout @ s[lev - 1]).reshape(-1)

    return loss(p, x, x_hat, cfg), grad


def _check_window(x, levels: int) -> np.ndarray:
    x = _as_window(x)
    if x.size == 0 or x.size % (1 << levels):
        raise IndivisibleLength(x.size, levels)
    return x


def loss_gradient(x, stack, cfg: TrainingConfig | None = None) -> np.ndarray:
    """Euclidean gradient of the training loss w.r.t. every level's matrix.

    The subgradient of ``|d|`` at ``d = 0`` is taken as 0. Returns an array
    with the stack's shape ``(L, 2, 2)``.
    """
    cfg = cfg or TrainingConfig()
    s = _as_stack(stack)
    x = _check_window(x, s.shape[0])
    return _loss_and_grad(x, s, cfg)[1]


def evaluate_loss(x, stack, cfg: TrainingConfig | None = None) -> LossBreakdown:
    """Loss of ``stack`` on window ``x`` (reconstructing when the MSE term is on)."""
    cfg = cfg or TrainingConfig()
    s = _as_stack(stack)
    x = _check_window(x, s.shape[0])
    return _loss_and_grad(x, s, cfg)[0]


# -- optimizer ----------------------------------------------------------------

def adam_step(stack, grads, state: AdamState, lr: float, beta1: float = 0.9,
              beta2: float = 0.999, eps: float = 1e-8) -> tuple[np.ndarray, AdamState]:
    """Bias-corrected Adam update of every matrix entry in ambient space."""
    stack = np.asarray(stack, dtype=float)
    grads = np.asarray(grads, dtype=float)
    if grads.shape != stack.shape or state.m.shape != stack.shape:
        raise ShapeMismatch("stack, gradient and optimizer state shapes differ")
    t = state.t + 1
    m = beta1 * state.m + (1.0 - beta1) * grads
    v = beta2 * state.v + (1.0 - beta2) * grads * grads
    m_hat = m / (1.0 - beta1 ** t)
    v_hat = v / (1.0 - beta2 ** t)
    new = stack - lr * m_hat / (np.sqrt(v_hat) + eps)
    return new, AdamState(m, v, t)


# -- training loop ------------------------------------------------------------

def init_stack(cfg: TrainingConfig) -> np.ndarray:
    if cfg.init == "haar":
        return haar_stack(cfg.levels)
    rng = np.random.default_rng(cfg.seed)
    return np.stack([polar_project(m) for m in rng.standard_normal((cfg.levels, 2, 2))])


@dataclass
class TrainingResult:
    stack: np.ndarray
    trace: list[LossBreakdown] = field(default_factory=list)


def _project_all(s: np.ndarray, iteration: int) -> np.ndarray:
    out = np.empty_like(s)
    for lev, m in enumerate(s, start=1):
        try:
            out[lev - 1] = polar_project(m)
        except SingularMatrix:
            raise SingularMatrix("Adam step produced a rank-deficient matrix",
                                 iteration=iteration, level=lev) from None
    return out


def train_windows(windows: Sequence, cfg: TrainingConfig | None = None, warm=None,
                  callback: Callable[[int, np.ndarray, LossBreakdown], None] | None = None) -> TrainingResult:
    """Train one stack on several windows, averaging gradients per iteration.

    With a single window this is exactly the single-window algorithm.
    """
    cfg = cfg or TrainingConfig()
    xs = [_check_window(w, cfg.levels) for w in windows]
    if not xs:
        raise ShapeMismatch("need at least one window")
    if warm is not None:
        s = np.stack([polar_project(u) for u in filter_stack(warm, tol=1e-8)])
        if s.shape[0] != cfg.levels:
            raise ShapeMismatch(f"warm start has {s.shape[0]} levels, config asks for {cfg.levels}")
    else:
        s = init_stack(cfg)
    state = AdamState.zeros(cfg.levels)
    trace = []
    for k in range(cfg.iterations):
        parts = [_loss_and_grad(x, s, cfg) for x in xs]
        grad = sum(g for _, g in parts) / len(parts)
        if len(parts) == 1:
            lb = parts[0][0]
        else:
            lb = LossBreakdown(*(float(np.mean([getattr(b, f) for b, _ in parts]))
                                 for f in ("sparsity", "mse", "total")))
        trace.append(lb)
        s, state = adam_step(s, grad, state, cfg.lr_at(k), cfg.beta1, cfg.beta2, cfg.eps)
        s = _project_all(s, k + 1)
        if callback is not None:
            callback(k + 1, s, lb)
        log.debug("iter %d loss %.6g", k + 1, lb.total)
    return TrainingResult(s, trace)


def train(x, cfg: TrainingConfig | None = None, warm=None,
          callback: Callable[[int, np.ndarray, LossBreakdown], None] | None = None
          ) -> tuple[np.ndarray, list[LossBreakdown]]:
    """Run the two-stage schedule on window ``x``.

    ``trace[k]`` is the loss evaluated before update ``k + 1``. ``callback``
    is invoked after each projected update as ``callback(iteration, stack,
    loss_before_update)``.
    """
    res = train_windows([x], cfg, warm, callback)
    return res.stack, res.trace
