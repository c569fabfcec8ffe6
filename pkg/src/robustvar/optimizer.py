"""Proximal gradient descent for the penalized robust regression objective."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .losses import Regression, RobustConfig, mallows_weights, robust_objective
from .penalties import Penalty, penalty_value, prox

__all__ = [
    "OptimizerConfig",
    "FitResult",
    "DivergenceError",
    "init_beta",
    "gradient_lipschitz_bound",
    "proximal_gradient_fit",
]


class DivergenceError(RuntimeError):
    """Raised when an iterate becomes non-finite (step size too large)."""

    def __init__(self, iteration: int):
        self.iteration = iteration
        super().__init__(f"non-finite iterate at iteration {iteration}; reduce the step size")


@dataclass(frozen=True)
class OptimizerConfig:
    """Settings for the proximal gradient loop.

    ``safe_step=True`` replaces ``step`` by 0.99 over the instance's gradient
    Lipschitz bound, which guarantees monotone descent of the penalized
    objective.  ``record_trace`` stores that objective at every iteration.
    """

    step: float = 0.9
    tol: float = 1e-4
    max_iter: int = 10000
    seed: int = 0
    safe_step: bool = False
    record_trace: bool = False

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError(f"step must be positive, got {self.step}")
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be at least 1, got {self.max_iter}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")


@dataclass
class FitResult:
    beta_hat: np.ndarray
    iterations: int
    final_change: float
    converged: bool
    objective_trace: np.ndarray | None = None


def init_beta(q: int, seed: int) -> np.ndarray:
    """Random unit starting point: iid Uniform(-1, 1) coordinates, normalized."""
    if q < 1:
        raise ValueError(f"q must be at least 1, got {q}")
    rng = np.random.default_rng(seed)
    while True:
        v = rng.uniform(-1.0, 1.0, q)
        nrm = np.linalg.norm(v)
        if nrm > 0:
            return v / nrm


def gradient_lipschitz_bound(reg: Regression, cfg: RobustConfig) -> float:
    """Largest eigenvalue of (1/n) sum_i w_i^3 x_i x_i', a bound on the
    curvature of the robust loss."""
    w = mallows_weights(reg.x, cfg)
    xw = reg.x * (w ** 1.5)[:, None]
    gram = (xw.T @ xw) / reg.n
    return float(np.linalg.eigvalsh(gram)[-1])


def proximal_gradient_fit(
    reg: Regression,
    cfg: RobustConfig,
    pen: Penalty,
    lam: float,
    opt: OptimizerConfig,
) -> FitResult:
    """Minimize robust loss + lam * penalty by proximal gradient descent.

    Each iteration applies the penalty's proximal operator (threshold
    lam*step) to a gradient step, starting from a seeded random unit vector,
    and stops once the Euclidean change between iterates is at most
    ``opt.tol`` or ``opt.max_iter`` updates have run.
    """
    if lam < 0:
        raise ValueError(f"lambda must be nonnegative, got {lam}")
    pen.check_coverage(reg.q)
    n, q = reg.n, reg.q
    w = mallows_weights(reg.x, cfg)
    w2x = (w * w)[:, None] * reg.x
    step = 0.99 / gradient_lipschitz_bound(reg, cfg) if opt.safe_step else opt.step

    beta = init_beta(q, opt.seed)
    trace: list[float] | None = [] if opt.record_trace else None
    change = np.inf
    iterations = 0
    for it in range(1, opt.max_iter + 1):
        r = reg.y - reg.x @ beta
        lp = np.clip(w * r, -cfg.tau, cfg.tau)
        acc = np.add.reduce(lp[:, None] * w2x, axis=0, dtype=np.longdouble)
        grad = -(acc / n).astype(np.float64)
        stepped = beta - step * grad
        if not np.all(np.isfinite(stepped)):
            raise DivergenceError(it)
        beta_new = prox(pen, stepped, lam * step)
        change = float(np.linalg.norm(beta_new - beta))
        beta = beta_new
        iterations = it
        if trace is not None:
            trace.append(robust_objective(reg, beta, cfg, weights=w) + lam * penalty_value(pen, beta))
        if change <= opt.tol:
            break
    return FitResult(
        beta_hat=beta,
        iterations=iterations,
        final_change=change,
        converged=change <= opt.tol,
        objective_trace=None if trace is None else np.asarray(trace),
    )
