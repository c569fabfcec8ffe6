"""Seeded generators for heavy-tailed VAR benchmarks and their relatives.

Each data-generating process validates its own stability criterion at
construction time and simulates by iterating its recursion from a zero state,
discarding a burn-in prefix.  Paths are single-stream: one seeded generator
drives the whole path, so results are independent of how replications are
scheduled across workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._seeds import derive_seed
from .var import VarModel, companion_matrix, rescale_to_radius, spectral_radius

__all__ = [
    "StabilityError",
    "SimulationError",
    "StudentTNoise",
    "GaussianNoise",
    "ScaleMixtureNoise",
    "SignPartition",
    "IntervalPartition",
    "indicator_map",
    "VarTDgp",
    "ArchVarDgp",
    "UnivariateArchDgp",
    "BekkVarDgp",
    "ThresholdVarDgp",
    "RcVarDgp",
    "gen_er_transition",
    "sample_noise",
    "simulate",
    "write_series_csv",
    "read_series_csv",
]


class StabilityError(ValueError):
    """A process parameterization violates its stability criterion."""


class SimulationError(RuntimeError):
    """A simulated path became non-finite; retry with the next substream."""


# ---------------------------------------------------------------------------
# noise specifications


@dataclass(frozen=True)
class StudentTNoise:
    """Per-coordinate iid Student-t noise; df > 2 so the variance is finite."""

    df: float

    def __post_init__(self):
        if not self.df > 2:
            raise ValueError(f"degrees of freedom must exceed 2, got {self.df}")


@dataclass(frozen=True)
class GaussianNoise:
    """Per-coordinate iid Gaussian noise; sd may be a scalar or a per-coordinate vector."""

    sd: float | tuple[float, ...] = 1.0

    def __post_init__(self):
        sd = np.atleast_1d(np.asarray(self.sd, dtype=np.float64))
        if np.any(sd < 0) or not np.all(np.isfinite(sd)):
            raise ValueError("sd must be finite and nonnegative")


@dataclass(frozen=True)
class ScaleMixtureNoise:
    """Gaussian scale mixture: components are (weight, sd) pairs, weights summing to 1."""

    components: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if not self.components:
            raise ValueError("mixture needs at least one component")
        weights = np.array([w for w, _ in self.components])
        if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-12:
            raise ValueError("mixture weights must be nonnegative and sum to 1")
        if any(sd < 0 for _, sd in self.components):
            raise ValueError("mixture sds must be nonnegative")


NoiseSpec = StudentTNoise | GaussianNoise | ScaleMixtureNoise


def sample_noise(spec: NoiseSpec, shape, rng: np.random.Generator) -> np.ndarray:
    """Draw an array of the given shape from the noise specification.

    Student-t variates are built as normal / sqrt(chi2(df)/df), which keeps
    non-integer degrees of freedom exact and the draw order reproducible.
    """
    if isinstance(spec, StudentTNoise):
        g = rng.standard_normal(shape)
        chi = rng.chisquare(spec.df, shape)
        return g / np.sqrt(chi / spec.df)
    if isinstance(spec, GaussianNoise):
        return np.asarray(spec.sd, dtype=np.float64) * rng.standard_normal(shape)
    if isinstance(spec, ScaleMixtureNoise):
        weights = np.array([w for w, _ in spec.components])
        sds = np.array([sd for _, sd in spec.components])
        idx = rng.choice(len(sds), size=shape, p=weights)
        return sds[idx] * rng.standard_normal(shape)
    raise TypeError(f"unknown noise spec {type(spec).__name__}")


# ---------------------------------------------------------------------------
# threshold partitions


class SignPartition:
    """Two half-spaces split by the sign of the first coordinate."""

    n_regions = 2

    def region(self, z: np.ndarray) -> int:
        return 0 if z[0] < 0 else 1

    def to_dict(self) -> dict:
        return {"kind": "sign"}


@dataclass(frozen=True)
class IntervalPartition:
    """Axis-aligned slabs: region j is breakpoints[j-1] <= z[axis] < breakpoints[j]."""

    axis: int
    breakpoints: tuple[float, ...]

    def __post_init__(self):
        bp = tuple(float(b) for b in self.breakpoints)
        if any(b2 <= b1 for b1, b2 in zip(bp, bp[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        object.__setattr__(self, "breakpoints", bp)

    @property
    def n_regions(self) -> int:
        return len(self.breakpoints) + 1

    def region(self, z: np.ndarray) -> int:
        return int(np.searchsorted(self.breakpoints, z[self.axis], side="right"))

    def to_dict(self) -> dict:
        return {"kind": "interval", "axis": self.axis, "breakpoints": list(self.breakpoints)}


def indicator_map(partition, z: np.ndarray) -> np.ndarray:
    """Stack 1(z in G_j) * z over regions into one length n_regions*p vector.

    Exactly one block is nonzero, so the stacked vector always has the same
    Euclidean norm as ``z``.
    """
    z = np.asarray(z, dtype=np.float64)
    p = z.shape[0]
    out = np.zeros(partition.n_regions * p)
    j = partition.region(z)
    if not 0 <= j < partition.n_regions:
        raise ValueError(f"partition returned invalid region {j}")
    out[j * p : (j + 1) * p] = z
    return out


# ---------------------------------------------------------------------------
# data-generating processes


@dataclass(frozen=True)
class VarTDgp:
    """Linear VAR driven by iid noise: Z_t = B_1'Z_{t-1} + ... + B_d'Z_{t-d} + e_t."""

    model: VarModel
    noise: NoiseSpec

    def __post_init__(self):
        r = self.stability_radius()
        if r >= 1:
            raise StabilityError(f"companion spectral radius {r:.6f} >= 1")

    def stability_radius(self) -> float:
        return spectral_radius(companion_matrix(self.model))


@dataclass(frozen=True)
class ArchVarDgp:
    """Lag-1 VAR with state-dependent noise scale.

    Default (parametric) form: coordinate j of the noise is scaled by
    sqrt(f[j] + z'F[j]z), with positive offsets f and positive-semidefinite
    scale matrices F; stability requires radius(B)^2 + max_j radius(F_j) < 1.

    Alternatively ``sigma_fn`` may supply an arbitrary scale map z -> matrix
    (or per-coordinate vector); callbacks are accepted unchecked beyond the
    linear part's radius(B) < 1, since general scale maps admit no mechanical
    stability test.
    """

    b: np.ndarray
    f: tuple[float, ...] | None = None
    f_mats: tuple[np.ndarray, ...] | None = None
    noise: NoiseSpec = GaussianNoise(1.0)
    sigma_fn: object = None

    def __post_init__(self):
        b = np.asarray(self.b, dtype=np.float64)
        p = b.shape[0]
        if b.shape != (p, p):
            raise ValueError("b must be square")
        object.__setattr__(self, "b", b)
        if self.sigma_fn is not None:
            if self.f is not None or self.f_mats is not None:
                raise ValueError("give either (f, f_mats) or sigma_fn, not both")
            r = self.stability_radius()
            if r >= 1:
                raise StabilityError(f"spectral radius {r:.6f} >= 1")
            return
        if self.f is None or self.f_mats is None:
            raise ValueError("the parametric form requires both f and f_mats")
        if len(self.f) != p or len(self.f_mats) != p:
            raise ValueError("need one offset and one scale matrix per coordinate")
        if any(not fj > 0 for fj in self.f):
            raise ValueError("offsets f must be positive")
        mats = tuple(np.asarray(m, dtype=np.float64) for m in self.f_mats)
        for m in mats:
            if m.shape != (p, p):
                raise ValueError("scale matrices must be p x p")
            if np.linalg.eigvalsh((m + m.T) / 2.0)[0] < -1e-10:
                raise ValueError("scale matrices must be positive semidefinite")
        object.__setattr__(self, "f", tuple(float(v) for v in self.f))
        object.__setattr__(self, "f_mats", mats)
        r = self.stability_radius()
        if r >= 1:
            raise StabilityError(f"radius(B)^2 + max radius(F_j) = {r:.6f} >= 1")

    def stability_radius(self) -> float:
        if self.sigma_fn is not None:
            return spectral_radius(self.b)
        return spectral_radius(self.b) ** 2 + max(spectral_radius(m) for m in self.f_mats)


@dataclass(frozen=True)
class UnivariateArchDgp:
    """Scalar AR(p) whose noise scale is sqrt(d0 + sum_j d[j] * z_{t-j}^2).

    Stability requires radius(bb' + diag(d)) < 1, the quadratic form from
    the one-step second-moment bound E[(b'u + s(u)*eta)^2] =
    u'(bb' + diag(d))u + d0 (for order 1 this is the classical b^2 + d < 1),
    together with stability of the linear part's companion matrix.  With all
    d[j] = 0 the process is a homoskedastic AR(p) with noise scale sqrt(d0).
    """

    b: tuple[float, ...]
    d0: float
    d: tuple[float, ...]
    noise: NoiseSpec = GaussianNoise(1.0)

    def __post_init__(self):
        if not self.d0 > 0:
            raise ValueError(f"d0 must be positive, got {self.d0}")
        if len(self.d) != len(self.b):
            raise ValueError("need one variance coefficient per lag")
        if any(dj < 0 for dj in self.d):
            raise ValueError("variance coefficients must be nonnegative")
        object.__setattr__(self, "b", tuple(float(v) for v in self.b))
        object.__setattr__(self, "d", tuple(float(v) for v in self.d))
        companion_r = spectral_radius(self.companion())
        if companion_r >= 1:
            raise StabilityError(f"companion spectral radius {companion_r:.6f} >= 1")
        r = self.stability_radius()
        if r >= 1:
            raise StabilityError(f"radius(bb' + diag(d)) = {r:.6f} >= 1")

    def companion(self) -> np.ndarray:
        model = VarModel(tuple(np.array([[bj]]) for bj in self.b))
        return companion_matrix(model)

    def stability_radius(self) -> float:
        b_vec = np.asarray(self.b)
        return spectral_radius(np.outer(b_vec, b_vec) + np.diag(self.d))


@dataclass(frozen=True)
class BekkVarDgp:
    """Lag-1 VAR with full-matrix state-dependent noise scale (C + F'zz'F)^(1/2).

    The scale is the symmetric PSD square root, computed by eigendecomposition
    with eigenvalues clamped at zero to guard against roundoff; C must be
    positive definite.  Stability requires radius(BB' + FF') < 1.
    """

    b: np.ndarray
    c: np.ndarray
    f: np.ndarray
    noise: NoiseSpec = GaussianNoise(1.0)

    def __post_init__(self):
        b = np.asarray(self.b, dtype=np.float64)
        c = np.asarray(self.c, dtype=np.float64)
        f = np.asarray(self.f, dtype=np.float64)
        p = b.shape[0]
        if b.shape != (p, p) or c.shape != (p, p) or f.shape != (p, p):
            raise ValueError("b, c, f must all be p x p")
        if np.linalg.eigvalsh((c + c.T) / 2.0)[0] <= 0:
            raise ValueError("c must be positive definite")
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "f", f)
        r = self.stability_radius()
        if r >= 1:
            raise StabilityError(f"radius(BB' + FF') = {r:.6f} >= 1")

    def stability_radius(self) -> float:
        return spectral_radius(self.b @ self.b.T + self.f @ self.f.T)

    def scale_at(self, z: np.ndarray) -> np.ndarray:
        """Symmetric PSD square root of C + F'zz'F."""
        fz = self.f.T @ z
        mat = self.c + np.outer(fz, fz)
        vals, vecs = np.linalg.eigh((mat + mat.T) / 2.0)
        return (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ vecs.T


@dataclass(frozen=True)
class ThresholdVarDgp:
    """Regime-switching VAR: z_t = B_j' z_{t-1} + noise when z_{t-1} is in region j.

    ``partition`` must expose ``n_regions`` and ``region(z) -> int`` and
    partition the whole state space; built-ins are :class:`SignPartition` and
    :class:`IntervalPartition`.  Stability requires every regime matrix to be
    an operator-norm contraction: max_j ||B_j||_2 < 1 (the piecewise map
    z -> B_j'z then shrinks the state regardless of which region fires).
    """

    models: tuple[np.ndarray, ...]
    partition: object = field(default_factory=SignPartition)
    noise: NoiseSpec = GaussianNoise(1.0)

    def __post_init__(self):
        mats = tuple(np.asarray(m, dtype=np.float64) for m in self.models)
        if not mats:
            raise ValueError("need at least one regime matrix")
        p = mats[0].shape[0]
        if any(m.shape != (p, p) for m in mats):
            raise ValueError("all regime matrices must be p x p")
        if len(mats) != self.partition.n_regions:
            raise ValueError(
                f"{len(mats)} regime matrices but partition has "
                f"{self.partition.n_regions} regions"
            )
        object.__setattr__(self, "models", mats)
        r = self.stability_radius()
        if r >= 1:
            raise StabilityError(f"max regime operator norm {r:.6f} >= 1")

    def stability_radius(self) -> float:
        return max(float(np.linalg.norm(m, 2)) for m in self.models)


@dataclass(frozen=True)
class RcVarDgp:
    """Random-coefficient VAR: z_t = (B' + G_t) z_{t-1} + noise with G_t iid
    Gaussian-entry matrices of standard deviation ``gamma_sd``.

    Stability requires radius(kron(B', B') + E[G kron G]) < 1; for iid entries
    the second-moment matrix is gamma_sd^2 * vec(I) vec(I)'.
    """

    b: np.ndarray
    gamma_sd: float
    noise: NoiseSpec = GaussianNoise(1.0)

    def __post_init__(self):
        b = np.asarray(self.b, dtype=np.float64)
        p = b.shape[0]
        if b.shape != (p, p):
            raise ValueError("b must be square")
        if self.gamma_sd < 0:
            raise ValueError("gamma_sd must be nonnegative")
        object.__setattr__(self, "b", b)
        r = self.stability_radius()
        if r >= 1:
            raise StabilityError(f"second-moment spectral radius {r:.6f} >= 1")

    def stability_radius(self) -> float:
        p = self.b.shape[0]
        vec_eye = np.eye(p).reshape(-1)
        second_moment = self.gamma_sd**2 * np.outer(vec_eye, vec_eye)
        return spectral_radius(np.kron(self.b.T, self.b.T) + second_moment)


DgpSpec = (
    VarTDgp | ArchVarDgp | UnivariateArchDgp | BekkVarDgp | ThresholdVarDgp | RcVarDgp
)


# ---------------------------------------------------------------------------
# generation


def gen_er_transition(
    p: int, density: float, rho_target: float, seed: int, max_attempts: int = 100
) -> np.ndarray:
    """Sparse random transition matrix rescaled to a target spectral radius.

    Each entry is independently nonzero with probability ``density`` with a
    Uniform(-1, 1) value (redrawn on an exact zero).  Draws whose spectral
    radius vanishes (e.g. an all-zero or nilpotent pattern) are regenerated
    from the next substream.
    """
    if not 0 < density <= 1:
        raise ValueError(f"density must be in (0, 1], got {density}")
    if not rho_target > 0:
        raise ValueError(f"rho_target must be positive, got {rho_target}")
    for attempt in range(max_attempts):
        rng = np.random.default_rng(derive_seed(seed, attempt))
        mask = rng.random((p, p)) < density
        vals = rng.uniform(-1.0, 1.0, (p, p))
        while True:
            zeros = mask & (vals == 0.0)
            if not zeros.any():
                break
            vals[zeros] = rng.uniform(-1.0, 1.0, int(zeros.sum()))
        b = np.where(mask, vals, 0.0)
        if spectral_radius(b) > 0.0:
            return rescale_to_radius(b, rho_target)
    raise RuntimeError(
        f"no draw with positive spectral radius in {max_attempts} attempts "
        f"(p={p}, density={density})"
    )


def _check_finite(state: np.ndarray, step: int) -> None:
    if not np.all(np.isfinite(state)):
        raise SimulationError(f"non-finite state at step {step}")


def simulate(spec: DgpSpec, n: int, burn_in: int, seed: int) -> np.ndarray:
    """Run a process for burn_in + n steps from a zero state and keep the last n.

    Returns an (n, p) array, one row per time point.  The path's primary
    noise is drawn in a single block up front from ``default_rng(seed)``;
    the random-coefficient variant then draws its coefficient perturbations
    from the same stream, also in one block.  A non-finite state aborts with
    :class:`SimulationError` naming the step; callers may retry with the next
    substream.
    """
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    if burn_in < 0:
        raise ValueError(f"burn_in must be nonnegative, got {burn_in}")
    steps = burn_in + n
    rng = np.random.default_rng(seed)

    if isinstance(spec, VarTDgp):
        p, d = spec.model.p, spec.model.d
        m = companion_matrix(spec.model)
        eps = sample_noise(spec.noise, (steps, p), rng)
        state = np.zeros(p * d)
        out = np.empty((steps, p))
        for t in range(steps):
            state = m @ state
            state[:p] += eps[t]
            _check_finite(state, t + 1)
            out[t] = state[:p]
        return out[burn_in:]

    if isinstance(spec, ArchVarDgp):
        p = spec.b.shape[0]
        bt = np.ascontiguousarray(spec.b.T)
        eta = sample_noise(spec.noise, (steps, p), rng)
        z = np.zeros(p)
        out = np.empty((steps, p))
        if spec.sigma_fn is not None:
            for t in range(steps):
                scale = np.asarray(spec.sigma_fn(z), dtype=np.float64)
                shock = scale @ eta[t] if scale.ndim == 2 else scale * eta[t]
                z = bt @ z + shock
                _check_finite(z, t + 1)
                out[t] = z
            return out[burn_in:]
        f_arr = np.asarray(spec.f)
        for t in range(steps):
            quad = np.array([z @ fm @ z for fm in spec.f_mats])
            sig = np.sqrt(f_arr + quad)
            z = bt @ z
            z += sig * eta[t]
            _check_finite(z, t + 1)
            out[t] = z
        return out[burn_in:]

    if isinstance(spec, UnivariateArchDgp):
        m = spec.companion()
        order = len(spec.b)
        eta = sample_noise(spec.noise, (steps, 1), rng)
        d_vec = np.asarray(spec.d)
        state = np.zeros(order)
        out = np.empty((steps, 1))
        for t in range(steps):
            sig = np.sqrt(spec.d0 + d_vec @ (state * state))
            state = m @ state
            state[0] += sig * eta[t, 0]
            _check_finite(state, t + 1)
            out[t, 0] = state[0]
        return out[burn_in:]

    if isinstance(spec, BekkVarDgp):
        p = spec.b.shape[0]
        bt = np.ascontiguousarray(spec.b.T)
        eta = sample_noise(spec.noise, (steps, p), rng)
        z = np.zeros(p)
        out = np.empty((steps, p))
        for t in range(steps):
            scale = spec.scale_at(z)
            z = bt @ z + scale @ eta[t]
            _check_finite(z, t + 1)
            out[t] = z
        return out[burn_in:]

    if isinstance(spec, ThresholdVarDgp):
        p = spec.models[0].shape[0]
        bts = [np.ascontiguousarray(m.T) for m in spec.models]
        eta = sample_noise(spec.noise, (steps, p), rng)
        z = np.zeros(p)
        out = np.empty((steps, p))
        for t in range(steps):
            j = spec.partition.region(z)
            z = bts[j] @ z + eta[t]
            _check_finite(z, t + 1)
            out[t] = z
        return out[burn_in:]

    if isinstance(spec, RcVarDgp):
        p = spec.b.shape[0]
        eta = sample_noise(spec.noise, (steps, p), rng)
        gammas = rng.normal(0.0, spec.gamma_sd, (steps, p, p))
        z = np.zeros(p)
        out = np.empty((steps, p))
        for t in range(steps):
            z = (spec.b.T + gammas[t]) @ z + eta[t]
            _check_finite(z, t + 1)
            out[t] = z
        return out[burn_in:]

    raise TypeError(f"unknown process spec {type(spec).__name__}")


# ---------------------------------------------------------------------------
# series serialization


def write_series_csv(data: np.ndarray, path) -> None:
    """Write an (n, p) series as CSV with header ``t,z1,...,zp``."""
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2:
        raise ValueError("series must be a 2-d array")
    p = data.shape[1]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("t," + ",".join(f"z{j + 1}" for j in range(p)) + "\n")
        for t, row in enumerate(data):
            fh.write(str(t) + "," + ",".join(format(v, ".17g") for v in row) + "\n")


def read_series_csv(path) -> np.ndarray:
    """Read a series written by :func:`write_series_csv`."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        if not header or header[0] != "t":
            raise ValueError("not a series CSV: first column must be t")
        rows = [[float(v) for v in line.split(",")[1:]] for line in fh if line.strip()]
    data = np.asarray(rows, dtype=np.float64)
    if data.shape[1] != len(header) - 1:
        raise ValueError("row width does not match header")
    return data
