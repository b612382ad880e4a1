"""Tensor-nuclear-norm regularised reconstruction by ADMM splitting.

The classic solver minimises
``0.5 * ||A(X) - b||^2 + lambda * ||X||_nuclear`` with an auxiliary
variable and a scaled multiplier, alternating a singular value shrinkage
step, a closed-form Cartesian data-consistency step, and a multiplier
update. A generalised variant runs the same loop with per-iteration
hyperparameters: per-slice thresholds (absolute, or relative to each
slice's largest singular value through a sigmoid weight), a data weight
``gamma`` replacing ``1/mu`` so that ``gamma = 0`` stays well defined,
and optionally a different unitary transform per iteration.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .errors import DimensionError, DivergenceError, NumericError, ParameterError
from .mri import KSpaceVector, SamplingSpec, adjoint, forward, spatial_fft, spatial_ifft
from .tensor import ComplexTensor3, frobenius_norm
from .transforms import UnitaryTransform
from .tsvd import t_tsvt, transformed_singular_values, ttnn

__all__ = [
    "AdmmConfig",
    "IterationParams",
    "IterationStats",
    "ReconReport",
    "z_update",
    "x_update_cartesian",
    "x_update_gamma",
    "l_update",
    "relative_thresholds",
    "solve",
    "solve_generalized",
]


@dataclass
class AdmmConfig:
    """Hyperparameters of the classic solver."""

    lam: float
    mu: float
    transform: UnitaryTransform
    eta: float = 1.0
    max_iters: int = 300
    rel_tol: float = 1e-6
    record_history: bool = True

    def __post_init__(self):
        if self.lam < 0:
            raise ParameterError(f"lambda must be nonnegative, got {self.lam}")
        if self.mu <= 0:
            raise ParameterError(f"mu must be positive, got {self.mu}")
        if self.eta <= 0:
            raise ParameterError(f"eta must be positive, got {self.eta}")
        if self.max_iters < 1:
            raise ParameterError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.rel_tol < 0:
            raise ParameterError(f"rel_tol must be nonnegative, got {self.rel_tol}")


@dataclass
class IterationParams:
    """Per-iteration hyperparameters of the generalised solver.

    Exactly one of ``tau`` (absolute thresholds, scalar or length-``nt``)
    and ``a`` (relative threshold weights, mapped through a sigmoid and
    scaled by each slice's largest transformed singular value) must be
    given. ``transform=None`` falls back to the solver's default.
    """

    gamma: float
    eta: float
    tau: object = None
    a: object = None
    transform: UnitaryTransform | None = None

    def __post_init__(self):
        if self.gamma < 0:
            raise ParameterError(f"gamma must be nonnegative, got {self.gamma}")
        if self.eta < 0:
            raise ParameterError(f"eta must be nonnegative, got {self.eta}")
        if (self.tau is None) == (self.a is None):
            raise ParameterError("exactly one of tau (absolute) and a (relative) is required")


@dataclass(frozen=True)
class IterationStats:
    iteration: int
    objective: float
    fidelity: float
    ttnn: float
    primal_residual: float
    elapsed_ms: float


@dataclass
class ReconReport:
    """Result of a solver run with optional per-iteration history."""

    reconstruction: ComplexTensor3
    iterations_run: int
    history: list[IterationStats] = field(default_factory=list)


def z_update(
    x_prev: ComplexTensor3,
    l_prev: ComplexTensor3,
    lam: float,
    mu: float,
    transform: UnitaryTransform,
    threads: int = 0,
) -> ComplexTensor3:
    """Shrinkage step: prox of ``(lam/mu) * ||.||_nuclear`` at ``X + L``."""
    if mu <= 0:
        raise ParameterError(f"mu must be positive, got {mu}")
    if lam < 0:
        raise ParameterError(f"lambda must be nonnegative, got {lam}")
    return t_tsvt(x_prev + l_prev, lam / mu, transform, threads=threads)


def _check_kspace(b: KSpaceVector, spec: SamplingSpec):
    if b.m != spec.m or b.spec.dims != spec.dims:
        raise DimensionError("k-space vector is inconsistent with the sampling spec")


def x_update_cartesian(
    z: ComplexTensor3,
    l_prev: ComplexTensor3,
    b: KSpaceVector,
    spec: SamplingSpec,
    mu: float,
) -> ComplexTensor3:
    """Closed-form data-consistency step on a Cartesian grid.

    Solves ``(A^H A + mu) X = A^H(b) + mu (Z - L)`` exactly via
    element-wise division in k-space. ``mu = 0`` is only defined when the
    mask is full; otherwise unsampled entries would be 0/0.
    """
    if mu < 0:
        raise ParameterError(f"mu must be nonnegative, got {mu}")
    if z.dims != spec.dims or l_prev.dims != spec.dims:
        raise DimensionError("tensor dims do not match the sampling spec")
    _check_kspace(b, spec)
    if mu == 0:
        nx, ny, nt = spec.dims
        if spec.m < nx * ny * nt:
            raise NumericError(
                "mu = 0 leaves unsampled k-space entries undefined (0/0)"
            )
    numer = spec.scatter(b.values) + mu * spatial_fft(z - l_prev).slices
    denom = spec.mask.astype(np.float64) + mu
    return spatial_ifft(ComplexTensor3._wrap(numer / denom))


def x_update_gamma(
    z: ComplexTensor3,
    l_prev: ComplexTensor3,
    b: KSpaceVector,
    spec: SamplingSpec,
    gamma: float,
) -> ComplexTensor3:
    """Data-consistency step ``(gamma A^H A + 1)^{-1}(gamma A^H b + Z - L)``.

    Stable for every ``gamma >= 0``; ``gamma = 0`` returns ``Z - L``
    exactly.
    """
    if gamma < 0:
        raise ParameterError(f"gamma must be nonnegative, got {gamma}")
    if z.dims != spec.dims or l_prev.dims != spec.dims:
        raise DimensionError("tensor dims do not match the sampling spec")
    _check_kspace(b, spec)
    if gamma == 0:
        return z - l_prev
    numer = gamma * spec.scatter(b.values) + spatial_fft(z - l_prev).slices
    denom = gamma * spec.mask.astype(np.float64) + 1.0
    return spatial_ifft(ComplexTensor3._wrap(numer / denom))


def l_update(
    l_prev: ComplexTensor3, z: ComplexTensor3, x: ComplexTensor3, eta: float
) -> ComplexTensor3:
    """Multiplier update ``L - eta * (Z - X)``."""
    return l_prev - (z - x) * eta


def relative_thresholds(
    y: ComplexTensor3, a, transform: UnitaryTransform
) -> np.ndarray:
    """Per-slice thresholds ``sigmoid(a_i) * max(sigma of slice i)``."""
    nt = y.dims[2]
    weights = np.asarray(a, dtype=float)
    if weights.ndim == 0:
        weights = np.full(nt, float(weights))
    elif weights.shape != (nt,):
        raise DimensionError(
            f"relative weight vector has shape {weights.shape}, expected ({nt},)"
        )
    svals = transformed_singular_values(y, transform)
    return expit(weights) * svals.max(axis=1)


def _all_finite(x: ComplexTensor3) -> bool:
    return bool(np.all(np.isfinite(x.slices)))


def _relative_change(x_new: ComplexTensor3, x_old: ComplexTensor3) -> float:
    denom = float(np.linalg.norm(x_old.slices))
    delta = float(np.linalg.norm(x_new.slices - x_old.slices))
    if denom == 0.0:
        return 0.0 if delta == 0.0 else np.inf
    return delta / denom


def _iteration_stats(
    n: int,
    x: ComplexTensor3,
    z: ComplexTensor3,
    b: KSpaceVector,
    spec: SamplingSpec,
    transform: UnitaryTransform,
    lam: float,
    elapsed_ms: float,
) -> IterationStats:
    residual = forward(x, spec).values - b.values
    fidelity = 0.5 * float(np.linalg.norm(residual) ** 2)
    nuclear = ttnn(x, transform)
    objective = fidelity + lam * nuclear
    primal = frobenius_norm(z - x)
    return IterationStats(n, objective, fidelity, nuclear, primal, elapsed_ms)


def solve(
    b: KSpaceVector,
    spec: SamplingSpec,
    config: AdmmConfig,
    threads: int = 0,
    x_solver=None,
) -> ReconReport:
    """Run the classic solver from the zero-filled initial guess.

    Starts at ``X0 = A^H(b)``, ``Z0 = X0``, ``L0 = 0`` and iterates the
    shrinkage, data-consistency, and multiplier steps in that order until
    the relative change of ``X`` drops below ``rel_tol`` or ``max_iters``
    is reached.

    ``x_solver`` swaps in a user-supplied routine for the
    data-consistency step, for acquisition operators without the
    Cartesian closed form; it is called as ``x_solver(z, l, b, spec, mu)``
    and must return the minimiser of the quadratic subproblem. The
    default is the exact Cartesian solve.

    Raises
    ------
    DivergenceError
        If any iterate or reported quantity becomes non-finite; the
        iteration index is attached.
    """
    _check_kspace(b, spec)
    if x_solver is None:
        x_solver = x_update_cartesian
    x = adjoint(b)
    z = x
    l = ComplexTensor3.zeros(spec.dims)
    history: list[IterationStats] = []
    iterations = 0
    for n in range(1, config.max_iters + 1):
        tic = time.perf_counter()
        z = z_update(x, l, config.lam, config.mu, config.transform, threads=threads)
        x_new = x_solver(z, l, b, spec, config.mu)
        l = l_update(l, z, x_new, config.eta)
        elapsed_ms = (time.perf_counter() - tic) * 1e3
        iterations = n
        rel = _relative_change(x_new, x)
        x = x_new
        if not (_all_finite(x) and _all_finite(z) and _all_finite(l)):
            raise DivergenceError(
                f"non-finite iterate at iteration {n}", iteration=n
            )
        if config.record_history:
            stats = _iteration_stats(
                n, x, z, b, spec, config.transform, config.lam, elapsed_ms
            )
            if not np.isfinite(stats.objective):
                raise DivergenceError(
                    f"non-finite objective at iteration {n}", iteration=n
                )
            history.append(stats)
        if rel < config.rel_tol:
            break
    return ReconReport(x, iterations, history)


def solve_generalized(
    b: KSpaceVector,
    spec: SamplingSpec,
    schedule: list[IterationParams],
    init_transform: UnitaryTransform,
    rel_tol: float = 0.0,
    record_history: bool = True,
    report_lambda: float = 0.0,
    threads: int = 0,
) -> ReconReport:
    """Run the per-iteration-parameter scheme over a schedule.

    Each schedule entry supplies the thresholds (absolute ``tau`` or
    relative ``a``), the data weight ``gamma``, the multiplier rate
    ``eta``, and optionally its own transform (``init_transform`` is the
    default). The reported objective uses ``report_lambda`` as the
    nuclear-norm weight, since the generalised scheme has no single
    regularisation parameter.
    """
    if not schedule:
        raise ParameterError("schedule must contain at least one entry")
    _check_kspace(b, spec)
    nt = spec.dims[2]
    x = adjoint(b)
    l = ComplexTensor3.zeros(spec.dims)
    history: list[IterationStats] = []
    iterations = 0
    for n, params in enumerate(schedule, start=1):
        transform = params.transform if params.transform is not None else init_transform
        if transform.size != nt:
            raise DimensionError(
                f"iteration {n} transform size {transform.size} does not match nt={nt}"
            )
        tic = time.perf_counter()
        y = x + l
        if params.tau is not None:
            tau = params.tau
        else:
            tau = relative_thresholds(y, params.a, transform)
        z = t_tsvt(y, tau, transform, threads=threads)
        x_new = x_update_gamma(z, l, b, spec, params.gamma)
        l = l_update(l, z, x_new, params.eta)
        elapsed_ms = (time.perf_counter() - tic) * 1e3
        iterations = n
        rel = _relative_change(x_new, x)
        x = x_new
        if not (_all_finite(x) and _all_finite(z) and _all_finite(l)):
            raise DivergenceError(
                f"non-finite iterate at iteration {n}", iteration=n
            )
        if record_history:
            stats = _iteration_stats(
                n, x, z, b, spec, transform, report_lambda, elapsed_ms
            )
            if not np.isfinite(stats.objective):
                raise DivergenceError(
                    f"non-finite objective at iteration {n}", iteration=n
                )
            history.append(stats)
        if rel_tol > 0 and rel < rel_tol:
            break
    return ReconReport(x, iterations, history)
