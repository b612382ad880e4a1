"""Tensor-tensor product algebra in a unitary transformed domain.

The product of two 3-way tensors is computed by transforming along mode 3,
multiplying frontal slices, and transforming back. On top of that product
this module provides the tensor SVD with unitary factor tensors and a
tubal-diagonal core, the induced multirank / sum rank, the tensor nuclear
norm (sum of all transformed singular values), the tensor spectral norm
(their maximum), and the singular value shrinkage operator that is the
proximal map of the nuclear norm.

Per-slice SVDs are independent; ``threads=0`` selects the sequential
reference loop and ``threads=n`` runs the same per-slice work on a thread
pool, writing each slice exactly once.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, NumericError, ParameterError
from .tensor import ComplexTensor3
from .transforms import UnitaryTransform

__all__ = [
    "TtSvdFactors",
    "MultirankVector",
    "t_product",
    "tensor_hermitian_transpose",
    "identity_tensor",
    "is_unitary_tensor",
    "tt_svd",
    "transformed_singular_values",
    "transformed_multirank",
    "sum_rank",
    "ttnn",
    "transformed_spectral_norm",
    "t_tsvt",
]


@dataclass(frozen=True, eq=False)
class TtSvdFactors:
    """Factors of a tensor SVD: ``X = U * S * V^H`` under the transform.

    ``U`` is ``n1 x n1 x n3``, ``S`` is ``n1 x n2 x n3`` with diagonal
    transformed slices, ``V`` is ``n2 x n2 x n3``. ``singular_values`` has
    shape ``(n3, min(n1, n2))``, one nonincreasing row per transformed
    slice.
    """

    U: ComplexTensor3
    S: ComplexTensor3
    V: ComplexTensor3
    transform: UnitaryTransform
    singular_values: np.ndarray


@dataclass(frozen=True)
class MultirankVector:
    """Per-slice ranks in the transformed domain and the cut tolerance."""

    ranks: tuple[int, ...]
    tolerance: float

    @property
    def total(self) -> int:
        return int(sum(self.ranks))


def _check_transform(x: ComplexTensor3, transform: UnitaryTransform):
    if transform.size != x.dims[2]:
        raise DimensionError(
            f"transform size {transform.size} does not match n3={x.dims[2]}"
        )


def _map_slices(work, n3: int, threads: int):
    if threads and threads > 0:
        with ThreadPoolExecutor(max_workers=int(threads)) as pool:
            list(pool.map(work, range(n3)))
    else:
        for k in range(n3):
            work(k)


def t_product(
    a: ComplexTensor3, b: ComplexTensor3, transform: UnitaryTransform
) -> ComplexTensor3:
    """Tensor-tensor product via slice-wise matrix products.

    ``a`` is ``n1 x n2 x n3`` and ``b`` is ``n2 x n4 x n3``; the result is
    ``n1 x n4 x n3``. Both operands are transformed along mode 3, the
    frontal slices are multiplied pairwise, and the adjoint transform is
    applied to the result.
    """
    if a.dims[2] != b.dims[2]:
        raise DimensionError(f"slice counts differ: {a.dims[2]} vs {b.dims[2]}")
    if a.dims[1] != b.dims[0]:
        raise DimensionError(f"inner dimensions differ: {a.dims[1]} vs {b.dims[0]}")
    _check_transform(a, transform)
    ahat = transform.apply(a).slices
    bhat = transform.apply(b).slices
    return transform.apply_adjoint(ComplexTensor3._wrap(ahat @ bhat))


def tensor_hermitian_transpose(
    a: ComplexTensor3, transform: UnitaryTransform
) -> ComplexTensor3:
    """Conjugate-transpose every transformed frontal slice and transform back."""
    _check_transform(a, transform)
    ahat = transform.apply(a).slices
    return transform.apply_adjoint(
        ComplexTensor3._wrap(ahat.conj().transpose(0, 2, 1))
    )


def identity_tensor(n: int, n3: int, transform: UnitaryTransform) -> ComplexTensor3:
    """The ``n x n x n3`` tensor acting as the product identity.

    Every transformed frontal slice is the ``n x n`` identity matrix, so
    ``identity_tensor(n, n3, T) * A = A`` for any compatible ``A``.
    """
    if n < 1 or n3 < 1:
        raise ParameterError(f"sizes must be positive, got n={n}, n3={n3}")
    if transform.size != n3:
        raise DimensionError(f"transform size {transform.size} does not match n3={n3}")
    stack = np.broadcast_to(np.eye(n, dtype=np.complex128), (n3, n, n))
    return transform.apply_adjoint(ComplexTensor3._wrap(stack.copy()))


def is_unitary_tensor(
    q: ComplexTensor3, transform: UnitaryTransform, tol: float = 1e-10
) -> bool:
    """Whether ``Q^H * Q`` and ``Q * Q^H`` both equal the identity tensor.

    The deviation is measured in the Frobenius norm against
    ``tol * sqrt(n * n3)``.
    """
    n1, n2, n3 = q.dims
    if n1 != n2:
        raise DimensionError(f"unitary tensors must be square, got {n1} x {n2}")
    _check_transform(q, transform)
    qhat = transform.apply(q).slices
    qhat_h = qhat.conj().transpose(0, 2, 1)
    eye = np.eye(n1)
    dev_left = np.linalg.norm(qhat_h @ qhat - eye)
    dev_right = np.linalg.norm(qhat @ qhat_h - eye)
    bound = tol * np.sqrt(n1 * n3)
    return bool(max(dev_left, dev_right) <= bound)


def _canonical_phases(u: np.ndarray, vh: np.ndarray):
    """Resolve the SVD phase ambiguity for reproducible factors.

    Each left singular vector is rotated so its largest-magnitude entry is
    real positive; the paired right vector absorbs the conjugate phase, so
    the reconstruction is unchanged. Unpaired right vectors (when n2 > n1)
    are normalised the same way on their own.
    """
    rmin = min(u.shape[1], vh.shape[0])
    for c in range(u.shape[1]):
        col = u[:, c]
        idx = int(np.argmax(np.abs(col)))
        val = col[idx]
        if val == 0:
            continue
        ph = val / abs(val)
        u[:, c] = col * np.conj(ph)
        if c < rmin:
            vh[c, :] *= ph
    for r in range(rmin, vh.shape[0]):
        row = vh[r, :]
        idx = int(np.argmax(np.abs(row)))
        val = np.conj(row[idx])
        if val == 0:
            continue
        vh[r, :] = row * (val / abs(val))
    return u, vh


def tt_svd(
    x: ComplexTensor3, transform: UnitaryTransform, threads: int = 0
) -> TtSvdFactors:
    """Tensor SVD with unitary factors and a tubal-diagonal core.

    Computes a full matrix SVD of every transformed frontal slice, then
    transforms the stacked factors back. Satisfies
    ``x = t_product(U, t_product(S, tensor_hermitian_transpose(V, T), T), T)``
    to roundoff.

    Raises
    ------
    NumericError
        If the SVD fails to converge on some slice; the 1-based slice
        index is attached to the exception.
    """
    _check_transform(x, transform)
    n1, n2, n3 = x.dims
    rmin = min(n1, n2)
    xhat = transform.apply(x).slices
    uhat = np.zeros((n3, n1, n1), dtype=np.complex128)
    shat = np.zeros((n3, n1, n2), dtype=np.complex128)
    vhat = np.zeros((n3, n2, n2), dtype=np.complex128)
    svals = np.zeros((n3, rmin))
    diag = np.arange(rmin)

    def factor(k: int):
        try:
            u, s, vh = np.linalg.svd(xhat[k], full_matrices=True)
        except np.linalg.LinAlgError as exc:
            raise NumericError(
                f"SVD did not converge on transformed slice {k + 1}",
                slice_index=k + 1,
            ) from exc
        u, vh = _canonical_phases(u, vh)
        uhat[k] = u
        shat[k, diag, diag] = s
        vhat[k] = vh.conj().T
        svals[k] = s

    _map_slices(factor, n3, threads)
    svals.flags.writeable = False
    return TtSvdFactors(
        U=transform.apply_adjoint(ComplexTensor3._wrap(uhat)),
        S=transform.apply_adjoint(ComplexTensor3._wrap(shat)),
        V=transform.apply_adjoint(ComplexTensor3._wrap(vhat)),
        transform=transform,
        singular_values=svals,
    )


def transformed_singular_values(
    x: ComplexTensor3, transform: UnitaryTransform
) -> np.ndarray:
    """Singular values of every transformed frontal slice.

    Returns an array of shape ``(n3, min(n1, n2))`` with nonincreasing rows.
    """
    _check_transform(x, transform)
    xhat = transform.apply(x).slices
    try:
        return np.linalg.svd(xhat, compute_uv=False)
    except np.linalg.LinAlgError:
        # Retry slice by slice to report which one failed.
        for k in range(xhat.shape[0]):
            try:
                np.linalg.svd(xhat[k], compute_uv=False)
            except np.linalg.LinAlgError as exc:
                raise NumericError(
                    f"SVD did not converge on transformed slice {k + 1}",
                    slice_index=k + 1,
                ) from exc
        raise


def transformed_multirank(
    x: ComplexTensor3, transform: UnitaryTransform, tol: float = 1e-10
) -> MultirankVector:
    """Per-slice numerical ranks in the transformed domain.

    A singular value counts toward the rank of its slice when it exceeds
    ``tol`` times the largest singular value over all slices, so the cut
    is consistent across slices.
    """
    if tol < 0:
        raise ParameterError(f"rank tolerance must be nonnegative, got {tol}")
    svals = transformed_singular_values(x, transform)
    cut = tol * float(svals.max(initial=0.0))
    ranks = (svals > cut).sum(axis=1)
    return MultirankVector(tuple(int(r) for r in ranks), float(tol))


def sum_rank(x: ComplexTensor3, transform: UnitaryTransform, tol: float = 1e-10) -> int:
    """Total of the per-slice transformed ranks."""
    return transformed_multirank(x, transform, tol).total


def ttnn(x: ComplexTensor3, transform: UnitaryTransform) -> float:
    """Tensor nuclear norm: the sum of all transformed singular values."""
    return float(transformed_singular_values(x, transform).sum())


def transformed_spectral_norm(x: ComplexTensor3, transform: UnitaryTransform) -> float:
    """Largest singular value over all transformed frontal slices."""
    return float(transformed_singular_values(x, transform).max(initial=0.0))


def _threshold_vector(tau, n3: int) -> np.ndarray:
    taus = np.asarray(tau, dtype=float)
    if taus.ndim == 0:
        taus = np.full(n3, float(taus))
    elif taus.shape != (n3,):
        raise DimensionError(
            f"threshold vector has shape {taus.shape}, expected ({n3},)"
        )
    if np.any(taus < 0) or not np.all(np.isfinite(taus)):
        raise ParameterError("thresholds must be finite and nonnegative")
    return taus


def t_tsvt(
    y: ComplexTensor3,
    tau,
    transform: UnitaryTransform,
    threads: int = 0,
) -> ComplexTensor3:
    """Soft-threshold the transformed singular values of ``y``.

    For scalar ``tau`` this is the proximal operator of
    ``tau * ||.||_nuclear`` under the transform: every transformed slice
    has its singular values shrunk by ``max(sigma - tau, 0)`` before the
    slice is recomposed and the adjoint transform applied. ``tau`` may
    also be a length-``n3`` vector with one threshold per slice.
    """
    _check_transform(y, transform)
    n3 = y.dims[2]
    taus = _threshold_vector(tau, n3)
    yhat = transform.apply(y).slices
    out = np.zeros_like(yhat)

    def shrink(k: int):
        try:
            u, s, vh = np.linalg.svd(yhat[k], full_matrices=False)
        except np.linalg.LinAlgError as exc:
            raise NumericError(
                f"SVD did not converge on transformed slice {k + 1}",
                slice_index=k + 1,
            ) from exc
        shrunk = np.maximum(s - taus[k], 0.0)
        out[k] = (u * shrunk) @ vh

    _map_slices(shrink, n3, threads)
    return transform.apply_adjoint(ComplexTensor3._wrap(out))
