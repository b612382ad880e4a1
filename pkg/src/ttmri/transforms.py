"""Unitary transforms acting along the third tensor mode.

Every transform here is an isometry: it preserves the Frobenius norm and
inner products, and its adjoint is its exact inverse. The FFT and DCT use
the symmetric ``1/sqrt(n3)`` normalisation in both directions; the DCT is
the orthonormal type-II / type-III pair, which maps real data to real
data. Explicit matrices are accepted after a unitarity check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft

from .errors import DimensionError, ParameterError, UnitarityError
from .tensor import ComplexTensor3

__all__ = [
    "KINDS",
    "MATRIX_UNITARITY_TOL",
    "UnitaryTransform",
    "UnitarityReport",
    "make_transform",
    "check_unitarity",
]

KINDS = ("identity", "fft", "dct", "matrix")

# Acceptance bound for explicit matrices: ||U^H U - I||_F <= tol * n3.
MATRIX_UNITARITY_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class UnitaryTransform:
    """A unitary map along mode 3 together with its exact adjoint."""

    kind: str
    size: int
    matrix: np.ndarray | None = None

    def _check(self, x: ComplexTensor3):
        if x.dims[2] != self.size:
            raise DimensionError(
                f"transform of size {self.size} applied to tensor with n3={x.dims[2]}"
            )

    def apply(self, x: ComplexTensor3) -> ComplexTensor3:
        """Transform every mode-3 fiber ``x(i, j, :)``."""
        self._check(x)
        stack = x.slices
        if self.kind == "identity":
            return x
        if self.kind == "fft":
            return ComplexTensor3._wrap(np.fft.fft(stack, axis=0, norm="ortho"))
        if self.kind == "dct":
            return ComplexTensor3._wrap(
                scipy.fft.dct(stack, type=2, norm="ortho", axis=0)
            )
        return ComplexTensor3._wrap(np.tensordot(self.matrix, stack, axes=(1, 0)))

    def apply_adjoint(self, xhat: ComplexTensor3) -> ComplexTensor3:
        """Inverse of :meth:`apply` (the Hermitian transpose transform)."""
        self._check(xhat)
        stack = xhat.slices
        if self.kind == "identity":
            return xhat
        if self.kind == "fft":
            return ComplexTensor3._wrap(np.fft.ifft(stack, axis=0, norm="ortho"))
        if self.kind == "dct":
            return ComplexTensor3._wrap(
                scipy.fft.idct(stack, type=2, norm="ortho", axis=0)
            )
        return ComplexTensor3._wrap(
            np.tensordot(self.matrix.conj().T, stack, axes=(1, 0))
        )

    def __repr__(self):
        return f"UnitaryTransform(kind={self.kind!r}, size={self.size})"


def make_transform(kind: str, n3: int, matrix=None) -> UnitaryTransform:
    """Construct a mode-3 unitary transform.

    Parameters
    ----------
    kind : {"identity", "fft", "dct", "matrix"}
        Transform family. ``fft`` and ``dct`` are realised without
        materialising their matrices.
    n3 : int
        Length of the mode-3 fibers the transform acts on.
    matrix : array_like, optional
        Required for ``kind="matrix"``: an ``n3 x n3`` unitary matrix.
        Rejected with :class:`UnitarityError` if
        ``||U^H U - I||_F > 1e-10 * n3``.
    """
    if kind not in KINDS:
        raise ParameterError(f"unknown transform kind {kind!r}; expected one of {KINDS}")
    n3 = int(n3)
    if n3 < 1:
        raise ParameterError(f"transform size must be positive, got {n3}")
    if kind != "matrix":
        if matrix is not None:
            raise ParameterError(f"kind={kind!r} does not take an explicit matrix")
        return UnitaryTransform(kind, n3)
    if matrix is None:
        raise ParameterError("kind='matrix' requires an explicit matrix")
    mat = np.array(matrix, dtype=np.complex128)
    if mat.shape != (n3, n3):
        raise DimensionError(f"matrix shape {mat.shape} does not match size {n3}")
    deviation = float(np.linalg.norm(mat.conj().T @ mat - np.eye(n3)))
    if deviation > MATRIX_UNITARITY_TOL * n3:
        raise UnitarityError("matrix is not unitary", deviation)
    mat.flags.writeable = False
    return UnitaryTransform("matrix", n3, mat)


@dataclass(frozen=True)
class UnitarityReport:
    """Maximum relative deviations found by randomized isometry trials."""

    norm_deviation: float
    inner_deviation: float
    roundtrip_deviation: float
    trials: int
    tolerance: float

    @property
    def max_deviation(self) -> float:
        return max(self.norm_deviation, self.inner_deviation, self.roundtrip_deviation)

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tolerance


def check_unitarity(
    transform: UnitaryTransform, trials: int = 10, tol: float = 1e-12, seed: int = 0
) -> UnitarityReport:
    """Probe norm/inner-product preservation and adjoint invertibility.

    Runs ``trials`` random tensors through the transform and reports the
    worst relative deviation of the Frobenius norm, the inner product, and
    the apply/adjoint round trip.
    """
    rng = np.random.default_rng(seed)
    n3 = transform.size
    dev_norm = dev_inner = dev_round = 0.0
    for _ in range(max(1, int(trials))):
        a = _random_tensor(rng, (4, 3, n3))
        b = _random_tensor(rng, (4, 3, n3))
        ah = transform.apply(a)
        bh = transform.apply(b)
        na = np.linalg.norm(a.slices)
        dev_norm = max(dev_norm, abs(np.linalg.norm(ah.slices) - na) / na)
        ip = np.vdot(a.slices, b.slices)
        ip_hat = np.vdot(ah.slices, bh.slices)
        dev_inner = max(dev_inner, abs(ip_hat - ip) / max(abs(ip), 1e-300))
        back = transform.apply_adjoint(ah)
        dev_round = max(dev_round, np.linalg.norm(back.slices - a.slices) / na)
    return UnitarityReport(dev_norm, dev_inner, dev_round, int(trials), float(tol))


def _random_tensor(rng, dims) -> ComplexTensor3:
    n1, n2, n3 = dims
    re = rng.standard_normal((n3, n1, n2))
    im = rng.standard_normal((n3, n1, n2))
    return ComplexTensor3._wrap(re + 1j * im)
