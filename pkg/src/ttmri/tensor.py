"""Dense 3-way complex tensors with contiguous frontal slices.

The backing array of a :class:`ComplexTensor3` has shape ``(n3, n1, n2)``
in C order, so frontal slices are contiguous and the entry ``(i, j, k)``
(1-based, k indexing frontal slices) sits at flat offset
``((k-1)*n1 + (i-1))*n2 + (j-1)``. The public slice API counts from 1 to
match the usual mathematical notation.

All values are complex double precision. Tensors are immutable after
construction; every operation returns a new tensor, so values can be
shared freely across threads.
"""

from __future__ import annotations

from numbers import Number

import numpy as np

from .errors import DimensionError

__all__ = [
    "ComplexTensor3",
    "BlockDiagView",
    "new_tensor",
    "frobenius_norm",
    "inner_product",
    "bdiag",
    "fold",
]


class ComplexTensor3:
    """Immutable dense complex tensor of order 3.

    Construct from a stack of frontal slices (shape ``(n3, n1, n2)``), or
    use :meth:`from_array` for an array in ``(n1, n2, n3)`` math order, or
    :func:`new_tensor` for flat data in storage order.
    """

    __slots__ = ("_data",)

    def __init__(self, slices):
        arr = np.array(slices, dtype=np.complex128, order="C")
        if arr.ndim != 3:
            raise DimensionError(f"expected a 3-way array, got ndim={arr.ndim}")
        if min(arr.shape) < 1:
            raise DimensionError(f"all dimensions must be positive, got {arr.shape}")
        arr.flags.writeable = False
        self._data = arr

    @classmethod
    def _wrap(cls, arr: np.ndarray) -> "ComplexTensor3":
        # Internal fast path: takes ownership of a freshly computed array.
        arr = np.ascontiguousarray(arr, dtype=np.complex128)
        arr.flags.writeable = False
        obj = cls.__new__(cls)
        obj._data = arr
        return obj

    @classmethod
    def from_array(cls, array) -> "ComplexTensor3":
        """Build from an array in ``(n1, n2, n3)`` order."""
        arr = np.asarray(array)
        if arr.ndim != 3:
            raise DimensionError(f"expected a 3-way array, got ndim={arr.ndim}")
        return cls(np.transpose(arr, (2, 0, 1)))

    @classmethod
    def zeros(cls, dims) -> "ComplexTensor3":
        n1, n2, n3 = _check_dims(dims)
        return cls._wrap(np.zeros((n3, n1, n2), dtype=np.complex128))

    @property
    def dims(self) -> tuple[int, int, int]:
        """Logical dimensions ``(n1, n2, n3)``."""
        n3, n1, n2 = self._data.shape
        return (n1, n2, n3)

    @property
    def slices(self) -> np.ndarray:
        """Read-only view of the frontal slices, shape ``(n3, n1, n2)``."""
        return self._data

    def frontal_slice(self, k: int) -> np.ndarray:
        """Read-only view of frontal slice ``k`` (1-based), shape ``(n1, n2)``."""
        n3 = self._data.shape[0]
        if not 1 <= k <= n3:
            raise IndexError(f"slice index {k} outside 1..{n3}")
        return self._data[k - 1]

    def to_array(self) -> np.ndarray:
        """Copy of the contents in ``(n1, n2, n3)`` order."""
        return np.transpose(self._data, (1, 2, 0)).copy()

    def _binary(self, other, op):
        if not isinstance(other, ComplexTensor3):
            return NotImplemented
        if other.dims != self.dims:
            raise DimensionError(f"dimension mismatch: {self.dims} vs {other.dims}")
        return ComplexTensor3._wrap(op(self._data, other._data))

    def __add__(self, other):
        return self._binary(other, np.add)

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __mul__(self, scalar):
        if not isinstance(scalar, Number):
            return NotImplemented
        return ComplexTensor3._wrap(self._data * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        if not isinstance(scalar, Number):
            return NotImplemented
        return ComplexTensor3._wrap(self._data / scalar)

    def __neg__(self):
        return ComplexTensor3._wrap(-self._data)

    def __repr__(self):
        n1, n2, n3 = self.dims
        return f"ComplexTensor3(dims=({n1}, {n2}, {n3}))"


class BlockDiagView:
    """A tensor interpreted as the block-diagonal matrix of its frontal slices.

    Block ``k`` of the ``(n1*n3) x (n2*n3)`` matrix is frontal slice ``k``
    of the source tensor. Off-block zeros are implicit; :meth:`to_dense`
    materialises them explicitly.
    """

    __slots__ = ("_source",)

    def __init__(self, source: ComplexTensor3):
        if not isinstance(source, ComplexTensor3):
            raise TypeError("BlockDiagView wraps a ComplexTensor3")
        self._source = source

    @property
    def source(self) -> ComplexTensor3:
        return self._source

    @property
    def shape(self) -> tuple[int, int]:
        n1, n2, n3 = self._source.dims
        return (n1 * n3, n2 * n3)

    def block(self, k: int) -> np.ndarray:
        return self._source.frontal_slice(k)

    def to_dense(self) -> np.ndarray:
        """Materialise the full block-diagonal matrix, zeros included."""
        n1, n2, n3 = self._source.dims
        out = np.zeros((n1 * n3, n2 * n3), dtype=np.complex128)
        for k in range(n3):
            out[k * n1 : (k + 1) * n1, k * n2 : (k + 1) * n2] = self._source.slices[k]
        return out

    def __matmul__(self, other):
        if not isinstance(other, BlockDiagView):
            return NotImplemented
        a, b = self._source, other._source
        if a.dims[2] != b.dims[2]:
            raise DimensionError(f"block counts differ: {a.dims[2]} vs {b.dims[2]}")
        if a.dims[1] != b.dims[0]:
            raise DimensionError(
                f"inner dimensions differ: {a.dims[1]} vs {b.dims[0]}"
            )
        return BlockDiagView(ComplexTensor3._wrap(a.slices @ b.slices))

    def __repr__(self):
        return f"BlockDiagView(shape={self.shape}, source={self._source!r})"


def _check_dims(dims) -> tuple[int, int, int]:
    try:
        n1, n2, n3 = (int(d) for d in dims)
    except (TypeError, ValueError) as exc:
        raise DimensionError(f"dims must be three integers, got {dims!r}") from exc
    if n1 < 1 or n2 < 1 or n3 < 1:
        raise DimensionError(f"dims must be positive, got {(n1, n2, n3)}")
    return n1, n2, n3


def new_tensor(dims, data) -> ComplexTensor3:
    """Build a tensor from flat data in storage order.

    ``data`` holds the entries slice-major, row-major within a slice:
    entry ``(i, j, k)`` at offset ``((k-1)*n1 + (i-1))*n2 + (j-1)``.
    """
    n1, n2, n3 = _check_dims(dims)
    flat = np.asarray(data, dtype=np.complex128).ravel()
    if flat.size != n1 * n2 * n3:
        raise DimensionError(
            f"data length {flat.size} does not match dims {(n1, n2, n3)}"
        )
    return ComplexTensor3(flat.reshape(n3, n1, n2))


def frobenius_norm(x: ComplexTensor3) -> float:
    """Square root of the sum of squared entry magnitudes."""
    return float(np.linalg.norm(x.slices))


def inner_product(a: ComplexTensor3, b: ComplexTensor3) -> complex:
    """Sum over all entries of ``conj(a) * b``."""
    if a.dims != b.dims:
        raise DimensionError(f"dimension mismatch: {a.dims} vs {b.dims}")
    return complex(np.vdot(a.slices, b.slices))


def bdiag(xhat: ComplexTensor3) -> BlockDiagView:
    """Block-diagonal matrix view of a tensor's frontal slices."""
    return BlockDiagView(xhat)


def fold(view: BlockDiagView) -> ComplexTensor3:
    """Fold a block-diagonal view back into its source tensor (bit-exact)."""
    return view.source
