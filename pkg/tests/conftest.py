"""Shared helpers and independent oracle paths for the test suite.

The oracle functions here deliberately avoid the library's transform and
product code: transforms are applied through explicit matrices with
einsum, block-diagonal matrices are densified with scipy, and SVDs go
straight to numpy. Tests compare library outputs against these paths.
"""

import numpy as np
import scipy.fft
import scipy.linalg

from ttmri import ComplexTensor3


def rand_tensor(rng, dims) -> ComplexTensor3:
    n1, n2, n3 = dims
    return ComplexTensor3(
        rng.standard_normal((n3, n1, n2)) + 1j * rng.standard_normal((n3, n1, n2))
    )


def random_unitary(rng, n) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
    d = np.diag(r)
    return q * (d / np.abs(d))


def transform_matrix(kind: str, n3: int, matrix=None) -> np.ndarray:
    """Explicit matrix realising one of the library's transform kinds."""
    if kind == "identity":
        return np.eye(n3, dtype=np.complex128)
    if kind == "fft":
        return scipy.linalg.dft(n3, scale="sqrtn")
    if kind == "dct":
        return scipy.fft.dct(np.eye(n3), type=2, norm="ortho", axis=0).astype(
            np.complex128
        )
    if kind == "matrix":
        return np.asarray(matrix, dtype=np.complex128)
    raise ValueError(kind)


def fiber_transform(arr_ijk: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Apply matrix ``w`` to every mode-3 fiber of an (n1, n2, n3) array."""
    return np.einsum("ab,ijb->ija", w, arr_ijk)


def bdiag_dense(arr_ijk: np.ndarray) -> np.ndarray:
    """Densify the block-diagonal matrix of an (n1, n2, n3) array's slices."""
    return scipy.linalg.block_diag(*[arr_ijk[:, :, k] for k in range(arr_ijk.shape[2])])


def nuclear_norm_dense(mat: np.ndarray) -> float:
    return float(np.linalg.svd(mat, compute_uv=False).sum())
