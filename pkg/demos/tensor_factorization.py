"""Tour of the tensor-product algebra: factorization, ranks, shrinkage.

Run with: python demos/tensor_factorization.py
"""

import numpy as np

import ttmri as tt

rng = np.random.default_rng(0)

# A random 8 x 6 x 5 complex tensor and three transforms to factor it under.
x = tt.ComplexTensor3(rng.standard_normal((5, 8, 6)) + 1j * rng.standard_normal((5, 8, 6)))
print(f"tensor: {x!r}, ||X||_F = {tt.frobenius_norm(x):.4f}")

for kind in ("identity", "fft", "dct"):
    t = tt.make_transform(kind, 5)
    fac = tt.tt_svd(x, t)
    vh = tt.tensor_hermitian_transpose(fac.V, t)
    rec = tt.t_product(fac.U, tt.t_product(fac.S, vh, t), t)
    err = tt.frobenius_norm(rec - x) / tt.frobenius_norm(x)
    print(f"[{kind:8s}] reconstruction error {err:.2e}, "
          f"TTNN = {tt.ttnn(x, t):8.4f}, "
          f"spectral = {tt.transformed_spectral_norm(x, t):7.4f}, "
          f"multirank = {tt.transformed_multirank(x, t).ranks}")

# A genuinely low-tubal-rank tensor: product of thin random factors.
t = tt.make_transform("fft", 5)
a = tt.ComplexTensor3(rng.standard_normal((5, 8, 2)) + 1j * rng.standard_normal((5, 8, 2)))
b = tt.ComplexTensor3(rng.standard_normal((5, 2, 6)) + 1j * rng.standard_normal((5, 2, 6)))
low = tt.t_product(a, b, t)
print(f"\nrank-2 product: multirank = {tt.transformed_multirank(low, t).ranks}, "
      f"sum rank = {tt.sum_rank(low, t)}")

# Singular value shrinkage: the prox of the nuclear norm. Watch the rank
# drop as the threshold grows.
print("\nshrinkage of the full-rank tensor:")
for tau in (0.0, 0.5, 2.0, 5.0):
    z = tt.t_tsvt(x, tau, t)
    print(f"  tau = {tau:4.1f}: sum rank {tt.sum_rank(z, t):2d}, "
          f"||Z - X||_F = {tt.frobenius_norm(z - x):8.4f}, "
          f"TTNN(Z) = {tt.ttnn(z, t):8.4f}")

# The factors certify the nuclear norm: the unit-spectral-norm witness
# built from U and V attains <X, A> = TTNN(X).
fac = tt.tt_svd(x, t)
r = min(x.dims[0], x.dims[1])
u_r = tt.ComplexTensor3(fac.U.slices[:, :, :r])
v_r = tt.ComplexTensor3(fac.V.slices[:, :, :r])
witness = tt.t_product(u_r, tt.tensor_hermitian_transpose(v_r, t), t)
print(f"\nduality witness: spectral norm {tt.transformed_spectral_norm(witness, t):.6f}, "
      f"<X, A> = {tt.inner_product(x, witness).real:.6f} vs TTNN = {tt.ttnn(x, t):.6f}")
