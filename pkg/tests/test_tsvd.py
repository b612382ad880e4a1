import numpy as np
import pytest

from ttmri import (
    ComplexTensor3,
    DimensionError,
    ParameterError,
    frobenius_norm,
    identity_tensor,
    inner_product,
    is_unitary_tensor,
    make_transform,
    sum_rank,
    t_product,
    t_tsvt,
    tensor_hermitian_transpose,
    transformed_multirank,
    transformed_singular_values,
    transformed_spectral_norm,
    tt_svd,
    ttnn,
)

from conftest import (
    bdiag_dense,
    fiber_transform,
    nuclear_norm_dense,
    rand_tensor,
    random_unitary,
    transform_matrix,
)


def reconstruction(factors, transform):
    vh = tensor_hermitian_transpose(factors.V, transform)
    return t_product(factors.U, t_product(factors.S, vh, transform), transform)


class TestTProduct:
    def test_identity_tensor_law(self):
        rng = np.random.default_rng(0)
        for kind in ("fft", "dct"):
            t = make_transform(kind, 4)
            a = rand_tensor(rng, (5, 3, 4))
            eye = identity_tensor(5, 4, t)
            out = t_product(eye, a, t)
            assert frobenius_norm(out - a) <= 1e-12 * frobenius_norm(a)
            eye_right = identity_tensor(3, 4, t)
            out = t_product(a, eye_right, t)
            assert frobenius_norm(out - a) <= 1e-12 * frobenius_norm(a)

    def test_identity_transform_reduces_to_slicewise_product(self):
        rng = np.random.default_rng(1)
        a = rand_tensor(rng, (3, 4, 5))
        b = rand_tensor(rng, (4, 2, 5))
        t = make_transform("identity", 5)
        c = t_product(a, b, t)
        for k in range(1, 6):
            assert np.array_equal(
                c.frontal_slice(k), a.frontal_slice(k) @ b.frontal_slice(k)
            )

    def test_matches_dense_block_diagonal_oracle(self):
        rng = np.random.default_rng(2)
        n3 = 4
        a = rand_tensor(rng, (3, 5, n3))
        b = rand_tensor(rng, (5, 2, n3))
        t = make_transform("fft", n3)
        c = t_product(a, b, t)
        # Independent path: explicit DFT on fibers, dense block-diagonal
        # product, inverse fiber transform.
        w = transform_matrix("fft", n3)
        ahat = fiber_transform(a.to_array(), w)
        bhat = fiber_transform(b.to_array(), w)
        big = bdiag_dense(ahat) @ bdiag_dense(bhat)
        chat = np.stack(
            [big[k * 3 : (k + 1) * 3, k * 2 : (k + 1) * 2] for k in range(n3)], axis=2
        )
        expected = fiber_transform(chat, w.conj().T)
        assert np.allclose(c.to_array(), expected, rtol=1e-12, atol=1e-12)

    def test_dimension_errors(self):
        t = make_transform("fft", 3)
        a = ComplexTensor3.zeros((3, 4, 3))
        with pytest.raises(DimensionError):
            t_product(a, ComplexTensor3.zeros((5, 2, 3)), t)
        with pytest.raises(DimensionError):
            t_product(a, ComplexTensor3.zeros((4, 2, 2)), t)
        with pytest.raises(DimensionError):
            t_product(ComplexTensor3.zeros((3, 4, 2)), ComplexTensor3.zeros((4, 2, 2)), t)


class TestHermitianTranspose:
    def test_identity_transform_is_slicewise_conj_transpose(self):
        rng = np.random.default_rng(3)
        a = rand_tensor(rng, (3, 5, 4))
        t = make_transform("identity", 4)
        ah = tensor_hermitian_transpose(a, t)
        for k in range(1, 5):
            assert np.array_equal(ah.frontal_slice(k), a.frontal_slice(k).conj().T)

    def test_involution(self):
        rng = np.random.default_rng(4)
        a = rand_tensor(rng, (3, 5, 4))
        t = make_transform("fft", 4)
        back = tensor_hermitian_transpose(tensor_hermitian_transpose(a, t), t)
        assert frobenius_norm(back - a) <= 1e-12 * frobenius_norm(a)

    def test_gram_product_is_hermitian_slicewise(self):
        rng = np.random.default_rng(5)
        a = rand_tensor(rng, (4, 6, 3))
        t = make_transform("fft", 3)
        gram = t_product(a, tensor_hermitian_transpose(a, t), t)
        ghat = t.apply(gram).slices
        assert np.allclose(ghat, ghat.conj().transpose(0, 2, 1), atol=1e-12)


class TestIdentityAndUnitary:
    def test_identity_transform_identity_tensor_slices(self):
        t = make_transform("identity", 3)
        eye = identity_tensor(4, 3, t)
        for k in range(1, 4):
            assert np.array_equal(eye.frontal_slice(k), np.eye(4))

    def test_identity_tensor_verified_through_law_not_entries(self):
        rng = np.random.default_rng(6)
        t = make_transform("fft", 4)
        eye = identity_tensor(3, 4, t)
        a = rand_tensor(rng, (3, 5, 4))
        assert frobenius_norm(t_product(eye, a, t) - a) <= 1e-12 * frobenius_norm(a)

    def test_identity_tensor_is_unitary(self):
        t = make_transform("fft", 4)
        assert is_unitary_tensor(identity_tensor(3, 4, t), t)

    def test_zero_tensor_not_unitary(self):
        t = make_transform("fft", 4)
        assert not is_unitary_tensor(ComplexTensor3.zeros((3, 3, 4)), t)

    def test_nonsquare_raises(self):
        t = make_transform("fft", 4)
        with pytest.raises(DimensionError):
            is_unitary_tensor(ComplexTensor3.zeros((3, 4, 4)), t)


class TestTtSvd:
    def test_zero_tensor(self):
        t = make_transform("fft", 3)
        fac = tt_svd(ComplexTensor3.zeros((4, 5, 3)), t)
        assert frobenius_norm(fac.S) == 0.0
        assert fac.singular_values.shape == (3, 4)
        assert np.all(fac.singular_values == 0.0)
        rank = transformed_multirank(ComplexTensor3.zeros((4, 5, 3)), t)
        assert rank.ranks == (0, 0, 0)
        assert rank.total == 0

    def test_single_slice_matches_matrix_svd_oracle(self):
        rng = np.random.default_rng(7)
        a = rng.standard_normal((5, 4)) + 1j * rng.standard_normal((5, 4))
        x = ComplexTensor3(a[None, :, :])
        t = make_transform("identity", 1)
        fac = tt_svd(x, t)
        oracle = np.linalg.svd(a, compute_uv=False)
        assert np.allclose(fac.singular_values[0], oracle, rtol=1e-12, atol=1e-12)

    def test_random_reconstruction(self):
        rng = np.random.default_rng(8)
        x = rand_tensor(rng, (6, 5, 4))
        t = make_transform("fft", 4)
        fac = tt_svd(x, t)
        err = frobenius_norm(reconstruction(fac, t) - x)
        assert err <= 1e-10 * frobenius_norm(x)

    @pytest.mark.parametrize("kind", ("identity", "fft", "dct", "matrix"))
    def test_factor_properties(self, kind):
        rng = np.random.default_rng(9)
        n3 = 4
        t = (
            make_transform("matrix", n3, random_unitary(rng, n3))
            if kind == "matrix"
            else make_transform(kind, n3)
        )
        x = rand_tensor(rng, (5, 3, n3))
        fac = tt_svd(x, t)
        assert is_unitary_tensor(fac.U, t, tol=1e-10)
        assert is_unitary_tensor(fac.V, t, tol=1e-10)
        # Transformed core slices are diagonal, nonnegative, nonincreasing.
        shat = t.apply(fac.S).slices
        rmin = 3
        for k in range(n3):
            slice_norm = np.linalg.norm(shat[k])
            diag = np.real(np.diag(shat[k]))
            off = shat[k].copy()
            off[np.arange(rmin), np.arange(rmin)] = 0.0
            assert np.linalg.norm(off) <= 1e-12 * max(slice_norm, 1.0)
            assert np.all(diag >= -1e-12)
            assert np.all(np.diff(diag) <= 1e-12)
        assert np.allclose(
            fac.singular_values,
            np.abs(shat[:, np.arange(rmin), np.arange(rmin)]),
            atol=1e-12,
        )

    def test_threads_match_sequential(self):
        rng = np.random.default_rng(10)
        x = rand_tensor(rng, (6, 5, 4))
        t = make_transform("fft", 4)
        seq = tt_svd(x, t, threads=0)
        par = tt_svd(x, t, threads=2)
        assert np.array_equal(seq.U.slices, par.U.slices)
        assert np.array_equal(seq.S.slices, par.S.slices)
        assert np.array_equal(seq.V.slices, par.V.slices)


class TestRanks:
    def test_identity_tensor_full_rank(self):
        t = make_transform("fft", 2)
        eye = identity_tensor(3, 2, t)
        rank = transformed_multirank(eye, t)
        assert rank.ranks == (3, 3)
        assert sum_rank(eye, t) == 6

    def test_low_rank_construction(self):
        rng = np.random.default_rng(11)
        r, n1, n2, n3 = 2, 6, 7, 4
        t = make_transform("fft", n3)
        a = rand_tensor(rng, (n1, r, n3))
        b = rand_tensor(rng, (r, n2, n3))
        x = t_product(a, b, t)
        rank = transformed_multirank(x, t)
        assert all(ri <= r for ri in rank.ranks)
        assert rank.ranks == (r,) * n3  # generic random factors hit r exactly
        assert sum_rank(x, t) == r * n3

    def test_negative_tolerance(self):
        t = make_transform("fft", 2)
        with pytest.raises(ParameterError):
            transformed_multirank(ComplexTensor3.zeros((2, 2, 2)), t, tol=-1.0)


class TestNorms:
    def test_zero_tensor(self):
        t = make_transform("fft", 3)
        z = ComplexTensor3.zeros((4, 5, 3))
        assert ttnn(z, t) == 0.0
        assert transformed_spectral_norm(z, t) == 0.0

    def test_identity_transform_sums_slice_nuclear_norms(self):
        rng = np.random.default_rng(12)
        x = rand_tensor(rng, (4, 5, 3))
        t = make_transform("identity", 3)
        expected = sum(nuclear_norm_dense(x.frontal_slice(k)) for k in range(1, 4))
        assert ttnn(x, t) == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize("kind", ("identity", "fft", "dct", "matrix"))
    def test_ttnn_matches_dense_block_diagonal_oracle(self, kind):
        rng = np.random.default_rng(13)
        n3 = 4
        mat = random_unitary(rng, n3) if kind == "matrix" else None
        t = (
            make_transform("matrix", n3, mat)
            if kind == "matrix"
            else make_transform(kind, n3)
        )
        x = rand_tensor(rng, (5, 6, n3))
        w = transform_matrix(kind, n3, mat)
        oracle = nuclear_norm_dense(bdiag_dense(fiber_transform(x.to_array(), w)))
        assert ttnn(x, t) == pytest.approx(oracle, rel=1e-10)

    def test_spectral_norm_identity_tensor(self):
        t = make_transform("fft", 3)
        assert transformed_spectral_norm(identity_tensor(4, 3, t), t) == pytest.approx(
            1.0, rel=1e-12
        )

    def test_spectral_le_ttnn_with_rank_one_equality(self):
        rng = np.random.default_rng(14)
        t = make_transform("fft", 3)
        x = rand_tensor(rng, (4, 5, 3))
        assert transformed_spectral_norm(x, t) <= ttnn(x, t) + 1e-12
        assert sum_rank(x, t) > 1
        assert transformed_spectral_norm(x, t) < ttnn(x, t)
        # Sum rank 1: one rank-one transformed slice, all others zero.
        uhat = np.zeros((3, 4, 5), dtype=np.complex128)
        uhat[1] = np.outer(rng.standard_normal(4), rng.standard_normal(5))
        y = t.apply_adjoint(ComplexTensor3(uhat))
        assert sum_rank(y, t) == 1
        assert transformed_spectral_norm(y, t) == pytest.approx(ttnn(y, t), rel=1e-12)

    def test_norms_invariant_between_fft_and_explicit_dft(self):
        rng = np.random.default_rng(15)
        n3 = 5
        x = rand_tensor(rng, (4, 6, n3))
        t_fft = make_transform("fft", n3)
        t_mat = make_transform("matrix", n3, transform_matrix("fft", n3))
        assert ttnn(x, t_fft) == pytest.approx(ttnn(x, t_mat), rel=1e-10)
        assert transformed_spectral_norm(x, t_fft) == pytest.approx(
            transformed_spectral_norm(x, t_mat), rel=1e-10
        )


class TestDuality:
    def test_sandwich_and_attainment(self):
        rng = np.random.default_rng(16)
        for trial in range(10):
            n1, n2, n3 = rng.integers(2, 7, size=3)
            t = make_transform("fft", int(n3))
            x = rand_tensor(rng, (int(n1), int(n2), int(n3)))
            nuclear = ttnn(x, t)
            # Any unit-spectral-norm direction stays below the nuclear norm.
            a = rand_tensor(rng, (int(n1), int(n2), int(n3)))
            a = a / transformed_spectral_norm(a, t)
            assert inner_product(x, a).real <= nuclear + 1e-9
            # The factor witness attains it (economy factors).
            fac = tt_svd(x, t)
            r = int(min(n1, n2))
            u_r = ComplexTensor3(fac.U.slices[:, :, :r])
            v_r = ComplexTensor3(fac.V.slices[:, :, :r])
            witness = t_product(u_r, tensor_hermitian_transpose(v_r, t), t)
            assert transformed_spectral_norm(witness, t) <= 1 + 1e-9
            attained = inner_product(x, witness).real
            assert attained == pytest.approx(nuclear, rel=1e-9)


def svt_oracle(x, kind, n3, tau, mat=None):
    """Independent shrinkage path through explicit transform matrices."""
    w = transform_matrix(kind, n3, mat)
    xhat = fiber_transform(x.to_array(), w)
    out = np.zeros_like(xhat)
    taus = np.broadcast_to(np.asarray(tau, dtype=float), (n3,))
    for k in range(n3):
        u, s, vh = np.linalg.svd(xhat[:, :, k], full_matrices=False)
        out[:, :, k] = (u * np.maximum(s - taus[k], 0.0)) @ vh
    return fiber_transform(out, w.conj().T)


class TestTsvt:
    def test_zero_threshold_returns_input(self):
        rng = np.random.default_rng(17)
        x = rand_tensor(rng, (5, 4, 3))
        t = make_transform("fft", 3)
        out = t_tsvt(x, 0.0, t)
        assert frobenius_norm(out - x) <= 1e-12 * frobenius_norm(x)

    def test_full_shrinkage_returns_zero(self):
        rng = np.random.default_rng(18)
        x = rand_tensor(rng, (5, 4, 3))
        t = make_transform("fft", 3)
        tau = transformed_spectral_norm(x, t)
        assert frobenius_norm(t_tsvt(x, tau, t)) == 0.0

    def test_matches_per_slice_svt_oracle(self):
        rng = np.random.default_rng(19)
        x = rand_tensor(rng, (5, 4, 3))
        t = make_transform("fft", 3)
        tau = 0.8
        expected = svt_oracle(x, "fft", 3, tau)
        got = t_tsvt(x, tau, t).to_array()
        assert np.allclose(got, expected, rtol=1e-10, atol=1e-10)

    def test_per_slice_vector_thresholds(self):
        rng = np.random.default_rng(20)
        x = rand_tensor(rng, (5, 4, 3))
        t = make_transform("dct", 3)
        taus = np.array([0.0, 0.7, 2.5])
        expected = svt_oracle(x, "dct", 3, taus)
        got = t_tsvt(x, taus, t).to_array()
        assert np.allclose(got, expected, rtol=1e-10, atol=1e-10)

    def test_prox_objective_beats_random_perturbations(self):
        rng = np.random.default_rng(21)
        x = rand_tensor(rng, (5, 4, 3))
        t = make_transform("fft", 3)
        tau = 0.6
        z = t_tsvt(x, tau, t)

        def objective(c):
            return tau * ttnn(c, t) + 0.5 * frobenius_norm(c - x) ** 2

        best = objective(z)
        for _ in range(2000):
            d = rand_tensor(rng, (5, 4, 3))
            d = d * (rng.uniform(0.001, 0.5) / frobenius_norm(d))
            assert objective(z + d) >= best - 1e-10 * max(best, 1.0)

    def test_negative_threshold_rejected(self):
        t = make_transform("fft", 3)
        x = ComplexTensor3.zeros((2, 2, 3))
        with pytest.raises(ParameterError):
            t_tsvt(x, -0.5, t)
        with pytest.raises(ParameterError):
            t_tsvt(x, np.array([0.1, -0.1, 0.2]), t)

    def test_wrong_length_vector_rejected(self):
        t = make_transform("fft", 3)
        with pytest.raises(DimensionError):
            t_tsvt(ComplexTensor3.zeros((2, 2, 3)), np.array([0.1, 0.2]), t)

    def test_nonexpansive(self):
        rng = np.random.default_rng(22)
        t = make_transform("fft", 4)
        for _ in range(20):
            y1 = rand_tensor(rng, (5, 4, 4))
            y2 = rand_tensor(rng, (5, 4, 4))
            tau = float(rng.uniform(0.01, 3.0))
            lhs = frobenius_norm(t_tsvt(y1, tau, t) - t_tsvt(y2, tau, t))
            assert lhs <= frobenius_norm(y1 - y2) * (1 + 1e-12)

    def test_ttnn_convexity_probe(self):
        rng = np.random.default_rng(23)
        t = make_transform("fft", 3)
        for _ in range(20):
            x = rand_tensor(rng, (4, 5, 3))
            y = rand_tensor(rng, (4, 5, 3))
            mid = ttnn((x + y) / 2.0, t)
            assert mid <= 0.5 * ttnn(x, t) + 0.5 * ttnn(y, t) + 1e-10

    def test_threads_match_sequential(self):
        rng = np.random.default_rng(24)
        x = rand_tensor(rng, (6, 5, 4))
        t = make_transform("fft", 4)
        assert np.array_equal(
            t_tsvt(x, 0.4, t, threads=0).slices, t_tsvt(x, 0.4, t, threads=2).slices
        )


def test_singular_values_shape_and_order():
    rng = np.random.default_rng(25)
    x = rand_tensor(rng, (6, 4, 3))
    t = make_transform("fft", 3)
    sv = transformed_singular_values(x, t)
    assert sv.shape == (3, 4)
    assert np.all(np.diff(sv, axis=1) <= 0)
    assert np.all(sv >= 0)
