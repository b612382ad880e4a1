"""Built-in invariant suite behind the ``check`` command.

Each check probes one contract of the library with randomized trials at a
fixed seed and reports the worst deviation it saw. ``level="quick"`` runs
reduced trial counts and sizes; ``level="full"`` runs the complete suite
including a small end-to-end recovery experiment.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import admm, mri, tsvd
from .tensor import ComplexTensor3, bdiag, fold, frobenius_norm, inner_product
from .transforms import make_transform

__all__ = ["CheckResult", "run_checks", "LEVELS"]

LEVELS = ("quick", "full")


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _rand_tensor(rng, dims):
    n1, n2, n3 = dims
    return ComplexTensor3._wrap(
        rng.standard_normal((n3, n1, n2)) + 1j * rng.standard_normal((n3, n1, n2))
    )


def _random_unitary(rng, n):
    q, r = np.linalg.qr(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def _transform_set(n3, rng):
    dft = scipy.linalg.dft(n3, scale="sqrtn")
    return [
        make_transform("identity", n3),
        make_transform("fft", n3),
        make_transform("dct", n3),
        make_transform("matrix", n3, dft),
        make_transform("matrix", n3, _random_unitary(rng, n3)),
    ]


def _check_tensor_algebra(level):
    rng = np.random.default_rng(11)
    trials = 5 if level == "quick" else 25
    worst = 0.0
    for _ in range(trials):
        dims = tuple(int(d) for d in rng.integers(1, 7, size=3))
        a = _rand_tensor(rng, dims)
        b = _rand_tensor(rng, dims)
        if not np.array_equal(fold(bdiag(a)).slices, a.slices):
            return False, "fold(bdiag(X)) differs from X"
        sym = abs(inner_product(a, b) - np.conj(inner_product(b, a)))
        worst = max(worst, sym / max(frobenius_norm(a) * frobenius_norm(b), 1e-30))
        self_ip = inner_product(a, a)
        norm_sq = frobenius_norm(a) ** 2
        worst = max(worst, abs(self_ip.real - norm_sq) / norm_sq)
        worst = max(worst, abs(self_ip.imag) / norm_sq)
        tri = frobenius_norm(a + b) - (frobenius_norm(a) + frobenius_norm(b))
        if tri > 1e-12 * frobenius_norm(a + b):
            return False, f"triangle inequality violated by {tri:.3e}"
    return worst <= 1e-12, f"max relative deviation {worst:.3e}"


def _check_transform_isometry(level):
    rng = np.random.default_rng(12)
    trials = 3 if level == "quick" else 10
    worst = 0.0
    for n3 in (1, 2, 5, 8):
        for t in _transform_set(n3, rng):
            for _ in range(trials):
                x = _rand_tensor(rng, (5, 4, n3))
                xh = t.apply(x)
                nx_ = frobenius_norm(x)
                worst = max(worst, abs(frobenius_norm(xh) - nx_) / nx_)
                back = t.apply_adjoint(xh)
                worst = max(worst, frobenius_norm(back - x) / nx_)
    return worst <= 1e-12, f"max relative deviation {worst:.3e}"


def _check_dct_real(level):
    rng = np.random.default_rng(13)
    t = make_transform("dct", 6)
    x = ComplexTensor3(rng.standard_normal((6, 4, 3)).astype(np.complex128))
    worst = float(np.abs(t.apply(x).slices.imag).max())
    fft1 = make_transform("fft", 1)
    y = _rand_tensor(rng, (4, 3, 1))
    ident = float(np.abs(fft1.apply(y).slices - y.slices).max())
    ok = worst <= 1e-12 and ident <= 1e-12
    return ok, f"dct imag {worst:.3e}, fft(n3=1) identity dev {ident:.3e}"


def _check_tsvd_exactness(level):
    rng = np.random.default_rng(14)
    trials = 4 if level == "quick" else 12
    worst = 0.0
    for _ in range(trials):
        n3 = int(rng.integers(1, 7))
        dims = (int(rng.integers(2, 9)), int(rng.integers(2, 9)), n3)
        for t in _transform_set(n3, rng):
            x = _rand_tensor(rng, dims)
            fac = tsvd.tt_svd(x, t)
            vh = tsvd.tensor_hermitian_transpose(fac.V, t)
            rec = tsvd.t_product(fac.U, tsvd.t_product(fac.S, vh, t), t)
            worst = max(worst, frobenius_norm(rec - x) / frobenius_norm(x))
            if not tsvd.is_unitary_tensor(fac.U, t, tol=1e-10):
                return False, "U factor not unitary"
            if not tsvd.is_unitary_tensor(fac.V, t, tol=1e-10):
                return False, "V factor not unitary"
    return worst <= 1e-10, f"max relative reconstruction error {worst:.3e}"


def _check_ttnn_matrix_invariance(level):
    rng = np.random.default_rng(15)
    trials = 5 if level == "quick" else 20
    worst = 0.0
    for _ in range(trials):
        n3 = int(rng.integers(2, 7))
        x = _rand_tensor(rng, (int(rng.integers(2, 8)), int(rng.integers(2, 8)), n3))
        t_fft = make_transform("fft", n3)
        t_mat = make_transform("matrix", n3, scipy.linalg.dft(n3, scale="sqrtn"))
        a, b = tsvd.ttnn(x, t_fft), tsvd.ttnn(x, t_mat)
        worst = max(worst, abs(a - b) / a)
        sa = tsvd.transformed_spectral_norm(x, t_fft)
        sb = tsvd.transformed_spectral_norm(x, t_mat)
        worst = max(worst, abs(sa - sb) / sa)
    return worst <= 1e-10, f"max relative norm difference {worst:.3e}"


def _check_duality(level):
    rng = np.random.default_rng(16)
    trials = 5 if level == "quick" else 25
    worst_gap = -np.inf
    worst_att = 0.0
    for _ in range(trials):
        n3 = int(rng.integers(1, 6))
        dims = (int(rng.integers(2, 8)), int(rng.integers(2, 8)), n3)
        t = make_transform("fft", n3)
        x = _rand_tensor(rng, dims)
        nuclear = tsvd.ttnn(x, t)
        # Random feasible direction for the sandwich side.
        a = _rand_tensor(rng, dims)
        a = a / max(tsvd.transformed_spectral_norm(a, t), 1e-30)
        gap = inner_product(x, a).real - nuclear
        worst_gap = max(worst_gap, gap)
        # The factor-built witness attains the norm (economy factors so the
        # product is well-formed for rectangular slices).
        fac = tsvd.tt_svd(x, t)
        r = min(dims[0], dims[1])
        u_r = ComplexTensor3(fac.U.slices[:, :, :r])
        v_r = ComplexTensor3(fac.V.slices[:, :, :r])
        witness = tsvd.t_product(u_r, tsvd.tensor_hermitian_transpose(v_r, t), t)
        if tsvd.transformed_spectral_norm(witness, t) > 1 + 1e-9:
            return False, "witness spectral norm exceeds 1"
        worst_att = max(worst_att, abs(inner_product(x, witness).real - nuclear) / nuclear)
    ok = worst_gap <= 1e-9 and worst_att <= 1e-9
    return ok, f"max sandwich gap {worst_gap:.3e}, attainment deviation {worst_att:.3e}"


def _check_prox(level):
    rng = np.random.default_rng(17)
    trials = 5 if level == "quick" else 20
    worst = 0.0
    for _ in range(trials):
        n3 = int(rng.integers(1, 5))
        dims = (5, 4, n3)
        t = make_transform("fft", n3)
        y1, y2 = _rand_tensor(rng, dims), _rand_tensor(rng, dims)
        tau = float(rng.uniform(0.05, 2.0))
        d_out = frobenius_norm(tsvd.t_tsvt(y1, tau, t) - tsvd.t_tsvt(y2, tau, t))
        d_in = frobenius_norm(y1 - y2)
        worst = max(worst, (d_out - d_in) / d_in)
        # Convexity probe of the nuclear norm.
        mid = tsvd.ttnn((y1 + y2) / 2.0, t)
        avg = 0.5 * tsvd.ttnn(y1, t) + 0.5 * tsvd.ttnn(y2, t)
        if mid > avg + 1e-10:
            return False, f"convexity violated by {mid - avg:.3e}"
    return worst <= 1e-12, f"max nonexpansiveness excess {worst:.3e}"


def _check_sum_rank_construction(level):
    rng = np.random.default_rng(18)
    trials = 4 if level == "quick" else 12
    for _ in range(trials):
        n3 = int(rng.integers(1, 6))
        r = int(rng.integers(1, 4))
        n1, n2 = int(rng.integers(r + 1, 9)), int(rng.integers(r + 1, 9))
        t = make_transform("fft", n3)
        a = _rand_tensor(rng, (n1, r, n3))
        b = _rand_tensor(rng, (r, n2, n3))
        x = tsvd.t_product(a, b, t)
        total = tsvd.sum_rank(x, t, tol=1e-10)
        if total > r * n3:
            return False, f"sum rank {total} exceeds bound {r * n3}"
    return True, "low-rank products respect the rank bound"


def _check_forward_adjoint(level):
    rng = np.random.default_rng(19)
    trials = 10 if level == "quick" else 40
    nx, ny, nt = 12, 10, 4
    specs = [
        mri.gen_pseudo_radial_mask(nx, ny, nt, lines=4, seed=5),
        mri.gen_vds_mask(nx, ny, nt, accel=3.0, seed=6),
    ]
    worst = 0.0
    for spec in specs:
        for _ in range(trials):
            x = _rand_tensor(rng, spec.dims)
            y = mri.KSpaceVector(
                rng.standard_normal(spec.m) + 1j * rng.standard_normal(spec.m), spec
            )
            lhs = np.vdot(mri.forward(x, spec).values, y.values)
            rhs = np.vdot(x.slices, mri.adjoint(y).slices)
            scale = max(abs(lhs), abs(rhs), 1e-30)
            worst = max(worst, abs(lhs - rhs) / scale)
            # A^H A is a contraction with a real, nonnegative quadratic form.
            aha = mri.adjoint(mri.forward(x, spec))
            quad = np.vdot(x.slices, aha.slices)
            nx2 = frobenius_norm(x) ** 2
            if abs(quad.imag) > 1e-10 * nx2 or not (-1e-10 * nx2 <= quad.real <= (1 + 1e-10) * nx2):
                return False, f"A^H A quadratic form out of range: {quad!r}"
    return worst <= 1e-12, f"max adjoint identity deviation {worst:.3e}"


def _check_mask_determinism(level):
    a = mri.gen_pseudo_radial_mask(16, 14, 3, lines=5, seed=42)
    b = mri.gen_pseudo_radial_mask(16, 14, 3, lines=5, seed=42)
    c = mri.gen_vds_mask(16, 14, 3, accel=4.0, seed=42)
    d = mri.gen_vds_mask(16, 14, 3, accel=4.0, seed=42)
    dc_ok = bool(np.all(a.mask[:, mri.dc_index(16), mri.dc_index(14)]))
    ok = (
        np.array_equal(a.mask, b.mask)
        and np.array_equal(c.mask, d.mask)
        and dc_ok
    )
    return ok, "same seed reproduces masks bit-exactly; DC always sampled"


def _check_full_mask_roundtrip(level):
    rng = np.random.default_rng(20)
    spec = mri.SamplingSpec(np.ones((3, 8, 7), dtype=bool))
    x = _rand_tensor(rng, spec.dims)
    rec = mri.adjoint(mri.forward(x, spec))
    value = mri.snr(rec, x)
    ok = value >= 200.0
    return ok, f"full-mask zero-filled SNR {value:.1f} dB"


def _check_x_update_normal_equations(level):
    rng = np.random.default_rng(21)
    trials = 4 if level == "quick" else 12
    worst = 0.0
    for _ in range(trials):
        spec = mri.gen_vds_mask(10, 9, 3, accel=2.5, seed=int(rng.integers(1e6)))
        z = _rand_tensor(rng, spec.dims)
        l = _rand_tensor(rng, spec.dims)
        b = mri.KSpaceVector(
            rng.standard_normal(spec.m) + 1j * rng.standard_normal(spec.m), spec
        )
        mu = float(rng.uniform(0.1, 5.0))
        x = admm.x_update_cartesian(z, l, b, spec, mu)
        lhs = mri.adjoint(mri.forward(x, spec)) + x * mu
        rhs = mri.adjoint(b) + (z - l) * mu
        scale = float(np.linalg.norm(b.values)) + mu * frobenius_norm(z - l)
        worst = max(worst, frobenius_norm(lhs - rhs) / scale)
        gamma = float(rng.uniform(0.0, 5.0))
        xg = admm.x_update_gamma(z, l, b, spec, gamma)
        lhs_g = mri.adjoint(mri.forward(xg, spec)) * gamma + xg
        rhs_g = mri.adjoint(b) * gamma + (z - l)
        scale_g = gamma * float(np.linalg.norm(b.values)) + frobenius_norm(z - l)
        worst = max(worst, frobenius_norm(lhs_g - rhs_g) / scale_g)
    return worst <= 1e-10, f"max normal-equation residual {worst:.3e}"


def _check_z_subproblem(level):
    rng = np.random.default_rng(22)
    perturbations = 50 if level == "quick" else 200
    t = make_transform("fft", 3)
    x = _rand_tensor(rng, (6, 5, 3))
    l = _rand_tensor(rng, (6, 5, 3))
    lam, mu = 0.7, 1.3
    z = admm.z_update(x, l, lam, mu, t)
    y = x + l

    def objective(c):
        return lam * tsvd.ttnn(c, t) + 0.5 * mu * frobenius_norm(c - y) ** 2

    best = objective(z)
    if best > objective(y) + 1e-12 or best > objective(ComplexTensor3.zeros(z.dims)) + 1e-12:
        return False, "shrinkage output worse than a trivial candidate"
    radius = 0.1 * frobenius_norm(z)
    for _ in range(perturbations):
        d = _rand_tensor(rng, z.dims)
        d = d * (radius * float(rng.random()) / frobenius_norm(d))
        if objective(z + d) < best - 1e-10 * max(best, 1.0):
            return False, "a random perturbation beat the prox output"
    return True, f"optimal against {perturbations} perturbations"


def _check_generalized_matches_classic(level):
    rng = np.random.default_rng(23)
    spec = mri.gen_vds_mask(10, 8, 4, accel=2.0, seed=3)
    truth = _rand_tensor(rng, spec.dims)
    b = mri.forward(truth, spec)
    t = make_transform("fft", 4)
    lam, mu, eta, iters = 0.05, 1.0, 1.0, 8
    config = admm.AdmmConfig(
        lam=lam, mu=mu, eta=eta, transform=t, max_iters=iters, rel_tol=0.0,
        record_history=False,
    )
    classic = admm.solve(b, spec, config)
    schedule = [
        admm.IterationParams(gamma=1.0 / mu, eta=eta, tau=lam / mu) for _ in range(iters)
    ]
    general = admm.solve_generalized(b, spec, schedule, t, record_history=False)
    dev = frobenius_norm(
        general.reconstruction - classic.reconstruction
    ) / frobenius_norm(classic.reconstruction)
    return dev <= 1e-10, f"relative difference {dev:.3e} after {iters} iterations"


def _check_fidelity_monotone(level):
    spec = mri.gen_vds_mask(12, 12, 4, accel=2.0, seed=9)
    truth = mri.make_phantom(12, 12, 4, "low_tubal_rank", seed=9, rank=2)
    b = mri.forward(truth, spec)
    t = make_transform("fft", 4)
    config = admm.AdmmConfig(
        lam=1e-8, mu=1.0, eta=1.0, transform=t, max_iters=30, rel_tol=0.0
    )
    report = admm.solve(b, spec, config)
    fid = [s.fidelity for s in report.history]
    # The zero-filled start is already consistent, so fidelity lives at
    # the shrinkage noise floor (each singular value moves by <= lam/mu
    # per iteration); only upticks above that floor count as degradations.
    floor = (config.lam / config.mu) ** 2 * 12 * 4
    worst = 0.0
    for prev, cur in zip(fid[1:], fid[2:]):
        worst = max(worst, (cur - prev - floor) / max(prev, 1e-30))
    ok = worst <= 1e-9 and fid[-1] <= floor
    return ok, f"max fidelity uptick above the lam/mu noise floor: {worst:.3e}"


def _check_recovery(level):
    rng = np.random.default_rng(7)
    truth = mri.make_phantom(16, 16, 8, "low_tubal_rank", seed=1, rank=2)
    mask = rng.random((8, 16, 16)) < 0.5
    mask[:, mri.dc_index(16), mri.dc_index(16)] = True
    spec = mri.SamplingSpec(mask, seed=7, descriptor={"pattern": "bernoulli"})
    b = mri.forward(truth, spec)
    t = make_transform("fft", 8)
    config = admm.AdmmConfig(
        lam=3e-2, mu=1e-1, eta=1.0, transform=t, max_iters=300, rel_tol=0.0
    )
    report = admm.solve(b, spec, config)
    value = mri.snr(report.reconstruction, truth)
    primal = report.history[-1].primal_residual
    limit = 1e-6 * frobenius_norm(report.reconstruction)
    ok = value >= 40.0 and primal <= limit
    return ok, f"recovery SNR {value:.1f} dB, final primal residual {primal:.3e}"


def _check_solver_determinism(level):
    spec = mri.gen_pseudo_radial_mask(12, 12, 4, lines=5, seed=2)
    truth = mri.make_phantom(12, 12, 4, "moving_ellipse", seed=2)
    b = mri.forward(truth, spec)
    t = make_transform("fft", 4)
    config = admm.AdmmConfig(
        lam=0.05, mu=1.0, eta=1.0, transform=t, max_iters=10, rel_tol=0.0
    )
    r1 = admm.solve(b, spec, config)
    r2 = admm.solve(b, spec, config)
    same = np.array_equal(r1.reconstruction.slices, r2.reconstruction.slices)
    return same, "repeated sequential runs are bit-identical"


_CHECKS = [
    ("tensor.algebra", _check_tensor_algebra, ("quick", "full")),
    ("transforms.isometry", _check_transform_isometry, ("quick", "full")),
    ("transforms.special_cases", _check_dct_real, ("quick", "full")),
    ("tsvd.decomposition", _check_tsvd_exactness, ("quick", "full")),
    ("tsvd.norm_invariance", _check_ttnn_matrix_invariance, ("quick", "full")),
    ("tsvd.duality", _check_duality, ("quick", "full")),
    ("tsvd.prox", _check_prox, ("quick", "full")),
    ("tsvd.sum_rank", _check_sum_rank_construction, ("quick", "full")),
    ("mri.forward_adjoint", _check_forward_adjoint, ("quick", "full")),
    ("mri.mask_determinism", _check_mask_determinism, ("quick", "full")),
    ("mri.full_mask_roundtrip", _check_full_mask_roundtrip, ("quick", "full")),
    ("admm.x_update", _check_x_update_normal_equations, ("quick", "full")),
    ("admm.z_subproblem", _check_z_subproblem, ("quick", "full")),
    ("admm.generalized_equivalence", _check_generalized_matches_classic, ("quick", "full")),
    ("admm.fidelity_monotone", _check_fidelity_monotone, ("quick", "full")),
    ("admm.recovery", _check_recovery, ("full",)),
    ("admm.determinism", _check_solver_determinism, ("quick", "full")),
]


def run_checks(level: str = "quick") -> list[CheckResult]:
    """Run the invariant suite and return one result per check."""
    if level not in LEVELS:
        raise ValueError(f"level must be one of {LEVELS}, got {level!r}")
    results = []
    for name, fn, levels in _CHECKS:
        if level not in levels:
            continue
        try:
            passed, detail = fn(level)
        except Exception as exc:  # a crashed check is a failed check
            passed, detail = False, f"raised {type(exc).__name__}: {exc}"
        results.append(CheckResult(name, bool(passed), detail))
    return results
