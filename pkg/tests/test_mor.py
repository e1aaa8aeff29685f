import math

import numpy as np
import pytest

from itoar.core import Status
from itoar.diagnostics import brute_force_sequence
from itoar.errors import InvalidInput, PoleHit, ShiftSingular
from itoar.improved import itoar_run
from itoar.mor import (
    SecondOrderSystem,
    dense_shifted_operators,
    full_response,
    reduce,
    shifted_operators,
    sweep,
    sweep_points,
    synth_system,
    transfer_full,
    transfer_reduced,
)
from itoar.toar import toar_run


def scalar(m=1.0, d=0.0, k=2.0):
    return SecondOrderSystem(np.array([[m]]), np.array([[d]]), np.array([[k]]), np.ones(1), np.ones(1))


def spd_system(n=20, seed=3):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, n))
    Y = rng.standard_normal((n, n))
    K = X @ X.T + n * np.eye(n)
    M = Y @ Y.T / n + np.eye(n)
    return SecondOrderSystem(M, 0.1 * M + 0.01 * K, K, rng.standard_normal(n), rng.standard_normal(n))


class TestShift:
    def test_scalar_operators(self):
        ops, r_m1, r_0 = shifted_operators(scalar(), 1.0)
        # Kt = 1 + 0 + 2 = 3, Dt = 2
        assert ops.A(np.ones(1))[0] == pytest.approx(-2 / 3, rel=1e-15)
        assert ops.B(np.ones(1))[0] == pytest.approx(-1 / 3, rel=1e-15)
        assert r_0[0] == pytest.approx(1 / 3, rel=1e-15)
        assert r_m1[0] == 0.0

    def test_dense_agrees_with_operators(self):
        sys = spd_system()
        ops, _, _ = shifted_operators(sys, 0.7)
        A, B = dense_shifted_operators(sys, 0.7)
        x = np.linspace(-1, 1, sys.n)
        np.testing.assert_allclose(ops.A(x), A @ x, rtol=1e-12, atol=1e-14)
        np.testing.assert_allclose(ops.B(x), B @ x, rtol=1e-12, atol=1e-14)

    def test_recurrence_is_taylor_series(self):
        # (Kt + s Dt + s^2 M) x(s) = f  =>  coefficients follow r_j = A r_{j-1} + B r_{j-2}
        sys = spd_system(8)
        s0, sig = 0.5, 1e-2
        ops, r_m1, r_0 = shifted_operators(sys, s0)
        R = brute_force_sequence(ops, r_m1, r_0, 12)[:, 1:]
        series = R @ sig ** np.arange(R.shape[1])
        exact = np.linalg.solve((s0 + sig) ** 2 * sys.M + (s0 + sig) * sys.D + sys.K, sys.f)
        np.testing.assert_allclose(series, exact, rtol=1e-12)

    def test_singular_shift(self):
        with pytest.raises(ShiftSingular):
            shifted_operators(scalar(1.0, 0.0, 0.0), 0.0)


class TestTransfer:
    @pytest.mark.parametrize("s", [0.0, 0.5, 1j, 2 + 3j])
    def test_scalar(self, s):
        assert transfer_full(scalar(), s) == pytest.approx(1 / (s * s + 2), rel=1e-15)

    def test_pole_hit(self):
        with pytest.raises(PoleHit):
            transfer_full(scalar(k=1.0), 1j)

    def test_full_basis_is_exact(self):
        sys = spd_system()
        model = reduce(sys, np.eye(sys.n))
        for s in (0.3, 2j, 1 + 1j):
            assert transfer_reduced(model, s) == pytest.approx(transfer_full(sys, s), rel=1e-13)

    def test_reduce_shapes(self):
        sys = spd_system()
        Q, _ = np.linalg.qr(np.random.default_rng(0).standard_normal((sys.n, 4)))
        m = reduce(sys, Q, basis_ref="q")
        assert m.eta == 4 and m.Mk.shape == (4, 4) and m.fk.shape == (4,) and m.basis_ref == "q"
        np.testing.assert_allclose(m.Kk, m.Kk.T, atol=1e-12)
        with pytest.raises(InvalidInput):
            reduce(sys, np.eye(3))


@pytest.mark.parametrize("run", [toar_run, itoar_run])
@pytest.mark.parametrize("k", [2, 3, 4])
def test_moment_matching(run, k):
    # one-sided projection onto k Krylov vectors: |h - h_k|(s0 + d) = O(d^k)
    sys = spd_system()
    s0 = 1.0
    ops, r_m1, r_0 = shifted_operators(sys, s0)
    model = reduce(sys, run(ops, r_m1, r_0, k).Q)
    e1, e2 = (abs(transfer_full(sys, s0 + d) - transfer_reduced(model, s0 + d)) for d in (1e-1, 1e-2))
    assert k - 0.3 <= math.log10(e1 / e2) <= k + 0.3
    assert abs(transfer_full(sys, s0) - transfer_reduced(model, s0)) <= 1e-13 * abs(transfer_full(sys, s0))


def test_krylov_span_oracle():
    sys = spd_system()
    ops, r_m1, r_0 = shifted_operators(sys, 1.0)
    ref, _ = np.linalg.qr(brute_force_sequence(ops, r_m1, r_0, 4)[:, 1:])
    a, b = reduce(sys, ref), reduce(sys, toar_run(ops, r_m1, r_0, 4).Q)
    for s in (0.5j, 2j, 1 + 0.5j):
        assert transfer_reduced(a, s) == pytest.approx(transfer_reduced(b, s), rel=1e-9)


class TestSweep:
    def test_points(self):
        f, s = sweep_points([0.0, 1.0], "hertz")
        np.testing.assert_allclose(s, [0, 2j * np.pi])
        _, s = sweep_points([2.0], "angular")
        assert s[0] == 2j
        with pytest.raises(InvalidInput):
            sweep_points([-1.0])
        with pytest.raises(InvalidInput):
            sweep_points([1.0], "rpm")

    def test_pole_rows_are_nan(self):
        sys = scalar(k=1.0)
        model = reduce(sys, np.eye(1))
        t = sweep(sys, model, [0.0, 1.0, 2.0], scale="angular")
        assert len(t) == 3
        assert math.isnan(t.h_abs[1]) and math.isnan(t.rel_err[1])
        assert t.h_abs[0] == pytest.approx(1.0) and t.rel_err[0] == 0.0
        assert t.h_abs[2] == pytest.approx(1 / 3)

    def test_zero_response_is_nan(self):
        sys = SecondOrderSystem(np.eye(2), np.zeros((2, 2)), np.eye(2), [1.0, 0.0], [0.0, 1.0])
        t = sweep(sys, reduce(sys, np.eye(2)), [0.1])
        assert t.h_abs[0] == 0.0 and math.isnan(t.rel_err[0])

    def test_workers_and_cache_agree(self):
        sys = synth_system(30, 0.0, 1e-3, 1.0)
        ops, r_m1, r_0 = shifted_operators(sys, 0.5)
        model = reduce(sys, toar_run(ops, r_m1, r_0, 6).Q)
        freqs = np.linspace(0, 0.3, 17)
        a = sweep(sys, model, freqs)
        b = sweep(sys, model, freqs, workers=4)
        c = sweep(sys, model, freqs, h_full=full_response(sys, freqs))
        for t in (b, c):
            np.testing.assert_array_equal(t.h_abs, a.h_abs)
            np.testing.assert_array_equal(t.rel_err, a.rel_err)
        with pytest.raises(InvalidInput):
            sweep(sys, model, freqs, h_full=np.ones(3))

    def test_rows(self):
        sys = scalar()
        t = sweep(sys, reduce(sys, np.eye(1)), [0.0, 0.25])
        rows = list(t.rows())
        assert len(rows) == 2 and rows[0][1] == pytest.approx(0.5)


class TestSynth:
    def test_structure(self):
        s = synth_system(5, alpha=0.1, beta=0.2, kappa=3.0)
        np.testing.assert_array_equal(s.M, np.eye(5))
        assert s.K[0, 0] == 6.0 and s.K[0, 1] == -3.0 and s.K[0, 2] == 0.0
        np.testing.assert_allclose(s.D, 0.1 * s.M + 0.2 * s.K)
        assert s.f[0] == 1.0 and s.c[-1] == 1.0
        with pytest.raises(InvalidInput):
            synth_system(1)

    def test_static_response(self):
        # K^{-1} e1 at the last mass of a fixed-fixed chain: 1 / (kappa (n + 1))
        s = synth_system(9, kappa=2.0)
        assert transfer_full(s, 0.0) == pytest.approx(1 / 20, rel=1e-14)

    def test_chain_reduction_converges(self, chain400):
        system, ops, r_m1, r_0, _, _ = chain400
        f = itoar_run(ops, r_m1, r_0, 20)
        assert f.status == Status.COMPLETED
        model = reduce(system, f.Q)
        h = transfer_full(system, 1.0)
        # |h(s0)| ~ 2e-10 is far below the state norm, so measure against |c| |x(s0)|
        scale = np.linalg.norm(system.c) * np.linalg.norm(r_0)
        assert abs(transfer_reduced(model, 1.0) - h) <= 1e-14 * scale


def test_validation():
    with pytest.raises(InvalidInput):
        SecondOrderSystem(np.eye(2), np.eye(3), np.eye(2), np.ones(2), np.ones(2))
    with pytest.raises(InvalidInput):
        SecondOrderSystem(np.eye(2), np.eye(2), np.eye(2), np.ones(3), np.ones(2))
