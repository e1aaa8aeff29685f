import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from itoar.core import OperatorPair, Status, StepKind, init_factorization
from itoar.diagnostics import brute_force_sequence, linearized_arnoldi, residual_check, structure_report
from itoar.errors import BreakdownSignal, InvalidInput
from itoar.improved import itoar_run
from itoar.linalg import principal_angle
from itoar.rng import random_instance
from itoar.toar import toar_run, toar_second_level, toar_step

from test_itoar import SWAP, deflating_instance


def test_two_by_two_matches_itoar():
    f = toar_run(SWAP, np.zeros(2), [1.0, 0.0], 2)
    g = itoar_run(SWAP, np.zeros(2), [1.0, 0.0], 2)
    np.testing.assert_allclose(f.H, [[0.0], [np.sqrt(2)]], atol=1e-15)
    np.testing.assert_allclose(f.V, g.V, atol=1e-15)


def test_random_h_matches_linearized_arnoldi(random30):
    ops, r_m1, r_0 = random30
    f = toar_run(ops, r_m1, r_0, 9)
    _, H = linearized_arnoldi(ops.dense_A, ops.dense_B, r_m1, r_0, 8)
    assert np.max(np.abs(f.H - H)) <= 1e-10 * np.linalg.norm(H)


def test_random_span_matches_brute_force(random30):
    ops, r_m1, r_0 = random30
    f = toar_run(ops, r_m1, r_0, 8)
    assert principal_angle(brute_force_sequence(ops, r_m1, r_0, 8), f.Q) <= 1e-8


@settings(max_examples=15, deadline=None)
@given(st.integers(4, 25), st.integers(0, 2**20), st.integers(2, 10))
def test_arnoldi_relation_random(n, seed, k):
    A, B, r_m1, r_0 = random_instance(n, seed)
    ops = OperatorPair.from_dense(A, B)
    f = toar_run(ops, r_m1, r_0, k)
    rep = structure_report(f)
    assert rep.v_orth_loss <= 1e-12
    assert residual_check(f, A, B) <= 1e-12
    assert rep.hessenberg_violation == 0.0
    assert f.eta <= f.k + 1


def test_breakdown_on_eigenvector():
    # v0 = (x; x) with A x + B x = x is an eigenvector of L with eigenvalue 1
    A = np.diag([0.5, 2.0, 3.0])
    B = np.diag([0.5, 1.0, 1.0])
    ops = OperatorPair.from_dense(A, B)
    f = toar_run(ops, np.eye(3)[0], np.eye(3)[0], 4)
    assert f.status == Status.BREAKDOWN and f.k == 1


def test_in_span_breakdown():
    f = init_factorization(np.zeros(2), np.array([1.0, 0.0]))
    with pytest.raises(BreakdownSignal):
        toar_second_level(f, f.U1[:, 0] * 2, f.U2[:, 0] * 2, 0.0)


def test_length_check():
    f = init_factorization(np.zeros(2), np.array([1.0, 0.0]))
    with pytest.raises(InvalidInput):
        toar_second_level(f, np.zeros(3), np.zeros(1), 0.0)


def test_identity_start():
    ops = OperatorPair.from_dense(np.eye(3), np.zeros((3, 3)))
    f = toar_run(ops, np.zeros(3), np.eye(3)[0], 5)
    assert f.k == 2 and f.status == Status.DEFLATED_TO_INVARIANCE
    np.testing.assert_allclose(f.H, [[1.0], [1.0]])


def test_deflation_keeps_orthonormality():
    ops, r_m1, r_0 = deflating_instance()
    f = init_factorization(r_m1, r_0)
    assert toar_step(f, ops).kind == StepKind.DEFLATED
    f = toar_run(ops, r_m1, r_0, 3)
    assert f.alpha == [2, 2, 3]
    rep = structure_report(f)
    assert rep.v_orth_loss <= 1e-13
    assert residual_check(f, ops.dense_A, ops.dense_B) <= 1e-13


def test_chain(chain400):
    _, ops, r_m1, r_0, A, B = chain400
    f = toar_run(ops, r_m1, r_0, 40)
    rep = structure_report(f)
    assert f.status == Status.COMPLETED
    assert rep.v_orth_loss <= 5e-13 and rep.stacked_u_orth_loss <= 5e-13
    assert residual_check(f, A, B) <= 1e-12


def test_chain_span_agrees_with_itoar(chain400):
    _, ops, r_m1, r_0, _, _ = chain400
    f = toar_run(ops, r_m1, r_0, 12)
    g = itoar_run(ops, r_m1, r_0, 12)
    assert principal_angle(f.Q, g.Q) <= 1e-8
