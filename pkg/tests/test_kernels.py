import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from itoar import kernels


def test_available_always_has_fallback():
    assert "python" in kernels.available()
    assert kernels.BACKEND in kernels.available()


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.load("fortran")


@pytest.mark.parametrize("dtype", [float, complex])
def test_mgs_pass_matches_projection(kernel_module, dtype):
    rng = np.random.default_rng(1)
    basis, _ = np.linalg.qr(rng.standard_normal((20, 5)).astype(dtype) + (1j * rng.standard_normal((20, 5)) if dtype is complex else 0))
    basis = np.asfortranarray(basis)
    r = rng.standard_normal(20).astype(dtype)
    res = r.copy()
    coeffs = np.zeros(5, dtype=dtype)
    kernel_module.mgs_pass(basis, res, coeffs)
    np.testing.assert_allclose(coeffs, basis.conj().T @ r, atol=1e-14)
    np.testing.assert_allclose(res, r - basis @ coeffs, atol=1e-14)


def test_weighted_mgs_reports_zero_column(kernel_module):
    basis = np.asfortranarray(np.array([[2.0, 0.0], [0.0, 0.0], [0.0, 0.0]]))
    x = np.array([4.0, 1.0, 1.0])
    coeffs = np.zeros(2)
    assert kernel_module.weighted_mgs_pass(basis, x, coeffs) == 1
    assert coeffs[0] == 2.0
    np.testing.assert_array_equal(x, [0.0, 1.0, 1.0])


def test_weighted_mgs_divides_by_squared_norm(kernel_module):
    basis = np.asfortranarray(np.array([[2.0], [0.0]]))
    x = np.array([6.0, 1.0])
    coeffs = np.zeros(1)
    assert kernel_module.weighted_mgs_pass(basis, x, coeffs) == -1
    assert coeffs[0] == 3.0


def _lu(mod, a, b):
    a = np.array(a, order="F")
    piv = np.zeros(a.shape[0], dtype=np.intp)
    info = mod.lu_factor(a, piv)
    b = np.array(b.reshape(a.shape[0], -1), order="F")
    if info == 0:
        mod.lu_solve(a, piv, b)
    return info, a, piv, b


@pytest.mark.parametrize("n", [1, 5, 30])
def test_lu_real_complex_bitwise(kernel_module, n):
    rng = np.random.default_rng(n)
    a = rng.standard_normal((n, n))
    b = rng.standard_normal(n)
    _, lr, pr, xr = _lu(kernel_module, a, b)
    _, lc, pc, xc = _lu(kernel_module, a.astype(complex), b.astype(complex))
    np.testing.assert_array_equal(pr, pc)
    assert np.array_equal(lr, lc.real) and not lc.imag.any()
    assert np.array_equal(xr, xc.real) and not xc.imag.any()


def test_lu_backends_agree_bitwise():
    names = kernels.available()
    if len(names) < 2:
        pytest.skip("compiled kernels not built")
    rng = np.random.default_rng(3)
    a = rng.standard_normal((25, 25))
    b = rng.standard_normal(25)
    outs = [_lu(kernels.load(name), a, b)[3] for name in names]
    np.testing.assert_array_equal(outs[0], outs[1])
    # complex products may be evaluated in a different order by numpy
    a = a + 1j * rng.standard_normal((25, 25))
    outs = [_lu(kernels.load(name), a, b + 0j)[3] for name in names]
    np.testing.assert_allclose(outs[0], outs[1], rtol=1e-12)


def test_lu_zero_pivot_info(kernel_module):
    info, *_ = _lu(kernel_module, np.array([[1.0, 2.0], [2.0, 4.0]]), np.ones(2))
    assert info == 2


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 12), st.integers(0, 2**32 - 1))
def test_lu_solves_random_systems(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n)) + n * np.eye(n)
    b = rng.standard_normal(n)
    info, _, _, x = _lu(kernels, a, b)
    assert info == 0
    assert np.linalg.norm(a @ x[:, 0] - b) <= 1e-12 * np.linalg.norm(a) * np.linalg.norm(x)
