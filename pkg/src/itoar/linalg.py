"""Dense linear-algebra building blocks.

Matrices are plain numpy arrays (float64 or complex128).  Gram-Schmidt sweeps
and the LU factorization run through :mod:`itoar.kernels`, which is compiled
when the extension is built.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lapack

from . import kernels
from .errors import IllConditionedWarning, InvalidInput, SingularMatrix

EPS = 2.0 ** -53
RANK_TOL = 1e-12
RCOND_WARN = 1e-15


def result_dtype(*arrays):
    return np.result_type(np.float64, *arrays)


def as_vector(v, name="vector", dtype=None):
    v = np.asarray(v)
    if v.ndim == 2 and 1 in v.shape:
        v = v.reshape(-1)
    if v.ndim != 1:
        raise InvalidInput(f"{name} must be one-dimensional, got shape {v.shape}")
    v = v.astype(dtype or result_dtype(v), copy=True)
    if not np.all(np.isfinite(v)):
        raise InvalidInput(f"{name} has non-finite entries")
    return v


def as_matrix(a, name="matrix", dtype=None):
    a = np.asarray(a)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2:
        raise InvalidInput(f"{name} must be two-dimensional, got shape {a.shape}")
    a = np.asfortranarray(a, dtype=dtype or result_dtype(a))
    if not np.all(np.isfinite(a)):
        raise InvalidInput(f"{name} has non-finite entries")
    return a


def mgs_project(basis, r, reorth_passes=1):
    """Project ``r`` off the span of orthonormal ``basis`` by modified Gram-Schmidt.

    Parameters
    ----------
    basis : (n, m) array with orthonormal columns
    r : (n,) array
    reorth_passes : int in {0, 1, 2}
        Extra sweeps; their coefficients are accumulated into the first.

    Returns
    -------
    coeffs : (m,) array
    residual : (n,) array
        ``r - basis @ coeffs``, computed column by column.
    beta : float
        2-norm of the residual.
    """
    if reorth_passes not in (0, 1, 2):
        raise InvalidInput(f"reorth_passes must be 0, 1 or 2, got {reorth_passes}")
    basis = np.asarray(basis)
    r = np.asarray(r)
    if basis.ndim != 2 or r.ndim != 1 or basis.shape[0] != r.shape[0]:
        raise InvalidInput(
            f"dimension mismatch: basis {basis.shape} against vector {r.shape}"
        )
    if basis.shape[1] > r.shape[0]:
        raise InvalidInput("basis has more columns than rows")
    dtype = result_dtype(basis, r)
    basis = np.asarray(basis, dtype=dtype)
    residual = np.array(r, dtype=dtype)
    coeffs = np.zeros(basis.shape[1], dtype=dtype)
    for _ in range(1 + reorth_passes):
        kernels.mgs_pass(basis, residual, coeffs)
    return coeffs, residual, float(np.linalg.norm(residual))


def two_column_rrqr(r_m1, r_0, rank_tol=RANK_TOL):
    """Rank-revealing QR of the n-by-2 matrix ``[r_m1 r_0]``.

    The rank decision pivots on the larger column; the returned factors keep
    the original column order, so ``X`` is upper triangular when the rank is 2
    (which keeps the second coefficient block triangular downstream).

    Returns ``(Q1, X, alpha)`` with ``Q1`` n-by-alpha, ``X`` alpha-by-2.
    """
    dtype = result_dtype(np.asarray(r_m1), np.asarray(r_0))
    r_m1 = as_vector(r_m1, "r_m1", dtype)
    r_0 = as_vector(r_0, "r_0", dtype)
    if r_m1.shape != r_0.shape:
        raise InvalidInput("r_m1 and r_0 must have the same length")
    n1 = np.linalg.norm(r_m1)
    n0 = np.linalg.norm(r_0)
    if n1 == 0.0 and n0 == 0.0:
        raise InvalidInput("r_m1 and r_0 are both zero")

    pivot, other = (r_0, r_m1) if n0 >= n1 else (r_m1, r_0)
    q = pivot / np.linalg.norm(pivot)
    _, w, wnorm = mgs_project(q[:, None], other, reorth_passes=1)
    if wnorm > rank_tol * max(n0, n1):
        q1 = r_m1 / n1
        c, w, wnorm = mgs_project(q1[:, None], r_0, reorth_passes=1)
        Q1 = np.column_stack([q1, w / wnorm])
        X = np.array([[n1, c[0]], [0.0, wnorm]], dtype=dtype)
        return Q1, X, 2
    X = np.array([[np.vdot(q, r_m1), np.vdot(q, r_0)]], dtype=dtype)
    return q[:, None], X, 1


@dataclass(frozen=True)
class LUFactorization:
    """Partial-pivoting LU factors of a square matrix, reusable across solves."""

    lu: np.ndarray
    piv: np.ndarray
    rcond: float
    engine: str = "kernel"

    @property
    def n(self):
        return self.lu.shape[0]

    @property
    def dtype(self):
        return self.lu.dtype

    def solve(self, rhs):
        rhs = np.asarray(rhs)
        vector = rhs.ndim == 1
        if rhs.shape[0] != self.n:
            raise InvalidInput(
                f"right-hand side has {rhs.shape[0]} rows, matrix is {self.n}x{self.n}"
            )
        dtype = np.result_type(self.lu, rhs)
        lu = self.lu if dtype == self.lu.dtype else self.lu.astype(dtype, order="F")
        b = np.array(rhs.reshape(self.n, -1), dtype=dtype, order="F")
        if self.engine == "lapack":
            getrs = lapack.zgetrs if np.iscomplexobj(lu) else lapack.dgetrs
            b, _ = getrs(lu, self.piv, b)
        else:
            kernels.lu_solve(lu, self.piv, b)
        return b[:, 0] if vector else b


def lu_factor(mat, warn=True, engine="kernel"):
    """Factor a square matrix; raise :class:`SingularMatrix` on a zero pivot.

    ``engine="kernel"`` uses the package's own LU (real and complex paths agree
    bit-for-bit on real data); ``engine="lapack"`` calls LAPACK getrf, which is
    faster but carries no such guarantee.
    """
    if engine not in ("kernel", "lapack"):
        raise InvalidInput(f"unknown LU engine {engine!r}")
    a = as_matrix(mat, "matrix")
    if a.shape[0] != a.shape[1]:
        raise InvalidInput(f"matrix must be square, got {a.shape}")
    n = a.shape[0]
    anorm = np.abs(a).sum(axis=0).max() if n else 0.0
    a = np.array(a, order="F", copy=True)
    if engine == "lapack" and n:
        getrf = lapack.zgetrf if np.iscomplexobj(a) else lapack.dgetrf
        a, piv, info = getrf(a, overwrite_a=True)
        info = info if info > 0 else 0
    else:
        piv = np.zeros(n, dtype=np.intp)
        info = kernels.lu_factor(a, piv)
    if info:
        raise SingularMatrix(f"exactly zero pivot in column {info - 1}", index=info - 1)
    rcond = _rcond(a, anorm) if n else 1.0
    if warn and rcond < RCOND_WARN:
        warnings.warn(
            f"estimated reciprocal condition number {rcond:.3e} is below {RCOND_WARN:g}",
            IllConditionedWarning,
            stacklevel=2,
        )
    return LUFactorization(a, piv, rcond, engine if n else "kernel")


def _rcond(lu, anorm):
    gecon = lapack.zgecon if np.iscomplexobj(lu) else lapack.dgecon
    rcond, info = gecon(lu, anorm, norm="1")
    return float(rcond) if info == 0 else 0.0


def lu_solve(mat, rhs):
    """Solve ``mat @ x = rhs``; ``mat`` may be a matrix or an :class:`LUFactorization`."""
    fact = mat if isinstance(mat, LUFactorization) else lu_factor(mat)
    return fact.solve(rhs)


def svd_metrics(mat):
    """Return ``(sigma_max, sigma_min, cond2)`` of a nonempty matrix."""
    a = np.asarray(mat)
    if a.size == 0:
        raise InvalidInput("svd_metrics needs a nonempty matrix")
    s = np.linalg.svd(a, compute_uv=False)
    smax, smin = float(s[0]), float(s[-1])
    return smax, smin, (smax / smin if smin > 0.0 else np.inf)


def column_sigma_min(mat):
    """Smallest singular value counting rank deficiency from a wide shape as 0."""
    a = np.asarray(mat)
    if a.shape[0] < a.shape[1]:
        return 0.0
    return svd_metrics(a)[1]


def orthonormalize(mat, rtol=None):
    """Orthonormal basis of the column span (columns scaled to unit norm first)."""
    a = np.asarray(mat)
    if a.shape[1] == 0:
        return a
    norms = np.linalg.norm(a, axis=0)
    keep = norms > 0
    a = a[:, keep] / norms[keep]
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    if rtol is None:
        rtol = max(a.shape) * EPS
    rank = int(np.sum(s > rtol * s[0])) if s.size else 0
    return u[:, :rank]


def _is_orthonormal(a, tol=1e-10):
    g = a.conj().T @ a
    return np.linalg.norm(g - np.eye(g.shape[0])) <= tol


def principal_angle(basis_a, basis_b):
    """Largest principal angle (radians) of span(basis_a) against span(basis_b).

    Inputs without orthonormal columns are orthonormalized first.  When
    ``basis_a`` has fewer columns this is the subset angle: zero iff
    span(a) lies inside span(b).
    """
    a = np.asarray(basis_a)
    b = np.asarray(basis_b)
    if a.ndim != 2 or b.ndim != 2 or a.shape[0] != b.shape[0]:
        raise InvalidInput(f"row-count mismatch: {a.shape} vs {b.shape}")
    if not _is_orthonormal(a):
        a = orthonormalize(a)
    if not _is_orthonormal(b):
        b = orthonormalize(b)
    if a.shape[1] == 0:
        return 0.0
    if b.shape[1] == 0:
        return np.pi / 2
    c = b.conj().T @ a
    sin_max = np.linalg.norm(a - b @ c, 2)
    if sin_max < np.sqrt(0.5):
        return float(np.arcsin(sin_max))
    if a.shape[1] > b.shape[1]:
        return np.pi / 2
    cos_min = np.linalg.svd(c, compute_uv=False)[-1]
    return float(np.arccos(min(cos_min, 1.0)))
