"""Pure-Python (numpy) versions of the compiled kernels, same semantics.

The LU routines use only elementwise array operations, never BLAS dot
products, so a complex call on real data reproduces the real call exactly.
"""

import numpy as np


def mgs_pass(basis, r, coeffs):
    for i in range(basis.shape[1]):
        q = basis[:, i]
        c = np.vdot(q, r)
        r -= c * q
        coeffs[i] += c


def weighted_mgs_pass(basis, x, coeffs):
    for t in range(basis.shape[1]):
        col = basis[:, t]
        nrm2 = np.vdot(col, col).real
        if nrm2 == 0.0:
            return t
        c = np.vdot(col, x) / nrm2
        x -= c * col
        coeffs[t] += c
    return -1


def _abs1(v):
    if np.iscomplexobj(v):
        return np.abs(v.real) + np.abs(v.imag)
    return np.abs(v)


def _div(a, b):
    if np.iscomplexobj(b) and b.imag == 0.0:
        # numpy would promote to a full complex division here
        out = np.empty_like(a)
        out.real = a.real / b.real
        out.imag = a.imag / b.real
        return out
    return a / b


def lu_factor(a, piv):
    n = a.shape[0]
    for i in range(n):
        col = _abs1(a[i:, i])
        best = i + int(np.argmax(col))
        piv[i] = best
        if col[best - i] == 0.0:
            return i + 1
        if best != i:
            a[[i, best], :] = a[[best, i], :]
        a[i + 1:, i] = _div(a[i + 1:, i], a[i, i])
        a[i + 1:, i + 1:] -= a[i + 1:, i, None] * a[None, i, i + 1:]
    return 0


def lu_solve(lu, piv, b):
    n = lu.shape[0]
    for i in range(n):
        if piv[i] != i:
            b[[i, piv[i]], :] = b[[piv[i], i], :]
    for i in range(n):
        b[i + 1:, :] -= lu[i + 1:, i, None] * b[None, i, :]
    for i in range(n - 1, -1, -1):
        b[i, :] = _div(b[i, :], lu[i, i])
        b[:i, :] -= lu[:i, i, None] * b[None, i, :]
