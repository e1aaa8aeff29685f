# cython: language_level=3
"""Compiled inner loops: Gram-Schmidt sweeps and dense LU with partial pivoting.

Every routine works in place on its arguments and is fused over ``double`` and
``double complex``.  Complex arithmetic is spelled out on real and imaginary
parts so that complex inputs with zero imaginary parts reproduce the real
routines bit-for-bit.
"""

cimport cython
from libc.math cimport fabs

ctypedef fused scalar_t:
    double
    double complex


cdef inline double _abs1(scalar_t a) noexcept nogil:
    if scalar_t is double:
        return fabs(a)
    else:
        return fabs(a.real) + fabs(a.imag)


cdef inline scalar_t _div(scalar_t a, scalar_t b) noexcept nogil:
    cdef double ratio, den
    if scalar_t is double:
        return a / b
    else:
        if b.imag == 0.0:
            return a.real / b.real + 1j * (a.imag / b.real)
        # Smith's algorithm
        if fabs(b.real) >= fabs(b.imag):
            ratio = b.imag / b.real
            den = b.real + b.imag * ratio
            return (a.real + a.imag * ratio) / den + 1j * ((a.imag - a.real * ratio) / den)
        ratio = b.real / b.imag
        den = b.imag + b.real * ratio
        return (a.real * ratio + a.imag) / den + 1j * ((a.imag * ratio - a.real) / den)


cdef inline scalar_t _mul(scalar_t a, scalar_t b) noexcept nogil:
    if scalar_t is double:
        return a * b
    else:
        return (a.real * b.real - a.imag * b.imag) + 1j * (a.real * b.imag + a.imag * b.real)


cdef inline scalar_t _conj_mul(scalar_t a, scalar_t b) noexcept nogil:
    # conj(a) * b
    if scalar_t is double:
        return a * b
    else:
        return (a.real * b.real + a.imag * b.imag) + 1j * (a.real * b.imag - a.imag * b.real)


cdef inline double _abs2(scalar_t a) noexcept nogil:
    if scalar_t is double:
        return a * a
    else:
        return a.real * a.real + a.imag * a.imag


def mgs_pass(scalar_t[:, :] basis, scalar_t[:] r, scalar_t[:] coeffs):
    """One modified Gram-Schmidt sweep of ``r`` against the columns of ``basis``.

    ``r`` is overwritten by the residual and the projection coefficients are
    added into ``coeffs``.
    """
    cdef Py_ssize_t n = basis.shape[0], m = basis.shape[1]
    cdef Py_ssize_t i, p
    cdef scalar_t c
    with nogil:
        for i in range(m):
            c = 0
            for p in range(n):
                c = c + _conj_mul(basis[p, i], r[p])
            for p in range(n):
                r[p] = r[p] - _mul(c, basis[p, i])
            coeffs[i] = coeffs[i] + c


def weighted_mgs_pass(scalar_t[:, :] basis, scalar_t[:] x, scalar_t[:] coeffs):
    """MGS sweep against mutually orthogonal, not necessarily unit, columns.

    Each coefficient is ``basis[:, t]^H x / ||basis[:, t]||^2``.  Returns the
    index of the first zero-norm column met, or -1 when the sweep completed.
    """
    cdef Py_ssize_t n = basis.shape[0], m = basis.shape[1]
    cdef Py_ssize_t t, p
    cdef scalar_t c
    cdef double nrm2
    cdef Py_ssize_t bad = -1
    with nogil:
        for t in range(m):
            nrm2 = 0.0
            c = 0
            for p in range(n):
                nrm2 = nrm2 + _abs2(basis[p, t])
                c = c + _conj_mul(basis[p, t], x[p])
            if nrm2 == 0.0:
                bad = t
                break
            c = c / nrm2
            for p in range(n):
                x[p] = x[p] - _mul(c, basis[p, t])
            coeffs[t] = coeffs[t] + c
    return bad


def lu_factor(scalar_t[::1, :] a, Py_ssize_t[:] piv):
    """Right-looking LU with partial pivoting, LAPACK getrf layout.

    Returns 0 on success or ``i + 1`` for the first exactly zero pivot.
    """
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t i, j, p, best
    cdef double amax, v
    cdef scalar_t tmp, pivot, f
    cdef Py_ssize_t info = 0
    with nogil:
        for i in range(n):
            best = i
            amax = _abs1(a[i, i])
            for p in range(i + 1, n):
                v = _abs1(a[p, i])
                if v > amax:
                    amax = v
                    best = p
            piv[i] = best
            if amax == 0.0:
                info = i + 1
                break
            if best != i:
                for j in range(n):
                    tmp = a[i, j]
                    a[i, j] = a[best, j]
                    a[best, j] = tmp
            pivot = a[i, i]
            for p in range(i + 1, n):
                a[p, i] = _div(a[p, i], pivot)
            for j in range(i + 1, n):
                f = a[i, j]
                for p in range(i + 1, n):
                    a[p, j] = a[p, j] - _mul(a[p, i], f)
    return info


def lu_solve(scalar_t[::1, :] lu, Py_ssize_t[:] piv, scalar_t[::1, :] b):
    """Overwrite ``b`` with the solution of ``A x = b`` given ``lu_factor`` output."""
    cdef Py_ssize_t n = lu.shape[0], m = b.shape[1]
    cdef Py_ssize_t i, p, col
    cdef scalar_t tmp, xi
    with nogil:
        for col in range(m):
            for i in range(n):
                if piv[i] != i:
                    tmp = b[i, col]
                    b[i, col] = b[piv[i], col]
                    b[piv[i], col] = tmp
            for i in range(n):
                xi = b[i, col]
                for p in range(i + 1, n):
                    b[p, col] = b[p, col] - _mul(lu[p, i], xi)
            for i in range(n - 1, -1, -1):
                b[i, col] = _div(b[i, col], lu[i, i])
                xi = b[i, col]
                for p in range(i):
                    b[p, col] = b[p, col] - _mul(lu[p, i], xi)
