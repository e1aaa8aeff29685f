"""Galerkin model-order reduction of SISO second-order systems.

The system ``M x'' + D x' + K x = f u``, ``y = c x`` has the transfer function
``h(s) = c (s^2 M + s D + K)^{-1} f``.  Around a shift ``s0`` the projection
basis is the second-order Krylov subspace of

    A = -Kt^{-1} Dt,   B = -Kt^{-1} M,   r_{-1} = 0,   r_0 = Kt^{-1} f,

with ``Dt = 2 s0 M + D`` and ``Kt = s0^2 M + s0 D + K``.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import OperatorPair
from .errors import InvalidInput, PoleHit, ShiftSingular, SingularMatrix
from .linalg import as_matrix, as_vector, lu_factor


@dataclass(frozen=True)
class SecondOrderSystem:
    M: np.ndarray
    D: np.ndarray
    K: np.ndarray
    f: np.ndarray
    c: np.ndarray
    label: str = ""

    def __post_init__(self):
        mats = {}
        for name in ("M", "D", "K"):
            mats[name] = as_matrix(getattr(self, name), name)
        n = mats["M"].shape[0]
        for name, mat in mats.items():
            if mat.shape != (n, n):
                raise InvalidInput(f"{name} has shape {mat.shape}, expected ({n}, {n})")
            object.__setattr__(self, name, mat)
        for name in ("f", "c"):
            v = as_vector(getattr(self, name), name)
            if v.shape != (n,):
                raise InvalidInput(f"{name} has length {v.size}, expected {n}")
            object.__setattr__(self, name, v)

    @property
    def n(self):
        return self.M.shape[0]


@dataclass(frozen=True)
class ReducedModel:
    Mk: np.ndarray
    Dk: np.ndarray
    Kk: np.ndarray
    fk: np.ndarray
    ck: np.ndarray
    basis_ref: str = ""

    @property
    def eta(self):
        return self.Mk.shape[0]


@dataclass
class SweepTable:
    """Rows ``(freq, |h|, |h_k|, |h - h_k| / |h|)``; NaN marks a pole hit or ``h = 0``."""

    freq: np.ndarray = field(default_factory=lambda: np.zeros(0))
    h_abs: np.ndarray = field(default_factory=lambda: np.zeros(0))
    hk_abs: np.ndarray = field(default_factory=lambda: np.zeros(0))
    rel_err: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __len__(self):
        return len(self.freq)

    def rows(self):
        return zip(self.freq, self.h_abs, self.hk_abs, self.rel_err)


def shifted_operators(sys, s0):
    """Operators and starting vectors of the shifted second-order Krylov subspace.

    ``Kt`` is factored once; ``apply_A`` and ``apply_B`` reuse the factors.
    Raises :class:`ShiftSingular` when ``Kt`` is singular at ``s0``.
    """
    Dt = 2 * s0 * sys.M + sys.D
    Kt = s0 * s0 * sys.M + s0 * sys.D + sys.K
    try:
        lu = lu_factor(Kt)
    except SingularMatrix as exc:
        raise ShiftSingular(
            f"shifted stiffness is singular at s0={s0!r}; perturb the shift", index=exc.index
        ) from None
    M = sys.M

    def apply_A(x):
        return -lu.solve(Dt @ x)

    def apply_B(x):
        return -lu.solve(M @ x)

    ops = OperatorPair(sys.n, apply_A, apply_B)
    r_0 = lu.solve(sys.f)
    return ops, np.zeros_like(r_0), r_0


def dense_shifted_operators(sys, s0):
    """Explicit ``A`` and ``B`` of :func:`shifted_operators` (for oracles)."""
    Dt = 2 * s0 * sys.M + sys.D
    Kt = s0 * s0 * sys.M + s0 * sys.D + sys.K
    lu = lu_factor(Kt, warn=False)
    return -lu.solve(Dt), -lu.solve(sys.M)


def reduce(sys, Q, basis_ref=""):
    """Galerkin projection onto the columns of ``Q``."""
    Q = np.asarray(Q)
    if Q.ndim != 2 or Q.shape[0] != sys.n:
        raise InvalidInput(f"basis must have {sys.n} rows, got shape {Q.shape}")
    Qh = Q.conj().T
    return ReducedModel(
        Mk=Qh @ sys.M @ Q,
        Dk=Qh @ sys.D @ Q,
        Kk=Qh @ sys.K @ Q,
        fk=Qh @ sys.f,
        ck=Q.T @ sys.c,
        basis_ref=basis_ref,
    )


def _transfer(M, D, K, f, c, s):
    P = s * s * M + s * D + K
    try:
        fact = lu_factor(P.astype(complex), warn=False, engine="lapack")
    except SingularMatrix as exc:
        raise PoleHit(f"pencil singular at s={s!r}", index=exc.index) from None
    return complex(c @ fact.solve(f.astype(complex)))


def transfer_full(sys, s):
    """``h(s) = c (s^2 M + s D + K)^{-1} f``."""
    return _transfer(sys.M, sys.D, sys.K, sys.f, sys.c, complex(s))


def transfer_reduced(model, s):
    """``h_k(s) = c_k (s^2 M_k + s D_k + K_k)^{-1} f_k``."""
    return _transfer(model.Mk, model.Dk, model.Kk, model.fk, model.ck, complex(s))


def sweep_points(freqs, scale="hertz"):
    freqs = np.asarray(freqs, dtype=float).reshape(-1)
    if not np.all(np.isfinite(freqs)) or np.any(freqs < 0):
        raise InvalidInput("frequencies must be finite and nonnegative")
    if scale == "hertz":
        return freqs, 2j * np.pi * freqs
    if scale == "angular":
        return freqs, 1j * freqs
    raise InvalidInput(f"scale must be 'hertz' or 'angular', got {scale!r}")


def _safe(fn, *args):
    try:
        return fn(*args)
    except PoleHit:
        return complex(math.nan, math.nan)


def _map(fn, points, workers):
    if workers and workers > 1 and len(points) > 1:
        with ThreadPoolExecutor(workers) as pool:
            return np.array(list(pool.map(fn, points)), dtype=complex)
    return np.array([fn(s) for s in points], dtype=complex)


def full_response(sys, freqs, scale="hertz", workers=None):
    """``h`` at every sweep point (NaN at pole hits); reusable across reduced models."""
    _, points = sweep_points(freqs, scale)
    return _map(lambda s: _safe(transfer_full, sys, s), points, workers)


def sweep(sys, model, freqs, scale="hertz", workers=None, h_full=None):
    """Evaluate ``h`` and ``h_k`` at ``s = 2 pi i f`` (hertz) or ``s = i f`` (angular).

    Pole hits produce NaN in the affected fields instead of an error.  Each
    point is independent; ``workers > 1`` evaluates them on a thread pool.
    ``h_full`` may carry a precomputed :func:`full_response`.
    """
    freqs, points = sweep_points(freqs, scale)
    if h_full is None:
        h = full_response(sys, freqs, scale, workers)
    else:
        h = np.asarray(h_full, dtype=complex)
        if h.shape != points.shape:
            raise InvalidInput("h_full does not match the sweep points")
    hk = _map(lambda s: _safe(transfer_reduced, model, s), points, workers)
    h_abs = np.abs(h)
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.where(h_abs > 0, np.abs(h - hk) / h_abs, math.nan)
    return SweepTable(freqs, h_abs, np.abs(hk), rel)


def synth_system(n, alpha=0.0, beta=0.0, kappa=1.0):
    """Spring-mass chain: ``M = I``, ``K = kappa tridiag(-1, 2, -1)``, ``D = alpha M + beta K``.

    Input at the first mass, output at the last.
    """
    if n < 2:
        raise InvalidInput("synthetic system needs n >= 2")
    M = np.eye(n)
    K = kappa * (2 * np.eye(n) - np.eye(n, k=1) - np.eye(n, k=-1))
    D = alpha * M + beta * K
    f = np.zeros(n)
    f[0] = 1.0
    c = np.zeros(n)
    c[-1] = 1.0
    return SecondOrderSystem(M, D, K, f, c, label=f"chain n={n} kappa={kappa:g}")
