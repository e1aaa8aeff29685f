"""Reference oracles and measured backward-error quantities.

The oracles work from dense ``A`` and ``B``:

* :func:`brute_force_sequence` evaluates ``r_j = A r_{j-1} + B r_{j-2}`` verbatim;
* :func:`linearized_arnoldi` runs plain Arnoldi on ``L = [[A, B], [I, 0]]``.

:func:`backward_error` measures the perturbation ``[dA dB]`` that makes the
computed factorization exact, and evaluates the theoretical bound on it.
"""

import dataclasses
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import OperatorPair
from .errors import InvalidInput, PseudoInverseUnstable
from .linalg import EPS, as_matrix, as_vector, svd_metrics

SPLIT = 0.5


@dataclass
class DiagnosticsReport:
    """Flat record of measured quantities; unmeasured fields stay NaN."""

    n: int = 0
    k: int = 0
    method: str = ""
    arnoldi_residual: float = math.nan
    q_orth_loss: float = math.nan
    v_orth_loss: float = math.nan
    stacked_u_orth_loss: float = math.nan
    u1_gram_offdiag: float = math.nan
    u1_norm_fro: float = math.nan
    u2_offdiag_max: float = math.nan
    u1_shape_violation: float = math.nan
    u2_triangular_violation: float = math.nan
    hessenberg_violation: float = math.nan
    h_subdiag_min: float = math.nan
    coupled_orth_max: float = math.nan
    hsub_recompute_max: float = math.nan
    fmv_norm: float = math.nan
    f1_norm: float = math.nan
    f2_norm: float = math.nan
    delta_ab_ratio: float = math.nan
    zeta1: float = math.nan
    zeta2: float = math.nan
    cond_Q: float = math.nan
    cond_U: float = math.nan
    theorem_bound: float = math.nan
    bound_satisfied: bool = False
    hypothesis_ok: bool = False
    pinv_unstable: bool = False

    def merge(self, other):
        """Copy every measured (non-NaN) field of ``other`` into a new report."""
        out = dataclasses.replace(self)
        for f in dataclasses.fields(other):
            v = getattr(other, f.name)
            if isinstance(v, float) and math.isnan(v):
                continue
            setattr(out, f.name, v)
        return out

    def to_text(self):
        lines = []
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if isinstance(v, bool):
                v = "true" if v else "false"
            elif isinstance(v, float):
                v = f"{v:.16e}"
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"


# -- oracles -----------------------------------------------------------------


def brute_force_sequence(ops, r_m1, r_0, k):
    """Columns ``[r_{-1}, r_0, r_1, ..., r_{k-1}]`` of the second-order Krylov sequence."""
    if k < 0:
        raise InvalidInput("k must be nonnegative")
    prev = as_vector(r_m1, "r_m1")
    cur = as_vector(r_0, "r_0")
    cols = [prev]
    if k >= 1:
        cols.append(cur)
    for _ in range(k - 1):
        prev, cur = cur, ops.A(cur) + ops.B(prev)
        cols.append(cur)
    return np.column_stack(cols)


def _apply_L(A, B, V):
    n = A.shape[0]
    return np.vstack([A @ V[:n] + B @ V[n:], V[:n]])


def linearized_arnoldi(dense_A, dense_B, r_m1, r_0, k, breakdown_tol=100 * EPS):
    """Arnoldi with full reorthogonalization on ``L`` from ``v0 = (r_0; r_m1)``.

    Returns ``V`` (2n x (m+1)) and ``H`` ((m+1) x m) with ``m <= k`` steps; fewer
    when the subdiagonal drops below ``breakdown_tol * ||v0||``.
    """
    A = as_matrix(dense_A, "A")
    B = as_matrix(dense_B, "B")
    v0 = np.concatenate([as_vector(r_0, "r_0"), as_vector(r_m1, "r_m1")])
    dtype = np.result_type(A, B, v0)
    gamma = np.linalg.norm(v0)
    if gamma == 0:
        raise InvalidInput("starting vector is zero")
    V = np.zeros((v0.size, k + 1), dtype=dtype)
    H = np.zeros((k + 1, k), dtype=dtype)
    V[:, 0] = v0 / gamma
    for j in range(k):
        w = _apply_L(A, B, V[:, j : j + 1])[:, 0]
        for _ in range(2):
            c = V[:, : j + 1].conj().T @ w
            w = w - V[:, : j + 1] @ c
            H[: j + 1, j] += c
        hs = np.linalg.norm(w)
        if hs <= breakdown_tol * gamma:
            H[j + 1, j] = hs
            return V[:, : j + 1], H[: j + 1, :j]
        H[j + 1, j] = hs
        V[:, j + 1] = w / hs
    return V, H


def residual_check(fact, dense_A, dense_B):
    """``||L V_{k-1} - V_k H||_F / ((||[A B]||_F + 1) ||H||_F)``; 0 for k <= 1."""
    if fact.k <= 1:
        return 0.0
    A = np.asarray(dense_A)
    B = np.asarray(dense_B)
    V = fact.V
    R = _apply_L(A, B, V[:, :-1]) - V @ fact.H
    scale = (np.sqrt(np.linalg.norm(A) ** 2 + np.linalg.norm(B) ** 2) + 1) * np.linalg.norm(fact.H)
    return float(np.linalg.norm(R) / scale)


# -- structure -----------------------------------------------------------------


def _offdiag_max(G):
    if G.shape[0] < 2:
        return 0.0
    return float(np.max(np.abs(G - np.diag(np.diag(G)))))


def _orth_loss(X):
    return float(np.linalg.norm(np.eye(X.shape[1]) - X.conj().T @ X))


def structure_report(fact):
    """Orthogonality losses and structural violations of a factorization."""
    U1, U2, H, alpha = fact.U1, fact.U2, fact.H, fact.alpha
    k = fact.k
    rows = np.arange(U1.shape[0])[:, None]
    # column j of U1 lives in rows < alpha[j]; of U2 in rows < alpha[j-1]
    u1_mask = rows >= np.array(alpha)[None, :]
    u2_mask = rows >= np.array([1] + list(alpha[:-1]))[None, :]
    desig = np.zeros_like(U2, dtype=bool)
    desig[fact.u2_rows(), np.arange(k)] = True

    hv = 0.0
    if k > 2:
        hv = float(np.max(np.abs(np.tril(H, -2))))

    coupled = 0.0
    hsub_err = 0.0
    for j in range(1, k):
        a = alpha[j - 1]
        if fact.step_log is not None and len(fact.step_log) >= j:
            rec = fact.step_log[j - 1]
            x, y = rec.x, rec.y
            beta = 0.0 if rec.deflated else rec.beta
            hs = H[j, j - 1].real
            if hs > 0:
                recomputed = np.sqrt(beta**2 + np.vdot(x, x).real + np.vdot(y, y).real)
                hsub_err = max(hsub_err, abs(recomputed - hs) / hs)
        else:
            x, y = U1[:a, j], U2[:a, j]
        den = np.linalg.norm(x) + np.linalg.norm(y)
        if den > 0:
            v = U1[:a, :j].conj().T @ x + U2[:a, :j].conj().T @ y
            coupled = max(coupled, float(np.linalg.norm(v) / den))

    return DiagnosticsReport(
        n=fact.n,
        k=k,
        method=fact.method,
        q_orth_loss=_orth_loss(fact.Q),
        v_orth_loss=_orth_loss(fact.V),
        stacked_u_orth_loss=_orth_loss(fact.U),
        u1_gram_offdiag=_offdiag_max(U1.conj().T @ U1),
        u1_norm_fro=float(np.linalg.norm(U1)),
        u2_offdiag_max=float(np.max(np.abs(np.where(desig, 0, U2)), initial=0.0)),
        u1_shape_violation=float(np.max(np.abs(np.where(u1_mask, U1, 0)), initial=0.0)),
        u2_triangular_violation=float(np.max(np.abs(np.where(u2_mask, U2, 0)), initial=0.0)),
        hessenberg_violation=hv,
        h_subdiag_min=float(np.min(np.diag(H, -1).real)) if k > 1 else 0.0,
        coupled_orth_max=coupled,
        hsub_recompute_max=hsub_err if fact.step_log is not None else math.nan,
    )


# -- backward error --------------------------------------------------------------


def _pinv(X):
    """Pseudo-inverse dropping singular values below ``sigma_max * n * eps``; flags truncation."""
    u, s, vh = np.linalg.svd(X, full_matrices=False)
    if s.size == 0:
        return np.zeros(X.T.shape, dtype=X.dtype), False
    keep = s > s[0] * max(X.shape) * EPS
    pinv = (vh[keep].conj().T / s[keep]) @ u[:, keep].conj().T
    return pinv, not bool(np.all(keep))


def _cond(X):
    return svd_metrics(X)[2] if X.size else 1.0


def recorded_residuals(fact):
    if fact.step_log is None or len(fact.step_log) < fact.k - 1:
        raise InvalidInput("backward error needs the step log (keep_log=True)")
    if fact.k <= 1:
        return np.zeros((fact.n, 0), dtype=fact.dtype)
    return np.column_stack([rec.r_hat for rec in fact.step_log[: fact.k - 1]])


def backward_error(fact_prev, fact, dense_A, dense_B, r_hat=None, split=SPLIT):
    """Measured backward error of a factorization with ``k`` basis vectors.

    With ``X1 = Q U1[:, :k-1]``, ``X2 = Q U2[:, :k-1]`` and the recorded
    residuals ``R``::

        F_mv = A X1 + B X2 - R
        F1   = R  - Q U1 H
        F2   = X1 - Q U2 H
        dA = -split (F_mv + F1) X1^+,   dB = -(1 - split) (F_mv + F1) X2^+

    ``fact_prev`` (the factorization one step earlier) is optional: its blocks
    are the leading columns of ``fact``.  When ``X1`` or ``X2`` is numerically
    rank deficient a :class:`PseudoInverseUnstable` warning is issued and the
    perturbation fields are set to infinity.
    """
    A = as_matrix(dense_A, "A")
    B = as_matrix(dense_B, "B")
    k, n = fact.k, fact.n
    report = structure_report(fact)
    report.arnoldi_residual = residual_check(fact, A, B)
    if k <= 1:
        for name in ("fmv_norm", "f1_norm", "f2_norm", "delta_ab_ratio"):
            setattr(report, name, 0.0)
        return report
    if fact_prev is not None and fact_prev.k != k - 1:
        raise InvalidInput(f"fact_prev has k={fact_prev.k}, expected {k - 1}")
    R = recorded_residuals(fact) if r_hat is None else np.asarray(r_hat)
    if R.shape != (n, k - 1):
        raise InvalidInput(f"r_hat must be {n}x{k - 1}, got {R.shape}")

    Q, U1, U2, H = fact.Q, fact.U1, fact.U2, fact.H
    X1 = Q @ U1[:, : k - 1]
    X2 = Q @ U2[:, : k - 1]
    Fmv = A @ X1 + B @ X2 - R
    F1 = R - Q @ (U1 @ H)
    F2 = X1 - Q @ (U2 @ H)
    report.fmv_norm = float(np.linalg.norm(Fmv))
    report.f1_norm = float(np.linalg.norm(F1))
    report.f2_norm = float(np.linalg.norm(F2))

    P1, bad1 = _pinv(X1)
    P2, bad2 = _pinv(X2)
    ab_norm = float(np.sqrt(np.linalg.norm(A) ** 2 + np.linalg.norm(B) ** 2))
    Uk = fact.U
    sig_u1 = svd_metrics(U1)[1] if U1.shape[0] >= U1.shape[1] else 0.0
    sig_u = svd_metrics(Uk)[1]
    report.cond_Q = _cond(Q)
    report.cond_U = _cond(Uk)
    report.zeta2 = sig_u1 / sig_u if sig_u > 0 else math.inf
    if bad1 or bad2:
        report.pinv_unstable = True
        warnings.warn(
            "rank-deficient Q U block; backward-error pseudo-inverse unreliable",
            PseudoInverseUnstable,
            stacklevel=2,
        )
        for name in ("delta_ab_ratio", "zeta1", "theorem_bound"):
            setattr(report, name, math.inf)
        report.bound_satisfied = False
        report.hypothesis_ok = False
        return report

    G = Fmv + F1
    dA = -split * G @ P1
    dB = -(1 - split) * G @ P2
    report.delta_ab_ratio = float(
        np.sqrt(np.linalg.norm(dA) ** 2 + np.linalg.norm(dB) ** 2) / ab_norm
    )
    stacked = np.linalg.norm(np.vstack([P1, P2]), 2)
    sig_v = svd_metrics(np.vstack([X1, X2]))[1]
    report.zeta1 = float(stacked * sig_v)
    K = max(report.cond_Q, report.cond_U)
    phi2 = (k + 1) * (2 * k + 1) * report.zeta1 / report.zeta2
    report.theorem_bound = float((2 * report.zeta1 * n * k**2 + phi2 / 2 * K**2) * K**2 * EPS)
    report.hypothesis_ok = bool(phi2 * K**4 * EPS < 1)
    report.bound_satisfied = bool(report.delta_ab_ratio <= report.theorem_bound)
    return report


def diagnose(fact, dense_A, dense_B):
    """Full report: structure, residual and backward error."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PseudoInverseUnstable)
        return backward_error(None, fact, dense_A, dense_B)


def oracle_comparison(ops, r_m1, r_0, fact):
    """Discrepancies of ``fact`` against both oracles: (H max-abs diff, span angle)."""
    from .linalg import principal_angle

    if not (isinstance(ops, OperatorPair) and ops.has_dense):
        raise InvalidInput("oracle comparison needs dense operators")
    _, Hl = linearized_arnoldi(ops.dense_A, ops.dense_B, r_m1, r_0, fact.k - 1)
    if Hl.shape == fact.H.shape:
        hdiff = float(np.max(np.abs(Hl - fact.H), initial=0.0))
    else:
        hdiff = math.inf
    K = brute_force_sequence(ops, r_m1, r_0, fact.k)
    angle = max(principal_angle(fact.Q, K), principal_angle(K, fact.Q))
    return hdiff, angle
