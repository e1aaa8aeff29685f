"""Compact Arnoldi factorization state and the first-level (Q-level) machinery.

A factorization with ``k`` basis vectors stores

    V_k = [Q @ U1; Q @ U2]          (2n x k, orthonormal columns)
    L @ V_{k-1} = V_k @ H           (H is k x (k-1) upper Hessenberg)

where ``L = [[A, B], [I, 0]]`` is the linearization of the second-order
recurrence ``r_j = A r_{j-1} + B r_{j-2}``.  ``Q`` is n x eta with eta <= k + 1.

Both TOAR and I-TOAR share this state and the step driver :func:`advance`; they
differ only in the second-level orthogonalization passed to it.
"""

import enum
import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import BreakdownSignal, InvalidInput, ParseError
from .linalg import EPS, RANK_TOL, as_matrix, as_vector, mgs_project, two_column_rrqr

log = logging.getLogger(__name__)

DEFLATION_TOL = 100 * EPS
BREAKDOWN_TOL = 100 * EPS
DEGENERACY_FLOOR = 1e3 * EPS


class Status(str, enum.Enum):
    RUNNING = "Running"
    COMPLETED = "Completed"
    BREAKDOWN = "Breakdown"
    DEFLATED_TO_INVARIANCE = "DeflatedToInvariance"


class StepKind(str, enum.Enum):
    EXPANDED = "Expanded"
    DEFLATED = "Deflated"
    BREAKDOWN = "Breakdown"


@dataclass(frozen=True)
class Options:
    """Run options shared by TOAR and I-TOAR.

    ``deflation_tol`` and ``breakdown_tol`` are relative: a step deflates when
    ``beta <= deflation_tol * ||r||`` and breaks down when
    ``h_sub <= breakdown_tol * gamma``.
    """

    first_reorth: bool = True
    second_reorth: bool = True
    deflation_tol: float = DEFLATION_TOL
    breakdown_tol: float = BREAKDOWN_TOL
    rank_tol: float = RANK_TOL
    degeneracy_floor: float = DEGENERACY_FLOOR
    keep_log: bool = True


@dataclass
class OperatorPair:
    """Black-box actions ``x -> A x`` and ``x -> B x`` on vectors of length ``n``.

    ``dense_A``/``dense_B`` are optional and used only by oracles and
    diagnostics.
    """

    n: int
    apply_A: Callable[[np.ndarray], np.ndarray]
    apply_B: Callable[[np.ndarray], np.ndarray]
    dense_A: Optional[np.ndarray] = None
    dense_B: Optional[np.ndarray] = None

    @classmethod
    def from_dense(cls, A, B):
        A = as_matrix(A, "A")
        B = as_matrix(B, "B")
        if A.shape != B.shape or A.shape[0] != A.shape[1]:
            raise InvalidInput(f"A and B must be square of equal size, got {A.shape}, {B.shape}")
        return cls(A.shape[0], A.__matmul__, B.__matmul__, A, B)

    @property
    def has_dense(self):
        return self.dense_A is not None and self.dense_B is not None

    def _checked(self, y, name):
        y = np.asarray(y)
        if y.ndim == 2 and y.shape[1] == 1:
            y = y[:, 0]
        if y.shape != (self.n,):
            raise InvalidInput(f"apply_{name} returned shape {y.shape}, expected ({self.n},)")
        return y

    def A(self, x):
        return self._checked(self.apply_A(x), "A")

    def B(self, x):
        return self._checked(self.apply_B(x), "B")


@dataclass
class StepRecord:
    """What one Arnoldi step computed, kept for diagnostics.

    ``x`` and ``y`` are the unnormalized second-level residuals; the stored
    U columns are ``x / h_sub`` and ``y / h_sub``.
    """

    j: int
    r_hat: np.ndarray
    s: np.ndarray
    u: np.ndarray
    beta: float
    h: np.ndarray
    x: np.ndarray
    y: np.ndarray
    h_sub: float
    deflated: bool
    variant: str
    flops: int


@dataclass
class StepOutcome:
    kind: StepKind
    beta: float
    h_col: np.ndarray


@dataclass
class SecondLevelResult:
    h: np.ndarray
    x: np.ndarray
    y: np.ndarray
    h_sub: float
    variant: str = ""
    flops: int = 0


@dataclass
class CompactArnoldiFactorization:
    Q: np.ndarray
    U1: np.ndarray
    U2: np.ndarray
    H: np.ndarray
    alpha: list
    gamma: float
    status: Status = Status.RUNNING
    step_log: Optional[list] = field(default_factory=list)
    method: str = "itoar"
    variant: str = "mgs"
    second_level_flops: int = 0
    deflations: int = 0

    @property
    def n(self):
        return self.Q.shape[0]

    @property
    def k(self):
        """Number of basis vectors (columns of U1, U2 and V)."""
        return self.U1.shape[1]

    @property
    def eta(self):
        return self.Q.shape[1]

    @property
    def dtype(self):
        return self.Q.dtype

    @property
    def U(self):
        return np.vstack([self.U1, self.U2])

    @property
    def V(self):
        return np.vstack([self.Q @ self.U1, self.Q @ self.U2])

    def u2_rows(self):
        """Row holding the single I-TOAR nonzero of each U2 column."""
        return [0] + [a - 1 for a in self.alpha[:-1]]

    def to_text(self):
        return dumps_factorization(self)

    @classmethod
    def from_text(cls, text):
        return loads_factorization(text)


def init_factorization(r_m1, r_0, rank_tol=RANK_TOL, keep_log=True):
    """Start a factorization from ``v0 = (r_0; r_m1)``: one basis vector, empty H."""
    dtype = np.result_type(np.float64, np.asarray(r_m1), np.asarray(r_0))
    r_m1 = as_vector(r_m1, "r_m1", dtype)
    r_0 = as_vector(r_0, "r_0", dtype)
    if r_m1.shape != r_0.shape:
        raise InvalidInput("r_m1 and r_0 must have the same length")
    gamma = float(np.sqrt(np.linalg.norm(r_0) ** 2 + np.linalg.norm(r_m1) ** 2))
    if gamma == 0.0:
        raise InvalidInput("starting vector (r_0; r_m1) is zero")
    Q1, X, alpha = two_column_rrqr(r_m1, r_0, rank_tol)
    return CompactArnoldiFactorization(
        Q=np.asfortranarray(Q1),
        U1=np.asfortranarray(X[:, 1:2] / gamma),
        U2=np.asfortranarray(X[:, 0:1] / gamma),
        H=np.zeros((1, 0), dtype=dtype),
        alpha=[alpha],
        gamma=gamma,
        step_log=[] if keep_log else None,
    )


def next_residual(fact, ops):
    """``A (Q u1) + B (Q u2)`` for the last U columns, in that evaluation order."""
    if fact.status != Status.RUNNING:
        raise InvalidInput(f"factorization is {fact.status.value}, not Running")
    if ops.n != fact.n:
        raise InvalidInput(f"operator size {ops.n} does not match basis length {fact.n}")
    qa = fact.Q @ fact.U1[:, -1]
    qb = fact.Q @ fact.U2[:, -1]
    return ops.A(qa) + ops.B(qb)


def first_level_orthogonalize(fact, r, reorth=True, deflation_tol=DEFLATION_TOL):
    """Orthogonalize ``r`` against ``Q``.

    Returns ``(s, q_new, beta)``; ``q_new`` is None when ``beta`` is at or below
    ``deflation_tol * ||r||`` (the deflation signal).
    """
    if fact.status != Status.RUNNING:
        raise InvalidInput(f"factorization is {fact.status.value}, not Running")
    rnorm = float(np.linalg.norm(r))
    s, resid, beta = mgs_project(fact.Q, r, reorth_passes=1 if reorth else 0)
    if beta <= deflation_tol * rnorm or beta == 0.0:
        return s, None, beta
    return s, resid / beta, beta


def h_sub_norm(beta, x, y):
    return float(np.sqrt(beta * beta + np.vdot(x, x).real + np.vdot(y, y).real))


def check_breakdown(fact, result, breakdown_tol):
    if result.h_sub <= breakdown_tol * fact.gamma:
        raise BreakdownSignal(
            f"h_sub = {result.h_sub:.3e} at or below breakdown threshold", result=result
        )


def _promote(fact, dtype):
    if np.dtype(dtype) == fact.dtype or not np.iscomplexobj(np.empty(0, dtype)):
        return
    fact.Q = fact.Q.astype(dtype, order="F")
    fact.U1 = fact.U1.astype(dtype, order="F")
    fact.U2 = fact.U2.astype(dtype, order="F")
    fact.H = fact.H.astype(dtype)


def advance(fact, ops, second_level, opts):
    """One Arnoldi step: residual, first level, ``second_level``, then append.

    ``second_level(fact, s, u, beta)`` returns a :class:`SecondLevelResult` or
    raises :class:`BreakdownSignal`.  On breakdown the factorization is left
    as it was and its status becomes Breakdown.
    """
    r_hat = next_residual(fact, ops)
    _promote(fact, r_hat.dtype)
    s, q_new, beta = first_level_orthogonalize(
        fact, r_hat, reorth=opts.first_reorth, deflation_tol=opts.deflation_tol
    )
    deflated = q_new is None
    beta_eff = 0.0 if deflated else beta
    u = np.array(fact.U1[:, -1])
    try:
        res = second_level(fact, s, u, beta_eff)
    except BreakdownSignal as exc:
        fact.status = Status.DEFLATED_TO_INVARIANCE if fact.deflations else Status.BREAKDOWN
        res = exc.result
        h_col = np.append(res.h, res.h_sub) if res is not None else np.zeros(fact.k + 1)
        return StepOutcome(StepKind.BREAKDOWN, beta, h_col)

    j = fact.k
    hs = res.h_sub
    a = fact.alpha[-1]
    dtype = fact.dtype
    if deflated:
        fact.U1 = np.asfortranarray(np.column_stack([fact.U1, res.x / hs]))
        fact.U2 = np.asfortranarray(np.column_stack([fact.U2, res.y / hs]))
        fact.alpha.append(a)
        fact.deflations += 1
    else:
        fact.Q = np.asfortranarray(np.column_stack([fact.Q, q_new]))
        U1 = np.zeros((a + 1, j + 1), dtype=dtype, order="F")
        U1[:a, :j] = fact.U1
        U1[:a, j] = res.x / hs
        U1[a, j] = beta / hs
        U2 = np.zeros((a + 1, j + 1), dtype=dtype, order="F")
        U2[:a, :j] = fact.U2
        U2[:a, j] = res.y / hs
        fact.U1, fact.U2 = U1, U2
        fact.alpha.append(a + 1)
    H = np.zeros((j + 1, j), dtype=dtype)
    H[:j, : j - 1] = fact.H
    H[:j, j - 1] = res.h
    H[j, j - 1] = hs
    fact.H = H
    fact.second_level_flops += res.flops
    if fact.step_log is not None:
        fact.step_log.append(
            StepRecord(
                j=j, r_hat=r_hat, s=s, u=u, beta=beta, h=res.h, x=res.x, y=res.y,
                h_sub=hs, deflated=deflated, variant=res.variant, flops=res.flops,
            )
        )
    kind = StepKind.DEFLATED if deflated else StepKind.EXPANDED
    return StepOutcome(kind, beta, np.append(res.h, hs))


def run(ops, r_m1, r_0, k_target, step, opts, method, variant):
    if k_target < 1:
        raise InvalidInput(f"k_target must be at least 1, got {k_target}")
    fact = init_factorization(r_m1, r_0, opts.rank_tol, opts.keep_log)
    fact.method, fact.variant = method, variant
    if fact.n != ops.n:
        raise InvalidInput(f"starting vectors have length {fact.n}, operators act on {ops.n}")
    while fact.k < k_target:
        if step(fact, ops).kind == StepKind.BREAKDOWN:
            return fact
    fact.status = Status.COMPLETED
    return fact


# -- serialization ---------------------------------------------------------

_FIELDS = ("method", "variant", "dtype", "n", "k", "eta", "alpha", "gamma", "status", "q", "u1", "u2", "h")


def _fmt(z):
    if isinstance(z, complex) or np.iscomplexobj(z):
        return f"{z.real:.16e}{z.imag:+.16e}j"
    return f"{float(z):.16e}"


def _fmt_array(a, order):
    return " ".join(_fmt(v) for v in np.asarray(a).ravel(order=order))


def dumps_factorization(fact):
    lines = [
        "# compact Arnoldi factorization; q, u1, u2 column-major, h row-major",
        f"method = {fact.method}",
        f"variant = {fact.variant}",
        f"dtype = {fact.dtype.name}",
        f"n = {fact.n}",
        f"k = {fact.k}",
        f"eta = {fact.eta}",
        "alpha = " + " ".join(str(a) for a in fact.alpha),
        f"gamma = {fact.gamma:.16e}",
        f"status = {fact.status.value}",
        "q = " + _fmt_array(fact.Q, "F"),
        "u1 = " + _fmt_array(fact.U1, "F"),
        "u2 = " + _fmt_array(fact.U2, "F"),
        "h = " + _fmt_array(fact.H, "C"),
    ]
    return "\n".join(lines) + "\n"


def loads_factorization(text):
    vals = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or key not in _FIELDS:
            raise ParseError(f"unexpected line {line[:40]!r}", line=lineno)
        vals[key] = (value.strip(), lineno)
    missing = [f for f in _FIELDS if f not in vals]
    if missing:
        raise ParseError(f"missing fields: {', '.join(missing)}")

    def num(key, conv):
        value, lineno = vals[key]
        try:
            return [conv(tok) for tok in value.split()]
        except ValueError as exc:
            raise ParseError(str(exc), line=lineno) from None

    dtype = np.dtype(vals["dtype"][0])
    conv = complex if dtype.kind == "c" else float
    n, k, eta = (num(f, int)[0] for f in ("n", "k", "eta"))

    def arr(key, shape, order):
        data = num(key, conv)
        if len(data) != shape[0] * shape[1]:
            raise ParseError(
                f"{key} has {len(data)} values, expected {shape[0] * shape[1]}", line=vals[key][1]
            )
        return np.asfortranarray(np.array(data, dtype=dtype).reshape(shape, order=order))

    return CompactArnoldiFactorization(
        Q=arr("q", (n, eta), "F"),
        U1=arr("u1", (eta, k), "F"),
        U2=arr("u2", (eta, k), "F"),
        H=np.ascontiguousarray(arr("h", (k, k - 1), "C")),
        alpha=num("alpha", int),
        gamma=num("gamma", float)[0],
        status=Status(vals["status"][0]),
        step_log=None,
        method=vals["method"][0],
        variant=vals["variant"][0],
    )
