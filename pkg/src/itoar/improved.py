"""I-TOAR: second-level updates that keep U1 columns mutually orthogonal and U2 diagonal.

Three interchangeable variants compute the new Hessenberg column ``h``:

``mgs``
    weighted modified Gram-Schmidt of ``s`` against the U1 columns, then
    ``h = U1^H s + U2^H u``.
``proc1``
    ``h = (U2^H U2)^{-1} U2^H u``; one division per column.
``proc2``
    ``h = (U1^H U1)^{-1} U1^H s``.

Under exact I-TOAR structure the three agree.  The procedures fall back to
``mgs`` (with a logged warning) when a Gram diagonal is below the degeneracy
floor.
"""

import logging

import numpy as np

from . import kernels
from .core import (
    Options,
    SecondLevelResult,
    advance,
    check_breakdown,
    h_sub_norm,
    run,
)
from .errors import BreakdownSignal, DegenerateColumn, InvalidInput, SmallDiagonal

log = logging.getLogger(__name__)

VARIANTS = ("mgs", "proc1", "proc2")


def _zeroed_y(fact, u, h):
    # only the last coefficient row of U2 can be reached; the rest is zero by structure
    y = u - fact.U2 @ h
    y[: fact.alpha[-1] - 1] = 0
    return y


def second_level_mgs(fact, s, u_in, beta, reorth=True, breakdown_tol=None):
    """Weighted-MGS second level.

    ``x = s - U1 gamma`` with ``gamma_t = U1[:, t]^H s / ||U1[:, t]||^2``;
    ``h = U1^H s + U2^H u``; ``y = u - U2 h`` with all but its last entry
    zeroed; ``h_sub = sqrt(beta^2 + ||x||^2 + ||y||^2)``.
    """
    U1, U2 = fact.U1, fact.U2
    a, j = U1.shape
    s = np.asarray(s, dtype=U1.dtype)
    u = np.asarray(u_in, dtype=U1.dtype)
    if s.shape != (a,) or u.shape != (a,):
        raise InvalidInput(f"s and u must have length {a}")
    _exact_breakdown(fact, s, u, beta, breakdown_tol)
    x = s.copy()
    gam = np.zeros(j, dtype=U1.dtype)
    passes = 2 if reorth else 1
    for _ in range(passes):
        bad = kernels.weighted_mgs_pass(U1, x, gam)
        if bad >= 0:
            raise DegenerateColumn(f"U1 column {bad} has zero norm", column=bad)
    h = U1.conj().T @ s + U2.conj().T @ u
    y = _zeroed_y(fact, u, h)
    res = SecondLevelResult(
        h=h, x=x, y=y, h_sub=h_sub_norm(beta, x, y), variant="mgs",
        flops=passes * 6 * a * j + 4 * a * j + 2 * a * j + 6 * a,
    )
    check_breakdown(fact, res, _tol(breakdown_tol))
    return res


def _tol(breakdown_tol):
    return Options.breakdown_tol if breakdown_tol is None else breakdown_tol


def _exact_breakdown(fact, s, u, beta, breakdown_tol):
    # nothing left to orthogonalize: report breakdown before any U1 column is divided by
    if h_sub_norm(beta, s, u) <= _tol(breakdown_tol) * fact.gamma:
        j = fact.U1.shape[1]
        zero = np.zeros(j, dtype=fact.dtype)
        res = SecondLevelResult(h=zero, x=s, y=u, h_sub=h_sub_norm(beta, s, u), variant="mgs", flops=0)
        raise BreakdownSignal("s, u and beta vanish: invariant subspace reached", result=res)


def _diag_divide(block, vec, floor):
    norms2 = np.einsum("ij,ij->j", block.conj(), block).real
    limit = (floor * np.linalg.norm(block)) ** 2
    small = np.flatnonzero(norms2 <= limit)
    if small.size:
        t = int(small[0])
        raise SmallDiagonal(
            f"Gram diagonal {norms2[t]:.3e} of column {t} at or below degeneracy floor", column=t
        )
    return (block.conj().T @ vec) / norms2


def _procedure(fact, s, u_in, beta, h, name, breakdown_tol):
    s = np.asarray(s, dtype=fact.dtype)
    u = np.asarray(u_in, dtype=fact.dtype)
    x = s - fact.U1 @ h
    y = _zeroed_y(fact, u, h)
    a, j = fact.U1.shape
    res = SecondLevelResult(
        h=h, x=x, y=y, h_sub=h_sub_norm(beta, x, y), variant=name,
        flops=4 * a * j + 2 * a * j + 2 * a * j + 6 * a,
    )
    check_breakdown(fact, res, _tol(breakdown_tol))
    return res


def second_level_procedure1(fact, s, u_in, beta, floor=None, breakdown_tol=None):
    """``h = (U2^H U2)^{-1} U2^H u``; raises :class:`SmallDiagonal` below the floor."""
    floor = Options.degeneracy_floor if floor is None else floor
    u = np.asarray(u_in, dtype=fact.dtype)
    h = _diag_divide(fact.U2, u, floor)
    return _procedure(fact, s, u, beta, h, "proc1", breakdown_tol)


def second_level_procedure2(fact, s, u_in, beta, floor=None, breakdown_tol=None):
    """``h = (U1^H U1)^{-1} U1^H s``; raises :class:`SmallDiagonal` below the floor."""
    floor = Options.degeneracy_floor if floor is None else floor
    s = np.asarray(s, dtype=fact.dtype)
    h = _diag_divide(fact.U1, s, floor)
    return _procedure(fact, s, u_in, beta, h, "proc2", breakdown_tol)


def _second_level(variant, opts):
    if variant not in VARIANTS:
        raise InvalidInput(f"unknown I-TOAR variant {variant!r}; expected one of {VARIANTS}")

    def mgs(fact, s, u, beta):
        return second_level_mgs(fact, s, u, beta, opts.second_reorth, opts.breakdown_tol)

    if variant == "mgs":
        return mgs
    proc = second_level_procedure1 if variant == "proc1" else second_level_procedure2

    def with_fallback(fact, s, u, beta):
        try:
            return proc(fact, s, u, beta, opts.degeneracy_floor, opts.breakdown_tol)
        except SmallDiagonal as exc:
            log.warning("%s: %s; falling back to mgs at step %d", variant, exc, fact.k)
            return mgs(fact, s, u, beta)

    return with_fallback


def itoar_step(fact, ops, variant="mgs", opts=None):
    """Advance ``fact`` by one I-TOAR step in place; returns a :class:`StepOutcome`."""
    opts = opts or Options()
    return advance(fact, ops, _second_level(variant, opts), opts)


def itoar_run(ops, r_m1, r_0, k_target, opts=None, variant="mgs"):
    """Build an I-TOAR factorization with up to ``k_target`` basis vectors.

    Examples
    --------
    >>> import numpy as np
    >>> from itoar.core import OperatorPair
    >>> ops = OperatorPair.from_dense([[0., 1.], [1., 0.]], np.zeros((2, 2)))
    >>> f = itoar_run(ops, [0., 0.], [1., 0.], 2)
    >>> f.status.value, round(float(f.H[1, 0]) ** 2, 12)
    ('Completed', 2.0)
    """
    opts = opts or Options()
    second = _second_level(variant, opts)
    return run(
        ops, r_m1, r_0, k_target,
        lambda fact, o: advance(fact, o, second, opts),
        opts, "itoar", variant,
    )
