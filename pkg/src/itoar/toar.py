"""TOAR baseline: orthogonalize the stacked coefficient vector against [U1; U2]."""

import numpy as np

from .core import Options, SecondLevelResult, advance, check_breakdown, h_sub_norm, run
from .errors import InvalidInput
from .linalg import mgs_project


def toar_second_level(fact, s, u_in, beta, reorth=True, breakdown_tol=None):
    """Stacked MGS of ``(s; u)`` against the orthonormal columns of ``[U1; U2]``.

    No structural zeroing: ``y`` is the full lower half of the residual.
    """
    a, j = fact.U1.shape
    s = np.asarray(s, dtype=fact.dtype)
    u = np.asarray(u_in, dtype=fact.dtype)
    if s.shape != (a,) or u.shape != (a,):
        raise InvalidInput(f"s and u must have length {a}")
    h, w, _ = mgs_project(fact.U, np.concatenate([s, u]), reorth_passes=1 if reorth else 0)
    x, y = w[:a], w[a:]
    passes = 2 if reorth else 1
    res = SecondLevelResult(
        h=h, x=x, y=y, h_sub=h_sub_norm(beta, x, y), variant="toar",
        flops=passes * 8 * a * j + 6 * a,
    )
    check_breakdown(fact, res, Options.breakdown_tol if breakdown_tol is None else breakdown_tol)
    return res


def toar_step(fact, ops, opts=None):
    opts = opts or Options()
    return advance(fact, ops, _second(opts), opts)


def _second(opts):
    def second(fact, s, u, beta):
        return toar_second_level(fact, s, u, beta, opts.second_reorth, opts.breakdown_tol)

    return second


def toar_run(ops, r_m1, r_0, k_target, opts=None):
    """Build a TOAR factorization with up to ``k_target`` basis vectors."""
    opts = opts or Options()
    second = _second(opts)
    return run(
        ops, r_m1, r_0, k_target,
        lambda fact, o: advance(fact, o, second, opts),
        opts, "toar", "toar",
    )
