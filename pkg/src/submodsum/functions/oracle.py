"""Definitional cross-check for every closed-form measure.

Each measure is re-derived from nothing but base-function evaluations:

    I(A; Q)     = f(A) + f(Q) - f(A u Q)
    f(A | P)    = f(A u P) - f(P)
    I(A; Q | P) = f(A|P) + f(Q|P) - f(A u Q|P)

evaluated on the family's oracle view of the context, which folds the
cross-similarity weights (eta, nu) into the kernel so the bare
definitions see the same geometry the closed forms assume.
"""

from __future__ import annotations

import numpy as np

from ._common import as_indices
from .api import REGISTRY, _check_mode
from .spec import FunctionSpec, MeasureMode


def definitional_oracle(spec: FunctionSpec, mode: MeasureMode, ctx, A, Q=None, P=None) -> float:
    _check_mode(spec, mode)
    ops = REGISTRY[spec.family]
    A = as_indices(A if A is not None else ())
    Q = as_indices(Q if Q is not None else ())
    P = as_indices(P if P is not None else ())
    view = ops.oracle_view(ctx, spec, mode, Q, P)

    def f(*sets):
        S = as_indices(np.concatenate([np.asarray(s, dtype=int) for s in sets]) if sets else ())
        if not S.size:
            return 0.0
        return float(ops.base(view, spec, S))

    if mode == MeasureMode.BASE:
        return f(A)
    if mode == MeasureMode.SMI:
        return f(A) + f(Q) - f(A, Q)
    if mode == MeasureMode.CG:
        return f(A, P) - f(P)
    return f(A, P) + f(Q, P) - f(A, Q, P) - f(P)


def conditioned_smi(spec: FunctionSpec, ctx, A, Q, P) -> float:
    """I_{g}(A; Q) for g(S) = f(S u P) - f(P): the information carried by
    the P-shifted function. Must equal the joint measure numerically."""
    ops = REGISTRY[spec.family]
    A = as_indices(A)
    Q = as_indices(Q)
    P = as_indices(P)
    view = ops.oracle_view(ctx, spec, MeasureMode.CSMI, Q, P)

    def f(*sets):
        S = as_indices(np.concatenate([np.asarray(s, dtype=int) for s in sets]) if sets else ())
        return float(ops.base(view, spec, S)) if S.size else 0.0

    def g(*sets):
        return f(*sets, P) - f(P)

    return g(A) + g(Q) - g(A, Q)


def smi_conditional_gain(spec: FunctionSpec, ctx, A, Q, P) -> float:
    """h_Q(A | P) for h_Q(S) = I_f(S; Q): the conditional gain of the
    query-information function. The second face of the same identity."""
    ops = REGISTRY[spec.family]
    A = as_indices(A)
    Q = as_indices(Q)
    P = as_indices(P)
    view = ops.oracle_view(ctx, spec, MeasureMode.CSMI, Q, P)

    def f(*sets):
        S = as_indices(np.concatenate([np.asarray(s, dtype=int) for s in sets]) if sets else ())
        return float(ops.base(view, spec, S)) if S.size else 0.0

    def h(*sets):
        return f(*sets) + f(Q) - f(*sets, Q)

    return h(A, P) - h(P)
