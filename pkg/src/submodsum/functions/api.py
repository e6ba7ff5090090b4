"""Public dispatch over the measure families.

All set arguments are integer index sets into an EvalContext universe
(0..n_ground-1 is the ground set, the rest the auxiliary shadow). The
wrappers normalize sets, enforce disjointness, and short-circuit the
degenerate cases every family shares:

    I(A; {})   = 0          f(A | {}) = f(A)        I(A; Q | {}) = I(A; Q)
    I(A; {} | P) = 0

so family code never sees an empty conditioning set where it would have
to invert an empty block.
"""

from __future__ import annotations

from ..errors import ConfigError, UnsupportedError
from ._common import MarginalState, as_indices, check_disjoint, check_ground, check_universe
from .concave import ConcaveOverModularOps
from .coverage import ProbSetCoverOps, SetCoverOps
from .disparity import DisparityMinOps, DisparitySumOps
from .facility import FacilityLocation1Ops, FacilityLocation2Ops
from .graphcut import GraphCutOps
from .logdet import LogDetOps
from .rouge import RougeOps
from .spec import Family, FunctionSpec, MeasureMode

REGISTRY = {
    Family.SET_COVER: SetCoverOps(),
    Family.PROB_SET_COVER: ProbSetCoverOps(),
    Family.GRAPH_CUT: GraphCutOps(),
    Family.FACILITY_LOCATION_1: FacilityLocation1Ops(),
    Family.FACILITY_LOCATION_2: FacilityLocation2Ops(),
    Family.LOG_DET: LogDetOps(),
    Family.CONCAVE_OVER_MODULAR: ConcaveOverModularOps(),
    Family.ROUGE: RougeOps(),
    Family.DISPARITY_SUM: DisparitySumOps(),
    Family.DISPARITY_MIN: DisparityMinOps(),
}

MODES_SUPPORTED = {
    Family.GRAPH_CUT: frozenset({MeasureMode.BASE, MeasureMode.SMI, MeasureMode.CG}),
    Family.FACILITY_LOCATION_2: frozenset({MeasureMode.BASE, MeasureMode.SMI}),
    Family.DISPARITY_SUM: frozenset({MeasureMode.BASE}),
    Family.DISPARITY_MIN: frozenset({MeasureMode.BASE}),
}
_ALL_MODES = frozenset(MeasureMode)

# Continuous parameters that can carry gradient for each family.
PARAM_KEYS = {
    Family.GRAPH_CUT: ("lam", "nu"),
    Family.FACILITY_LOCATION_1: ("eta", "nu"),
    Family.FACILITY_LOCATION_2: ("eta",),
    Family.LOG_DET: ("eta", "nu"),
    Family.CONCAVE_OVER_MODULAR: ("eta",),
}


def modes_supported(family: Family) -> frozenset:
    return MODES_SUPPORTED.get(family, _ALL_MODES)


def _check_mode(spec: FunctionSpec, mode: MeasureMode) -> None:
    if mode not in modes_supported(spec.family):
        raise UnsupportedError(f"{spec.family.value} does not define mode {mode.value}")


def _norm(ctx, S, label, ground=False):
    S = as_indices(S if S is not None else ())
    check_universe(S, ctx, label)
    if ground:
        check_ground(S, ctx, label)
    return S


def eval_base(spec: FunctionSpec, S, ctx) -> float:
    S = _norm(ctx, S, "S")
    if not S.size:
        return 0.0
    return float(REGISTRY[spec.family].base(ctx, spec, S))


def smi(spec: FunctionSpec, A, Q, ctx) -> float:
    _check_mode(spec, MeasureMode.SMI)
    A = _norm(ctx, A, "A", ground=True)
    Q = _norm(ctx, Q, "Q")
    check_disjoint(A, Q, "A", "Q")
    if not Q.size or not A.size:
        return 0.0
    return float(REGISTRY[spec.family].smi(ctx, spec, A, Q))


def cg(spec: FunctionSpec, A, P, ctx) -> float:
    _check_mode(spec, MeasureMode.CG)
    A = _norm(ctx, A, "A", ground=True)
    P = _norm(ctx, P, "P")
    check_disjoint(A, P, "A", "P")
    if not P.size:
        return eval_base(spec, A, ctx)
    if not A.size:
        return 0.0
    return float(REGISTRY[spec.family].cg(ctx, spec, A, P))


def csmi(spec: FunctionSpec, A, Q, P, ctx) -> float:
    _check_mode(spec, MeasureMode.CSMI)
    A = _norm(ctx, A, "A", ground=True)
    Q = _norm(ctx, Q, "Q")
    P = _norm(ctx, P, "P")
    check_disjoint(A, Q, "A", "Q")
    check_disjoint(A, P, "A", "P")
    check_disjoint(Q, P, "Q", "P")
    if not P.size:
        return smi(spec, A, Q, ctx)
    if not Q.size or not A.size:
        return 0.0
    return float(REGISTRY[spec.family].csmi(ctx, spec, A, Q, P))


def evaluate(spec: FunctionSpec, mode: MeasureMode, ctx, A, Q=None, P=None) -> float:
    """Mode-polymorphic entry point used by the optimizer and learner."""
    if mode == MeasureMode.BASE:
        return eval_base(spec, A, ctx)
    if mode == MeasureMode.SMI:
        return smi(spec, A, Q, ctx)
    if mode == MeasureMode.CG:
        return cg(spec, A, P, ctx)
    if mode == MeasureMode.CSMI:
        return csmi(spec, A, Q, P, ctx)
    raise ConfigError(f"unknown mode {mode!r}")


class _ZeroState(MarginalState):
    def gain(self, j):
        return 0.0

    def _push(self, j):
        pass


def make_state(spec: FunctionSpec, mode: MeasureMode, ctx, Q=None, P=None) -> MarginalState:
    """Incremental evaluator for the chosen measure, started at A = {}.

    Degenerate conditioning collapses exactly like the closed forms do.
    """
    _check_mode(spec, mode)
    Q = _norm(ctx, Q, "Q")
    P = _norm(ctx, P, "P")
    if mode == MeasureMode.SMI and not Q.size:
        state = _ZeroState()
    elif mode == MeasureMode.CSMI and not Q.size:
        state = _ZeroState()
    elif mode == MeasureMode.CSMI and not P.size:
        state = REGISTRY[spec.family].state(ctx, spec, MeasureMode.SMI, Q, P)
    elif mode == MeasureMode.CG and not P.size:
        state = REGISTRY[spec.family].state(ctx, spec, MeasureMode.BASE, Q, P)
    else:
        state = REGISTRY[spec.family].state(ctx, spec, mode, Q, P)
    state.family = spec.family
    state.mode = mode
    return state


def marginal(spec: FunctionSpec, mode: MeasureMode, state: MarginalState, j: int) -> float:
    """Pure gain of candidate j under the given state; add with state.add(j)."""
    if getattr(state, "family", spec.family) != spec.family or getattr(state, "mode", mode) != mode:
        raise ConfigError("marginal state was built for a different spec or mode")
    return float(state.gain(int(j)))


def partials(spec: FunctionSpec, mode: MeasureMode, ctx, A, Q=None, P=None) -> dict:
    """d measure / d parameter for the family's continuous parameters.

    Missing keys mean zero gradient; degenerate conditioning gives {}.
    """
    _check_mode(spec, mode)
    A = _norm(ctx, A, "A", ground=True)
    Q = _norm(ctx, Q, "Q")
    P = _norm(ctx, P, "P")
    if mode == MeasureMode.SMI and (not Q.size or not A.size):
        return {}
    if mode == MeasureMode.CSMI and (not Q.size or not A.size):
        return {}
    if mode == MeasureMode.CSMI and not P.size:
        return partials(spec, MeasureMode.SMI, ctx, A, Q, None)
    if mode == MeasureMode.CG and not P.size:
        mode = MeasureMode.BASE
    if mode == MeasureMode.CG and not A.size:
        return {}
    out = REGISTRY[spec.family].partials(ctx, spec, mode, A, Q, P)
    return {k: float(v) for k, v in out.items()}


def near_kink(spec: FunctionSpec, mode: MeasureMode, ctx, A, Q=None, P=None, tol: float = 1e-5) -> bool:
    """True when a max/min switch sits within tol, making the parameter
    gradient one-sided at this point."""
    _check_mode(spec, mode)
    A = _norm(ctx, A, "A", ground=True)
    Q = _norm(ctx, Q, "Q")
    P = _norm(ctx, P, "P")
    if not A.size:
        return False
    if mode in (MeasureMode.SMI, MeasureMode.CSMI) and not Q.size:
        return False
    if mode == MeasureMode.CSMI and not P.size:
        mode = MeasureMode.SMI
    if mode == MeasureMode.CG and not P.size:
        mode = MeasureMode.BASE
    return bool(REGISTRY[spec.family].near_kink(ctx, spec, mode, A, Q, P, tol))
