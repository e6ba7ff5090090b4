"""Shared plumbing for measure families: set handling, scaling, marginal states."""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError

# -- set handling ------------------------------------------------------------


def as_indices(S) -> np.ndarray:
    """Sorted unique int array; accepts any iterable of indices."""
    arr = np.asarray(sorted(set(int(i) for i in S)), dtype=int)
    return arr


def check_ground(A: np.ndarray, ctx, label: str = "A") -> None:
    if A.size and (A.min() < 0 or A.max() >= ctx.n_ground):
        raise ConfigError(f"{label} must be a subset of the ground set (indices 0..{ctx.n_ground - 1})")


def check_universe(S: np.ndarray, ctx, label: str) -> None:
    if S.size and (S.min() < 0 or S.max() >= ctx.size):
        raise ConfigError(f"{label} contains indices outside the universe 0..{ctx.size - 1}")


def check_disjoint(a: np.ndarray, b: np.ndarray, la: str, lb: str) -> None:
    inter = np.intersect1d(a, b)
    if inter.size:
        raise ConfigError(f"{la} and {lb} must be disjoint, share {inter.tolist()}")


def require_aux(S: np.ndarray, ctx, label: str) -> None:
    """Restricted families define their measures only against shadow-universe sets."""
    if S.size and S.min() < ctx.n_ground:
        raise ConfigError(f"{label} must live in the auxiliary universe for this family")


# -- scaling -----------------------------------------------------------------


def column_scale(cols: np.ndarray, ctx, t: float) -> np.ndarray:
    """Per-column factor seen from a ground-set row: t on auxiliary columns, 1 inside V.

    Cross-similarity weighting applies only to V <-> V' pairs.
    """
    return np.where(cols >= ctx.n_ground, float(t), 1.0)


def pair_membership_mask(rows: np.ndarray, cols: np.ndarray, members: set) -> np.ndarray:
    """Boolean mask over rows x cols: True where exactly one endpoint is a member.

    Pairs with both endpoints in the member set stay unscaled, as does the
    diagonal, so a symmetric kernel keeps its diagonal under scaling.
    """
    rin = np.array([int(r) in members for r in rows], dtype=bool)
    cin = np.array([int(c) in members for c in cols], dtype=bool)
    return rin[:, None] ^ cin[None, :]


def _aux_members(ctx, target) -> set:
    """Only auxiliary-universe members induce cross-pair scaling."""
    return set(int(c) for c in target if int(c) >= ctx.n_ground)


def pair_scaled_block(K: np.ndarray, rows: np.ndarray, cols: np.ndarray, ctx, eta_cols, eta: float, nu_cols, nu: float) -> np.ndarray:
    """K[rows, cols] with each pair weighted by eta^[one endpoint in eta set]
    * nu^[one endpoint in nu set]; the two-class pattern keeps the scaled
    kernel positive semidefinite for weights in [0, 1]."""
    block = K[np.ix_(rows, cols)].copy() if rows.size and cols.size else np.zeros((rows.size, cols.size))
    if not block.size:
        return block
    for t, target in ((float(eta), eta_cols), (float(nu), nu_cols)):
        members = _aux_members(ctx, target)
        if t == 1.0 or not members:
            continue
        block = np.where(pair_membership_mask(rows, cols, members), block * t, block)
    return block


def scaled_kernel_matrix(K: np.ndarray, ctx, eta_cols, eta: float, nu_cols, nu: float) -> np.ndarray:
    """Full-kernel version of the pair scaling, used by the definitional oracle."""
    out = K.copy()
    idx = np.arange(out.shape[0])
    for t, target in ((float(eta), eta_cols), (float(nu), nu_cols)):
        members = _aux_members(ctx, target)
        if t == 1.0 or not members:
            continue
        out = np.where(pair_membership_mask(idx, idx, members), out * t, out)
    return out


# -- concave transforms --------------------------------------------------------

PSI = {
    "sqrt": np.sqrt,
    "log1p": np.log1p,
    "identity": lambda x: x,
}


# -- marginal state protocol ---------------------------------------------------


class MarginalState:
    """Incremental evaluator of one measure while the summary grows.

    gain(j) is a pure read; add(j) commits the candidate and returns its gain.
    """

    def __init__(self):
        self.value = 0.0
        self.selected: list[int] = []

    def gain(self, j: int) -> float:
        raise NotImplementedError

    def _push(self, j: int) -> None:
        raise NotImplementedError

    def add(self, j: int) -> float:
        g = self.gain(j)
        self._push(j)
        self.value += g
        self.selected.append(int(j))
        return g
