"""Evaluation context: one kernel plus concept matrices over V union V'.

Items are indexed 0..n-1 for the ground set V and n..N-1 for auxiliary
items (V').  Families read the view they need:

* raw kernel               graph-cut, disparity
* nonneg kernel            facility-location (cosine gets the (s+1)/2 shift)
* cross-only nonneg kernel second facility-location variant, concave-over-modular
* jittered kernel          log-determinant (raw + jitter * I)
* counts / cover_prob      set-cover, probabilistic set-cover, rouge

The copy_with hook swaps individual views; the definitional oracle uses it
to evaluate base functions on transformed kernels.
"""

from __future__ import annotations

import numpy as np

from ..data import (
    AuxiliarySet,
    ConceptUniverse,
    GroundSet,
    SimilarityKernel,
    build_kernel,
    count_matrix,
    coverage_matrix,
)
from ..errors import ConfigError


def _shift_nonneg(matrix: np.ndarray, metric: str) -> np.ndarray:
    if metric == "cosine":
        return (matrix + 1.0) / 2.0
    return matrix


def _cross_only(matrix: np.ndarray, n_ground: int) -> np.ndarray:
    out = matrix.copy()
    n = n_ground
    out[:n, :n] = np.eye(n)
    out[n:, n:] = np.eye(matrix.shape[0] - n)
    return out


class EvalContext:
    def __init__(
        self,
        kernel: np.ndarray,
        n_ground: int,
        ids: tuple[str, ...] | None = None,
        metric: str = "cosine",
        jitter: float = 1e-6,
        counts: np.ndarray | None = None,
        cover_prob: np.ndarray | None = None,
        concept_weights: np.ndarray | None = None,
        role_indices: dict[str, tuple[int, ...]] | None = None,
        nonneg: np.ndarray | None = None,
        cross_nonneg: np.ndarray | None = None,
        logdet: np.ndarray | None = None,
    ):
        self.kernel = np.asarray(kernel, dtype=float)
        self.size = self.kernel.shape[0]
        if self.kernel.shape != (self.size, self.size):
            raise ConfigError("kernel must be square")
        if not (0 <= n_ground <= self.size):
            raise ConfigError("n_ground out of range")
        self.n_ground = n_ground
        self.ids = tuple(ids) if ids is not None else tuple(str(i) for i in range(self.size))
        self.metric = metric
        self.jitter = float(jitter)
        self.counts = None if counts is None else np.asarray(counts, dtype=float)
        self.cover_prob = None if cover_prob is None else np.asarray(cover_prob, dtype=float)
        if concept_weights is not None:
            self.concept_weights = np.asarray(concept_weights, dtype=float)
        elif self.counts is not None:
            self.concept_weights = np.ones(self.counts.shape[1])
        elif self.cover_prob is not None:
            self.concept_weights = np.ones(self.cover_prob.shape[1])
        else:
            self.concept_weights = None
        self.role_indices = dict(role_indices or {})
        self.nonneg = _shift_nonneg(self.kernel, metric) if nonneg is None else np.asarray(nonneg, dtype=float)
        self.cross_nonneg = (
            _cross_only(self.nonneg, n_ground) if cross_nonneg is None else np.asarray(cross_nonneg, dtype=float)
        )
        self.logdet = (
            self.kernel + self.jitter * np.eye(self.size) if logdet is None else np.asarray(logdet, dtype=float)
        )
        self._index = {i: k for k, i in enumerate(self.ids)}

    # -- construction ------------------------------------------------------

    @classmethod
    def build(
        cls,
        ground: GroundSet,
        aux: AuxiliarySet | list[AuxiliarySet] | None = None,
        metric: str = "cosine",
        jitter: float = 1e-6,
        sigma: float = 1.0,
        universe: ConceptUniverse | None = None,
    ) -> "EvalContext":
        aux_sets = [] if aux is None else ([aux] if isinstance(aux, GroundSet) else list(aux))
        kern = build_kernel(ground, aux_sets, metric=metric, jitter=jitter, sigma=sigma, universe=universe)
        all_sets = [ground, *aux_sets]
        has_concepts = any(it.concepts or it.coverage for s in all_sets for it in s)
        counts = cover = weights = None
        if has_concepts:
            uni = universe or ConceptUniverse.from_items(*all_sets)
            counts = np.concatenate([count_matrix(s, uni) for s in all_sets], axis=0)
            cover = np.concatenate([coverage_matrix(s, uni) for s in all_sets], axis=0)
            weights = uni.weights
        roles: dict[str, tuple[int, ...]] = {}
        offset = len(ground)
        for s in aux_sets:
            idx = tuple(range(offset, offset + len(s)))
            roles[s.role_tag] = roles.get(s.role_tag, ()) + idx
            offset += len(s)
        return cls(
            kern.matrix,
            len(ground),
            ids=kern.ids,
            metric=metric,
            jitter=jitter,
            counts=counts,
            cover_prob=cover,
            concept_weights=weights,
            role_indices=roles,
        )

    @classmethod
    def from_kernel(cls, kernel: SimilarityKernel, **kw) -> "EvalContext":
        return cls(
            kernel.matrix,
            kernel.ground_count,
            ids=kernel.ids,
            metric=kernel.metric_tag,
            jitter=kernel.psd_jitter,
            **kw,
        )

    def copy_with(self, **kw) -> "EvalContext":
        """Shallow copy with selected views replaced.

        Replacing 'kernel' recomputes the derived views unless they are
        passed explicitly as well.
        """
        base = dict(
            kernel=self.kernel,
            n_ground=self.n_ground,
            ids=self.ids,
            metric=self.metric,
            jitter=self.jitter,
            counts=self.counts,
            cover_prob=self.cover_prob,
            concept_weights=self.concept_weights,
            role_indices=self.role_indices,
            nonneg=self.nonneg,
            cross_nonneg=self.cross_nonneg,
            logdet=self.logdet,
        )
        if "kernel" in kw:
            for derived in ("nonneg", "cross_nonneg", "logdet"):
                base[derived] = None
        base.update(kw)
        return EvalContext(**base)

    # -- index helpers -----------------------------------------------------

    def index_of(self, item_id: str) -> int:
        try:
            return self._index[item_id]
        except KeyError:
            raise LookupError(f"unknown item id {item_id!r}") from None

    def indices_of(self, item_ids) -> tuple[int, ...]:
        return tuple(self.index_of(i) for i in item_ids)

    @property
    def ground(self) -> tuple[int, ...]:
        return tuple(range(self.n_ground))

    @property
    def auxiliary(self) -> tuple[int, ...]:
        return tuple(range(self.n_ground, self.size))

    def require_concepts(self, what: str) -> None:
        if self.counts is None and self.cover_prob is None:
            raise ConfigError(f"{what} needs concept annotations, none present in the context")
