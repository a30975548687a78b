"""Bounded multi-assignment: prune raw weight vectors by a ratio threshold.

Entries are ranked by descending weight (ties by ascending category code,
which equals ascending index in the canonical order).  The top entry is
always kept; each further entry survives only while its weight is at least
threshold times the previous kept weight and the cap of max_categories is
not exceeded.  Kept weights are renormalized to sum 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .engine import Classification

DEFAULT_THRESHOLDS = (0.5, 0.67, 0.8)
DEFAULT_MAX_CATEGORIES = 5

# Relative slack on the ratio test so that renormalization rounding cannot
# flip a pair sitting exactly on the threshold; keeps pruning idempotent.
_RATIO_EPS = 1e-12


@dataclass(frozen=True)
class PruneConfig:
    threshold: float
    max_categories: int = DEFAULT_MAX_CATEGORIES

    def __post_init__(self):
        if not 0.0 < self.threshold <= 1.0:
            raise ValueError(f"threshold must be in (0, 1], got {self.threshold}")
        if self.max_categories < 1:
            raise ValueError("max_categories must be >= 1")

    @property
    def label(self) -> str:
        return f"{self.threshold:g}"


def prune(vector: dict[int, float], config: PruneConfig) -> dict[int, float]:
    """Keep the dominant descending-weight prefix and renormalize."""
    if not vector:
        raise ValueError("cannot prune an empty vector")
    ranked = sorted(vector.items(), key=lambda kv: (-kv[1], kv[0]))
    kept = [ranked[0]]
    for idx, w in ranked[1:]:
        if len(kept) >= config.max_categories:
            break
        if w >= config.threshold * kept[-1][1] * (1.0 - _RATIO_EPS):
            kept.append((idx, w))
        else:
            break
    total = math.fsum(w for _, w in kept)
    return {idx: w / total for idx, w in kept}


def prune_classification(c: Classification, config: PruneConfig) -> Classification:
    """Element-wise prune; the variant label gains the threshold suffix."""
    return Classification(
        variant_label=f"{c.variant_label}-{config.label}",
        vectors={pid: prune(vec, config) for pid, vec in c.vectors.items()},
        unreclassified=c.unreclassified,
        iterations_run=c.iterations_run,
        residual_trace=list(c.residual_trace),
        converged=c.converged,
        stalled=c.stalled,
    )
