"""Scientometric indicators over one or more classifications.

All functions are pure and iterate in canonical order (ascending paper id,
ascending category index), so results are deterministic.  Formula choices
for quantities that admit more than one reading are versioned in
FORMULA_VERSIONS and kept swappable behind this module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .corpus import Corpus
from .engine import Classification
from .scheme import CategoryScheme

FORMULA_VERSIONS = {
    "coincidence": "min-overlap-v1",
    "prune": "consecutive-ratio-v1",
    "area_flow": "product-coupling-v1",
}


def category_sizes(c: Classification) -> dict[int, float]:
    """Accumulated weight per category; sums to the classified paper count."""
    sizes: dict[int, float] = {}
    for pid in sorted(c.vectors):
        for idx, w in c.vectors[pid].items():
            sizes[idx] = sizes.get(idx, 0.0) + w
    return {idx: s for idx, s in sorted(sizes.items()) if s > 0}


def granularity(c: Classification) -> float:
    """Paper count divided by the sum of squared category sizes."""
    if not c.vectors:
        raise ValueError("empty classification")
    sizes = category_sizes(c)
    return len(c.vectors) / math.fsum(s * s for s in sizes.values())


def size_cv(c: Classification) -> float:
    """Coefficient of variation of the non-empty category sizes."""
    sizes = np.array(list(category_sizes(c).values()))
    if sizes.size == 0:
        raise ValueError("empty classification")
    mean = sizes.mean()
    return float(sizes.std() / mean)


def refs_per_paper_acv(c: Classification, corpus: Corpus, ref_filter=None) -> float:
    """Average over categories of the membership-weighted CV of reference counts.

    ``ref_filter`` is an optional predicate on reference ids; papers
    contribute to a category with their assignment weight there.
    Categories with zero total weight or zero mean count are skipped.
    """
    counts = {}
    for pid in c.vectors:
        refs = corpus.papers[pid].references
        if ref_filter is None:
            counts[pid] = len(refs)
        else:
            counts[pid] = sum(1 for r in refs if ref_filter(r))
    sw: dict[int, float] = {}
    swn: dict[int, float] = {}
    swn2: dict[int, float] = {}
    for pid in sorted(c.vectors):
        n = counts[pid]
        for idx, w in c.vectors[pid].items():
            sw[idx] = sw.get(idx, 0.0) + w
            swn[idx] = swn.get(idx, 0.0) + w * n
            swn2[idx] = swn2.get(idx, 0.0) + w * n * n
    cvs = []
    for idx in sorted(sw):
        if sw[idx] <= 0:
            continue
        mean = swn[idx] / sw[idx]
        if mean <= 0:
            continue
        var = max(swn2[idx] / sw[idx] - mean * mean, 0.0)
        cvs.append(math.sqrt(var) / mean)
    if not cvs:
        raise ValueError("no category with positive weighted mean reference count")
    return float(np.mean(cvs))


def coincidence_percentage(a: Classification, b: Classification) -> float:
    """Mean over common papers of 100 x sum of per-category minima."""
    common = sorted(set(a.vectors) & set(b.vectors))
    if not common:
        raise ValueError("no common papers")
    total = math.fsum(
        math.fsum(min(a.vectors[p].get(c, 0.0), b.vectors[p].get(c, 0.0))
                  for c in set(a.vectors[p]) | set(b.vectors[p]))
        for p in common)
    return 100.0 * total / len(common)


@dataclass(frozen=True)
class RankStats:
    """Average 1-based rank of one side's winners in the other side's order.

    Papers whose winner is absent from the other side are counted in
    ``missing`` and excluded from the average.
    """
    avg_rank: float
    missing: int
    papers: int


def _winner(vec: dict[int, float]) -> int:
    return min(vec.items(), key=lambda kv: (-kv[1], kv[0]))[0]


def _rank_in(vec: dict[int, float], idx: int):
    order = sorted(vec.items(), key=lambda kv: (-kv[1], kv[0]))
    for pos, (c, _) in enumerate(order, start=1):
        if c == idx:
            return pos
    return None


def rank_metrics(a: Classification, b: Classification) -> tuple[RankStats, RankStats]:
    """(winners of a located in b, winners of b located in a)."""
    common = sorted(set(a.vectors) & set(b.vectors))
    if not common:
        raise ValueError("no common papers")

    def one_direction(src, dst):
        ranks, missing = [], 0
        for pid in common:
            rank = _rank_in(dst.vectors[pid], _winner(src.vectors[pid]))
            if rank is None:
                missing += 1
            else:
                ranks.append(rank)
        avg = float(np.mean(ranks)) if ranks else float("nan")
        return RankStats(avg, missing, len(common))

    return one_direction(a, b), one_direction(b, a)


@dataclass(frozen=True)
class AssignmentHistogram:
    total_assignments: int
    average: float
    percentages: dict[str, float]  # keys "1".."4" and "5+"


def assignment_histogram(c: Classification) -> AssignmentHistogram:
    if not c.vectors:
        raise ValueError("empty classification")
    sizes = [len(v) for v in c.vectors.values()]
    n = len(sizes)
    pct = {}
    for band in (1, 2, 3, 4):
        pct[str(band)] = 100.0 * sum(1 for s in sizes if s == band) / n
    pct["5+"] = 100.0 * sum(1 for s in sizes if s >= 5) / n
    return AssignmentHistogram(sum(sizes), sum(sizes) / n, pct)


def category_correlation(a: Classification, b: Classification,
                         scheme: CategoryScheme, common_only: bool = False) -> float:
    """Pearson correlation of the per-category size vectors (zeros included)."""
    if common_only:
        common = set(a.vectors) & set(b.vectors)
        a = Classification(a.variant_label, {p: a.vectors[p] for p in common}, frozenset())
        b = Classification(b.variant_label, {p: b.vectors[p] for p in common}, frozenset())
    xa = np.zeros(scheme.size)
    xb = np.zeros(scheme.size)
    for idx, s in category_sizes(a).items():
        xa[idx] = s
    for idx, s in category_sizes(b).items():
        xb[idx] = s
    return float(np.corrcoef(xa, xb)[0, 1])


def area_aggregate(c: Classification, scheme: CategoryScheme) -> dict[int, float]:
    """Percentage of total weight accumulated in each area."""
    sizes = category_sizes(c)
    total = math.fsum(sizes.values())
    out = {area: 0.0 for area in scheme.area_codes}
    for idx, s in sizes.items():
        out[scheme.area_of_index(idx)] += s
    return {area: 100.0 * s / total for area, s in out.items()}


def _area_vector(vec: dict[int, float], scheme: CategoryScheme,
                 area_index: dict[int, int]) -> np.ndarray:
    out = np.zeros(len(area_index))
    for idx, w in vec.items():
        out[area_index[scheme.area_of_index(idx)]] += w
    return out


def area_flow(origin: Classification, result: Classification,
              scheme: CategoryScheme):
    """Mass-conserving area x area flow matrix (origin rows, result columns).

    flow[a][b] = sum over common papers of origin area weight a times
    result area weight b; row sums equal the origin area masses and the
    total equals the common paper count.
    """
    common = sorted(set(origin.vectors) & set(result.vectors))
    if not common:
        raise ValueError("no common papers")
    areas = list(scheme.area_codes)
    area_index = {a: i for i, a in enumerate(areas)}
    flow = np.zeros((len(areas), len(areas)))
    for pid in common:
        va = _area_vector(origin.vectors[pid], scheme, area_index)
        vb = _area_vector(result.vectors[pid], scheme, area_index)
        flow += np.outer(va, vb)
    return areas, flow


def same_area_retention(origin_misc_papers: dict[str, int], result: Classification,
                        scheme: CategoryScheme) -> dict[int, float]:
    """Percentage of result weight that stays in the home area.

    ``origin_misc_papers`` maps paper ids (published in journals assigned
    exclusively to one miscellaneous category) to that category's area.
    """
    mass: dict[int, float] = {}
    count: dict[int, int] = {}
    for pid in sorted(origin_misc_papers):
        if pid not in result.vectors:
            continue
        area = origin_misc_papers[pid]
        inside = math.fsum(w for idx, w in result.vectors[pid].items()
                           if scheme.area_of_index(idx) == area)
        mass[area] = mass.get(area, 0.0) + inside
        count[area] = count.get(area, 0) + 1
    return {area: 100.0 * mass[area] / count[area] for area in sorted(count)}
