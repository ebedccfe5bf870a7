from __future__ import annotations

import logging
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Optional

import numpy as np

from diva.clustering import partitions
from diva.constraints import UNBOUNDED, DiversityConstraint, relevant_tuples, validate
from diva.errors import StructuralError
from diva.relation import SUPPRESSED, Clustering, Relation, information_loss, qi_groups, suppress

logger = logging.getLogger(__name__)

EXHAUSTIVE_REFERENCE_BELOW = 9
DEFAULT_REFERENCE_BUDGET = 1000


####################
## Discernibility ##
####################


def discernibility(r_anon: Relation, k: int) -> tuple[int, float]:
    """
    Each tuple costs the size of its QI-group, or |R'| when the group is smaller
    than k or all of its QI cells are suppressed.
    """
    n = len(r_anon)
    if n == 0:
        return 0, 0.0
    disc = 0
    for group in qi_groups(r_anon):
        key = r_anon.qi_key(min(group))
        if len(group) < k or all(cell is SUPPRESSED for cell in key):
            disc += len(group) * n
        else:
            disc += len(group) * len(group)
    return disc, disc / (n * n)


def accuracy_ratio(candidate: Relation, reference: Relation, k: int) -> float:
    if len(candidate) != len(reference):
        raise StructuralError(f"cannot compare {len(candidate)} tuples against {len(reference)}")
    _, cand = discernibility(candidate, k)
    _, ref = discernibility(reference, k)
    if cand == 0:
        return 1.0
    return ref / cand


def _random_clustering(ids: list[int], k: int, rng: np.random.Generator) -> Clustering:
    shuffled = [ids[i] for i in rng.permutation(len(ids))]
    n_blocks = len(shuffled) // k
    blocks = [shuffled[i * k : (i + 1) * k] for i in range(n_blocks)]
    for i, tid in enumerate(shuffled[n_blocks * k :]):
        blocks[i % n_blocks].append(tid)
    return Clustering.of(*blocks)


def reference_anonymization(
    r: Relation, k: int, budget: int = DEFAULT_REFERENCE_BUDGET, seed: int = 0
) -> Relation:
    """
    Best-discernibility suppression among clusterings with cluster sizes in
    [k, 2k-1]: every such clustering below 9 tuples, otherwise `budget` random ones.
    """
    if len(r) == 0:
        return r
    if len(r) < k:
        return suppress(r, Clustering.of(r.ids))
    ids = sorted(r.ids)
    if len(r) < EXHAUSTIVE_REFERENCE_BELOW:
        clusterings = (Clustering.of(*partition) for partition in partitions(ids, k))
    else:
        rng = np.random.default_rng(seed)
        clusterings = (_random_clustering(ids, k, rng) for _ in range(budget))
    best, best_score = None, None
    for clustering in clusterings:
        anon = suppress(r, clustering)
        _, score = discernibility(anon, k)
        if best_score is None or score < best_score:
            best, best_score = anon, score
    logger.debug("Reference anonymization reaches normalized discernibility %s", best_score)
    return best


###################
## Conflict rate ##
###################


def pairwise_conflict(r: Relation, s1: DiversityConstraint, s2: DiversityConstraint) -> float:
    """Jaccard overlap of the two constraints' relevant tuples."""
    i1, i2 = relevant_tuples(r, s1), relevant_tuples(r, s2)
    union = i1 | i2
    if not union:
        return 0.0
    return len(i1 & i2) / len(union)


def conflict_rate(r: Relation, sigma_set: Iterable[DiversityConstraint]) -> Optional[float]:
    """Mean pairwise conflict, or None for fewer than two constraints."""
    sigma_set = list(sigma_set)
    if len(sigma_set) < 2:
        return None
    pairs = list(combinations(sigma_set, 2))
    return sum(pairwise_conflict(r, a, b) for a, b in pairs) / len(pairs)


def estimate_published(r: Relation) -> int:
    return max(0, len(r) - len(qi_groups(r)))


############
## Report ##
############


@dataclass(frozen=True)
class ConstraintReport:
    constraint: DiversityConstraint
    count: int
    satisfied: bool

    def to_dict(self) -> dict:
        sigma = self.constraint
        return {
            "attrs": list(sigma.target.attrs),
            "values": list(sigma.target.values),
            "lo": sigma.lo,
            "hi": None if sigma.hi is UNBOUNDED else sigma.hi,
            "count": self.count,
            "satisfied": self.satisfied,
        }


@dataclass(frozen=True)
class MetricsReport:
    disc: int
    disc_normalized: float
    info_loss: int
    k: int
    n_groups: int
    per_constraint: list[ConstraintReport] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "disc": self.disc,
            "disc_normalized": self.disc_normalized,
            "info_loss": self.info_loss,
            "k": self.k,
            "n_groups": self.n_groups,
            "constraints": [c.to_dict() for c in self.per_constraint],
        }


def build_report(r_anon: Relation, sigma_set: Iterable[DiversityConstraint], k: int) -> MetricsReport:
    disc, normalized = discernibility(r_anon, k)
    per_constraint = []
    for sigma in sigma_set:
        check = validate(r_anon, sigma)
        per_constraint.append(ConstraintReport(sigma, check.count, check.satisfied))
    return MetricsReport(
        disc=disc,
        disc_normalized=normalized,
        info_loss=information_loss(r_anon),
        k=k,
        n_groups=len(qi_groups(r_anon)),
        per_constraint=per_constraint,
    )
