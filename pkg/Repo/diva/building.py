from __future__ import annotations

import logging
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Optional, Union

from diva.clustering import DEFAULT_CANDIDATE_CAP, DEFAULT_CHOICE_HORIZON, Strategy, diverse_clustering
from diva.constraints import (
    UNBOUNDED,
    ConstraintSet,
    DiversityConstraint,
    check_targets,
    frequency,
    is_satisfiable,
    minimal_cover,
    target_matcher,
    validate,
)
from diva.errors import ConfigurationError, IntegrationError, UnsatisfiableConstraintsError
from diva.kmember import anonymize_kmember
from diva.relation import Clustering, Relation, information_loss, qi_groups, suppress

logger = logging.getLogger(__name__)

EXHAUSTIVE_GROUP_LIMIT = 12


###################
## Configuration ##
###################


@dataclass(frozen=True)
class DivaConfig:
    k: int = 2
    strategy: Strategy = Strategy()
    candidate_cap: int = DEFAULT_CANDIDATE_CAP
    kmember_seed: int = 0
    choice_horizon: int = DEFAULT_CHOICE_HORIZON
    strict_bounds: bool = False
    integrate_exhaustive: bool = False

    def __post_init__(self):
        if isinstance(self.strategy, str):
            object.__setattr__(self, "strategy", Strategy.named(self.strategy))
        if not isinstance(self.k, int) or self.k < 1:
            raise ConfigurationError(f"k must be a positive integer, got {self.k!r}")
        if self.candidate_cap < 1:
            raise ConfigurationError(f"candidate_cap must be positive, got {self.candidate_cap}")
        if self.choice_horizon < 1:
            raise ConfigurationError(f"choice_horizon must be positive, got {self.choice_horizon}")
        if self.k == 1:
            logger.warning("k=1 makes every relation 1-anonymous; only the diversity constraints matter")


##############
## Outcomes ##
##############


@dataclass(frozen=True)
class Unsatisfiable:
    reason: str = ""

    def __bool__(self):
        return False


@dataclass(frozen=True)
class Result:
    relation: Relation
    diverse_part_ids: frozenset[int] = frozenset()
    residual_part_ids: frozenset[int] = frozenset()
    information_loss: int = 0
    clustering: Clustering = field(default_factory=Clustering)


AnonymizationOutcome = Union[Result, Unsatisfiable]


###############
## Integrate ##
###############


def _violated(r: Relation, sigma_set: Iterable[DiversityConstraint]) -> list[DiversityConstraint]:
    return [sigma for sigma in sigma_set if not validate(r, sigma)]


def _choose_greedy(groups: list[frozenset[int]], excess: int) -> Optional[list[frozenset[int]]]:
    chosen, removed = [], 0
    for group in groups:
        if removed >= excess:
            break
        chosen.append(group)
        removed += len(group)
    return chosen if removed >= excess else None


def _choose_exhaustive(groups: list[frozenset[int]], excess: int, slack: int) -> Optional[list[frozenset[int]]]:
    """Fewest groups removing between `excess` and `excess + slack` tuples, then fewest tuples."""
    for size in range(1, len(groups) + 1):
        fits = [
            subset
            for subset in combinations(groups, size)
            if excess <= sum(len(g) for g in subset) <= excess + slack
        ]
        if fits:
            return list(min(fits, key=lambda subset: sum(len(g) for g in subset)))
    return None


def integrate(
    r_sigma: Relation,
    r_k: Relation,
    sigma_set: Iterable[DiversityConstraint],
    exhaustive: bool = False,
) -> Relation:
    """
    Union of the diverse part and the k-anonymized residual. Where the residual
    pushes a constraint over its upper bound, the target attributes of whole
    QI-groups of the residual are suppressed until the count fits again.
    """
    sigma_set = list(sigma_set)
    current = r_sigma.union(r_k)
    violated = _violated(current, sigma_set)
    if not violated:
        return current

    for sigma in violated:
        if sigma.is_false or frequency(current, sigma.target) < sigma.lo:
            raise IntegrationError(f"lower bound of {sigma} is violated before any repair")

    groups = qi_groups(r_k)
    violated.sort(key=lambda sigma: sigma.hi - frequency(current, sigma.target))
    for sigma in violated:
        count = frequency(current, sigma.target)
        if sigma.hi is UNBOUNDED or count <= sigma.hi:
            continue
        excess = count - sigma.hi
        matches = target_matcher(current, sigma.target)
        others = [target_matcher(current, other.target) for other in sigma_set if other is not sigma]
        candidates = [g for g in groups if matches(current.row(min(g)))]

        def entanglement(group):
            row = current.row(min(group))
            return sum(len(group) for m in others if m(row)), len(group), min(group)

        candidates.sort(key=entanglement)
        chosen = None
        if exhaustive:
            if len(candidates) <= EXHAUSTIVE_GROUP_LIMIT:
                chosen = _choose_exhaustive(candidates, excess, count - excess - sigma.lo)
            else:
                logger.warning(
                    "%s residual groups match %s; exhaustive repair needs at most %s, using greedy",
                    len(candidates),
                    sigma,
                    EXHAUSTIVE_GROUP_LIMIT,
                )
        if chosen is None:
            chosen = _choose_greedy(candidates, excess)
        if chosen is None:
            raise IntegrationError(f"suppressing every residual group cannot bring {sigma} within its bounds")
        tuples = frozenset().union(*chosen)
        logger.info("Suppressing %s on %s residual groups (%s tuples) for %s", sigma.target, len(chosen), len(tuples), sigma)
        current = current.suppress_cells(tuples, sigma.target.attrs)

    still = _violated(current, sigma_set)
    if still:
        raise IntegrationError(f"integration left constraints violated: {', '.join(map(str, still))}")
    return current


#############
## Builder ##
#############


class DivaBuilder:
    def __init__(self, r: Relation, sigma_set: Iterable[DiversityConstraint], cfg: Optional[DivaConfig] = None, **kwargs):
        """
        The DivaBuilder carries one anonymization through its stages: the constraint
        set is checked and reduced to a minimal cover, a diverse clustering is searched
        for, the tuples it leaves are k-anonymized on their own, and the two parts are
        integrated. A stage that finds the instance unsatisfiable records the outcome
        and every later stage becomes a no-op.
        """

        self.cfg = cfg if cfg is not None else DivaConfig(**kwargs)
        self.relation = r
        self.constraints = sigma_set if isinstance(sigma_set, ConstraintSet) else ConstraintSet(tuple(sigma_set))
        self.cover = self.constraints

        self.clustering = None
        self.r_sigma = None
        self.r_k = None
        self.anonymized = None
        self.outcome: Optional[AnonymizationOutcome] = None

    def check_constraints(self):
        """
        Constraint targets must name quasi-identifiers, the set must be satisfiable,
        and under strict bounds no constraint may ask for fewer than k (but some) tuples.
        """
        check_targets(self.relation.schema, self.constraints)
        if not is_satisfiable(self.constraints):
            raise UnsatisfiableConstraintsError("the diversity constraints contradict each other")
        if self.cfg.strict_bounds:
            low = [sigma for sigma in self.constraints if 0 < sigma.lo < self.cfg.k]
            if low:
                raise ConfigurationError(
                    f"lower bound below k={self.cfg.k} in {', '.join(map(str, low))}"
                )
        self.cover = minimal_cover(self.constraints)
        logger.info("Checked %s constraints, %s left in the minimal cover", len(self.constraints), len(self.cover))

    def find_diverse_clustering(self):
        if self.outcome is not None:
            return
        self.clustering = diverse_clustering(
            self.relation,
            self.cover,
            self.cfg.k,
            strategy=self.cfg.strategy,
            cap=self.cfg.candidate_cap,
            horizon=self.cfg.choice_horizon,
        )
        if self.clustering is None:
            self.outcome = Unsatisfiable(f"no {self.cfg.k}-anonymization satisfies the constraints")
            return
        self.r_sigma = suppress(self.relation, self.clustering)

    def anonymize_residual(self):
        if self.outcome is not None:
            return
        residual = self.relation.without(self.clustering.covered)
        self.r_k = suppress(residual, anonymize_kmember(residual, self.cfg.k, self.cfg.kmember_seed))
        logger.info("Residual of %s tuples anonymized with k-member", len(residual))

    def integrate_parts(self):
        if self.outcome is not None:
            return
        self.anonymized = integrate(self.r_sigma, self.r_k, self.constraints, exhaustive=self.cfg.integrate_exhaustive)

    def return_outcome(self) -> AnonymizationOutcome:
        if self.outcome is not None:
            return self.outcome
        return Result(
            relation=self.anonymized,
            diverse_part_ids=frozenset(self.r_sigma.ids),
            residual_part_ids=frozenset(self.r_k.ids),
            information_loss=information_loss(self.anonymized),
            clustering=self.clustering,
        )


def diva(r: Relation, sigma_set: Iterable[DiversityConstraint], cfg: Optional[DivaConfig] = None) -> AnonymizationOutcome:
    setup = DivaBuilder(r, sigma_set, cfg)
    setup.check_constraints()
    setup.find_diverse_clustering()
    setup.anonymize_residual()
    setup.integrate_parts()
    return setup.return_outcome()


def decide(
    r: Relation,
    sigma_set: Iterable[DiversityConstraint],
    k: int,
    strategy: Strategy = Strategy(),
    cap: int = DEFAULT_CANDIDATE_CAP,
) -> bool:
    """True iff some k-anonymous suppression of r satisfies every constraint."""
    sigma_set = sigma_set if isinstance(sigma_set, ConstraintSet) else ConstraintSet(tuple(sigma_set))
    check_targets(r.schema, sigma_set)
    if not is_satisfiable(sigma_set):
        return False
    return diverse_clustering(r, minimal_cover(sigma_set), k, strategy=strategy, cap=cap) is not None


def kmember_baseline(r: Relation, k: int, seed: int = 0) -> Result:
    """Plain k-member anonymization of the whole relation, ignoring any constraints."""
    clustering = anonymize_kmember(r, k, seed)
    anonymized = suppress(r, clustering)
    return Result(
        relation=anonymized,
        residual_part_ids=frozenset(anonymized.ids),
        information_loss=information_loss(anonymized),
        clustering=clustering,
    )
