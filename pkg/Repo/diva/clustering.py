from __future__ import annotations

import logging
import os
from dataclasses import dataclass
from enum import Enum
from itertools import combinations
from typing import Iterable, Iterator, Optional, Sequence

import networkx as nx
import numpy as np
from inflection import dasherize, underscore
from networkx.utils import UnionFind

from diva.constraints import UNBOUNDED, ConstraintSet, DiversityConstraint, relevant_tuples, validate, validate_all
from diva.errors import ConfigurationError, SearchBudgetExceededError
from diva.relation import Clustering, Relation, cluster_cost, suppress

logger = logging.getLogger(__name__)

DEFAULT_CANDIDATE_CAP = int(os.environ.get("DIVA_CANDIDATE_CAP", 10_000))
DEFAULT_CHOICE_HORIZON = 64

ColorAssignment = dict[int, Clustering]


################
## Strategies ##
################


class StrategyKind(Enum):
    NAIVE = "naive"
    MIN_CHOICE = "min_choice"
    MAX_FANOUT = "max_fanout"

    @classmethod
    def named(cls, name: str) -> "StrategyKind":
        """Accepts `min-choice`, `min_choice`, `MinChoice`, `MIN_CHOICE` and so on."""
        wanted = underscore(str(name)).replace("_", "")
        for kind in cls:
            if kind.value.replace("_", "") == wanted:
                return kind
        choices = ", ".join(k.label for k in cls)
        raise ConfigurationError(f"unknown strategy {name!r}; expected one of {choices}")

    @property
    def label(self) -> str:
        return dasherize(self.value)


@dataclass(frozen=True)
class Strategy:
    kind: StrategyKind = StrategyKind.MIN_CHOICE
    rng_seed: int = 0

    @classmethod
    def named(cls, name: str, rng_seed: int = 0) -> "Strategy":
        return cls(StrategyKind.named(name), rng_seed)


######################
## Constraint graph ##
######################


class ConstraintGraph:
    """
    One vertex per constraint, in declaration order, carrying the constraint and
    its relevant tuples; an edge wherever two relevant-tuple sets intersect.
    """

    def __init__(self, graph: nx.Graph):
        self.graph = graph

    def __len__(self):
        return self.graph.number_of_nodes()

    @property
    def vertices(self) -> list[int]:
        return list(self.graph.nodes)

    @property
    def edges(self) -> set[tuple[int, int]]:
        return {tuple(sorted(edge)) for edge in self.graph.edges}

    def constraint(self, v: int) -> DiversityConstraint:
        return self.graph.nodes[v]["constraint"]

    def relevant(self, v: int) -> frozenset[int]:
        return self.graph.nodes[v]["relevant"]

    def neighbors(self, v: int) -> list[int]:
        return sorted(self.graph.neighbors(v))

    def overlap(self, v: int) -> frozenset[int]:
        """Relevant tuples of `v` that some adjacent constraint also targets."""
        shared = frozenset().union(*(self.relevant(u) for u in self.neighbors(v)))
        return self.relevant(v) & shared

    @property
    def constraints(self) -> ConstraintSet:
        return ConstraintSet(tuple(self.constraint(v) for v in self.vertices))


def build_graph(r: Relation, sigma_set: Iterable[DiversityConstraint]) -> ConstraintGraph:
    graph = nx.Graph()
    for v, sigma in enumerate(sigma_set):
        graph.add_node(v, constraint=sigma, relevant=relevant_tuples(r, sigma))
    for u, v in combinations(list(graph.nodes), 2):
        if graph.nodes[u]["relevant"] & graph.nodes[v]["relevant"]:
            graph.add_edge(u, v)
    return ConstraintGraph(graph)


###########################
## Candidate clusterings ##
###########################


def _blocks(remaining: Sequence[int], k: int) -> Iterator[tuple[int, ...]]:
    # the block always holds the smallest remaining tuple, so partitions are never repeated
    first, rest = remaining[0], remaining[1:]
    n = len(remaining)
    for size in range(k, min(2 * k - 1, n) + 1):
        left = n - size
        if left and left < k:
            continue
        for others in combinations(rest, size - 1):
            yield (first, *others)


def partitions(members: Sequence[int], k: int) -> Iterator[list[tuple[int, ...]]]:
    """Lazily yields every partition of `members` into blocks of size [k, 2k-1]."""
    if not members:
        yield []
        return
    if len(members) < k:
        return
    stack = [(tuple(members), [], _blocks(members, k))]
    while stack:
        remaining, chosen, blocks = stack[-1]
        block = next(blocks, None)
        if block is None:
            stack.pop()
            continue
        taken = set(block)
        rest = tuple(t for t in remaining if t not in taken)
        if not rest:
            yield chosen + [block]
        else:
            stack.append((rest, chosen + [block], _blocks(rest, k)))


def _coverage(sigma: DiversityConstraint, relevant: frozenset[int]) -> range:
    hi = len(relevant) if sigma.hi is UNBOUNDED else min(sigma.hi, len(relevant))
    return range(sigma.lo, hi + 1)


def iter_candidates(
    sigma: DiversityConstraint,
    r: Relation,
    k: int,
    relevant: Optional[frozenset[int]] = None,
    overlap: frozenset[int] = frozenset(),
    order: Optional[Sequence[int]] = None,
) -> Iterator[Clustering]:
    """
    Lazily enumerates the clusterings of relevant tuples with cluster sizes in
    [k, 2k-1] covering between lo and min(hi, |relevant|) tuples.

    Without `order`, candidates come in ascending number of `overlap` tuples,
    then ascending coverage, then lexicographically. With `order` (a permutation
    of the relevant tuples) coverage ascends and tuple sets follow that order.
    """
    if relevant is None:
        relevant = relevant_tuples(r, sigma)
    coverage = [p for p in _coverage(sigma, relevant) if p == 0 or p >= k]
    if order is not None:
        for p in coverage:
            for chosen in combinations(order, p):
                for partition in partitions(sorted(chosen), k):
                    yield Clustering(frozenset(frozenset(b) for b in partition))
        return
    shared = sorted(relevant & overlap)
    free = sorted(relevant - overlap)
    for j in range(len(shared) + 1):
        for p in coverage:
            if p < j:
                continue
            if p - j > len(free):
                break
            for from_shared in combinations(shared, j):
                for from_free in combinations(free, p - j):
                    for partition in partitions(sorted(from_shared + from_free), k):
                        yield Clustering(frozenset(frozenset(b) for b in partition))


def _capped(candidates: Iterable[Clustering], cap: int, sigma: DiversityConstraint) -> Iterator[Clustering]:
    for i, candidate in enumerate(candidates):
        if i >= cap:
            raise SearchBudgetExceededError(sigma, cap)
        yield candidate


def candidate_clusterings(
    sigma: DiversityConstraint,
    r: Relation,
    k: int,
    overlap: frozenset[int] = frozenset(),
    cap: int = DEFAULT_CANDIDATE_CAP,
) -> list[Clustering]:
    """All candidates for `sigma`, materialized; an empty list means `sigma` cannot be met under k."""
    return list(_capped(iter_candidates(sigma, r, k, overlap=overlap), cap, sigma))


###########################
## Merge and consistency ##
###########################


def merge(*clusterings: Clustering) -> Clustering:
    """Union of clusterings, joining overlapping clusters transitively."""
    components = UnionFind()
    for clustering in clusterings:
        for cluster in clustering:
            members = list(cluster)
            components[members[0]]
            components.union(*members)
    return Clustering(frozenset(frozenset(c) for c in components.to_sets()))


def consistent(
    s1: Clustering,
    sig1: DiversityConstraint,
    s2: Clustering,
    sig2: DiversityConstraint,
    r: Relation,
) -> bool:
    anon = suppress(r, merge(s1, s2))
    return bool(validate(anon, sig1, lower_only=True)) and bool(validate(anon, sig2, lower_only=True))


def complete_residual(
    r: Relation,
    s: Clustering,
    sigma_set: Iterable[DiversityConstraint],
    k: int,
    cap: int = DEFAULT_CANDIDATE_CAP,
) -> Optional[Clustering]:
    """
    Returns `s` when the tuples it leaves uncovered can be k-anonymized on their
    own (none, or at least k of them). Otherwise every leftover tuple has to join
    one of the clusters of `s`; placements are tried depth first, cheapest star
    increase first, and the first one keeping every constraint satisfied wins.
    None if no placement works; more than `cap` complete placements raise
    SearchBudgetExceededError.
    """
    sigma_set = list(sigma_set)
    leftover = [tid for tid in r.ids if tid not in s.covered]
    if not leftover or len(leftover) >= k:
        return s
    if not s:
        return None
    tried = 0

    def place(clusters: list[frozenset[int]], rest: list[int]) -> Optional[Clustering]:
        nonlocal tried
        if not rest:
            tried += 1
            if tried > cap:
                raise SearchBudgetExceededError(f"leftover tuples {leftover}", cap)
            completed = Clustering(frozenset(clusters))
            return completed if validate_all(suppress(r, completed), sigma_set) else None
        tid = rest[0]
        ranked = sorted(
            range(len(clusters)),
            key=lambda i: (cluster_cost(r, clusters[i] | {tid}) - cluster_cost(r, clusters[i]), min(clusters[i])),
        )
        for i in ranked:
            found = place([c | {tid} if j == i else c for j, c in enumerate(clusters)], rest[1:])
            if found is not None:
                return found
        return None

    completed = place([frozenset(c) for c in s.sorted_clusters()], leftover)
    if completed is None:
        logger.debug("Leftover tuples %s cannot join the diverse clusters", leftover)
    return completed


##############
## Coloring ##
##############


class ColoringSearch:
    """
    Backtracking search assigning each vertex of the constraint graph a
    candidate clustering ("color") consistent with its colored neighbors.
    """

    def __init__(
        self,
        graph: ConstraintGraph,
        r: Relation,
        k: int,
        strategy: Strategy = Strategy(),
        cap: int = DEFAULT_CANDIDATE_CAP,
        horizon: int = DEFAULT_CHOICE_HORIZON,
    ):
        self.graph = graph
        self.r = r
        self.k = k
        self.strategy = strategy
        self.cap = cap
        self.horizon = min(horizon, cap)
        self.rng = np.random.default_rng(strategy.rng_seed)
        self.overlaps = {v: graph.overlap(v) for v in graph.vertices}
        self.choice_counts = {}
        self.completed: Optional[Clustering] = None
        self.backtracks = 0

    def candidates(self, v: int) -> Iterator[Clustering]:
        sigma = self.graph.constraint(v)
        relevant = self.graph.relevant(v)
        if self.strategy.kind is StrategyKind.NAIVE:
            order = [int(t) for t in self.rng.permutation(sorted(relevant))]
            candidates = iter_candidates(sigma, self.r, self.k, relevant=relevant, order=order)
        else:
            candidates = iter_candidates(sigma, self.r, self.k, relevant=relevant, overlap=self.overlaps[v])
        return _capped(candidates, self.cap, sigma)

    def is_consistent(self, v: int, s: Clustering, assigned: ColorAssignment) -> bool:
        sigma = self.graph.constraint(v)
        return all(
            consistent(s, sigma, assigned[u], self.graph.constraint(u), self.r)
            for u in self.graph.neighbors(v)
            if u in assigned
        )

    def choice_count(self, v: int, assigned: ColorAssignment) -> int:
        """Candidates of `v` consistent with its colored neighbors, saturating at the horizon."""
        key = (v, tuple((u, assigned[u]) for u in self.graph.neighbors(v) if u in assigned))
        if key not in self.choice_counts:
            count = 0
            sigma = self.graph.constraint(v)
            candidates = iter_candidates(sigma, self.r, self.k, relevant=self.graph.relevant(v), overlap=self.overlaps[v])
            for s in _capped(candidates, self.cap, sigma):
                if self.is_consistent(v, s, assigned):
                    count += 1
                    if count >= self.horizon:
                        break
            self.choice_counts[key] = count
        return self.choice_counts[key]

    def _pick(self, tied: list[int]) -> int:
        if len(tied) == 1:
            return tied[0]
        return int(self.rng.choice(tied))

    def next_vertex(self, assigned: ColorAssignment) -> int:
        uncolored = [v for v in self.graph.vertices if v not in assigned]
        kind = self.strategy.kind
        if kind is StrategyKind.NAIVE:
            return self._pick(uncolored)
        if kind is StrategyKind.MIN_CHOICE:
            scores = {v: self.choice_count(v, assigned) for v in uncolored}
            best = min(scores.values())
        else:
            scores = {v: -sum(1 for u in self.graph.neighbors(v) if u not in assigned) for v in uncolored}
            best = min(scores.values())
        return self._pick([v for v in uncolored if scores[v] == best])

    def verify(self, assigned: ColorAssignment) -> Optional[Clustering]:
        merged = merge(*assigned.values())
        constraints = list(self.graph.constraints)
        if not validate_all(suppress(self.r, merged), constraints):
            return None
        return complete_residual(self.r, merged, constraints, self.k, cap=self.cap)

    def color(self, assigned: ColorAssignment) -> bool:
        if len(assigned) == len(self.graph):
            self.completed = self.verify(assigned)
            return self.completed is not None
        v = self.next_vertex(assigned)
        logger.debug("Coloring vertex %s %s", v, self.graph.constraint(v))
        for s in self.candidates(v):
            if not self.is_consistent(v, s, assigned):
                continue
            assigned[v] = s
            if self.color(assigned):
                return True
            del assigned[v]
            self.backtracks += 1
        return False


def next_vertex(
    g: ConstraintGraph,
    assigned: ColorAssignment,
    strategy: Strategy,
    r: Relation,
    k: int,
    horizon: int = DEFAULT_CHOICE_HORIZON,
) -> int:
    return ColoringSearch(g, r, k, strategy, horizon=horizon).next_vertex(assigned)


def coloring(
    g: ConstraintGraph,
    r: Relation,
    k: int,
    strategy: Strategy = Strategy(),
    cap: int = DEFAULT_CANDIDATE_CAP,
    horizon: int = DEFAULT_CHOICE_HORIZON,
) -> Optional[ColorAssignment]:
    search = ColoringSearch(g, r, k, strategy, cap=cap, horizon=horizon)
    assigned: ColorAssignment = {}
    if search.color(assigned):
        return assigned
    return None


def diverse_clustering(
    r: Relation,
    sigma_set: ConstraintSet,
    k: int,
    strategy: Strategy = Strategy(),
    cap: int = DEFAULT_CANDIDATE_CAP,
    horizon: int = DEFAULT_CHOICE_HORIZON,
) -> Optional[Clustering]:
    """
    Clustering whose suppression satisfies every constraint, or None when no
    coloring of the constraint graph exists.
    """
    search = ColoringSearch(build_graph(r, sigma_set), r, k, strategy, cap=cap, horizon=horizon)
    if not search.color({}):
        logger.info("No diverse clustering for k=%s (%s backtracks)", k, search.backtracks)
        return None
    logger.info(
        "Diverse clustering found with %s clusters covering %s tuples (%s backtracks)",
        len(search.completed),
        len(search.completed.covered),
        search.backtracks,
    )
    return search.completed
