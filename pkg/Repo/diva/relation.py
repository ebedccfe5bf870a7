from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Iterable, Iterator, Union

from diva.errors import SchemaError, StructuralError

logger = logging.getLogger(__name__)


class Suppressed(Enum):
    STAR = "*"

    def __repr__(self):
        return "*"

    def __str__(self):
        return "*"


SUPPRESSED = Suppressed.STAR

Cell = Union[str, Suppressed]


############
## Schema ##
############


@dataclass(frozen=True)
class Schema:
    attributes: tuple[str, ...]
    qi: tuple[str, ...] = ()
    sensitive: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "attributes", tuple(self.attributes))
        object.__setattr__(self, "qi", tuple(self.qi))
        object.__setattr__(self, "sensitive", tuple(self.sensitive))
        if len(set(self.attributes)) != len(self.attributes):
            raise SchemaError(f"duplicate attribute names in {list(self.attributes)}")
        unknown = [a for a in (*self.qi, *self.sensitive) if a not in self.attributes]
        if unknown:
            raise SchemaError(f"unknown attributes in schema: {unknown}")
        both = set(self.qi) & set(self.sensitive)
        if both:
            raise SchemaError(f"attributes flagged both quasi-identifier and sensitive: {sorted(both)}")

    def position(self, attribute: str) -> int:
        try:
            return self.attributes.index(attribute)
        except ValueError:
            raise SchemaError(f"unknown attribute: {attribute}") from None

    @cached_property
    def qi_positions(self) -> tuple[int, ...]:
        return tuple(self.attributes.index(a) for a in self.qi)


##############
## Relation ##
##############


@dataclass(frozen=True)
class Relation:
    """
    An ordered, immutable table. Tuples are addressed by stable integer ids
    assigned at ingestion, so duplicate rows stay distinguishable.
    """

    schema: Schema
    ids: tuple[int, ...]
    rows: tuple[tuple[Cell, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "ids", tuple(self.ids))
        object.__setattr__(self, "rows", tuple(tuple(row) for row in self.rows))
        if len(self.ids) != len(self.rows):
            raise StructuralError(f"{len(self.ids)} tuple ids for {len(self.rows)} rows")
        if len(set(self.ids)) != len(self.ids):
            raise StructuralError("tuple ids must be unique")
        width = len(self.schema.attributes)
        qi_positions = set(self.schema.qi_positions)
        for tid, row in zip(self.ids, self.rows):
            if len(row) != width:
                raise StructuralError(f"tuple {tid} has {len(row)} cells, expected {width}")
            for position, cell in enumerate(row):
                if cell is SUPPRESSED and position not in qi_positions:
                    raise StructuralError(
                        f"tuple {tid} has a suppressed value in non-QI attribute {self.schema.attributes[position]}"
                    )

    @classmethod
    def from_rows(cls, schema: Schema, rows: Iterable[Iterable[Cell]], start: int = 1) -> "Relation":
        """Assigns ids in row order, starting at `start`."""
        rows = [tuple(row) for row in rows]
        return cls(schema, tuple(range(start, start + len(rows))), tuple(rows))

    def __len__(self):
        return len(self.ids)

    def __iter__(self) -> Iterator[tuple[int, tuple[Cell, ...]]]:
        return iter(zip(self.ids, self.rows))

    @cached_property
    def index(self) -> dict[int, int]:
        return {tid: i for i, tid in enumerate(self.ids)}

    def row(self, tid: int) -> tuple[Cell, ...]:
        return self.rows[self.index[tid]]

    def value(self, tid: int, attribute: str) -> Cell:
        return self.row(tid)[self.schema.position(attribute)]

    def qi_key(self, tid: int) -> tuple[Cell, ...]:
        row = self.row(tid)
        return tuple(row[p] for p in self.schema.qi_positions)

    def restrict(self, ids: Iterable[int]) -> "Relation":
        """Keeps the given tuples, in relation order."""
        keep = set(ids)
        missing = keep - self.index.keys()
        if missing:
            raise StructuralError(f"tuple ids not in relation: {sorted(missing)}")
        pairs = [(tid, row) for tid, row in self if tid in keep]
        return Relation(self.schema, tuple(t for t, _ in pairs), tuple(r for _, r in pairs))

    def without(self, ids: Iterable[int]) -> "Relation":
        drop = set(ids)
        return self.restrict(tid for tid in self.ids if tid not in drop)

    def union(self, other: "Relation") -> "Relation":
        """Disjoint union, ordered by tuple id."""
        if other.schema != self.schema:
            raise StructuralError("cannot union relations with different schemas")
        if set(self.ids) & set(other.ids):
            raise StructuralError("cannot union relations sharing tuple ids")
        pairs = sorted([*self, *other], key=lambda pair: pair[0])
        return Relation(self.schema, tuple(t for t, _ in pairs), tuple(r for _, r in pairs))

    def suppress_cells(self, ids: Iterable[int], attributes: Iterable[str]) -> "Relation":
        """Returns a copy with the given QI attributes suppressed on the given tuples."""
        positions = [self.schema.position(a) for a in attributes]
        if not set(positions) <= set(self.schema.qi_positions):
            raise StructuralError("only quasi-identifier attributes can be suppressed")
        targets = set(ids)
        rows = []
        for tid, row in self:
            if tid in targets:
                row = tuple(SUPPRESSED if p in positions else cell for p, cell in enumerate(row))
            rows.append(row)
        return Relation(self.schema, self.ids, tuple(rows))


################
## Clustering ##
################


@dataclass(frozen=True)
class Clustering:
    clusters: frozenset[frozenset[int]] = frozenset()

    def __post_init__(self):
        clusters = frozenset(frozenset(c) for c in self.clusters)
        object.__setattr__(self, "clusters", clusters)
        if any(len(c) == 0 for c in clusters):
            raise StructuralError("clusters must be nonempty")
        seen = set()
        for cluster in clusters:
            if seen & cluster:
                raise StructuralError(f"overlapping clusters on tuples {sorted(seen & cluster)}")
            seen |= cluster

    @classmethod
    def of(cls, *clusters: Iterable[int]) -> "Clustering":
        return cls(frozenset(frozenset(c) for c in clusters))

    def __iter__(self):
        return iter(self.clusters)

    def __len__(self):
        return len(self.clusters)

    def __bool__(self):
        return bool(self.clusters)

    @cached_property
    def covered(self) -> frozenset[int]:
        return frozenset().union(*self.clusters)

    @property
    def sizes(self) -> list[int]:
        return sorted(len(c) for c in self.clusters)

    def sorted_clusters(self) -> list[tuple[int, ...]]:
        return sorted(tuple(sorted(c)) for c in self.clusters)

    def __repr__(self):
        inner = ", ".join("{" + ",".join(map(str, c)) + "}" for c in self.sorted_clusters())
        return f"Clustering({{{inner}}})"


def check_clustering(r: Relation, s: Clustering):
    unknown = s.covered - r.index.keys()
    if unknown:
        raise StructuralError(f"clustering references tuples not in relation: {sorted(unknown)}")


################
## Operations ##
################


def qi_groups(r: Relation) -> list[frozenset[int]]:
    """
    Partition of tuple ids by equality on all QI cells, in order of first appearance.
    Suppressed cells compare equal to each other only.
    """
    groups = defaultdict(list)
    for tid in r.ids:
        groups[r.qi_key(tid)].append(tid)
    return [frozenset(g) for g in groups.values()]


def is_k_anonymous(r: Relation, k: int) -> bool:
    if k < 1:
        raise ValueError(f"k {k} must be > 0")
    return all(len(group) >= k for group in qi_groups(r))


def suppress(r: Relation, s: Clustering) -> Relation:
    """
    Suppresses, within each cluster, every QI attribute on which the cluster's
    tuples disagree. Only covered tuples are returned; sensitive attributes are
    never touched.
    """
    check_clustering(r, s)
    qi_positions = r.schema.qi_positions
    suppressed = {}
    for cluster in s:
        rows = [r.row(tid) for tid in cluster]
        disagree = {p for p in qi_positions if len({row[p] for row in rows}) > 1}
        for tid, row in zip(cluster, rows):
            suppressed[tid] = tuple(SUPPRESSED if p in disagree else cell for p, cell in enumerate(row))
    ids = tuple(sorted(suppressed, key=r.index.__getitem__))
    return Relation(r.schema, ids, tuple(suppressed[tid] for tid in ids))


def cluster_cost(r: Relation, ids: Iterable[int]) -> int:
    """Number of stars needed for the given tuples to agree on every QI attribute."""
    rows = [r.row(tid) for tid in ids]
    return len(rows) * sum(1 for p in r.schema.qi_positions if len({row[p] for row in rows}) > 1)


def information_loss(r: Relation) -> int:
    return sum(cell is SUPPRESSED for row in r.rows for cell in row)


def is_suppression_of(original: Relation, anon: Relation) -> bool:
    if original.schema != anon.schema:
        raise StructuralError("relations have different schemas")
    if set(original.ids) != set(anon.ids):
        raise StructuralError("relations have different tuple ids")
    qi_positions = set(original.schema.qi_positions)
    for tid, row in anon:
        for position, (cell, before) in enumerate(zip(row, original.row(tid))):
            if cell == before:
                continue
            if cell is SUPPRESSED and position in qi_positions:
                continue
            return False
    return True
