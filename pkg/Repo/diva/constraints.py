from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, Optional, Union

from diva.errors import ConstraintError, SchemaError, UnsatisfiableConstraintsError
from diva.relation import SUPPRESSED, Relation, Schema

logger = logging.getLogger(__name__)


class Bound(Enum):
    UNBOUNDED = "unbounded"

    def __repr__(self):
        return "inf"


UNBOUNDED = Bound.UNBOUNDED


class Empty(Enum):
    RANGE = "empty"

    def __repr__(self):
        return "EMPTY_RANGE"

    def within(self, other) -> bool:
        return True

    def contains(self, count: int) -> bool:
        return False


EMPTY_RANGE = Empty.RANGE


############
## Target ##
############


@dataclass(frozen=True)
class Target:
    attrs: tuple[str, ...]
    values: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "attrs", tuple(self.attrs))
        object.__setattr__(self, "values", tuple(self.values))
        if len(self.attrs) != len(self.values):
            raise ConstraintError(f"target has {len(self.attrs)} attributes but {len(self.values)} values")
        if not self.attrs:
            raise ConstraintError("target needs at least one attribute")
        if len(set(self.attrs)) != len(self.attrs):
            raise ConstraintError(f"duplicate attributes in target {list(self.attrs)}")
        if any(v is SUPPRESSED or not isinstance(v, str) for v in self.values):
            raise ConstraintError(f"target values must be concrete strings, got {list(self.values)}")

    @property
    def pairs(self) -> frozenset[tuple[str, str]]:
        return frozenset(zip(self.attrs, self.values))

    def __lt__(self, other: "Target") -> bool:
        """Strict containment of attribute-value pairs."""
        return self.pairs < other.pairs

    def __le__(self, other: "Target") -> bool:
        return self.pairs <= other.pairs

    def same_as(self, other: "Target") -> bool:
        return self.pairs == other.pairs

    def __str__(self):
        attrs = ",".join(self.attrs)
        values = ",".join(self.values)
        if len(self.attrs) == 1:
            return f"{attrs}[{values}]"
        return f"{{{attrs}}}[{values}]"


####################
## FrequencyRange ##
####################


@dataclass(frozen=True)
class FrequencyRange:
    lo: int = 0
    hi: Union[int, Bound] = UNBOUNDED

    def __post_init__(self):
        if not isinstance(self.lo, int) or self.lo < 0:
            raise ConstraintError(f"lower bound must be a non-negative integer, got {self.lo!r}")
        if self.hi is not UNBOUNDED:
            if not isinstance(self.hi, int) or self.hi < 0:
                raise ConstraintError(f"upper bound must be a non-negative integer, got {self.hi!r}")
            if self.lo > self.hi:
                raise ConstraintError(f"empty frequency range [{self.lo}, {self.hi}]")

    @property
    def bounded(self) -> bool:
        return self.hi is not UNBOUNDED

    def contains(self, count: int) -> bool:
        return self.lo <= count and (not self.bounded or count <= self.hi)

    def intersect(self, other: "FrequencyRange") -> Union["FrequencyRange", Empty]:
        lo = max(self.lo, other.lo)
        if not self.bounded:
            hi = other.hi
        elif not other.bounded:
            hi = self.hi
        else:
            hi = min(self.hi, other.hi)
        if hi is not UNBOUNDED and lo > hi:
            return EMPTY_RANGE
        return FrequencyRange(lo, hi)

    def within(self, other: "FrequencyRange") -> bool:
        """True iff this range is a subset of `other`."""
        if self.lo < other.lo:
            return False
        if not other.bounded:
            return True
        return self.bounded and self.hi <= other.hi

    def __str__(self):
        hi = "inf" if not self.bounded else self.hi
        return f"[{self.lo}, {hi}]"


Range = Union[FrequencyRange, Empty]


#########################
## DiversityConstraint ##
#########################


@dataclass(frozen=True)
class DiversityConstraint:
    target: Target
    range: Range

    @classmethod
    def of(cls, attrs, values, lo: int, hi: Optional[int] = None) -> "DiversityConstraint":
        """Convenience constructor; `hi=None` means unbounded."""
        if isinstance(attrs, str):
            attrs, values = (attrs,), (values,)
        return cls(Target(tuple(attrs), tuple(values)), FrequencyRange(lo, UNBOUNDED if hi is None else hi))

    @classmethod
    def false(cls, target: Target) -> "DiversityConstraint":
        return cls(target, EMPTY_RANGE)

    @property
    def is_false(self) -> bool:
        return self.range is EMPTY_RANGE

    @property
    def lo(self) -> int:
        return 0 if self.is_false else self.range.lo

    @property
    def hi(self) -> Union[int, Bound]:
        return 0 if self.is_false else self.range.hi

    def __str__(self):
        if self.is_false:
            return f"({self.target}, empty)"
        hi = "inf" if self.hi is UNBOUNDED else self.hi
        return f"({self.target}, {self.lo}, {hi})"


@dataclass(frozen=True)
class ConstraintSet:
    constraints: tuple[DiversityConstraint, ...] = ()

    def __post_init__(self):
        unique = []
        for sigma in self.constraints:
            if sigma in unique:
                logger.warning("Dropping duplicate diversity constraint %s", sigma)
                continue
            unique.append(sigma)
        object.__setattr__(self, "constraints", tuple(unique))

    @classmethod
    def of(cls, *constraints: DiversityConstraint) -> "ConstraintSet":
        return cls(tuple(constraints))

    def __iter__(self) -> Iterator[DiversityConstraint]:
        return iter(self.constraints)

    def __len__(self):
        return len(self.constraints)

    def __getitem__(self, i):
        return self.constraints[i]

    def without(self, sigma: DiversityConstraint) -> "ConstraintSet":
        return ConstraintSet(tuple(s for s in self.constraints if s != sigma))

    def targets(self) -> list[Target]:
        seen = []
        for sigma in self.constraints:
            if not any(sigma.target.same_as(t) for t in seen):
                seen.append(sigma.target)
        return seen


def check_targets(schema: Schema, sigma_set: Iterable[DiversityConstraint]):
    """Targets may only name quasi-identifier attributes."""
    for sigma in sigma_set:
        for attr in sigma.target.attrs:
            if attr not in schema.attributes:
                raise SchemaError(f"unknown attribute {attr} in constraint {sigma}")
            if attr not in schema.qi:
                raise SchemaError(f"constraint {sigma} targets non-QI attribute {attr}")


################
## Validation ##
################


@dataclass(frozen=True)
class Validation:
    satisfied: bool
    count: int

    def __bool__(self):
        return self.satisfied


def target_matcher(r: Relation, target: Target):
    positions = [r.schema.position(a) for a in target.attrs]
    values = target.values

    def matches(row) -> bool:
        return all(row[p] == v for p, v in zip(positions, values))

    return matches


def relevant_tuples(r: Relation, sigma: Union[DiversityConstraint, Target]) -> frozenset[int]:
    target = sigma.target if isinstance(sigma, DiversityConstraint) else sigma
    matches = target_matcher(r, target)
    return frozenset(tid for tid, row in r if matches(row))


def frequency(r: Relation, target: Target) -> int:
    matches = target_matcher(r, target)
    return sum(1 for row in r.rows if matches(row))


def validate(r: Relation, sigma: DiversityConstraint, lower_only: bool = False) -> Validation:
    count = frequency(r, sigma.target)
    if sigma.is_false:
        return Validation(False, count)
    if lower_only:
        return Validation(count >= sigma.lo, count)
    return Validation(sigma.range.contains(count), count)


def validate_all(r: Relation, sigma_set: Iterable[DiversityConstraint], lower_only: bool = False) -> bool:
    return all(validate(r, sigma, lower_only=lower_only) for sigma in sigma_set)


###############
## Reasoning ##
###############


def narrowed_range(sigma_set: Iterable[DiversityConstraint], target: Target) -> Range:
    """
    One pass over the set, narrowing [0, inf) for `target`:
    equal target -> intersect with its range;
    a more general target (strict subset of pairs) -> cap by its upper bound;
    a more specific target (strict superset of pairs) -> raise to its lower bound.
    """
    delta: Range = FrequencyRange(0, UNBOUNDED)
    for other in sigma_set:
        if delta is EMPTY_RANGE:
            break
        if other.is_false:
            if other.target.same_as(target):
                delta = EMPTY_RANGE
            continue
        if other.target.same_as(target):
            delta = delta.intersect(other.range)
        elif other.target < target:
            delta = delta.intersect(FrequencyRange(0, other.hi))
        elif target < other.target:
            delta = delta.intersect(FrequencyRange(other.lo, UNBOUNDED))
    return delta


def implies(sigma_set: Iterable[DiversityConstraint], sigma: DiversityConstraint) -> bool:
    delta = narrowed_range(sigma_set, sigma.target)
    if sigma.is_false:
        return delta is EMPTY_RANGE
    return delta.within(sigma.range)


def is_satisfiable(sigma_set: ConstraintSet) -> bool:
    for target in sigma_set.targets():
        if narrowed_range(sigma_set, target) is EMPTY_RANGE:
            logger.debug("Constraint set implies the false constraint on %s", target)
            return False
    return True


def minimal_cover(sigma_set: ConstraintSet) -> ConstraintSet:
    """
    Drops, in declaration order and until nothing changes, every constraint
    implied by the others.
    """
    if not is_satisfiable(sigma_set):
        raise UnsatisfiableConstraintsError("cannot compute a minimal cover of an unsatisfiable constraint set")
    cover = list(sigma_set)
    changed = True
    while changed:
        changed = False
        for sigma in list(cover):
            rest = [s for s in cover if s is not sigma]
            if implies(rest, sigma):
                logger.info("Removing redundant constraint %s", sigma)
                cover = rest
                changed = True
    return ConstraintSet(tuple(cover))
