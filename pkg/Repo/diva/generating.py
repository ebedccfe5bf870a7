from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass
from enum import Enum

import numpy as np
from inflection import dasherize, underscore

from diva.constraints import ConstraintSet, DiversityConstraint
from diva.errors import ConfigurationError, ConstraintError, SchemaError
from diva.metrics import estimate_published
from diva.relation import Relation

logger = logging.getLogger(__name__)


class ConstraintClass(Enum):
    MINIMUM = "minimum"
    AVERAGE = "average"
    PROPORTION = "proportion"

    @classmethod
    def named(cls, name: str) -> "ConstraintClass":
        wanted = underscore(str(name))
        for kind in cls:
            if kind.value == wanted:
                return kind
        raise ConfigurationError(f"unknown constraint class {name!r}; expected one of {', '.join(k.label for k in cls)}")

    @property
    def label(self) -> str:
        return dasherize(self.value)


@dataclass(frozen=True)
class GeneratorSpec:
    kind: ConstraintClass
    target_attrs: tuple[str, ...]
    seed: int = 0
    for_diva: bool = True

    def __post_init__(self):
        if isinstance(self.kind, str):
            object.__setattr__(self, "kind", ConstraintClass.named(self.kind))
        if isinstance(self.target_attrs, str):
            object.__setattr__(self, "target_attrs", (self.target_attrs,))
        object.__setattr__(self, "target_attrs", tuple(self.target_attrs))
        if not self.target_attrs:
            raise ConfigurationError("constraint generation needs at least one target attribute")


def _add_shortfall(bounds: list[list[int]], freqs: list[int], w: int, rng: np.random.Generator):
    """Adds `w` to the upper bound of one random constraint that has room, else spreads it by frequency."""
    eligible = [i for i, f in enumerate(freqs) if f >= bounds[i][1] + w]
    if eligible:
        bounds[int(rng.choice(eligible))][1] += w
        return
    for i in sorted(range(len(freqs)), key=lambda i: (-freqs[i], i)):
        room = min(w, freqs[i] - bounds[i][1])
        bounds[i][1] += room
        w -= room
        if w == 0:
            return
    logger.warning("%s published tuples could not be spread over the generated upper bounds", w)


def _sparse(d: int, u: int, rng: np.random.Generator) -> list[list[int]]:
    chosen = set(int(i) for i in rng.choice(d, size=u, replace=False)) if u else set()
    return [[1, 1] if i in chosen else [0, 0] for i in range(d)]


def generate_constraints(r: Relation, spec: GeneratorSpec, k: int) -> ConstraintSet:
    """
    Generate one diversity constraint per distinct value combination of the
    target attributes, with bounds sized from the number of tuples expected to
    survive anonymization.

    Parameters:
        r (Relation): The relation the constraints are meant for
        spec (GeneratorSpec): Constraint class, target attributes and random seed
        k (int): Used to drop constraints with a lower bound below k when the set is meant for diva

    Returns:
        sigma_set (ConstraintSet): The generated constraints, ordered by target values
    """
    unknown = [a for a in spec.target_attrs if a not in r.schema.qi]
    if unknown:
        raise SchemaError(f"constraint targets must be quasi-identifiers, got {unknown}")
    positions = [r.schema.position(a) for a in spec.target_attrs]
    counts = Counter(tuple(row[p] for p in positions) for row in r.rows)
    values = sorted(counts, key=lambda combo: tuple(map(str, combo)))
    d = len(values)
    if d == 0:
        raise ConstraintError("no target values to generate constraints for")
    freqs = [counts[v] for v in values]
    n = len(r)
    u = estimate_published(r)
    rng = np.random.default_rng(spec.seed)
    logger.info("Generating %s constraints over %s with U=%s, d=%s", spec.kind.label, list(spec.target_attrs), u, d)

    if u < d:
        bounds = _sparse(d, u, rng)
    elif spec.kind is ConstraintClass.MINIMUM:
        bounds = [[1, 1] for _ in values]
    elif spec.kind is ConstraintClass.AVERAGE:
        bounds = [[min(u // d, f), min(-(-u // d), f)] for f in freqs]
    else:
        bounds = [[(u * f) // n, -(-(u * f) // n)] for f in freqs]

    if u >= d:
        w = u - sum(hi for _, hi in bounds)
        if w > 0:
            _add_shortfall(bounds, freqs, w, rng)

    constraints = []
    for combo, (lo, hi) in zip(values, bounds):
        sigma = DiversityConstraint.of(spec.target_attrs, combo, lo, hi)
        if spec.for_diva and lo < k:
            logger.warning("Dropping generated constraint %s: lower bound below k=%s", sigma, k)
            continue
        constraints.append(sigma)
    return ConstraintSet(tuple(constraints))
