from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from diva.errors import SynthSpecError
from diva.relation import Relation, Schema

logger = logging.getLogger(__name__)

DISTRIBUTIONS = ("uniform", "gaussian", "zipf")


@dataclass(frozen=True)
class AttributeSpec:
    name: str
    values: tuple[str, ...]
    distribution: str = "uniform"
    mean: Optional[float] = None
    std: Optional[float] = None
    s: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(str(v) for v in self.values))
        if not self.values:
            raise SynthSpecError(f"attribute {self.name} has an empty domain")
        if self.distribution not in DISTRIBUTIONS:
            raise SynthSpecError(
                f"attribute {self.name}: unknown distribution {self.distribution!r}, expected one of {DISTRIBUTIONS}"
            )
        if self.std is not None and self.std <= 0:
            raise SynthSpecError(f"attribute {self.name}: std must be positive, got {self.std}")
        if self.s < 0:
            raise SynthSpecError(f"attribute {self.name}: zipf exponent must be non-negative, got {self.s}")

    def probabilities(self) -> np.ndarray:
        """Probability of each domain value, in domain order."""
        n = len(self.values)
        ranks = np.arange(n, dtype=float)
        if self.distribution == "uniform":
            weights = np.ones(n)
        elif self.distribution == "gaussian":
            mean = (n - 1) / 2 if self.mean is None else self.mean
            std = max(n / 4, 0.5) if self.std is None else self.std
            weights = np.exp(-((ranks - mean) ** 2) / (2 * std**2))
        else:
            weights = 1.0 / (ranks + 1) ** self.s
        total = weights.sum()
        if not np.isfinite(total) or total <= 0:
            raise SynthSpecError(f"attribute {self.name}: distribution parameters give no probability mass")
        return weights / total


@dataclass(frozen=True)
class SynthSpec:
    rows: int
    qi: tuple[AttributeSpec, ...] = ()
    sensitive: tuple[AttributeSpec, ...] = ()
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "qi", tuple(self.qi))
        object.__setattr__(self, "sensitive", tuple(self.sensitive))
        if not isinstance(self.rows, int) or self.rows < 0:
            raise SynthSpecError(f"row count must be a non-negative integer, got {self.rows!r}")
        if not self.qi and not self.sensitive:
            raise SynthSpecError("a synthetic relation needs at least one attribute")

    @property
    def attributes(self) -> tuple[AttributeSpec, ...]:
        return self.qi + self.sensitive

    @classmethod
    def from_document(cls, document) -> "SynthSpec":
        if not isinstance(document, dict):
            raise SynthSpecError("a synth spec is a mapping with rows, seed, qi and sensitive")

        def attributes(key):
            specs = []
            for entry in document.get(key) or []:
                if not isinstance(entry, dict) or "name" not in entry or "values" not in entry:
                    raise SynthSpecError(f"every {key} attribute needs a name and values, got {entry!r}")
                try:
                    specs.append(AttributeSpec(**entry))
                except TypeError as e:
                    raise SynthSpecError(f"{key} attribute {entry.get('name')}: {e}") from None
            return tuple(specs)

        return cls(
            rows=document.get("rows", 0),
            qi=attributes("qi"),
            sensitive=attributes("sensitive"),
            seed=document.get("seed", 0),
        )


def synth_generate(spec: SynthSpec) -> Relation:
    """Draws every attribute independently from its distribution; the same seed gives the same relation."""
    rng = np.random.default_rng(spec.seed)
    columns = []
    for attribute in spec.attributes:
        values = np.array(attribute.values, dtype=object)
        columns.append(values[rng.choice(len(values), size=spec.rows, p=attribute.probabilities())])
    schema = Schema(
        tuple(a.name for a in spec.attributes),
        tuple(a.name for a in spec.qi),
        tuple(a.name for a in spec.sensitive),
    )
    rows = [tuple(str(column[i]) for column in columns) for i in range(spec.rows)]
    logger.info("Generated %s synthetic rows over %s attributes", spec.rows, len(spec.attributes))
    return Relation.from_rows(schema, rows)
