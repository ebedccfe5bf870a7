from __future__ import annotations

import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import pandas as pd
from tqdm import tqdm

from diva.building import DivaConfig, Result, diva, kmember_baseline
from diva.clustering import DEFAULT_CANDIDATE_CAP, Strategy, StrategyKind
from diva.constraints import ConstraintSet, validate_all
from diva.errors import ConfigurationError, DivaError, SearchBudgetExceededError
from diva.generating import GeneratorSpec, generate_constraints
from diva.metrics import conflict_rate, discernibility
from diva.parsing import parse, read_constraints, read_relation
from diva.relation import Relation
from diva.synth import SynthSpec, synth_generate

logger = logging.getLogger(__name__)

BENCH_COLUMNS = [
    "instance",
    "k",
    "strategy",
    "n_constraints",
    "conflict_rate",
    "satisfiable",
    "info_loss",
    "disc_norm",
    "millis",
]

KMEMBER = "kmember"


@dataclass(frozen=True)
class Instance:
    name: str
    relation: Relation
    constraints: ConstraintSet


@dataclass(frozen=True)
class BenchCell:
    instance: Instance
    k: int
    strategy: str
    n_constraints: int
    seed: int = 0
    candidate_cap: int = DEFAULT_CANDIDATE_CAP


def _resolve(base_dir, path):
    return path if os.path.isabs(path) else os.path.join(base_dir, path)


def load_instance(entry: dict, base_dir: str, k: int) -> Instance:
    """
    An instance names either stored records (`records` + `schema`) or a
    synthetic relation (`synth`, inline or a YAML path), and either a
    constraint file (`constraints`) or a generator (`generate`).
    """
    name = entry.get("name")
    if not name:
        raise ConfigurationError(f"bench instance without a name: {entry!r}")
    if "synth" in entry:
        document = entry["synth"]
        if isinstance(document, str):
            document = parse(_resolve(base_dir, document))
        relation = synth_generate(SynthSpec.from_document(document))
    elif "records" in entry and "schema" in entry:
        relation = read_relation(_resolve(base_dir, entry["records"]), _resolve(base_dir, entry["schema"]))
    else:
        raise ConfigurationError(f"bench instance {name} needs either synth or records and schema")

    if "constraints" in entry:
        constraints = read_constraints(_resolve(base_dir, entry["constraints"]))
    elif "generate" in entry:
        options = entry["generate"]
        spec = GeneratorSpec(
            kind=options.get("class", "proportion"),
            target_attrs=options.get("attrs", ()),
            seed=options.get("seed", 0),
        )
        constraints = generate_constraints(relation, spec, k)
    else:
        constraints = ConstraintSet()
    return Instance(name, relation, constraints)


def sweep(document: dict, base_dir: str = ".") -> list[BenchCell]:
    """Cells in sweep order: instance, then k, then constraint count, then strategy."""
    ks = document.get("ks") or [2]
    strategies = document.get("strategies") or [kind.label for kind in StrategyKind]
    counts = document.get("constraint_counts") or [None]
    seed = document.get("seed", 0)
    cap = document.get("candidate_cap", DEFAULT_CANDIDATE_CAP)
    for strategy in strategies:
        if strategy != KMEMBER:
            StrategyKind.named(strategy)
    cells = []
    for entry in document.get("instances") or []:
        for k in ks:
            instance = load_instance(entry, base_dir, k)
            for count in counts:
                n = len(instance.constraints) if count is None else min(count, len(instance.constraints))
                for strategy in strategies:
                    cells.append(BenchCell(instance, k, strategy, n, seed, cap))
    return cells


def run_cell(cell: BenchCell) -> dict:
    """One isolated run; shares nothing with other cells."""
    r = cell.instance.relation
    constraints = ConstraintSet(cell.instance.constraints.constraints[: cell.n_constraints])
    rate = conflict_rate(r, constraints)
    row = {
        "instance": cell.instance.name,
        "k": cell.k,
        "strategy": cell.strategy,
        "n_constraints": len(constraints),
        "conflict_rate": "" if rate is None else round(rate, 4),
        "satisfiable": "",
        "info_loss": "",
        "disc_norm": "",
        "millis": "",
    }
    start = time.perf_counter()
    try:
        if cell.strategy == KMEMBER:
            outcome = kmember_baseline(r, cell.k, cell.seed)
            satisfiable = validate_all(outcome.relation, constraints)
        else:
            cfg = DivaConfig(
                k=cell.k,
                strategy=Strategy.named(cell.strategy, cell.seed),
                candidate_cap=cell.candidate_cap,
                kmember_seed=cell.seed,
            )
            outcome = diva(r, constraints, cfg)
            satisfiable = isinstance(outcome, Result)
        row["satisfiable"] = "true" if satisfiable else "false"
        if isinstance(outcome, Result):
            row["info_loss"] = outcome.information_loss
            row["disc_norm"] = round(discernibility(outcome.relation, cell.k)[1], 6)
    except SearchBudgetExceededError as e:
        logger.warning("%s k=%s %s: %s", cell.instance.name, cell.k, cell.strategy, e)
        row["satisfiable"] = "unknown"
    except DivaError as e:
        logger.warning("%s k=%s %s failed: %s", cell.instance.name, cell.k, cell.strategy, e)
        row["satisfiable"] = "error"
    row["millis"] = int(round((time.perf_counter() - start) * 1000))
    return row


def run_bench(cells: list[BenchCell], workers: int = 1, progress: bool = True) -> pd.DataFrame:
    """Runs every cell, in parallel when `workers` > 1; rows keep sweep order."""
    bar = tqdm(total=len(cells), desc="bench", unit="run", disable=not progress)
    rows = []
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            for row in executor.map(run_cell, cells):
                rows.append(row)
                bar.update()
    else:
        for cell in cells:
            rows.append(run_cell(cell))
            bar.update()
    bar.close()
    return pd.DataFrame(rows, columns=BENCH_COLUMNS)


def write_bench(frame: pd.DataFrame, file_path: Optional[str]):
    frame.to_csv(file_path if file_path else sys.stdout, index=False, lineterminator="\n")
