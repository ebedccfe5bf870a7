from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import dataclass, fields
from typing import Optional

from inflection import underscore

from diva.bench import run_bench, sweep, write_bench
from diva.building import DivaConfig, Unsatisfiable, diva, kmember_baseline
from diva.clustering import DEFAULT_CANDIDATE_CAP, Strategy
from diva.constraints import EMPTY_RANGE, ConstraintSet, implies, is_satisfiable, minimal_cover, narrowed_range
from diva.errors import ConfigurationError, DivaError, SearchBudgetExceededError
from diva.generating import GeneratorSpec, generate_constraints
from diva.metrics import build_report
from diva.parsing import parse, read_constraints, read_relation
from diva.parsing.parsers import constraints_to_document, relation_to_frame, write_json, write_relation
from diva.synth import SynthSpec, synth_generate

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NEGATIVE = 2
EXIT_BUDGET = 3

RUN_DEFAULTS = {
    "data": None,
    "schema": None,
    "constraints": None,
    "k": 2,
    "strategy": "min-choice",
    "seed": 0,
    "candidate_cap": DEFAULT_CANDIDATE_CAP,
    "output": None,
    "report": None,
    "strict": False,
    "baseline": False,
    "exhaustive_integrate": False,
    "allow_suppressed": False,
}


###################
## Configuration ##
###################


@dataclass(frozen=True)
class RunConfig:
    data: str
    schema: str
    constraints: Optional[str] = None
    k: int = 2
    strategy: str = "min-choice"
    seed: int = 0
    candidate_cap: int = DEFAULT_CANDIDATE_CAP
    output: Optional[str] = None
    report: Optional[str] = None
    strict: bool = False
    baseline: bool = False
    exhaustive_integrate: bool = False
    allow_suppressed: bool = False

    def __post_init__(self):
        for name in ("data", "schema"):
            if not getattr(self, name):
                raise ConfigurationError(f"missing required setting: {name}")
        for name in ("data", "schema", "constraints"):
            path = getattr(self, name)
            if path and not os.path.exists(path):
                raise ConfigurationError(f"{name} file does not exist: {path}")

    def diva_config(self) -> DivaConfig:
        return DivaConfig(
            k=self.k,
            strategy=Strategy.named(self.strategy, self.seed),
            candidate_cap=self.candidate_cap,
            kmember_seed=self.seed,
            strict_bounds=self.strict,
            integrate_exhaustive=self.exhaustive_integrate,
        )


def load_run_config(args: argparse.Namespace) -> RunConfig:
    """
    Defaults, then the YAML run config given by --config, then every flag
    given explicitly on the command line.
    """
    settings = RUN_DEFAULTS.copy()
    if args.config:
        document = parse(args.config) or {}
        if not isinstance(document, dict):
            raise ConfigurationError(f"{args.config}: a run config is a mapping of settings")
        known = {f.name for f in fields(RunConfig)}
        for key, value in document.items():
            name = underscore(str(key).replace("-", "_"))
            if name not in known:
                raise ConfigurationError(f"{args.config}: unknown setting {key}")
            settings[name] = value
    for name in RUN_DEFAULTS:
        value = getattr(args, name, None)
        if value is not None:
            settings[name] = value
    return RunConfig(**settings)


##############
## Commands ##
##############


def anonymize_command(args) -> int:
    run = load_run_config(args)
    r = read_relation(run.data, run.schema, allow_suppressed=run.allow_suppressed)
    constraints = read_constraints(run.constraints) if run.constraints else ConstraintSet()
    if run.baseline:
        outcome = kmember_baseline(r, run.k, run.seed)
    else:
        outcome = diva(r, constraints, run.diva_config())
    if isinstance(outcome, Unsatisfiable):
        print(f"unsatisfiable: {outcome.reason}")
        return EXIT_NEGATIVE
    if run.output:
        write_relation(outcome.relation, run.output)
    else:
        relation_to_frame(outcome.relation).to_csv(sys.stdout, index=False, lineterminator="\n")
    if run.report:
        write_json(build_report(outcome.relation, constraints, run.k).to_dict(), run.report)
    return EXIT_OK


def check_command(args) -> int:
    sigma_set = read_constraints(args.constraints)
    wants_satisfiable = args.satisfiable or not (args.implies or args.minimal_cover)
    verdicts = []
    satisfiable = is_satisfiable(sigma_set)
    if wants_satisfiable or args.minimal_cover:
        print("satisfiable" if satisfiable else "unsatisfiable")
        verdicts.append(satisfiable)
    if args.implies:
        for sigma in read_constraints(args.implies):
            implied = implies(sigma_set, sigma)
            delta = narrowed_range(sigma_set, sigma.target)
            verdict = "implied" if implied else "not implied"
            print(f"{verdict}: {sigma} (narrowed to {'empty' if delta is EMPTY_RANGE else delta})")
            verdicts.append(implied)
    if args.minimal_cover and satisfiable:
        cover = minimal_cover(sigma_set)
        if args.output:
            write_json(constraints_to_document(cover), args.output)
        else:
            for sigma in cover:
                print(sigma)
    return EXIT_OK if all(verdicts) else EXIT_NEGATIVE


def gen_constraints_command(args) -> int:
    r = read_relation(args.data, args.schema)
    attrs = [a for chunk in args.attrs for a in chunk.split(",") if a]
    spec = GeneratorSpec(kind=args.constraint_class, target_attrs=attrs, seed=args.seed, for_diva=not args.keep_all)
    sigma_set = generate_constraints(r, spec, args.k)
    document = constraints_to_document(sigma_set)
    if args.output:
        write_json(document, args.output)
    else:
        for sigma in sigma_set:
            print(sigma)
    return EXIT_OK


def synth_command(args) -> int:
    spec = SynthSpec.from_document(parse(args.spec))
    r = synth_generate(spec)
    write_relation(r, args.output)
    if args.schema_output:
        write_json({"qi": list(r.schema.qi), "sensitive": list(r.schema.sensitive)}, args.schema_output)
    return EXIT_OK


def bench_command(args) -> int:
    document = parse(args.config)
    if not isinstance(document, dict):
        raise ConfigurationError(f"{args.config}: a bench config is a mapping")
    cells = sweep(document, base_dir=os.path.dirname(os.path.abspath(args.config)))
    frame = run_bench(cells, workers=args.workers, progress=not args.quiet)
    write_bench(frame, args.output)
    return EXIT_OK


############
## Parser ##
############


class DivaArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigurationError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = DivaArgumentParser(prog="diva", description="k-anonymization under diversity constraints.")
    parser.add_argument("--log-level", default="WARNING", help="Logging level, e.g. INFO or DEBUG")
    commands = parser.add_subparsers(dest="command", required=True)

    anonymize = commands.add_parser("anonymize", help="Anonymize a CSV relation")
    anonymize.add_argument("--config", help="YAML run config; flags given here override it")
    anonymize.add_argument("--data", help="Input CSV, header row first")
    anonymize.add_argument("--schema", help="JSON or YAML file listing qi and sensitive attributes")
    anonymize.add_argument("--constraints", help="JSON or YAML diversity constraint file")
    anonymize.add_argument("-k", type=int, dest="k", default=None)
    anonymize.add_argument("--strategy", default=None, help="naive, min-choice or max-fanout")
    anonymize.add_argument("--seed", type=int, default=None)
    anonymize.add_argument("--candidate-cap", type=int, default=None)
    anonymize.add_argument("--output", default=None, help="Anonymized CSV, stdout when omitted")
    anonymize.add_argument("--report", default=None, help="JSON metrics report")
    anonymize.add_argument("--strict", action="store_true", default=None, help="Reject lower bounds below k")
    anonymize.add_argument("--baseline", action="store_true", default=None, help="Plain k-member, ignoring constraints")
    anonymize.add_argument("--exhaustive-integrate", action="store_true", default=None)
    anonymize.add_argument("--allow-suppressed", action="store_true", default=None, help="Read '*' as a suppressed cell")
    anonymize.set_defaults(handler=anonymize_command)

    check = commands.add_parser("check", help="Reason about a constraint set")
    check.add_argument("--constraints", required=True)
    check.add_argument("--implies", help="Constraint file whose constraints are tested for implication")
    check.add_argument("--satisfiable", action="store_true")
    check.add_argument("--minimal-cover", action="store_true")
    check.add_argument("--output", help="Write the minimal cover here as JSON")
    check.set_defaults(handler=check_command)

    gen = commands.add_parser("gen-constraints", help="Generate minimum, average or proportion constraints")
    gen.add_argument("--data", required=True)
    gen.add_argument("--schema", required=True)
    gen.add_argument("--class", dest="constraint_class", default="proportion")
    gen.add_argument("--attrs", action="append", required=True, help="Target attributes, comma separated or repeated")
    gen.add_argument("-k", type=int, dest="k", default=2)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--keep-all", action="store_true", help="Keep constraints with a lower bound below k")
    gen.add_argument("--output")
    gen.set_defaults(handler=gen_constraints_command)

    synth = commands.add_parser("synth", help="Generate a synthetic relation")
    synth.add_argument("--spec", required=True)
    synth.add_argument("--output", required=True)
    synth.add_argument("--schema-output")
    synth.set_defaults(handler=synth_command)

    bench = commands.add_parser("bench", help="Sweep k, constraint counts and strategies")
    bench.add_argument("--config", required=True)
    bench.add_argument("--output")
    bench.add_argument("--workers", type=int, default=1)
    bench.add_argument("--quiet", action="store_true")
    bench.set_defaults(handler=bench_command)
    return parser


def run(argv) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=args.log_level.upper(), format="%(levelname)s %(name)s: %(message)s")
        return args.handler(args)
    except SearchBudgetExceededError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except DivaError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
