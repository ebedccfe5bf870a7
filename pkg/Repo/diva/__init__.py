from diva.building import DivaBuilder, DivaConfig, Result, Unsatisfiable, decide, diva
from diva.clustering import Strategy
from diva.constraints import ConstraintSet
from diva.parsing import read_constraints, read_relation


def anonymize(
    records,
    constraints=(),
    schema=None,
    k=2,
    strategy="min-choice",
    seed=0,
    allow_suppressed=False,
    **kwargs
):
    """
    Publish a k-anonymous suppression of a relation that satisfies a set of diversity constraints.

    The relation and constraints can be passed as objects, or as file paths: a CSV file of records (header row
    first) with a JSON or YAML schema file naming its quasi-identifier and sensitive attributes, and a JSON or YAML
    constraint file. Any DivaConfig setting (e.g. candidate_cap, choice_horizon, strict_bounds,
    integrate_exhaustive) can be passed directly into anonymize.

    Parameters:
        records (Relation or str): The relation to anonymize, or the path of a CSV file of records
        constraints (ConstraintSet, iterable, or str): Diversity constraints, or the path of a constraint file
        schema (str): Path of the schema file, required when records is a path
        k (int): Every group of tuples sharing their quasi-identifier values will hold at least k tuples
        strategy (str): Vertex ordering of the coloring search, one of naive, min-choice or max-fanout
        seed (int): Seeds the search tie-breaks and the k-member baseline used for the leftover tuples
        allow_suppressed (bool): When True, '*' cells in a records file are read as already suppressed
        kwargs: Any additional keyword argument that can be passed to DivaConfig

    Returns:
        outcome (Result or Unsatisfiable): The anonymized relation with its diverse and residual parts and its
        information loss, or Unsatisfiable when no k-anonymous suppression satisfies the constraints.
    """

    if isinstance(records, str):
        assert schema is not None, "a schema file is needed to read records from a CSV file."
        records = read_relation(records, schema, allow_suppressed=allow_suppressed)
    if isinstance(constraints, str):
        constraints = read_constraints(constraints)

    if isinstance(strategy, str):
        strategy = Strategy.named(strategy, seed)
    cfg = DivaConfig(k=k, strategy=strategy, kmember_seed=seed, **kwargs)
    return diva(records, ConstraintSet(tuple(constraints)), cfg)
