import pytest
from hypothesis import given, reject, settings, strategies as st
from diva import anonymize
from diva.building import (
    DivaBuilder,
    DivaConfig,
    Result,
    Unsatisfiable,
    decide,
    diva,
    integrate,
    kmember_baseline,
)
from diva.clustering import Strategy, StrategyKind
from diva.constraints import ConstraintSet, DiversityConstraint, frequency, is_satisfiable, validate_all
from diva.errors import ConfigurationError, IntegrationError, SearchBudgetExceededError, UnsatisfiableConstraintsError
from diva.generating import GeneratorSpec, generate_constraints
from diva.kmember import anonymize_kmember
from diva.parsing import read_constraints, read_relation
from diva.relation import SUPPRESSED, Clustering, Relation, Schema, information_loss, is_k_anonymous, is_suppression_of, suppress
from diva.synth import AttributeSpec, SynthSpec, synth_generate
from tests.oracle import SCHEMA, random_instance, search_space


##############
## FIXTURES ##
##############


@pytest.fixture(scope="session")
def table1():
    return read_relation("tests/data/table1/records.csv", "tests/data/table1/schema.json")


@pytest.fixture(scope="session")
def sigmas():
    return read_constraints("tests/data/table1/constraints.json")


@pytest.fixture(scope="session")
def african():
    return read_constraints("tests/data/table1/african.json")


@pytest.fixture(scope="session")
def diverse_part(table1):
    return suppress(table1, Clustering.of({5, 6}, {7, 8}, {9, 10}))


@pytest.fixture(scope="session")
def residual_part(table1):
    return suppress(table1.restrict([1, 2, 3, 4]), Clustering.of({1, 2}, {3, 4}))


@pytest.fixture(scope="session")
def stacked():
    schema = Schema(("A", "B", "S"), qi=("A", "B"), sensitive=("S",))
    rows = [("x", "b1", "s")] * 2 + [("x", "b2", "s")] * 3
    return Relation.from_rows(schema, rows)


###########
## TESTS ##
###########


def test_config_defaults():
    cfg = DivaConfig()
    assert cfg.k == 2
    assert cfg.strategy.kind is StrategyKind.MIN_CHOICE
    assert not cfg.strict_bounds


def test_config_accepts_strategy_names():
    assert DivaConfig(strategy="max-fanout").strategy.kind is StrategyKind.MAX_FANOUT


@pytest.mark.parametrize("settings_", [{"k": 0}, {"candidate_cap": 0}, {"choice_horizon": 0}, {"strategy": "best"}])
def test_config_rejects_bad_values(settings_):
    with pytest.raises(ConfigurationError):
        DivaConfig(**settings_)


def test_unsatisfiable_outcome_is_falsy():
    assert not Unsatisfiable("no")


def test_kmember_on_first_four_tuples(table1):
    r = table1.restrict([1, 2, 3, 4])
    clustering = anonymize_kmember(r, 2, seed=0)
    assert clustering == Clustering.of({1, 2}, {3, 4})
    assert information_loss(suppress(r, clustering)) == 8


def test_kmember_covers_every_tuple(table1):
    for k in (2, 3, 4):
        clustering = anonymize_kmember(table1, k, seed=3)
        assert clustering.covered == frozenset(table1.ids)
        assert all(size >= k for size in clustering.sizes)


def test_kmember_with_too_few_tuples(table1):
    assert anonymize_kmember(table1.restrict([1, 2]), 3) == Clustering.of({1, 2})
    assert anonymize_kmember(table1.restrict([]), 3) == Clustering()


def test_kmember_baseline(table1):
    result = kmember_baseline(table1, 2)
    assert is_k_anonymous(result.relation, 2)
    assert result.residual_part_ids == frozenset(table1.ids)
    assert result.information_loss == information_loss(result.relation)


def test_integrate_without_violations(table1, sigmas, diverse_part, residual_part):
    assert integrate(diverse_part, residual_part, sigmas) == diverse_part.union(residual_part)


def test_integrate_suppresses_residual_group(diverse_part, residual_part):
    male = DiversityConstraint.of("GEN", "Male", 1, 3)
    merged = integrate(diverse_part, residual_part, [male])
    assert frequency(merged, male.target) == 2
    assert merged.value(3, "GEN") is SUPPRESSED
    assert merged.value(4, "GEN") is SUPPRESSED
    assert merged.value(1, "GEN") == "Female"
    assert merged.value(3, "ETH") == "Caucasian"
    assert is_k_anonymous(merged, 2)


def test_integrate_rejects_lower_bound_violation(diverse_part, residual_part):
    with pytest.raises(IntegrationError):
        integrate(diverse_part, residual_part, [DiversityConstraint.of("GEN", "Male", 5, 8)])


def test_integrate_greedy_and_exhaustive(stacked):
    sigma = DiversityConstraint.of("A", "x", 0, 2)
    empty = stacked.restrict([])

    greedy = integrate(empty, stacked, [sigma])
    assert frequency(greedy, sigma.target) == 0

    exhaustive = integrate(empty, stacked, [sigma], exhaustive=True)
    assert frequency(exhaustive, sigma.target) == 2
    assert [exhaustive.value(t, "A") for t in (1, 2)] == ["x", "x"]


def test_diva_on_worked_example(table1, sigmas):
    result = diva(table1, sigmas, DivaConfig(k=2))
    assert isinstance(result, Result)
    assert is_k_anonymous(result.relation, 2)
    assert validate_all(result.relation, sigmas)
    assert is_suppression_of(table1, result.relation)
    assert result.diverse_part_ids | result.residual_part_ids == frozenset(table1.ids)
    assert not result.diverse_part_ids & result.residual_part_ids
    assert result.information_loss == information_loss(result.relation)


@pytest.mark.parametrize("kind", list(StrategyKind))
def test_diva_with_every_strategy(table1, sigmas, kind):
    result = diva(table1, sigmas, DivaConfig(k=2, strategy=Strategy(kind)))
    assert result
    assert validate_all(result.relation, sigmas)


def test_diva_without_constraints_is_kmember(table1):
    result = diva(table1, [], DivaConfig(k=2))
    assert result.diverse_part_ids == frozenset()
    assert result.relation == kmember_baseline(table1, 2).relation


def test_diva_african_at_three(table1, african):
    outcome = diva(table1, african, DivaConfig(k=3))
    assert isinstance(outcome, Unsatisfiable)
    assert not decide(table1, african, 3)


def test_decide_worked_example(table1, sigmas):
    assert decide(table1, sigmas, 2)
    assert not decide(table1, ConstraintSet.of(sigmas[0], sigmas[2]), 3)


def test_contradicting_constraints(table1):
    sigma_set = [
        DiversityConstraint.of(("ETH", "CTY"), ("Caucasian", "Calgary"), 6, 8),
        DiversityConstraint.of("CTY", "Calgary", 1, 5),
    ]
    assert not decide(table1, sigma_set, 2)
    with pytest.raises(UnsatisfiableConstraintsError):
        diva(table1, sigma_set)


def test_strict_bounds(table1, african):
    with pytest.raises(ConfigurationError):
        diva(table1, african, DivaConfig(k=3, strict_bounds=True))
    assert diva(table1, african, DivaConfig(k=1, strict_bounds=True))


def test_builder_stages_stop_after_unsatisfiable(table1, african):
    setup = DivaBuilder(table1, african, k=3)
    setup.check_constraints()
    setup.find_diverse_clustering()
    setup.anonymize_residual()
    setup.integrate_parts()
    assert setup.r_k is None
    assert isinstance(setup.return_outcome(), Unsatisfiable)


def test_search_budget(table1, sigmas):
    sigma_set = ConstraintSet.of(sigmas[0], sigmas[2])
    with pytest.raises(SearchBudgetExceededError):
        diva(table1, sigma_set, DivaConfig(k=3, candidate_cap=2))


def test_anonymize_from_files():
    result = anonymize(
        "tests/data/table1/records.csv",
        "tests/data/table1/constraints.yml",
        schema="tests/data/table1/schema.yml",
        k=2,
        strategy="MaxFanout",
        integrate_exhaustive=True,
    )
    assert result
    assert is_k_anonymous(result.relation, 2)


def test_anonymize_runs_diva(table1, sigmas):
    cfg = DivaConfig(k=2, strategy=Strategy(StrategyKind.MIN_CHOICE, 3), kmember_seed=3, candidate_cap=500)
    assert anonymize(table1, sigmas, k=2, seed=3, candidate_cap=500) == diva(table1, sigmas, cfg)


def test_fewer_tuples_than_k(table1):
    lone = table1.restrict([1])
    assert isinstance(diva(lone, [], DivaConfig(k=2)), Unsatisfiable)
    assert not decide(lone, [], 2)
    assert diva(table1.restrict([]), [], DivaConfig(k=2)).relation == table1.restrict([])


def test_cluster_window_can_favor_larger_k():
    rows = [("a0", "b0", "c0", "s0")] * 3 + [("a0", "b1", "c0", "s1")]
    r = Relation.from_rows(SCHEMA, rows)
    sigma_set = [DiversityConstraint.of("A", "a0", 4, 4), DiversityConstraint.of("B", "b0", 0, 0)]
    assert not decide(r, sigma_set, 2)
    assert decide(r, sigma_set, 3)


@settings(max_examples=200, deadline=None)
@given(st.randoms(use_true_random=False))
def test_decide_is_monotone_in_k_under_lower_bounds(rnd):
    r, sigma_set, _ = random_instance(rnd, bounded=False)
    verdicts = []
    for k in (2, 3, 4):
        try:
            verdicts.append(decide(r, sigma_set, k, cap=2000))
        except SearchBudgetExceededError:
            reject()
    assert verdicts == sorted(verdicts, reverse=True)


@settings(max_examples=200, deadline=None)
@given(st.randoms(use_true_random=False))
def test_strategies_agree(rnd):
    r, sigma_set, k = random_instance(rnd)
    if search_space(r, sigma_set, k) > 5000:
        reject()
    verdicts = {decide(r, sigma_set, k, Strategy(kind, rng_seed=rnd.randrange(100))) for kind in StrategyKind}
    assert len(verdicts) == 1


@settings(max_examples=1000, deadline=None)
@given(st.randoms(use_true_random=False))
def test_diva_outcome_is_valid(rnd):
    r, sigma_set, k = random_instance(rnd, max_rows=200, max_constraints=2, domain=6)
    try:
        outcome = diva(r, sigma_set, DivaConfig(k=k, candidate_cap=200))
    except SearchBudgetExceededError:
        return
    except UnsatisfiableConstraintsError:
        assert not is_satisfiable(sigma_set)
        return
    if not outcome:
        assert not decide(r, sigma_set, k, cap=200)
        return
    assert len(outcome.relation) == len(r)
    assert is_suppression_of(r, outcome.relation)
    assert is_k_anonymous(outcome.relation, k)
    assert validate_all(outcome.relation, sigma_set)


def test_medical_example():
    constraints = read_constraints("examples/medical/constraints.yml")
    result = anonymize(
        "examples/medical/records.csv", constraints, schema="examples/medical/schema.yml", k=2, seed=4
    )
    assert result
    assert len(result.relation) == 20
    assert is_k_anonymous(result.relation, 2)
    assert validate_all(result.relation, constraints)


def test_fifty_thousand_rows():
    spec = SynthSpec(
        50_000,
        qi=(
            AttributeSpec("A", ("a1", "a2")),
            AttributeSpec("B", ("b1", "b2", "b3", "b4")),
            AttributeSpec("C", tuple(f"c{i}" for i in range(2500))),
        ),
        sensitive=(AttributeSpec("S", ("s1", "s2", "s3")),),
        seed=5,
    )
    r = synth_generate(spec)
    sigma_set = generate_constraints(r, GeneratorSpec("proportion", ("A", "B")), 20)
    assert len(sigma_set) == 8
    result = diva(r, sigma_set, DivaConfig(k=20, strategy="min-choice"))
    assert result
    assert len(result.relation) == 50_000
    assert is_k_anonymous(result.relation, 20)
    assert validate_all(result.relation, sigma_set)
