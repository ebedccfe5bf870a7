import pytest
from hypothesis import given, settings, strategies as st
from diva.errors import StructuralError
from diva.kmember import anonymize_kmember
from diva.metrics import (
    accuracy_ratio,
    build_report,
    conflict_rate,
    discernibility,
    estimate_published,
    pairwise_conflict,
    reference_anonymization,
)
from diva.parsing import read_constraints, read_relation
from diva.relation import Clustering, Relation, information_loss, is_k_anonymous, qi_groups, suppress
from tests.oracle import random_constraint, random_relation


##############
## FIXTURES ##
##############


@pytest.fixture(scope="session")
def table1():
    return read_relation("tests/data/table1/records.csv", "tests/data/table1/schema.json")


@pytest.fixture(scope="session")
def table1b():
    return read_relation("tests/data/table1/table1b.csv", "tests/data/table1/schema.json", allow_suppressed=True)


@pytest.fixture(scope="session")
def table1c():
    return read_relation("tests/data/table1/table1c.csv", "tests/data/table1/schema.json", allow_suppressed=True)


@pytest.fixture(scope="session")
def sigmas():
    return read_constraints("tests/data/table1/constraints.json")


###########
## TESTS ##
###########


def test_discernibility_of_table1c(table1c):
    disc, normalized = discernibility(table1c, 2)
    assert disc == 20
    assert normalized == pytest.approx(0.2)


def test_discernibility_of_table1b(table1b):
    disc, normalized = discernibility(table1b, 3)
    assert disc == 34
    assert normalized == pytest.approx(0.34)


def test_discernibility_penalizes_fully_suppressed_groups(table1):
    anon = suppress(table1, Clustering.of(table1.ids))
    assert discernibility(anon, 2) == (100, 1.0)


def test_discernibility_penalizes_small_groups(table1, table1c):
    assert discernibility(table1, 2) == (100, 1.0)
    assert discernibility(table1c, 3) == (100, 1.0)


def test_discernibility_of_empty_relation(table1):
    assert discernibility(table1.restrict([]), 2) == (0, 0.0)


def test_pairwise_conflict(table1, sigmas):
    sigma1, sigma2, sigma3 = sigmas
    assert pairwise_conflict(table1, sigma1, sigma2) == 0
    assert pairwise_conflict(table1, sigma1, sigma3) == pytest.approx(0.4)
    assert pairwise_conflict(table1, sigma2, sigma3) == pytest.approx(0.2)


def test_conflict_rate(table1, sigmas):
    assert conflict_rate(table1, sigmas) == pytest.approx(0.2)
    assert conflict_rate(table1, list(sigmas)[:1]) is None
    assert conflict_rate(table1, []) is None


def test_estimate_published(table1, table1c):
    assert estimate_published(table1) == 0
    assert estimate_published(table1c) == 5


def test_reference_anonymization_is_exhaustive_on_small_inputs(table1):
    r = table1.restrict(range(1, 9))
    reference = reference_anonymization(r, 2)
    assert is_k_anonymous(reference, 2)
    candidate = suppress(r, anonymize_kmember(r, 2))
    assert accuracy_ratio(candidate, reference, 2) <= 1.0


def test_reference_anonymization_samples_large_inputs(table1):
    reference = reference_anonymization(table1, 2, budget=50, seed=4)
    assert len(reference) == len(table1)
    assert is_k_anonymous(reference, 2)


def test_accuracy_ratio(table1b, table1c):
    assert accuracy_ratio(table1c, table1c, 2) == 1.0
    assert accuracy_ratio(table1b, table1c, 2) == pytest.approx(0.2 / 0.34)
    with pytest.raises(StructuralError):
        accuracy_ratio(table1c, table1c.restrict([1, 2]), 2)


def test_report(table1c, sigmas):
    report = build_report(table1c, sigmas, 2).to_dict()
    assert report["disc"] == 20
    assert report["info_loss"] == 26
    assert report["n_groups"] == 5
    asian, african, vancouver = report["constraints"]
    assert asian == {"attrs": ["ETH"], "values": ["Asian"], "lo": 2, "hi": 5, "count": 2, "satisfied": True}
    assert (african["count"], african["hi"], african["satisfied"]) == (2, 3, True)
    assert (vancouver["count"], vancouver["hi"], vancouver["satisfied"]) == (2, 4, True)


@settings(max_examples=300, deadline=None)
@given(st.randoms(use_true_random=False))
def test_merging_clusters_never_lowers_information_loss(rnd):
    r = random_relation(rnd, max_rows=12)
    if len(r) < 2:
        return
    ids = list(r.ids)
    rnd.shuffle(ids)
    cuts = sorted(rnd.sample(range(1, len(ids)), rnd.randint(1, min(4, len(ids) - 1))))
    blocks = [ids[i:j] for i, j in zip([0] + cuts, cuts + [len(ids)])]
    a, b = rnd.sample(range(len(blocks)), 2)
    merged = [block for i, block in enumerate(blocks) if i not in (a, b)] + [blocks[a] + blocks[b]]
    before = information_loss(suppress(r, Clustering.of(*blocks)))
    assert before <= information_loss(suppress(r, Clustering.of(*merged)))


@settings(max_examples=300, deadline=None)
@given(st.randoms(use_true_random=False))
def test_conflict_rate_ignores_order_and_ids(rnd):
    r = random_relation(rnd, max_rows=12)
    sigma_set = [random_constraint(rnd) for _ in range(rnd.randint(2, 4))]
    first, second = sigma_set[:2]
    assert pairwise_conflict(r, first, second) == pairwise_conflict(r, second, first)
    rows = list(r.rows)
    rnd.shuffle(rows)
    relabeled = Relation.from_rows(r.schema, rows, start=rnd.randint(2, 1000))
    shuffled = list(sigma_set)
    rnd.shuffle(shuffled)
    assert conflict_rate(relabeled, shuffled) == pytest.approx(conflict_rate(r, sigma_set))


@settings(max_examples=300, deadline=None)
@given(st.randoms(use_true_random=False))
def test_starring_whole_groups_never_lowers_discernibility(rnd):
    r = random_relation(rnd, max_rows=12)
    k = rnd.choice([2, 3])
    anon = suppress(r, anonymize_kmember(r, k, seed=rnd.randrange(10)))
    groups = qi_groups(anon)
    if not groups:
        return
    chosen = rnd.sample(groups, rnd.randint(1, len(groups)))
    starred = anon.suppress_cells(frozenset().union(*chosen), anon.schema.qi)
    assert discernibility(starred, k)[0] >= discernibility(anon, k)[0]
