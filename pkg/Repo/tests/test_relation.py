import pytest
from diva.errors import SchemaError, StructuralError
from diva.parsing import read_relation
from diva.relation import (
    SUPPRESSED,
    Clustering,
    Relation,
    Schema,
    cluster_cost,
    information_loss,
    is_k_anonymous,
    is_suppression_of,
    qi_groups,
    suppress,
)


##############
## FIXTURES ##
##############


@pytest.fixture(scope="session")
def table1():
    return read_relation("tests/data/table1/records.csv", "tests/data/table1/schema.json")


@pytest.fixture(scope="session")
def table1c():
    return read_relation("tests/data/table1/table1c.csv", "tests/data/table1/schema.json", allow_suppressed=True)


@pytest.fixture(scope="session")
def table1b():
    return read_relation("tests/data/table1/table1b.csv", "tests/data/table1/schema.json", allow_suppressed=True)


###########
## TESTS ##
###########


def test_schema_rejects_overlapping_roles():
    with pytest.raises(SchemaError):
        Schema(("A", "B"), qi=("A",), sensitive=("A",))


def test_schema_rejects_unknown_attributes():
    with pytest.raises(SchemaError):
        Schema(("A", "B"), qi=("C",))


def test_relation_rejects_suppressed_sensitive_cell():
    schema = Schema(("A", "S"), qi=("A",), sensitive=("S",))
    with pytest.raises(StructuralError):
        Relation.from_rows(schema, [("a", SUPPRESSED)])


def test_relation_rejects_ragged_rows():
    schema = Schema(("A", "S"), qi=("A",), sensitive=("S",))
    with pytest.raises(StructuralError):
        Relation.from_rows(schema, [("a",)])


def test_clustering_rejects_overlap():
    with pytest.raises(StructuralError):
        Clustering.of({1, 2}, {2, 3})


def test_qi_groups_all_distinct(table1):
    groups = qi_groups(table1)
    assert len(groups) == 10
    assert all(len(g) == 1 for g in groups)


def test_qi_groups_of_table1c(table1c):
    groups = qi_groups(table1c)
    assert sorted(sorted(g) for g in groups) == [[1, 2], [3, 4], [5, 6], [7, 8], [9, 10]]


def test_qi_groups_of_empty_relation(table1):
    assert qi_groups(table1.restrict([])) == []


def test_is_k_anonymous(table1, table1b, table1c):
    assert is_k_anonymous(table1c, 2)
    assert not is_k_anonymous(table1c, 3)
    assert is_k_anonymous(table1b, 3)
    assert is_k_anonymous(table1, 1)
    assert not is_k_anonymous(table1, 2)


def test_is_k_anonymous_rejects_k_zero(table1):
    with pytest.raises(ValueError):
        is_k_anonymous(table1, 0)


def test_suppress_reproduces_table1c(table1, table1c):
    s = Clustering.of({1, 2}, {3, 4}, {5, 6}, {7, 8}, {9, 10})
    assert suppress(table1, s) == table1c


def test_suppress_returns_covered_tuples_only(table1):
    anon = suppress(table1, Clustering.of({5, 6}))
    assert anon.ids == (5, 6)
    assert anon.row(5) == ("Male", "African", SUPPRESSED, SUPPRESSED, SUPPRESSED, "Hypertension")
    assert anon.row(6)[-1] == "Seizure"


def test_suppress_empty_clustering(table1):
    assert len(suppress(table1, Clustering())) == 0


def test_suppress_rejects_unknown_tuples(table1):
    with pytest.raises(StructuralError):
        suppress(table1, Clustering.of({1, 42}))


def test_suppress_keeps_identical_tuples():
    schema = Schema(("A", "B"), qi=("A", "B"))
    r = Relation.from_rows(schema, [("x", "y")] * 3)
    assert information_loss(suppress(r, Clustering.of(r.ids))) == 0


def test_information_loss(table1, table1b, table1c):
    assert information_loss(table1) == 0
    assert information_loss(table1c) == 26
    assert information_loss(table1b) == 31


def test_cluster_cost_matches_suppression(table1):
    assert cluster_cost(table1, {1, 2}) == 2
    assert cluster_cost(table1, {3, 4}) == 6
    assert cluster_cost(table1, {7, 8}) == information_loss(suppress(table1, Clustering.of({7, 8})))


def test_is_suppression_of(table1, table1b, table1c):
    assert is_suppression_of(table1, table1c)
    assert is_suppression_of(table1, table1b)
    assert is_suppression_of(table1, table1)
    assert not is_suppression_of(table1c, table1)


def test_is_suppression_of_rejects_changed_sensitive_value(table1):
    rows = list(table1.rows)
    rows[0] = rows[0][:-1] + ("Influenza",)
    changed = Relation(table1.schema, table1.ids, tuple(rows))
    assert not is_suppression_of(table1, changed)


def test_is_suppression_of_requires_same_ids(table1):
    with pytest.raises(StructuralError):
        is_suppression_of(table1, table1.without([1]))


def test_restrict_and_union(table1):
    left = table1.restrict([3, 1])
    right = table1.without([1, 3])
    assert left.ids == (1, 3)
    assert left.union(right) == table1
    with pytest.raises(StructuralError):
        left.union(left)
