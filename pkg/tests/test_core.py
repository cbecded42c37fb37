from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ccbp.core import (
    Instance,
    InstanceError,
    Item,
    OptCertificate,
    Packing,
    StructuralError,
    format_rational,
    lower_bound,
    lower_bounds,
    parse_instance,
    parse_rational,
    serialize_instance,
    split_by,
    validate_packing,
)


def make(sizes, k, beta=None, clusters=None, batches=None):
    items = tuple(
        Item(i, F(s), None if clusters is None else clusters[i], None if batches is None else batches[i])
        for i, s in enumerate(sizes)
    )
    return Instance(items, k, beta)


class TestRationals:
    def test_parse_forms(self):
        assert parse_rational("3/10") == F(3, 10)
        assert parse_rational(" 2 ") == F(2)

    @pytest.mark.parametrize("bad", ["0.5", "1/0", "a", ""])
    def test_parse_rejects(self, bad):
        with pytest.raises(InstanceError):
            parse_rational(bad)

    def test_format_always_fraction(self):
        assert format_rational(F(2)) == "2/1"
        assert format_rational(F(49, 20)) == "49/20"

    def test_float_refused(self):
        with pytest.raises(InstanceError):
            Item(0, 0.5)


class TestInstance:
    def test_size_above_one(self):
        with pytest.raises(InstanceError):
            make([F(3, 2)], 2)

    def test_beta_enforced(self):
        with pytest.raises(InstanceError):
            make([F(1, 2)], 2, beta=F(2, 5))

    def test_duplicate_ids(self):
        with pytest.raises(InstanceError):
            Instance((Item(0, F(1, 2)), Item(0, F(1, 4))), 2)

    def test_t(self):
        assert make([F(1, 5)], 3, beta=F(2, 5)).t == 2

    def test_vector_item_size_is_max_component(self):
        it = Item.vector(0, (F(1, 4), F(3, 4)))
        assert it.size == F(3, 4) and it.vec == (F(1, 4), F(3, 4))


class TestValidate:
    def test_valid(self):
        inst = make(["1/2", "1/2", "1/3"], 2)
        assert validate_packing(inst, Packing.from_ids(inst, [[0, 1], [2]])).valid

    def test_overload_and_overcount(self):
        inst = make(["3/5", "1/2", "0", "0"], 2)
        rep = validate_packing(inst, Packing.from_ids(inst, [[0, 1], [2, 3]]))
        assert [v.kind for v in rep.violations] == ["overload"]
        rep = validate_packing(inst, Packing.from_ids(inst, [[0], [1, 2, 3]]))
        assert [v.kind for v in rep.violations] == ["overcount"]

    def test_missing_duplicate_empty(self):
        inst = make(["1/4", "1/4"], 2)
        rep = validate_packing(inst, Packing.from_ids(inst, [[0], [0], []]))
        assert sorted(v.kind for v in rep.violations) == ["duplicate", "empty", "missing"]

    def test_unknown_id_is_structural(self):
        inst = make(["1/4"], 2)
        with pytest.raises(StructuralError):
            Packing.from_ids(inst, [[7]])


class TestLowerBounds:
    def test_values(self):
        inst = make(["3/5", "3/5", "3/5", "1/5"], 3)
        lb = lower_bounds(inst)
        assert lb["size_bound"] == 2
        assert lb["cardinality_bound"] == 2
        assert lb["big_item_bound"] == 3
        assert lower_bound(inst) == (3, "big_item_bound")

    def test_cardinality_dominates_zeros(self):
        assert lower_bound(make(["0"] * 7, 3)) == (3, "cardinality_bound")

    def test_empty(self):
        assert lower_bound(make([], 3))[0] == 0

    def test_certificate_rejects_bad_lower(self):
        inst = make(["1/2"], 2)
        p = Packing.from_ids(inst, [[0]])
        with pytest.raises(ValueError):
            OptCertificate(p, 2, "size_bound")
        with pytest.raises(ValueError):
            OptCertificate(p, 1, "guess")


class TestSplitAndFormat:
    def test_split_keeps_labels(self):
        inst = make(["1/2", "1/3", "1/4"], 2, clusters=[2, 1, 2])
        parts = split_by(inst, "cluster")
        assert [[it.id for it in p.items] for p in parts] == [[1], [0, 2]]

    def test_split_missing_label(self):
        with pytest.raises(InstanceError):
            split_by(make(["1/2"], 2), "batch")

    def test_parse_example(self):
        text = "# demo\nk=3 beta=1/2\n0 1/2,1\n1 1/3,1,2   # trailing\n2 0,,1\n"
        inst = parse_instance(text)
        assert inst.k == 3 and inst.beta == F(1, 2)
        assert [(it.cluster, it.batch) for it in inst.items] == [(1, None), (1, 2), (None, 1)]

    def test_parse_rejects_gap_in_labels(self):
        with pytest.raises(InstanceError):
            parse_instance("k=2\n0 1/2,1\n1 1/2,3\n")

    def test_parse_vector(self):
        inst = parse_instance("k=2 d=2\n0 3/4,1|1/4;3/4\n")
        assert inst.items[0].vec == (F(1, 4), F(3, 4))

    @given(
        st.lists(st.tuples(st.integers(0, 12), st.integers(1, 3), st.integers(1, 2)), min_size=1, max_size=12),
        st.integers(2, 5),
    )
    def test_roundtrip(self, rows, k):
        def dense(values):
            rank = {v: r for r, v in enumerate(sorted(set(values)), 1)}
            return [rank[v] for v in values]

        clusters = dense([c for _, c, _ in rows])
        batches = dense([b for _, _, b in rows])
        items = tuple(Item(i, F(s, 12), clusters[i], batches[i]) for i, (s, _, _) in enumerate(rows))
        inst = Instance(items, k, None)
        back = parse_instance(serialize_instance(inst))
        assert back.items == inst.items and back.k == k
