from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ccbp.algorithms import first_fit
from ccbp.core import Instance, Item, Packing, lower_bound, validate_packing
from ccbp.exact import (
    REPACK_Q3_CONSTANT,
    SolveError,
    batched_cost,
    brute_force,
    certify,
    classify_bin,
    clustered_cost,
    optimal,
    repack_batched,
    repack_bound,
)
from ccbp.generators import gen_batched, gen_poc_general, gen_poc_parametric


def make(sizes, k, clusters=None, batches=None):
    return Instance(
        tuple(
            Item(i, F(s), None if clusters is None else clusters[i], None if batches is None else batches[i])
            for i, s in enumerate(sizes)
        ),
        k,
    )


GAP = ["4/5", "3/10", "3/10", "1/5", "1/5", "1/10"]


def small_instances(n_max=8, k_values=(2, 3, 4)):
    return st.builds(
        lambda sizes, k: make([F(s, 24) for s in sizes], k),
        st.lists(st.integers(0, 24), max_size=n_max),
        st.sampled_from(k_values),
    )


class TestOptimal:
    def test_five_items_k2(self):
        cert = optimal(make(["3/10"] * 5, 2))
        assert cert.cost == 3 and cert.exact

    def test_halves(self):
        assert optimal(make(["1/2"] * 5, 2)).cost == 3

    def test_single_full_item(self):
        assert optimal(make([1], 3)).cost == 1

    def test_needs_search(self):
        # every bound says 2; two bins would need 4/5 plus two items summing to <= 1/5
        inst = make(GAP, 3)
        assert lower_bound(inst)[0] == 2
        cert = optimal(inst)
        assert cert.cost == brute_force(inst) == 3
        assert cert.exact and cert.lower_kind == "exhaustive"

    def test_k2_uses_matching(self):
        cert = optimal(make(["1/2", "1/2", "3/5", "2/5", "9/10"], 2))
        assert (cert.cost, cert.lower_kind) == (3, "matching_bound")

    def test_node_limit_may_leave_inexact(self):
        # 26 items over the exactness limit: still a valid packing with a sound lower bound
        sizes = [F(1, 3) + F(j, 1000) for j in range(13)] + [F(1, 3) - F(j, 1000) for j in range(13)]
        inst = make(sizes, 3)
        cert = optimal(inst, node_limit=50)
        assert validate_packing(inst, cert.upper).valid
        assert cert.lower <= cert.cost

    @settings(max_examples=300, deadline=None)
    @given(small_instances())
    def test_matches_brute_force(self, inst):
        cert = optimal(inst)
        assert validate_packing(inst, cert.upper).valid
        assert cert.exact
        assert cert.cost == brute_force(inst)
        assert lower_bound(inst)[0] <= cert.cost


class TestBruteForce:
    def test_examples(self):
        assert brute_force(make([], 3)) == 0
        assert brute_force(make(["1/2"] * 3, 3)) == 2
        assert brute_force(make([0] * 4, 2)) == 2

    def test_too_large(self):
        with pytest.raises(SolveError):
            brute_force(make([0] * 11, 2))


class TestCertify:
    def test_closes_gap_by_search(self):
        inst = make(GAP, 3)
        cert = certify(first_fit(inst))
        assert cert.exact and cert.lower_kind == "exhaustive"

    def test_suboptimal_packing_stays_inexact(self):
        inst = make(["1/4"] * 4, 4)
        cert = certify(Packing.from_ids(inst, [[0], [1], [2], [3]]))
        assert (cert.lower, cert.cost, cert.exact) == (1, 4, False)


class TestSeparated:
    def test_poc_general_small(self):
        assert clustered_cost(gen_poc_general(3, 4).instance).total == 38

    def test_poc_parametric_small(self):
        assert clustered_cost(gen_poc_parametric(2, 3, 1).instance).total == 4

    def test_inadmissible_flagged(self):
        sep = clustered_cost(make([1, 1], 2, clusters=[1, 2]))
        assert sep.total == 2 and sep.inadmissible == (1, 2)

    def test_batched_examples(self):
        assert batched_cost(gen_batched(4, 8, 2).instance).total == 14
        assert batched_cost(gen_batched(4, 8, 3).instance).total == 16

    def test_single_batch_equals_optimal(self):
        inst = make(["1/2", "2/5", "3/10", "3/5"], 3, batches=[1] * 4)
        assert batched_cost(inst).total == optimal(inst).cost

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.tuples(st.integers(0, 12), st.integers(1, 3)), min_size=1, max_size=10), st.integers(2, 4))
    def test_separation_never_helps(self, rows, k):
        inst = make([F(s, 12) for s, _ in rows], k, clusters=[c for _, c in rows])
        assert clustered_cost(inst).total >= optimal(inst).cost


class TestRepack:
    def test_x_classification(self):
        inst = make(["3/5", "1/5", "1/10"], 3, batches=[1, 2, 2])
        assert classify_bin(inst, [0, 1, 2]) == "X2"

    def test_y_and_z(self):
        inst = make(["3/5", "1/5", "1/2"], 3, batches=[1, 2, 2])
        assert classify_bin(inst, [0, 1]) == "Y2"
        assert classify_bin(inst, [2]) == "Z"

    def test_all_single_batch_is_copied(self):
        inst = make(["1/2", "1/2", "1/3"], 3, batches=[1, 1, 2])
        opt = Packing.from_ids(inst, [[0, 1], [2]])
        assert repack_batched(opt, 2).id_lists() == [[0, 1], [2]]

    @pytest.mark.parametrize("q", [2, 3])
    def test_generated_instance(self, q):
        sc = gen_batched(4, 8, q)
        rep = repack_batched(sc.opt_cert.upper, q)
        assert validate_packing(sc.instance, rep).valid
        assert batched_cost(sc.instance).total <= len(rep) <= repack_bound(q, 4, 8)

    def test_bound_values(self):
        assert repack_bound(2, 4, 8) == 17
        assert repack_bound(3, 4, 8) == F(5, 2) * 8 - 4 + REPACK_Q3_CONSTANT

    def test_errors(self):
        inst = make(["1/2", "1/2"], 2, batches=[1, 2])
        with pytest.raises(ValueError):
            repack_batched(Packing.from_ids(inst, [[0, 1]]), 2)
        inst = make(["1/2", "1/2"], 3, batches=[1, 3])
        with pytest.raises(ValueError):
            repack_batched(Packing.from_ids(inst, [[0, 1]]), 2)
        inst = make(["3/5", "3/5"], 3, batches=[1, 2])
        with pytest.raises(ValueError):
            repack_batched(Packing.from_ids(inst, [[0, 1]]), 2)

    @settings(max_examples=300, deadline=None)
    @given(
        st.lists(st.tuples(st.integers(0, 24), st.integers(1, 3)), min_size=1, max_size=12),
        st.sampled_from([2, 3]),
        st.integers(3, 8),
        st.booleans(),
    )
    def test_repack_property(self, rows, q, k, use_first_fit):
        k = max(k, q + 1)
        inst = make([F(s, 24) for s, _ in rows], k, batches=[min(b, q) for _, b in rows])
        base = first_fit(inst) if use_first_fit else optimal(inst).upper
        rep = repack_batched(base, q)
        assert validate_packing(inst, rep).valid
        for b in rep.bins:
            assert len({inst.by_id[i].batch for i in b.item_ids}) == 1
        assert len(rep) <= repack_bound(q, k, len(base))
