import random
from fractions import Fraction as F

import pytest

from ccbp.algorithms import first_fit, next_fit, worst_fit
from ccbp.analysis import (
    WEIGHT_NAMES,
    check_ceiling,
    check_floor,
    make_weight,
    opt_ceiling,
)
from ccbp.core import Instance, Item, Packing
from ccbp.generators import gen_beta04_lower, gen_ff_param_lower, gen_nf_lower, gen_wf_lower

# (name, k, t) combinations covering every weight function
CASES = [
    ("poc_general", 2, None), ("poc_general", 5, None),
    ("poc_param", 4, 2), ("poc_param", 3, 3), ("poc_param", 2, 5),
    ("nf", 2, None), ("nf", 6, None),
    ("wf", 3, None), ("wf", 6, None),
    ("beta04", 4, None), ("beta04", 7, None),
    ("wf_5_12", 4, None), ("wf_5_12", 5, None),
    ("ff_param", 5, 2), ("ff_param", 6, 3),
    ("batched_k2", 2, None), ("batched_k3", 3, None),
]


def single_bin(sizes, k, beta=None):
    inst = Instance(tuple(Item(i, F(s)) for i, s in enumerate(sizes)), k, beta)
    return Packing.from_ids(inst, [list(range(len(sizes)))])


def random_bin(rng, k, cap, den=120):
    """Feasible bin: at most k items, total <= 1, each <= cap."""
    sizes, room = [], F(1)
    for _ in range(rng.randint(1, k)):
        top = min(cap, room)
        mode = rng.random()
        if mode < 0.3:
            x = top
        elif mode < 0.4:
            x = F(0)
        else:
            x = F(rng.randint(0, int(top * den)), den)
        sizes.append(x)
        room -= x
    return sizes


def test_case_list_covers_every_weight():
    assert {c[0] for c in CASES} == set(WEIGHT_NAMES)


@pytest.mark.parametrize("name,k,t", CASES)
def test_random_optimal_bins_respect_ceiling(name, k, t):
    w = make_weight(name, k, t)
    rho = opt_ceiling(w)
    rng = random.Random(f"{name}-{k}-{t}")
    worst = F(0)
    for _ in range(10_000):
        sizes = random_bin(rng, k, w.max_size)
        weight = w.bin_weight(sizes)
        assert weight <= rho, (sizes, weight, rho)
        worst = max(worst, weight)
    assert worst > 0


@pytest.mark.parametrize(
    "name,k,t,sizes",
    [
        ("poc_general", 4, None, [F(1, 4)] * 4),
        ("poc_param", 4, 2, [F(1, 4)] * 4),
        ("poc_param", 2, 5, [F(1, 5)] * 2),
        ("nf", 3, None, [F(1, 3)] * 3),
        ("wf", 4, None, [F(3, 5), F(2, 5), 0, 0]),
        ("beta04", 5, None, [F(2, 5), F(2, 5), F(1, 5), 0, 0]),
        ("wf_5_12", 4, None, [F(2, 5), F(2, 5), F(1, 5), 0]),
        ("ff_param", 5, 2, [F(1, 2), F(1, 2), 0, 0, 0]),
        ("batched_k2", 2, None, [F(3, 5), F(2, 5)]),
        ("batched_k3", 3, None, [F(3, 5), F(2, 5), 0]),
    ],
)
def test_ceiling_is_attained(name, k, t, sizes):
    w = make_weight(name, k, t)
    assert w.bin_weight([F(s) for s in sizes]) == opt_ceiling(w)


def test_frozen_values():
    assert make_weight("poc_general", 3)(F(1, 2)) == 1
    assert opt_ceiling(make_weight("nf", 4)) == F(5, 2)
    assert opt_ceiling(make_weight("wf_5_12", 4)) == F(11, 6)
    w = make_weight("poc_param", 2, 5)
    assert {w(F(0)), w(F(1, 5))} == {F(2, 3)}
    # the jump above 1/2 is exactly 1/k
    assert make_weight("wf", 4)(F(1, 2)) == F(3, 4)
    assert make_weight("wf", 4)(F(51, 100)) == F(101, 100)


def test_check_ceiling_exact_report():
    rep = check_ceiling(single_bin(["1/2", "3/10", "1/5"], 3), make_weight("poc_general", 3))
    assert rep.per_bin == (F(5, 2),) and rep.rho == F(5, 2) and rep.passed


def test_check_ceiling_detects_excess():
    rep = check_ceiling(single_bin(["1/2", "1/2"], 2), make_weight("nf", 2), rho=F(1))
    assert not rep.passed


def test_domain_errors():
    with pytest.raises(ValueError):
        check_ceiling(single_bin(["1/4"], 4), make_weight("beta04", 4))
    with pytest.raises(ValueError):
        make_weight("beta04", 4)(F(1, 2))
    with pytest.raises(ValueError):
        make_weight("wf_5_12", 6)
    with pytest.raises(ValueError):
        make_weight("nope", 3)


@pytest.mark.parametrize(
    "scenario,packer,weight",
    [
        (gen_nf_lower(4, 8), next_fit, "nf"),
        (gen_nf_lower(2, 4), next_fit, "nf"),
        (gen_wf_lower(4, 8), worst_fit, "wf"),
        (gen_wf_lower(3, 9), worst_fit, "wf"),
        (gen_beta04_lower(4, 4, 2), next_fit, "beta04"),
        (gen_beta04_lower(4, 4, 2), worst_fit, "beta04"),
        (gen_ff_param_lower(5, 2, 10), first_fit, "ff_param"),
    ],
    ids=["nf-k4", "nf-k2", "wf-k4", "wf-k3", "beta04-nf", "beta04-wf", "ff-param"],
)
def test_weight_argument_on_generated_scenarios(scenario, packer, weight):
    inst = scenario.instance
    w = make_weight(weight, inst.k, inst.t if inst.beta is not None else None)
    assert check_ceiling(scenario.opt_cert.upper, w).passed
    floor = check_floor(packer(inst), w)
    assert floor.passed
