"""Weight functions and mechanical checks of the two-sided weight argument.

A weight function w maps item sizes to weights.  If every bin of an optimal
packing weighs at most rho, and an algorithm's bins weigh at least one each
on average (up to an additive slack), then ALG <= rho * OPT + slack.
``check_ceiling`` verifies the first half on a concrete packing and
``check_floor`` the second.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .core import HALF, ONE, ZERO, Packing

F = Fraction


@dataclass(frozen=True)
class Piece:
    lo: Fraction
    hi: Fraction
    slope: Fraction
    intercept: Fraction
    lo_closed: bool = False
    hi_closed: bool = True

    def contains(self, x: Fraction) -> bool:
        above = x >= self.lo if self.lo_closed else x > self.lo
        below = x <= self.hi if self.hi_closed else x < self.hi
        return above and below


@dataclass(frozen=True)
class WeightFunction:
    name: str
    pieces: tuple[Piece, ...]
    k: int
    t: int | None = None
    # largest size the function is meant for; below 1 the instance must carry
    # a matching beta
    max_size: Fraction = ONE

    def __call__(self, x: Fraction) -> Fraction:
        for p in self.pieces:
            if p.contains(x):
                return p.slope * x + p.intercept
        raise ValueError(f"{self.name}: size {x} outside the domain")

    def bin_weight(self, sizes) -> Fraction:
        return sum((self(x) for x in sizes), ZERO)


def _linear(slope, intercept, hi=ONE) -> tuple[Piece, ...]:
    return (Piece(ZERO, hi, F(slope), F(intercept), lo_closed=True),)


WEIGHT_NAMES = (
    "poc_general", "poc_param", "nf", "wf", "beta04", "wf_5_12", "ff_param", "batched_k2", "batched_k3",
)


def make_weight(name: str, k: int, t: int | None = None) -> WeightFunction:
    """Build one of the named weight functions for cardinality k (and t)."""
    if k < 2:
        raise ValueError("k must be >= 2")
    if name == "poc_general":
        return WeightFunction(name, _linear(F(2 * k - 2, k + 1), F(2, k + 1)), k)
    if name == "poc_param":
        if t is None or t < 2:
            raise ValueError("poc_param needs t >= 2")
        slope = F(2 * k - 2 * t, k + 1) if k >= t else ZERO
        return WeightFunction(name, _linear(slope, F(2, k + 1)), k, t, F(1, t))
    if name == "nf":
        return WeightFunction(name, _linear(F(2 * (k - 1), k), F(1, k)), k)
    if name == "wf":
        slope = F(2 * (k - 2), k)
        pieces = (
            Piece(ZERO, HALF, slope, F(1, k), lo_closed=True),
            Piece(HALF, ONE, slope, F(2, k)),
        )
        return WeightFunction(name, pieces, k)
    if name == "beta04":
        if k < 4:
            raise ValueError("beta04 needs k >= 4")
        return WeightFunction(name, _linear(F(5 * (k - 2), 3 * k), F(1, k), F(2, 5)), k, 2, F(2, 5))
    if name == "wf_5_12":
        if k not in (4, 5):
            raise ValueError("wf_5_12 is stated for k in {4, 5}")
        cap = F(5, 12)
        pieces = (
            Piece(ZERO, F(1, 6), ZERO, F(1, k), lo_closed=True),
            Piece(F(1, 6), F(1, 3), ZERO, F(1, k) + F(k - 2, 3 * k)),
            Piece(F(1, 3), cap, ZERO, F(1, k) + F(2 * (k - 2), 3 * k)),
        )
        return WeightFunction(name, pieces, k, 2, cap)
    if name == "ff_param":
        if t is None or t < 2 or k < t:
            raise ValueError("ff_param needs t >= 2 and k >= t")
        slope = F(k - t, k) * F(t + 1, t)
        return WeightFunction(name, _linear(slope, F(1, k), F(1, t)), k, t, F(1, t))
    if name == "batched_k2":
        pieces = (Piece(ZERO, HALF, ZERO, HALF, lo_closed=True), Piece(HALF, ONE, ZERO, ONE))
        return WeightFunction(name, pieces, k)
    if name == "batched_k3":
        pieces = (
            Piece(ZERO, F(1, 3), ZERO, F(1, 3), lo_closed=True),
            Piece(F(1, 3), HALF, ZERO, HALF),
            Piece(HALF, ONE, ZERO, ONE),
        )
        return WeightFunction(name, pieces, k)
    raise ValueError(f"unknown weight function {name!r}")


def opt_ceiling(w: WeightFunction) -> Fraction:
    """Largest weight a feasible bin can carry under ``w`` (closed form)."""
    k, t = w.k, w.t
    if w.name == "poc_general":
        return F(4 * k - 2, k + 1)
    if w.name == "poc_param":
        return F(4 * k - 2 * t, k + 1) if k >= t else F(2 * k, k + 1)
    if w.name == "nf":
        return F(3 * k - 2, k)
    if w.name == "wf":
        return F(3 * k - 3, k)
    if w.name in ("beta04", "wf_5_12"):
        return F(8, 3) - F(10, 3 * k)
    if w.name == "ff_param":
        return 1 + F((k - t) * (t + 1), k * t)
    if w.name == "batched_k2":
        return F(3, 2)
    if w.name == "batched_k3":
        return F(11, 6)
    raise ValueError(f"no ceiling for {w.name!r}")


# Additive slack of the algorithm-side bound: bins allowed to weigh less than 1.
DEFAULT_SLACK = {
    "poc_general": 0,
    "poc_param": 0,
    "nf": 1,
    "wf": 1,
    "beta04": 1,
    "wf_5_12": 2,
    "ff_param": 2,
}


@dataclass(frozen=True)
class WeightReport:
    rho: Fraction | None
    floor_slack: Fraction | None
    per_bin: tuple[Fraction, ...]
    passed: bool

    @property
    def total(self) -> Fraction:
        return sum(self.per_bin, ZERO)


def _check_domain(packing: Packing, w: WeightFunction) -> None:
    inst = packing.instance
    if inst.d != 1:
        raise ValueError("weight functions apply to d = 1 instances")
    if w.max_size < ONE and (inst.beta is None or inst.beta > w.max_size):
        raise ValueError(f"{w.name} needs an instance with beta <= {w.max_size}, got {inst.beta}")


def bin_weights(packing: Packing, w: WeightFunction) -> tuple[Fraction, ...]:
    _check_domain(packing, w)
    return tuple(w.bin_weight(packing.sizes(b)) for b in packing.bins)


def check_ceiling(packing: Packing, w: WeightFunction, rho: Fraction | None = None) -> WeightReport:
    """Every bin weighs at most rho (defaults to ``opt_ceiling(w)``)."""
    rho = opt_ceiling(w) if rho is None else F(rho)
    per_bin = bin_weights(packing, w)
    return WeightReport(rho, None, per_bin, all(x <= rho for x in per_bin))


def check_floor(packing: Packing, w: WeightFunction, slack=None) -> WeightReport:
    """Total weight is at least (number of bins - slack)."""
    slack = F(DEFAULT_SLACK[w.name] if slack is None else slack)
    per_bin = bin_weights(packing, w)
    return WeightReport(None, slack, per_bin, sum(per_bin, ZERO) >= len(per_bin) - slack)
