"""Certified optimal costs at desk scale.

``optimal`` is a branch and bound over item-to-bin assignments; ``brute_force``
is an independent enumeration used only to cross-check it.  The module also
computes clustered and batched optima and implements the constructive
repacking of a global optimum into batch-separated bins.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Sequence

from .core import (
    HALF,
    ONE,
    Instance,
    OptCertificate,
    Packing,
    lower_bound,
    split_by,
    validate_packing,
)

DEFAULT_LIMIT = 24
DEFAULT_NODE_LIMIT = 200_000
BRUTE_FORCE_MAX = 10

# Additive constant of repack_batched for three batches: at most one unpaired
# part per batch in the small-part pools (3 * 1/2) and at most one extra bin per
# batch in the redistribution pools (3 * 1).
REPACK_Q3_CONSTANT = Fraction(9, 2)
REPACK_Q2_CONSTANT = 3


class SolveError(ValueError):
    pass


def _scaled(instance: Instance, order: Sequence[int]) -> tuple[list[tuple[int, ...]], int]:
    """Item vectors as integers over a common denominator, in ``order``."""
    items = instance.items
    dens = [c.denominator for it in items for c in it.vec]
    den = reduce(math.lcm, dens, 1)
    vecs = [tuple(int(c * den) for c in items[i].vec) for i in order]
    return vecs, den


def _first_fit_decreasing(instance: Instance) -> list[list[int]]:
    order = sorted(range(instance.n), key=lambda i: (-sum(instance.items[i].vec), i))
    vecs, cap = _scaled(instance, order)
    dims = len(vecs[0]) if vecs else 1
    loads: list[list[int]] = []
    groups: list[list[int]] = []
    for pos, i in enumerate(order):
        v = vecs[pos]
        for b, load in enumerate(loads):
            if len(groups[b]) < instance.k and all(load[c] + v[c] <= cap for c in range(dims)):
                for c in range(dims):
                    load[c] += v[c]
                groups[b].append(instance.items[i].id)
                break
        else:
            loads.append(list(v))
            groups.append([instance.items[i].id])
    return groups


def _pair_greedy(instance: Instance) -> list[list[int]]:
    """Optimal packing for k = 2, d = 1: pair the largest item with the
    smallest whenever they fit, otherwise the largest goes alone."""
    s = sorted(instance.items, key=lambda it: (it.size, it.id))
    lo, hi = 0, len(s) - 1
    groups = []
    while lo <= hi:
        if lo < hi and s[lo].size + s[hi].size <= ONE:
            groups.append([s[hi].id, s[lo].id])
            lo += 1
        else:
            groups.append([s[hi].id])
        hi -= 1
    return groups


class _Search:
    def __init__(self, instance: Instance, best: list[list[int]], target: int, node_limit):
        self.k = instance.k
        self.n = instance.n
        self.order = sorted(range(self.n), key=lambda i: (-sum(instance.items[i].vec), i))
        self.vecs, self.cap = _scaled(instance, self.order)
        self.dims = len(self.vecs[0])
        self.ids = [instance.items[i].id for i in self.order]
        self.suffix = [[0] * self.dims for _ in range(self.n + 1)]
        for pos in range(self.n - 1, -1, -1):
            for c in range(self.dims):
                self.suffix[pos][c] = self.suffix[pos + 1][c] + self.vecs[pos][c]
        self.best_groups = best
        self.best = len(best)
        self.target = target
        self.node_limit = node_limit
        self.nodes = 0
        self.aborted = False
        self.loads: list[list[int]] = []
        self.counts: list[int] = []
        self.assign = [0] * self.n

    def run(self) -> bool:
        """Search; returns True iff optimality of ``best_groups`` is proven."""
        if self.best > self.target:
            self._rec(0)
        return not self.aborted

    def _bound(self, pos: int) -> int:
        open_bins = len(self.loads)
        extra = 0
        for c in range(self.dims):
            free = sum(self.cap - load[c] for load in self.loads)
            need = self.suffix[pos][c] - free
            if need > 0:
                extra = max(extra, -(-need // self.cap))
        slots = sum(self.k - cnt for cnt in self.counts)
        rest = self.n - pos - slots
        if rest > 0:
            extra = max(extra, -(-rest // self.k))
        return open_bins + extra

    def _record(self) -> None:
        groups: list[list[int]] = [[] for _ in self.loads]
        for pos, b in enumerate(self.assign):
            groups[b].append(self.ids[pos])
        self.best_groups = groups
        self.best = len(groups)

    def _rec(self, pos: int) -> None:
        if self.aborted or self.best <= self.target:
            return
        self.nodes += 1
        if self.node_limit is not None and self.nodes > self.node_limit:
            self.aborted = True
            return
        if pos == self.n:
            if len(self.loads) < self.best:
                self._record()
            return
        if self._bound(pos) >= self.best:
            return
        v = self.vecs[pos]
        dims, cap = self.dims, self.cap
        # identical consecutive items go to non-decreasing bin indices
        first = self.assign[pos - 1] if pos and self.vecs[pos - 1] == v else 0
        seen = set()
        for b in range(first, len(self.loads)):
            load = self.loads[b]
            if self.counts[b] >= self.k or any(load[c] + v[c] > cap for c in range(dims)):
                continue
            key = (tuple(load), self.counts[b])
            if key in seen:
                continue
            seen.add(key)
            for c in range(dims):
                load[c] += v[c]
            self.counts[b] += 1
            self.assign[pos] = b
            self._rec(pos + 1)
            for c in range(dims):
                load[c] -= v[c]
            self.counts[b] -= 1
            if self.aborted or self.best <= self.target:
                return
        if len(self.loads) + 1 < self.best:
            self.loads.append(list(v))
            self.counts.append(1)
            self.assign[pos] = len(self.loads) - 1
            self._rec(pos + 1)
            self.loads.pop()
            self.counts.pop()


def optimal(instance: Instance, limit: int = DEFAULT_LIMIT, node_limit: int = DEFAULT_NODE_LIMIT) -> OptCertificate:
    """Optimal packing with a certificate.

    Up to ``limit`` items the search runs to completion and the certificate
    is exact.  Above it the search is capped at ``node_limit`` nodes and the
    certificate may come back inexact (best packing found + lower bound).
    """
    lb, kind = lower_bound(instance)
    if instance.n == 0:
        return OptCertificate(Packing.from_ids(instance, []), 0, kind)
    if instance.d == 1 and instance.k == 2:
        groups = _pair_greedy(instance)
        return OptCertificate(Packing.from_ids(instance, groups), len(groups), "matching_bound")
    groups = _first_fit_decreasing(instance)
    if len(groups) == lb:
        return OptCertificate(Packing.from_ids(instance, groups), lb, kind)
    search = _Search(instance, groups, lb, None if instance.n <= limit else node_limit)
    proven = search.run()
    packing = Packing.from_ids(instance, search.best_groups)
    if search.best == lb:
        return OptCertificate(packing, lb, kind)
    if proven:
        return OptCertificate(packing, search.best, "exhaustive")
    return OptCertificate(packing, lb, kind)


def brute_force(instance: Instance) -> int:
    """Minimum bin count over every feasible set partition (n <= 10)."""
    if instance.n > BRUTE_FORCE_MAX:
        raise SolveError(f"brute_force handles at most {BRUTE_FORCE_MAX} items, got {instance.n}")
    vecs = [it.vec for it in instance.items]
    k = instance.k
    blocks: list[list] = []  # [load vector, count]
    best = instance.n

    def extend(i: int) -> None:
        nonlocal best
        if i == len(vecs):
            best = min(best, len(blocks))
            return
        v = vecs[i]
        for blk in blocks:
            load, cnt = blk
            if cnt < k and all(a + b <= 1 for a, b in zip(load, v)):
                blk[0] = tuple(a + b for a, b in zip(load, v))
                blk[1] = cnt + 1
                extend(i + 1)
                blk[0], blk[1] = load, cnt
        blocks.append([tuple(v), 1])
        extend(i + 1)
        blocks.pop()

    extend(0)
    return best


def certify(packing: Packing, limit: int = DEFAULT_LIMIT) -> OptCertificate:
    """Pair a known packing with the best lower bound that can be proven.

    Tries the combinatorial bounds first, then (for k = 2 or small n) a full
    solve.  If nothing closes the gap the certificate comes back inexact.
    """
    instance = packing.instance
    lb, kind = lower_bound(instance)
    cost = len(packing)
    if lb >= cost:
        return OptCertificate(packing, lb, kind)
    if (instance.d == 1 and instance.k == 2) or instance.n <= limit:
        solved = optimal(instance, limit=limit)
        if solved.exact and solved.lower > lb:
            lb, kind = solved.lower, solved.lower_kind
    return OptCertificate(packing, lb, kind)


@dataclass(frozen=True)
class SeparatedCost:
    """Sum of per-group optima when groups (clusters or batches) may not share bins."""

    total: int
    certificates: dict
    inadmissible: tuple[int, ...] = ()

    @property
    def exact(self) -> bool:
        return all(c.exact for c in self.certificates.values())

    def packing(self, instance: Instance) -> Packing:
        groups = [g for c in self.certificates.values() for g in c.upper.id_lists()]
        return Packing.from_ids(instance, groups)


def _separated(instance: Instance, key: str, limit: int) -> tuple[int, dict]:
    certs = {}
    for part in split_by(instance, key):
        label = getattr(part.items[0], key)
        certs[label] = optimal(part, limit=limit)
    return sum(c.cost for c in certs.values()), certs


def clustered_cost(instance: Instance, limit: int = DEFAULT_LIMIT) -> SeparatedCost:
    """Sum of optimal costs over clusters; clusters whose optimum is a single
    bin violate the admissibility assumption and are listed in ``inadmissible``."""
    total, certs = _separated(instance, "cluster", limit)
    bad = tuple(label for label, c in certs.items() if c.cost < 2)
    return SeparatedCost(total, certs, bad)


def batched_cost(instance: Instance, limit: int = DEFAULT_LIMIT) -> SeparatedCost:
    total, certs = _separated(instance, "batch", limit)
    return SeparatedCost(total, certs)


# ---------------------------------------------------------------------------
# Constructive repacking of a global optimum into batch-separated bins.


def _parts(instance: Instance, ids) -> dict[int, list[int]]:
    parts: dict[int, list[int]] = {}
    for i in ids:
        batch = instance.by_id[i].batch
        if batch is None:
            raise ValueError(f"item {i} has no batch id")
        parts.setdefault(batch, []).append(i)
    return parts


def _size(instance: Instance, ids) -> Fraction:
    return sum((instance.by_id[i].size for i in ids), Fraction(0))


def _is_light(instance: Instance, ids, k: int) -> bool:
    """Total size at most 1/2 and at most k/2 items."""
    return _size(instance, ids) <= HALF and 2 * len(ids) <= k


def classify_bin(instance: Instance, ids) -> str:
    """Type of a bin of a two-batch optimum: Z, Y1, Y2, X1 or X2.

    X<b> means batch b is the side with total size <= 1/2 but more than k/2
    items (the side that gets redistributed).
    """
    k = instance.k
    parts = _parts(instance, ids)
    if len(parts) == 1:
        return "Z"
    if set(parts) != {1, 2}:
        raise ValueError(f"two-batch classification got batches {sorted(parts)}")
    if _is_light(instance, parts[1], k):
        return "Y1"
    if _is_light(instance, parts[2], k):
        return "Y2"
    # one side is heavy with few items, the other light with many items
    many = 1 if 2 * len(parts[1]) > k else 2
    return f"X{many}"


def _merge_pairs(groups: list[list[int]]) -> list[list[int]]:
    out = [groups[i] + groups[i + 1] for i in range(0, len(groups) - 1, 2)]
    if len(groups) % 2:
        out.append(groups[-1])
    return out


def _redistribute(instance: Instance, groups: list[list[int]], per_receiver: int) -> list[list[int]]:
    """Destroy some groups and hand their items out to the survivors.

    Each surviving group receives at most ``per_receiver`` displaced items.
    With two per receiver, items of one destroyed group are paired largest
    first and the odd leftovers (each the smallest of its group) are paired
    with each other.
    """
    x = len(groups)
    destroyed_n = (per_receiver * x) // instance.k
    if destroyed_n == 0:
        return [list(g) for g in groups]
    survivors = [list(g) for g in groups[: x - destroyed_n]]
    destroyed = groups[x - destroyed_n :]
    parcels: list[list[int]] = []
    if per_receiver == 1:
        parcels = [[i] for g in destroyed for i in g]
    else:
        leftovers = []
        for g in destroyed:
            ordered = sorted(g, key=lambda i: (-instance.by_id[i].size, i))
            parcels.extend(ordered[j : j + 2] for j in range(0, len(ordered) - 1, 2))
            if len(ordered) % 2:
                leftovers.append(ordered[-1])
        parcels.extend(leftovers[j : j + 2] for j in range(0, len(leftovers), 2))
    if len(parcels) > len(survivors):
        raise AssertionError("redistribution ran out of receiving bins")
    used = [False] * len(survivors)
    for parcel in parcels:
        # first receiving bin that takes the parcel
        for r, g in enumerate(survivors):
            if used[r] or len(g) + len(parcel) > instance.k or _size(instance, g + parcel) > ONE:
                continue
            g.extend(parcel)
            used[r] = True
            break
        else:
            raise AssertionError("no receiving bin fits a displaced parcel")
    return survivors


def repack_batched(opt: Packing, q: int) -> Packing:
    """Turn a (global) packing into one where no bin mixes batches.

    Bins with a single batch are copied.  For q = 2 (k >= 3) each mixed bin is
    split by batch; light sides (size <= 1/2, <= k/2 items) of Y-type bins are
    merged in pairs, and the light-but-crowded sides of X-type bins are
    redistributed one item per receiving bin.  The result costs at most
    (2 - 1/k) * |opt| + 3.

    For q = 3 (k >= 4) light parts of mixed bins are pooled per batch and
    merged in pairs; in bins holding all three batches where exactly one part
    is light, the crowded part (<= 1/2, > k/2 items) is pooled per batch and
    redistributed two items per receiving bin.  Cost is at most
    (5/2 - 2/k) * |opt| + REPACK_Q3_CONSTANT.
    """
    instance = opt.instance
    k = instance.k
    if q not in (2, 3):
        raise ValueError("q must be 2 or 3")
    if q == 2 and k < 3 or q == 3 and k < 4:
        raise ValueError(f"q={q} repacking needs k >= {q + 1}")
    report = validate_packing(instance, opt)
    if not report.valid:
        raise ValueError(f"input packing is invalid: {report.violations[:3]}")
    batches = instance.labels("batch")
    if any(it.batch is None for it in instance.items) or (batches and batches[-1] > q):
        raise ValueError(f"batch ids must lie in 1..{q}")

    out: list[list[int]] = []
    if q == 2:
        light = {1: [], 2: []}
        crowded = {1: [], 2: []}
        for b in opt.bins:
            kind = classify_bin(instance, b.item_ids)
            parts = _parts(instance, b.item_ids)
            if kind == "Z":
                out.append(list(b.item_ids))
            elif kind in ("Y1", "Y2"):
                side = int(kind[1])
                light[side].append(parts[side])
                out.append(parts[3 - side])
            else:
                side = int(kind[1])
                crowded[side].append(parts[side])
                out.append(parts[3 - side])
        for side in (1, 2):
            out.extend(_merge_pairs(light[side]))
            out.extend(_redistribute(instance, crowded[side], per_receiver=1))
        return Packing.from_ids(instance, out)

    light3: dict[int, list[list[int]]] = {b: [] for b in (1, 2, 3)}
    crowded3: dict[int, list[list[int]]] = {b: [] for b in (1, 2, 3)}
    for b in opt.bins:
        parts = _parts(instance, b.item_ids)
        if len(parts) == 1:
            out.append(list(b.item_ids))
            continue
        flags = {lab: _is_light(instance, ids, k) for lab, ids in parts.items()}
        redistribute_crowded = len(parts) == 3 and sum(flags.values()) == 1
        for lab, ids in parts.items():
            if flags[lab]:
                light3[lab].append(ids)
            elif redistribute_crowded and 2 * len(ids) > k:
                crowded3[lab].append(ids)
            else:
                out.append(ids)
    for lab in (1, 2, 3):
        out.extend(_merge_pairs(light3[lab]))
        out.extend(_redistribute(instance, crowded3[lab], per_receiver=2))
    return Packing.from_ids(instance, out)


def repack_bound(q: int, k: int, opt_cost: int) -> Fraction:
    """Guaranteed upper bound on the cost of :func:`repack_batched`."""
    if q == 2:
        return (2 - Fraction(1, k)) * opt_cost + REPACK_Q2_CONSTANT
    return (Fraction(5, 2) - Fraction(2, k)) * opt_cost + REPACK_Q3_CONSTANT
