"""Online greedy packers for CCBP: Next Fit, Worst Fit, First Fit, and
First Fit for vector packing.  All of them consume items in arrival order."""

from __future__ import annotations

from enum import Enum

from .core import ONE, Bin, Instance, Item, Packing


class FitPolicy(str, Enum):
    FIRST_FIT = "first_fit"
    WORST_FIT = "worst_fit"
    NEXT_FIT = "next_fit"


def feasible(bin: Bin, item: Item, k: int) -> bool:
    """True iff ``item`` can join ``bin``: room for it in every component and
    at most k-1 items already inside."""
    if bin.count > k - 1:
        return False
    return all(l + s <= ONE for l, s in zip(bin.load_vec(), item.vec))


class _OpenBins:
    """Mutable scratch state for one packing run."""

    def __init__(self, instance: Instance, dims: int):
        self.k = instance.k
        self.dims = dims
        self.loads: list[list] = []
        self.ids: list[list[int]] = []

    def fits(self, b: int, vec) -> bool:
        if len(self.ids[b]) >= self.k:
            return False
        load = self.loads[b]
        return all(load[c] + vec[c] <= ONE for c in range(self.dims))

    def put(self, b: int, item: Item, vec) -> None:
        load = self.loads[b]
        for c in range(self.dims):
            load[c] += vec[c]
        self.ids[b].append(item.id)

    def open(self, item: Item, vec) -> int:
        self.loads.append(list(vec))
        self.ids.append([item.id])
        return len(self.ids) - 1


def _scalar_only(instance: Instance, who: str) -> None:
    if instance.d != 1:
        raise ValueError(f"{who} is defined for d = 1 only (got d={instance.d})")


def next_fit(instance: Instance) -> Packing:
    _scalar_only(instance, "next_fit")
    state = _OpenBins(instance, 1)
    active = None
    for it in instance.items:
        vec = (it.size,)
        if active is not None and state.fits(active, vec):
            state.put(active, it, vec)
        else:
            # the previous active bin is closed for good
            active = state.open(it, vec)
    return Packing.from_ids(instance, state.ids)


def worst_fit(instance: Instance) -> Packing:
    """Least-loaded feasible bin; ties go to the lowest index."""
    _scalar_only(instance, "worst_fit")
    state = _OpenBins(instance, 1)
    for it in instance.items:
        vec = (it.size,)
        best = None
        for b in range(len(state.ids)):
            if state.fits(b, vec) and (best is None or state.loads[b][0] < state.loads[best][0]):
                best = b
        if best is None:
            state.open(it, vec)
        else:
            state.put(best, it, vec)
    return Packing.from_ids(instance, state.ids)


def _first_fit(instance: Instance, vectors: bool) -> Packing:
    dims = instance.d if vectors else 1
    state = _OpenBins(instance, dims)
    for it in instance.items:
        vec = it.vec if vectors else (it.size,)
        for b in range(len(state.ids)):
            if state.fits(b, vec):
                state.put(b, it, vec)
                break
        else:
            state.open(it, vec)
    return Packing.from_ids(instance, state.ids)


def first_fit(instance: Instance) -> Packing:
    _scalar_only(instance, "first_fit")
    return _first_fit(instance, vectors=False)


def first_fit_vector(instance: Instance) -> Packing:
    """First Fit where an item fits if every component stays <= 1."""
    missing = [it.id for it in instance.items if it.components is None]
    if missing:
        raise ValueError(f"items without components: {missing[:5]}")
    return _first_fit(instance, vectors=True)


def pack(instance: Instance, policy: FitPolicy | str) -> Packing:
    policy = FitPolicy(policy)
    if policy is FitPolicy.NEXT_FIT:
        return next_fit(instance)
    if policy is FitPolicy.WORST_FIT:
        return worst_fit(instance)
    if instance.d > 1:
        return first_fit_vector(instance)
    return first_fit(instance)
