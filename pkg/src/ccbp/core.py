"""Exact instance model for cardinality-constrained bin packing.

Every size, load and ratio is a :class:`fractions.Fraction`; nothing in the
package ever rounds.  An :class:`Instance` is an *ordered* sequence of items
(arrival order matters to the online packers), and a :class:`Packing` is a
list of bins referring to item ids of one instance.
"""

from __future__ import annotations

import math
import re
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import accumulate
from typing import Iterable, Union

Rational = Fraction
ZERO = Fraction(0)
ONE = Fraction(1)
HALF = Fraction(1, 2)

Load = Union[Fraction, tuple]


class InstanceError(ValueError):
    """Malformed instance, item, or instance file."""


class StructuralError(ValueError):
    """A packing refers to item ids that the instance does not contain."""


def as_fraction(value) -> Fraction:
    if isinstance(value, float):
        raise InstanceError(f"refusing float {value!r}; pass an exact rational")
    return Fraction(value)


_RATIONAL_RE = re.compile(r"^\s*(-?\d+)(?:/(\d+))?\s*$")


def parse_rational(text: str) -> Fraction:
    """Parse ``"p/q"`` (or a bare integer).  Decimals are rejected."""
    m = _RATIONAL_RE.match(text)
    if not m:
        raise InstanceError(f"malformed rational {text!r}")
    num, den = int(m.group(1)), int(m.group(2) or 1)
    if den == 0:
        raise InstanceError(f"zero denominator in {text!r}")
    return Fraction(num, den)


def format_rational(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class Item:
    id: int
    size: Fraction
    cluster: int | None = None
    batch: int | None = None
    components: tuple[Fraction, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "size", as_fraction(self.size))
        if not ZERO <= self.size <= ONE:
            raise InstanceError(f"item {self.id}: size {self.size} outside [0,1]")
        if self.components is not None:
            comps = tuple(as_fraction(c) for c in self.components)
            if any(not ZERO <= c <= ONE for c in comps):
                raise InstanceError(f"item {self.id}: component outside [0,1]")
            object.__setattr__(self, "components", comps)
        for label in ("cluster", "batch"):
            v = getattr(self, label)
            if v is not None and v < 1:
                raise InstanceError(f"item {self.id}: {label} id must be >= 1")

    @classmethod
    def vector(cls, id: int, components, cluster=None, batch=None) -> "Item":
        """A vector-packing item; its scalar ``size`` is its largest component."""
        comps = tuple(as_fraction(c) for c in components)
        return cls(id, max(comps, default=ZERO), cluster, batch, comps)

    @property
    def vec(self) -> tuple[Fraction, ...]:
        return self.components if self.components is not None else (self.size,)


@dataclass(frozen=True)
class Instance:
    items: tuple[Item, ...]
    k: int
    beta: Fraction | None = None
    d: int = 1
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "items", tuple(self.items))
        if self.k < 1:
            raise InstanceError("k must be >= 1")
        if self.d < 1:
            raise InstanceError("d must be >= 1")
        if self.beta is not None:
            beta = as_fraction(self.beta)
            if not ZERO < beta <= ONE:
                raise InstanceError(f"beta {beta} outside (0,1]")
            object.__setattr__(self, "beta", beta)
        seen = set()
        for it in self.items:
            if it.id in seen:
                raise InstanceError(f"duplicate item id {it.id}")
            seen.add(it.id)
            if self.beta is not None and it.size > self.beta:
                raise InstanceError(f"item {it.id}: size {it.size} exceeds beta {self.beta}")
            if it.components is not None and len(it.components) != self.d:
                raise InstanceError(f"item {it.id}: expected {self.d} components")
            if self.d > 1 and it.components is None:
                raise InstanceError(f"item {it.id}: missing components (d={self.d})")

    @property
    def n(self) -> int:
        return len(self.items)

    @property
    def t(self) -> int | None:
        """floor(1/beta), so that 1/(t+1) < beta <= 1/t."""
        if self.beta is None:
            return None
        return math.floor(1 / self.beta)

    @cached_property
    def by_id(self) -> dict[int, Item]:
        return {it.id: it for it in self.items}

    @property
    def total_size(self) -> Fraction:
        return sum((it.size for it in self.items), ZERO)

    def labels(self, key: str) -> list[int]:
        """Sorted distinct cluster or batch ids carried by the items."""
        return sorted({getattr(it, key) for it in self.items if getattr(it, key) is not None})

    def labels_contiguous(self, key: str) -> bool:
        got = self.labels(key)
        return got == list(range(1, len(got) + 1))

    def replace_items(self, items: Iterable[Item], name: str | None = None) -> "Instance":
        return Instance(tuple(items), self.k, self.beta, self.d, self.name if name is None else name)


def load_of(instance: Instance, item_ids: Iterable[int]) -> Load:
    """Sum of sizes (d = 1) or per-component sums (d > 1)."""
    items = [instance.by_id[i] for i in item_ids]
    if instance.d == 1:
        return sum((it.size for it in items), ZERO)
    return tuple(sum((it.vec[c] for it in items), ZERO) for c in range(instance.d))


@dataclass(frozen=True)
class Bin:
    item_ids: tuple[int, ...]
    load: Load

    @property
    def count(self) -> int:
        return len(self.item_ids)

    def load_vec(self) -> tuple[Fraction, ...]:
        return self.load if isinstance(self.load, tuple) else (self.load,)


@dataclass(frozen=True)
class Packing:
    instance: Instance = field(repr=False)
    bins: tuple[Bin, ...]

    @classmethod
    def from_ids(cls, instance: Instance, groups: Iterable[Iterable[int]]) -> "Packing":
        bins = []
        for g in groups:
            ids = tuple(g)
            unknown = [i for i in ids if i not in instance.by_id]
            if unknown:
                raise StructuralError(f"unknown item ids {unknown}")
            bins.append(Bin(ids, load_of(instance, ids)))
        return cls(instance, tuple(bins))

    def __len__(self) -> int:
        return len(self.bins)

    @property
    def cost(self) -> int:
        return len(self.bins)

    def id_lists(self) -> list[list[int]]:
        return [list(b.item_ids) for b in self.bins]

    def sizes(self, b: Bin) -> list[Fraction]:
        return [self.instance.by_id[i].size for i in b.item_ids]


@dataclass(frozen=True)
class Violation:
    kind: str  # overload | overcount | missing | duplicate | empty
    bin: int | None = None
    item: int | None = None
    component: int | None = None
    detail: str = ""


@dataclass(frozen=True)
class ValidityReport:
    violations: tuple[Violation, ...]

    @property
    def valid(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.valid


def validate_packing(instance: Instance, packing: Packing) -> ValidityReport:
    """Check a packing against the instance, recomputing loads from scratch.

    Unknown item ids raise :class:`StructuralError`; everything else is
    reported as a :class:`Violation`.
    """
    by_id = instance.by_id
    unknown = [i for b in packing.bins for i in b.item_ids if i not in by_id]
    if unknown:
        raise StructuralError(f"packing references unknown item ids {sorted(set(unknown))}")
    out: list[Violation] = []
    seen: dict[int, int] = {}
    for bi, b in enumerate(packing.bins):
        if not b.item_ids:
            out.append(Violation("empty", bin=bi))
        if b.count > instance.k:
            out.append(Violation("overcount", bin=bi, detail=f"{b.count}>{instance.k}"))
        load = load_of(instance, b.item_ids)
        for c, v in enumerate(load if isinstance(load, tuple) else (load,)):
            if v > ONE:
                out.append(Violation("overload", bin=bi, component=c, detail=f"load {v}"))
        for i in b.item_ids:
            if i in seen:
                out.append(Violation("duplicate", bin=bi, item=i, detail=f"also in bin {seen[i]}"))
            else:
                seen[i] = bi
    for it in instance.items:
        if it.id not in seen:
            out.append(Violation("missing", item=it.id))
    return ValidityReport(tuple(out))


def _big_item_bound(sizes: list[Fraction]) -> int:
    """Martello-Toth style bound; with no items <= 1/2 it is the count of items > 1/2.

    For every threshold a in {0} u {sizes <= 1/2}: items above 1-a need their
    own bin, items in (1/2, 1-a] too, and items in [a, 1/2] can only use the
    free space of the latter.
    """
    if not sizes:
        return 0
    s = sorted(sizes)
    pre = [ZERO, *accumulate(s)]

    def span(lo_idx: int, hi_idx: int) -> tuple[int, Fraction]:
        if hi_idx <= lo_idx:
            return 0, ZERO
        return hi_idx - lo_idx, pre[hi_idx] - pre[lo_idx]

    half_hi = bisect_right(s, HALF)  # items <= 1/2 are s[:half_hi]
    best = 0
    for a in [ZERO, *sorted(set(s[:half_hi]))]:
        n1, _ = span(bisect_right(s, ONE - a), len(s))
        n2, s2 = span(half_hi, bisect_right(s, ONE - a))
        _, s3 = span(bisect_left(s, a), half_hi)
        best = max(best, n1 + n2 + max(0, math.ceil(s3 - (n2 - s2))))
    return best


def lower_bounds(instance: Instance) -> dict[str, int]:
    """Combinatorial lower bounds on the optimal number of bins, by kind."""
    n = instance.n
    if instance.d == 1:
        size = math.ceil(instance.total_size)
    else:
        size = max(
            (math.ceil(sum((it.vec[c] for it in instance.items), ZERO)) for c in range(instance.d)),
            default=0,
        )
    out = {"size_bound": size, "cardinality_bound": -(-n // instance.k)}
    if instance.d == 1:
        out["big_item_bound"] = _big_item_bound([it.size for it in instance.items])
    return out


def lower_bound(instance: Instance) -> tuple[int, str]:
    """The strongest entry of :func:`lower_bounds` and its kind."""
    cands = lower_bounds(instance)
    kind = max(cands, key=lambda key: cands[key])
    return cands[kind], kind


LOWER_KINDS = ("size_bound", "cardinality_bound", "big_item_bound", "matching_bound", "exhaustive")


@dataclass(frozen=True)
class OptCertificate:
    """A feasible packing plus a proven lower bound on the optimum."""

    upper: Packing
    lower: int
    lower_kind: str

    def __post_init__(self):
        if self.lower_kind not in LOWER_KINDS:
            raise ValueError(f"unknown lower bound kind {self.lower_kind!r}")
        if self.lower > len(self.upper):
            raise ValueError(f"lower bound {self.lower} exceeds packing cost {len(self.upper)}")

    @property
    def exact(self) -> bool:
        return self.lower == len(self.upper)

    @property
    def cost(self) -> int:
        return len(self.upper)


def split_by(instance: Instance, key: str) -> list[Instance]:
    """One sub-instance per cluster (or batch) id, in increasing id order.

    Sub-instances keep arrival order, k, beta and d, and keep their labels,
    so the union of the parts is the original item set.
    """
    if key not in ("cluster", "batch"):
        raise ValueError(f"key must be 'cluster' or 'batch', got {key!r}")
    groups: dict[int, list[Item]] = {}
    for it in instance.items:
        label = getattr(it, key)
        if label is None:
            raise InstanceError(f"item {it.id} has no {key} id")
        groups.setdefault(label, []).append(it)
    base = instance.name or "instance"
    return [instance.replace_items(groups[g], name=f"{base}/{key}{g}") for g in sorted(groups)]


def parse_instance(text: str) -> Instance:
    """Read the line format ``k=<int> [beta=<p/q>] [d=<int>]`` then one
    ``id size[,cluster][,batch][|c1;c2;...]`` per line.  ``#`` starts a comment."""
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise InstanceError("empty instance file")
    header: dict[str, str] = {}
    for tok in lines[0].split():
        if "=" not in tok:
            raise InstanceError(f"bad header token {tok!r}")
        key, val = tok.split("=", 1)
        header[key] = val
    if "k" not in header or set(header) - {"k", "beta", "d"}:
        raise InstanceError(f"bad header {lines[0]!r}")
    try:
        k, d = int(header["k"]), int(header.get("d", "1"))
    except ValueError as exc:
        raise InstanceError(f"bad header {lines[0]!r}") from exc
    beta = parse_rational(header["beta"]) if "beta" in header else None

    items = []
    for ln in lines[1:]:
        main, _, comps = ln.partition("|")
        parts = main.split(None, 1)
        if len(parts) != 2:
            raise InstanceError(f"bad item line {ln!r}")
        fields = parts[1].split(",")
        if len(fields) > 3:
            raise InstanceError(f"bad item line {ln!r}")
        fields += [""] * (3 - len(fields))
        try:
            iid = int(parts[0])
            cluster = int(fields[1]) if fields[1].strip() else None
            batch = int(fields[2]) if fields[2].strip() else None
        except ValueError as exc:
            raise InstanceError(f"bad item line {ln!r}") from exc
        components = tuple(parse_rational(c) for c in comps.split(";")) if comps.strip() else None
        items.append(Item(iid, parse_rational(fields[0]), cluster, batch, components))
    inst = Instance(tuple(items), k, beta, d)
    for key in ("cluster", "batch"):
        if not inst.labels_contiguous(key):
            raise InstanceError(f"{key} ids must form the range 1..l")
    return inst


def serialize_instance(instance: Instance) -> str:
    head = [f"k={instance.k}"]
    if instance.beta is not None:
        head.append(f"beta={format_rational(instance.beta)}")
    if instance.d != 1:
        head.append(f"d={instance.d}")
    lines = [" ".join(head)]
    for it in instance.items:
        fields = [format_rational(it.size)]
        if it.cluster is not None or it.batch is not None:
            fields.append("" if it.cluster is None else str(it.cluster))
        if it.batch is not None:
            fields.append(str(it.batch))
        line = f"{it.id} {','.join(fields)}"
        if it.components is not None:
            line += "|" + ";".join(format_rational(c) for c in it.components)
        lines.append(line)
    return "\n".join(lines) + "\n"
