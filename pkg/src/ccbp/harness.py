"""Runs, sweeps and fuzzing: ties generators, packers and the exact solver
into reproducible experiments with CSV output."""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from . import algorithms, exact
from .analysis import check_ceiling, check_floor, make_weight
from .core import (
    Instance,
    Item,
    Packing,
    format_rational,
    parse_instance,
    serialize_instance,
    split_by,
    validate_packing,
)
from .generators import GeneratedScenario, GeneratorError, generate

F = Fraction

PARAM_COLUMNS = ("k", "t", "beta", "N", "M", "eps", "d", "q")
CSV_COLUMNS = (
    "kind", *PARAM_COLUMNS, "procedure", "measured", "opt", "opt_exact", "ratio_exact", "ratio_dec",
    "target_exact", "predicted", "match", "error",
)


class IncompatibleProcedure(ValueError):
    pass


def _clustered(instance: Instance) -> int:
    return exact.clustered_cost(instance).total


def _batched(instance: Instance) -> int:
    return exact.batched_cost(instance).total


PROCEDURES: dict[str, Callable[[Instance], int]] = {
    "next_fit": lambda inst: len(algorithms.next_fit(inst)),
    "worst_fit": lambda inst: len(algorithms.worst_fit(inst)),
    "first_fit": lambda inst: len(algorithms.first_fit(inst)),
    "clustered_cost": _clustered,
    "batched_cost": _batched,
}


def ratio_decimal(x: Fraction) -> str:
    """Six significant digits; the exact fraction stays authoritative."""
    return format(Decimal(x.numerator) / Decimal(x.denominator), ".6g")


@dataclass(frozen=True)
class RunReport:
    kind: str
    params: dict
    procedure: str
    measured_cost: int
    opt_cost: int
    opt_exact: bool
    target_ratio: Fraction
    predicted_cost: int
    wallclock: float = 0.0

    @property
    def ratio(self) -> Fraction:
        return F(self.measured_cost, self.opt_cost) if self.opt_cost else F(1)

    @property
    def prediction_match(self) -> bool:
        return self.measured_cost == self.predicted_cost

    def row(self) -> dict[str, str]:
        out = {"kind": self.kind, **_param_cells(self.params)}
        out.update(
            procedure=self.procedure,
            measured=str(self.measured_cost),
            opt=str(self.opt_cost),
            opt_exact=str(self.opt_exact).lower(),
            ratio_exact=format_rational(self.ratio),
            ratio_dec=ratio_decimal(self.ratio),
            target_exact=format_rational(self.target_ratio),
            predicted=str(self.predicted_cost),
            match=str(self.prediction_match).lower(),
            error="",
        )
        return out


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, Fraction):
        return format_rational(value)
    return str(value)


def _param_cells(params: Mapping) -> dict[str, str]:
    return {c: _cell(params.get(c)) for c in PARAM_COLUMNS}


def run(scenario: GeneratedScenario, procedure: str | None = None) -> RunReport:
    """Run a designated procedure on the scenario and compare with its prediction."""
    procedure = procedure or scenario.procedures[0]
    if procedure not in scenario.procedures:
        raise IncompatibleProcedure(
            f"{procedure!r} is not a procedure of {scenario.kind!r} (allowed: {', '.join(scenario.procedures)})"
        )
    start = time.perf_counter()
    measured = PROCEDURES[procedure](scenario.instance)
    elapsed = time.perf_counter() - start
    return RunReport(
        scenario.kind, dict(scenario.params), procedure, measured, scenario.opt_cost,
        scenario.opt_cert.exact, scenario.target_ratio, scenario.predicted_cost, elapsed,
    )


# ---------------------------------------------------------------------------
# Sweeps


def expand_grid(grid: Mapping[str, Sequence] | Sequence[Mapping]) -> list[dict]:
    """Cartesian product of a mapping of value lists, or an explicit point list."""
    if isinstance(grid, Mapping):
        if not grid:
            return []
        keys = list(grid)
        return [dict(zip(keys, combo)) for combo in itertools.product(*(grid[k] for k in keys))]
    return [dict(p) for p in grid]


def _sweep_point(args: tuple[str, dict]) -> dict[str, str]:
    kind, point = args
    point = dict(point)
    procedure = point.pop("procedure", None)
    try:
        report = run(generate(kind, **point), procedure)
    except (GeneratorError, IncompatibleProcedure, ValueError, TypeError) as exc:
        row = {c: "" for c in CSV_COLUMNS}
        row.update(kind=kind, **_param_cells(point), procedure=procedure or "", error=str(exc))
        return row
    return report.row()


def sweep_rows(kind: str, grid, workers: int = 1) -> list[dict[str, str]]:
    jobs = [(kind, p) for p in expand_grid(grid)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_sweep_point, jobs))
    return [_sweep_point(j) for j in jobs]


def rows_to_csv(rows: Iterable[Mapping[str, str]]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def sweep(kind: str, grid, workers: int = 1) -> str:
    """CSV with one row per grid point, in grid order."""
    return rows_to_csv(sweep_rows(kind, grid, workers))


def read_csv(text: str) -> list[dict[str, str]]:
    return list(csv.DictReader(io.StringIO(text)))


# ---------------------------------------------------------------------------
# Scenario files: instance text plus a JSON sidecar


def scenario_metadata(sc: GeneratedScenario) -> dict:
    return {
        "kind": sc.kind,
        "params": {k: _cell(v) for k, v in sc.params.items()},
        "procedures": list(sc.procedures),
        "predicted_cost": sc.predicted_cost,
        "target_ratio": format_rational(sc.target_ratio),
        "opt_cost": sc.opt_cost,
        "opt_lower": sc.opt_cert.lower,
        "opt_lower_kind": sc.opt_cert.lower_kind,
        "opt_packing": sc.opt_cert.upper.id_lists(),
    }


def write_scenario(sc: GeneratedScenario, path: str) -> tuple[str, str]:
    meta_path = path + ".json"
    with open(path, "w") as fh:
        fh.write(serialize_instance(sc.instance))
    with open(meta_path, "w") as fh:
        json.dump(scenario_metadata(sc), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path, meta_path


def read_instance(path: str) -> Instance:
    with open(path) as fh:
        return parse_instance(fh.read())


# ---------------------------------------------------------------------------
# Fuzzing


FUZZ_CHECKS = ("nf", "wf", "weights", "wf_5_12", "ff_param", "poc", "batched", "vp")
DYADIC = 32


@dataclass(frozen=True)
class FuzzViolation:
    index: int
    check: str
    detail: str
    instance: str


@dataclass
class FuzzReport:
    seed: int
    count: int
    checked: dict[str, int] = field(default_factory=dict)
    violations: list[FuzzViolation] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations


@dataclass(frozen=True)
class FuzzConfig:
    n_max: int = 12
    k_min: int = 2
    k_max: int = 6
    beta: Fraction | None = None
    min_size: Fraction | None = None


def _grid_sizes(cap: Fraction, floor: Fraction | None) -> list[Fraction]:
    sizes = [F(j, DYADIC) for j in range(DYADIC + 1)]
    if cap.denominator > DYADIC or DYADIC % cap.denominator:
        sizes.append(cap)
    out = [s for s in sizes if s <= cap and (floor is None or s > floor)]
    if not out:
        raise ValueError(f"no grid size in ({floor}, {cap}]")
    return out


def _random_instance(rng: random.Random, n: int, k: int, cap: Fraction, cfg: FuzzConfig, beta=None) -> Instance:
    choices = _grid_sizes(cap, cfg.min_size)
    items = tuple(Item(i, rng.choice(choices)) for i in range(n))
    return Instance(items, k, beta)


def _cap(cfg: FuzzConfig) -> Fraction:
    return F(1) if cfg.beta is None else F(cfg.beta)


def _k(rng: random.Random, cfg: FuzzConfig, at_least: int = 2) -> int | None:
    lo = max(cfg.k_min, at_least)
    return rng.randint(lo, cfg.k_max) if lo <= cfg.k_max else None


def _opt(inst: Instance) -> Packing:
    cert = exact.optimal(inst)
    assert cert.exact, "fuzz instances are small enough for an exact solve"
    return cert.upper


def _check_anyfit(rng, cfg, which: str) -> tuple[Instance, str | None] | None:
    k = _k(rng, cfg)
    if k is None:
        return None
    inst = _random_instance(rng, rng.randint(1, cfg.n_max), k, _cap(cfg), cfg, cfg.beta)
    opt = len(_opt(inst))
    if which == "nf":
        alg, rho = len(algorithms.next_fit(inst)), 3 - F(2, k)
    else:
        alg, rho = len(algorithms.worst_fit(inst)), 3 - F(3, k)
    if alg > rho * opt + 1:
        return inst, f"{which}: {alg} bins > {rho}*{opt} + 1"
    return inst, None


def _check_weights(rng, cfg) -> tuple[Instance, str | None] | None:
    k = _k(rng, cfg)
    if k is None:
        return None
    inst = _random_instance(rng, rng.randint(1, cfg.n_max), k, _cap(cfg), cfg, cfg.beta)
    opt = _opt(inst)
    for name, packer in (("nf", algorithms.next_fit), ("wf", algorithms.worst_fit)):
        w = make_weight(name, k)
        ceil = check_ceiling(opt, w)
        if not ceil.passed:
            return inst, f"{name} ceiling: bin weight {max(ceil.per_bin)} > {ceil.rho}"
        floor = check_floor(packer(inst), w)
        if not floor.passed:
            return inst, f"{name} floor: total {floor.total} < {len(floor.per_bin)} - {floor.floor_slack}"
    return inst, None


def _check_wf_5_12(rng, cfg) -> tuple[Instance, str | None] | None:
    ks = [k for k in (4, 5) if cfg.k_min <= k <= cfg.k_max]
    if not ks:
        return None
    k = rng.choice(ks)
    beta = min(_cap(cfg), F(5, 12))
    if beta <= F(2, 5):
        return None
    inst = _random_instance(rng, rng.randint(1, cfg.n_max), k, beta, cfg, beta)
    opt = _opt(inst)
    wf = algorithms.worst_fit(inst)
    w = make_weight("wf_5_12", k)
    rho = F(8, 3) - F(10, 3 * k)
    if len(wf) > rho * len(opt) + 2:
        return inst, f"wf_5_12: {len(wf)} bins > {rho}*{len(opt)} + 2"
    ceil = check_ceiling(opt, w)
    if not ceil.passed:
        return inst, f"wf_5_12 ceiling: bin weight {max(ceil.per_bin)} > {ceil.rho}"
    floor = check_floor(wf, w)
    if not floor.passed:
        return inst, f"wf_5_12 floor: total {floor.total} < {len(wf)} - {floor.floor_slack}"
    return inst, None


def _check_ff_param(rng, cfg) -> tuple[Instance, str | None] | None:
    k = _k(rng, cfg, at_least=3)
    if k is None:
        return None
    t = rng.randint(2, k - 1)
    beta = F(1, t) if cfg.beta is None else min(F(cfg.beta), F(1, t))
    if math.floor(1 / beta) != t:
        return None
    inst = _random_instance(rng, rng.randint(1, cfg.n_max), k, beta, cfg, beta)
    opt = _opt(inst)
    ff = algorithms.first_fit(inst)
    w = make_weight("ff_param", k, t)
    rho = 1 + F((k - t) * (t + 1), k * t)
    if len(ff) > rho * len(opt) + 2:
        return inst, f"ff_param: {len(ff)} bins > {rho}*{len(opt)} + 2"
    ceil = check_ceiling(opt, w)
    if not ceil.passed:
        return inst, f"ff_param ceiling: bin weight {max(ceil.per_bin)} > {ceil.rho}"
    floor = check_floor(ff, w)
    if not floor.passed:
        return inst, f"ff_param floor: total {floor.total} < {len(ff)} - {floor.floor_slack}"
    return inst, None


def _clustered_items(rng, n_max: int, draw: Callable[[], tuple], admissible: Callable[[list], bool]):
    """Clusters built by drawing items until each one is admissible.

    A cluster that would exceed ``n_max`` items is dropped, and drawing stops.
    """
    clusters: list[list[tuple]] = []
    used = 0
    for _ in range(rng.randint(1, 3)):
        members: list[tuple] = []
        while not admissible(members) and used + len(members) < n_max:
            members.append(draw())
        if not admissible(members):
            break
        clusters.append(members)
        used += len(members)
    return clusters


def _check_poc(rng, cfg) -> tuple[Instance, str | None] | None:
    k = _k(rng, cfg)
    if k is None:
        return None
    choices = _grid_sizes(_cap(cfg), cfg.min_size)
    clusters = _clustered_items(
        rng, cfg.n_max, lambda: (rng.choice(choices),), lambda m: len(m) > k or sum(s for (s,) in m) > 1
    )
    if not clusters:
        return None
    labelled = [(s, c) for c, members in enumerate(clusters, 1) for (s,) in members]
    inst = Instance(tuple(Item(i, s, c) for i, (s, c) in enumerate(labelled)), k, cfg.beta)
    opt = _opt(inst)
    sep = exact.clustered_cost(inst)
    if sep.inadmissible:
        return inst, f"poc: generator produced inadmissible clusters {sep.inadmissible}"
    rho = F(4 * k - 2, k + 1)
    bound = math.ceil(rho * len(opt))
    if sep.total > bound:
        return inst, f"poc: clustered {sep.total} > ceil({rho}*{len(opt)}) = {bound}"
    w = make_weight("poc_general", k)
    ceil = check_ceiling(opt, w)
    if not ceil.passed:
        return inst, f"poc ceiling: bin weight {max(ceil.per_bin)} > {ceil.rho}"
    floor = check_floor(sep.packing(inst), w, 0)
    if not floor.passed:
        return inst, f"poc floor: total {floor.total} < {len(floor.per_bin)}"
    return inst, None


def _check_batched(rng, cfg) -> tuple[Instance, str | None] | None:
    q = rng.choice((2, 3))
    k = _k(rng, cfg, at_least=q + 1)
    if k is None:
        return None
    base = _random_instance(rng, rng.randint(1, cfg.n_max), k, _cap(cfg), cfg, cfg.beta)
    inst = base.replace_items(tuple(Item(it.id, it.size, None, rng.randint(1, q)) for it in base.items))
    opt = _opt(inst)
    rep = exact.repack_batched(opt, q)
    if not validate_packing(inst, rep).valid:
        return inst, "batched: repacked packing is infeasible"
    mixed = [b.item_ids for b in rep.bins if len({inst.by_id[i].batch for i in b.item_ids}) > 1]
    if mixed:
        return inst, f"batched: repacked bins mix batches {mixed[:3]}"
    bound = exact.repack_bound(q, k, len(opt))
    if len(rep) > bound:
        return inst, f"batched: repack {len(rep)} > {bound}"
    best = exact.batched_cost(inst).total
    if best > len(rep):
        return inst, f"batched: batched optimum {best} above a feasible repack {len(rep)}"
    return inst, None


def _check_vp(rng, cfg) -> tuple[Instance, str | None] | None:
    d = rng.randint(1, 3)
    n_max = min(cfg.n_max, 10)
    grid = [F(j, 8) for j in range(9)]

    def draw():
        return tuple(rng.choice(grid) for _ in range(d))

    def admissible(members):
        return any(sum(v[c] for v in members) > 1 for c in range(d))

    clusters = _clustered_items(rng, n_max, draw, admissible)
    if not clusters:
        return None
    items = []
    for c, members in enumerate(clusters, 1):
        for vec in members:
            items.append(Item.vector(len(items), vec, c))
    inst = Instance(tuple(items), len(items), None, d)
    opt = len(_opt(inst))
    ff = sum(len(algorithms.first_fit_vector(part)) for part in split_by(inst, "cluster"))
    if ff > 2 * d * opt:
        return inst, f"vp: clustered first fit {ff} > 2*{d}*{opt}"
    return inst, None


_CHECKERS = {
    "nf": lambda rng, cfg: _check_anyfit(rng, cfg, "nf"),
    "wf": lambda rng, cfg: _check_anyfit(rng, cfg, "wf"),
    "weights": _check_weights,
    "wf_5_12": _check_wf_5_12,
    "ff_param": _check_ff_param,
    "poc": _check_poc,
    "batched": _check_batched,
    "vp": _check_vp,
}


def _fuzz_one(args) -> list[tuple[str, bool, FuzzViolation | None]]:
    seed, index, checks, cfg = args
    out = []
    for name in checks:
        rng = random.Random((seed * 100003 + index) * len(FUZZ_CHECKS) + FUZZ_CHECKS.index(name))
        result = _CHECKERS[name](rng, cfg)
        if result is None:
            out.append((name, False, None))
            continue
        inst, problem = result
        violation = FuzzViolation(index, name, problem, serialize_instance(inst)) if problem else None
        out.append((name, True, violation))
    return out


def fuzz(
    seed: int,
    count: int,
    n_max: int = 12,
    k_min: int = 2,
    k_max: int = 6,
    beta: Fraction | None = None,
    min_size: Fraction | None = None,
    checks: Sequence[str] = FUZZ_CHECKS,
    workers: int = 1,
) -> FuzzReport:
    """Seeded random instances checked against the proven upper bounds.

    Instance ``i`` of check ``c`` depends only on (seed, i, c).  Violations are
    findings: they are collected with a full instance dump, never raised.
    """
    unknown = set(checks) - set(FUZZ_CHECKS)
    if unknown:
        raise ValueError(f"unknown fuzz checks: {sorted(unknown)}")
    if n_max > exact.DEFAULT_LIMIT:
        raise ValueError(f"n_max above {exact.DEFAULT_LIMIT} would leave optima uncertified")
    cfg = FuzzConfig(n_max, k_min, k_max, None if beta is None else F(beta), None if min_size is None else F(min_size))
    report = FuzzReport(seed, count, {c: 0 for c in checks})
    jobs = [(seed, i, tuple(checks), cfg) for i in range(count)]
    if workers > 1 and count > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_fuzz_one, jobs, chunksize=32))
    else:
        results = [_fuzz_one(j) for j in jobs]
    for per_index in results:
        for name, ran, violation in per_index:
            report.checked[name] += ran
            if violation is not None:
                report.violations.append(violation)
    return report
