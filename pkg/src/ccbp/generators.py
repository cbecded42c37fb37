"""Deterministic builders for the adversarial lower-bound constructions.

Each builder returns a :class:`GeneratedScenario`: the instance in the
arrival order the construction prescribes, the construction's own optimal
packing with a certificate, the closed-form cost that the designated
procedure must reproduce, and the asymptotic ratio the family approaches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .core import HALF, ZERO, Instance, Item, OptCertificate, Packing, validate_packing
from .exact import certify

F = Fraction


class GeneratorError(ValueError):
    pass


@dataclass(frozen=True)
class GeneratedScenario:
    kind: str
    params: dict
    instance: Instance
    opt_cert: OptCertificate
    predicted_cost: int
    target_ratio: Fraction
    procedures: tuple[str, ...]
    notes: str = ""

    @property
    def opt_cost(self) -> int:
        return self.opt_cert.cost

    @property
    def predicted_ratio(self) -> Fraction:
        return F(self.predicted_cost, self.opt_cost) if self.opt_cost else F(1)


class _Builder:
    def __init__(self):
        self.items: list[Item] = []

    def add(self, size, cluster=None, batch=None) -> int:
        iid = len(self.items)
        self.items.append(Item(iid, F(size), cluster, batch))
        return iid

    def add_many(self, count: int, size, cluster=None, batch=None) -> list[int]:
        return [self.add(size, cluster, batch) for _ in range(count)]


def _finish(kind, params, b: _Builder, k, opt_groups, predicted, target, procedures, beta=None, d=1, notes=""):
    inst = Instance(tuple(b.items), k, beta, d, name=kind)
    packing = Packing.from_ids(inst, opt_groups)
    report = validate_packing(inst, packing)
    if not report.valid:
        raise AssertionError(f"{kind}: construction packing invalid: {report.violations[:3]}")
    return GeneratedScenario(kind, dict(params), inst, certify(packing), predicted, target, procedures, notes)


def decimal_below(bound: Fraction) -> Fraction:
    """Largest 1/10^j strictly below ``bound`` (for default epsilons)."""
    j = 0
    while F(1, 10**j) >= bound:
        j += 1
    return F(1, 10**j)


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise GeneratorError(msg)


# ---------------------------------------------------------------------------
# Price of clustering


def gen_poc_general(k: int, N: int, beta: Fraction | None = None) -> GeneratedScenario:
    """Clustered optimum 2(N(2k-1)-1) against a global optimum of N(k+1)."""
    _require(k >= 2, "k >= 2 required")
    _require(N > k, "N > k required")
    if beta is not None:
        beta = F(beta)
        _require(math.floor(1 / beta) == 1, "gen_poc_general covers t = 1 only")
        _require(N > 1 / (beta - HALF), "N > 1/(beta - 1/2) required")
    eps = F(1, N**5)
    m = N * (k + 1)
    b = _Builder()
    cluster = 0
    tiny = []
    for _ in range(N * (k - 2)):
        cluster += 1
        tiny += b.add_many(k + 1, eps, cluster)
    big, low = {}, {}
    for i in range(3, m + 1):
        cluster += 1
        big[i] = b.add(HALF + k * i * eps, cluster)
        low[i - 2] = b.add(HALF - k * (i - 1) * eps, cluster)
    cluster += 1
    big[1] = b.add(HALF + k * eps, cluster)
    big[2] = b.add(HALF + 2 * k * eps, cluster)
    low[m - 1] = b.add(HALF - k * m * eps, cluster)
    low[m] = b.add(HALF - k * (m + 1) * eps, cluster)

    groups = [[big[i], low[i], *tiny[(i - 1) * (k - 2) : i * (k - 2)]] for i in range(1, m + 1)]
    clusters = N * (2 * k - 1) - 1
    assert cluster == clusters
    return _finish(
        "poc_general", {"k": k, "N": N, "beta": beta}, b, k, groups,
        2 * clusters, F(4 * k - 2, k + 1), ("clustered_cost",), beta,
    )


def gen_poc_parametric(k: int, t: int, N: int, beta: Fraction | None = None) -> GeneratedScenario:
    """Parametric price of clustering: target (4k-2t)/(k+1) for t < k, 2k/(k+1) for t >= k."""
    _require(k >= 2 and t >= 2, "k >= 2 and t >= 2 required")
    beta = F(1, t) if beta is None else F(beta)
    _require(math.floor(1 / beta) == t, f"beta={beta} does not have floor(1/beta) = {t}")
    b = _Builder()
    params = {"k": k, "t": t, "N": N, "beta": beta}
    if t >= k:
        # every size is 1/t, so no precondition on N beyond N >= 1
        _require(N >= 1, "N >= 1 required")
        ids = []
        for c in range(1, k * N + 1):
            ids += b.add_many(k + 1, F(1, t), c)
        groups = [ids[j : j + k] for j in range(0, len(ids), k)]
        return _finish(
            "poc_parametric", params, b, k, groups, 2 * k * N, F(2 * k, k + 1), ("clustered_cost",), beta,
        )

    _require(N > k, "N > k required")
    _require(N > 1 / (beta - F(1, t + 1)), "N > 1/(beta - 1/(t+1)) required")
    eps = F(1, N**5)
    plate = F(1, t + 1)
    m = N * (k + 1)
    cluster = 0
    tiny, plates = [], []
    for _ in range(N * (k - t - 1)):
        cluster += 1
        tiny += b.add_many(k + 1, eps, cluster)
    big, low = {}, {}
    for i in range(3, m + 1):
        cluster += 1
        big[i] = b.add(plate + k * i * eps, cluster)
        low[i - 2] = b.add(plate - k * (i - 1) * eps, cluster)
        plates += b.add_many(t - 1, plate, cluster)
    cluster += 1
    big[1] = b.add(plate + k * eps, cluster)
    big[2] = b.add(plate + 2 * k * eps, cluster)
    low[m - 1] = b.add(plate - k * m * eps, cluster)
    low[m] = b.add(plate - k * (m + 1) * eps, cluster)
    plates += b.add_many(2 * t - 2, plate, cluster)
    clusters = N * (2 * k - t) - 1
    assert cluster == clusters

    s, p = k - t - 1, t - 1
    groups = [
        [big[i], low[i], *plates[(i - 1) * p : i * p], *tiny[(i - 1) * s : i * s]] for i in range(1, m + 1)
    ]
    return _finish(
        "poc_parametric", params, b, k, groups, 2 * clusters, F(4 * k - 2 * t, k + 1), ("clustered_cost",), beta,
    )


def gen_vp_poc_lower(d: int, N: int) -> GeneratedScenario:
    """dN single-axis clusters of N+1 items with one component 1/N.

    Cardinality plays no role here, so k is set to the number of items.
    """
    _require(d >= 1, "d >= 1 required")
    _require(N > 2, "N > 2 required")
    n = d * N * (N + 1)
    items = []
    groups: list[list[int]] = [[] for _ in range(N + 1)]
    cluster = 0
    for axis in range(d):
        for j in range(N):
            cluster += 1
            for _ in range(N + 1):
                iid = len(items)
                if d == 1:
                    items.append(Item(iid, F(1, N), cluster))
                else:
                    comps = [ZERO] * d
                    comps[axis] = F(1, N)
                    items.append(Item.vector(iid, comps, cluster))
                # item number m of this axis goes to global bin m mod (N+1)
                groups[(iid - axis * N * (N + 1)) % (N + 1)].append(iid)
    inst = Instance(tuple(items), n, None, d, name="vp_poc_lower")
    packing = Packing.from_ids(inst, groups)
    assert validate_packing(inst, packing).valid
    return GeneratedScenario(
        "vp_poc_lower", {"d": d, "N": N}, inst, certify(packing), 2 * d * N, F(2 * d), ("clustered_cost",)
    )


# ---------------------------------------------------------------------------
# Batched bin packing


def gen_batched(k: int, N: int, q: int) -> GeneratedScenario:
    """Every optimal bin holds one 0.55 item, (for q=3) one 0.4 item, and zeros.

    Batches: 1 = the 0.55 items, 2 = the 0.4 items when q = 3, last = zeros.
    With q = 3 and k = 2 there are no zeros, so only two batches exist.
    """
    _require(k >= 2, "k >= 2 required")
    _require(q in (2, 3), "q must be 2 or 3")
    _require(N > 0 and N % (2 * k) == 0, "N must be a positive multiple of 2k")
    b = _Builder()
    large = b.add_many(N, F(11, 20), batch=1)
    if q == 2:
        zeros = b.add_many((k - 1) * N, ZERO, batch=2)
        groups = [[large[j], *zeros[j * (k - 1) : (j + 1) * (k - 1)]] for j in range(N)]
        predicted = N + (k - 1) * N // k
        target = 2 - F(1, k)
    else:
        medium = b.add_many(N, F(2, 5), batch=2)
        zeros = b.add_many((k - 2) * N, ZERO, batch=3)
        groups = [[large[j], medium[j], *zeros[j * (k - 2) : (j + 1) * (k - 2)]] for j in range(N)]
        predicted = N + (k - 2) * N // k + N // 2
        target = F(5, 2) - F(2, k)
    return _finish("batched", {"k": k, "N": N, "q": q}, b, k, groups, predicted, target, ("batched_cost",))


def gen_batched_halves(q: int) -> GeneratedScenario:
    """q items of size 1/2, one per batch, k = 2."""
    _require(q >= 1, "q >= 1 required")
    b = _Builder()
    ids = [b.add(HALF, batch=j) for j in range(1, q + 1)]
    groups = [ids[j : j + 2] for j in range(0, q, 2)]
    return _finish("batched_halves", {"q": q}, b, 2, groups, q, F(3, 2), ("batched_cost",))


# ---------------------------------------------------------------------------
# Next Fit and Worst Fit


def gen_nf_lower(k: int, N: int, eps: Fraction | None = None) -> GeneratedScenario:
    """Next Fit uses N(k-2)/k + 2N - 3 bins against an optimum of N."""
    _require(k >= 2, "k >= 2 required")
    _require(N >= 4 and N % k == 0, "N >= 4 divisible by k required")
    eps = decimal_below(F(1, 10 * N)) if eps is None else F(eps)
    _require(ZERO < eps < F(1, 10 * N), "0 < eps < 1/(10N) required")
    b = _Builder()
    smalls = b.add_many(N * (k - 2), eps / k)
    large, medium = {}, {}
    for i in range(1, N - 1):
        large[N + 1 - i] = b.add(HALF + (N + 1 - i) * eps)
        medium[N - 1 - i] = b.add(HALF - (N - 1 - i) * eps)
    large[2] = b.add(HALF + 2 * eps)

    groups = [[large[i + 1], medium[i + 2]] for i in range(1, N - 3)]
    groups += [[large[N - 2]], [large[N - 1]], [large[N]], [medium[2], medium[1]]]
    for j, g in enumerate(groups):
        g += smalls[j * (k - 2) : (j + 1) * (k - 2)]
    predicted = N * (k - 2) // k + 2 * N - 3
    return _finish(
        "nf_lower", {"k": k, "N": N, "eps": eps}, b, k, groups, predicted, 3 - F(2, k), ("next_fit",)
    )


def gen_wf_lower(k: int, N: int, eps: Fraction | None = None) -> GeneratedScenario:
    """Worst Fit uses N(k-3)/k + N + (N-1) bins against an optimum of N (k >= 3)."""
    _require(k >= 3, "k >= 3 required (use gen_wf_k2_lower for k = 2)")
    _require(N >= 1 and N % k == 0, "N divisible by k required")
    eps = decimal_below(F(1, 10 * N)) if eps is None else F(eps)
    _require(ZERO < eps < F(1, 10 * N), "0 < eps < 1/(10N) required")
    delta = eps / 2 ** (N + 4)
    b = _Builder()
    smalls = b.add_many(N * (k - 3), delta / k)
    large, medium = {}, {}
    for i in range(1, N + 1):
        large[i] = b.add(HALF - eps / 2**i)
        medium[i] = b.add(F(5, 3) * eps / 2**i)
    huge = b.add_many(N - 1, HALF + delta)

    groups = [[huge[i - 1], large[i], medium[i + 1]] for i in range(1, N)]
    groups.append([large[N], medium[1]])
    for j, g in enumerate(groups):
        g += smalls[j * (k - 3) : (j + 1) * (k - 3)]
    predicted = N * (k - 3) // k + N + (N - 1)
    return _finish(
        "wf_lower", {"k": k, "N": N, "eps": eps}, b, k, groups, predicted, 3 - F(3, k), ("worst_fit",)
    )


def gen_wf_k2_lower(N: int) -> GeneratedScenario:
    """2N items of size 2/5 followed by 2N items of size 3/5, k = 2."""
    _require(N >= 0, "N >= 0 required")
    b = _Builder()
    small = b.add_many(2 * N, F(2, 5))
    big = b.add_many(2 * N, F(3, 5))
    groups = [[small[j], big[j]] for j in range(2 * N)]
    return _finish("wf_k2_lower", {"N": N}, b, 2, groups, 3 * N, F(3, 2), ("worst_fit",))


def gen_beta04_lower(k: int, N: int, M: int, eps: Fraction | None = None) -> GeneratedScenario:
    """beta = 2/5: Next Fit and Worst Fit both put exactly one ~0.4 item and
    one ~0.2 item into each non-zero bin.

    Item classes are indexed by j = M..0: the ~0.4 items have size
    0.4 - 3^(2j-1) eps and the ~0.2 items 0.2 + 3^(2j) eps.
    """
    _require(k >= 4, "k >= 4 required")
    _require(N >= 1 and N % k == 0, "N divisible by k required")
    _require(M >= 1, "M >= 1 required")
    eps = decimal_below(F(1, 100 * 9**M)) if eps is None else F(eps)
    _require(ZERO < eps and 9**M * eps < F(1, 100), "3^(2M) eps < 1/100 required")
    beta = F(2, 5)
    fifth = F(1, 5)
    delta = N * sum(3**i for i in range(M + 1))
    n_zeros = (k - 4) * delta + N * (3**M + 1)

    def count(j: int) -> int:
        return N * 3 ** (M - j + 1) if j >= 1 else N * 3**M

    b = _Builder()
    zeros = b.add_many(n_zeros, ZERO)
    near4: dict[int, list[int]] = {}
    near2: dict[int, list[int]] = {}
    for j in range(M, -1, -1):
        near4[j], near2[j] = [], []
        for _ in range(count(j)):
            near4[j].append(b.add(2 * fifth - F(3) ** (2 * j - 1) * eps))
            near2[j].append(b.add(fifth + 3 ** (2 * j) * eps))

    groups = []
    take = {("4", j): iter(near4[j]) for j in near4} | {("2", j): iter(near2[j]) for j in near2}
    zero_it = iter(zeros)

    def grab(cls: str, j: int, n: int) -> list[int]:
        return [next(take[(cls, j)]) for _ in range(n)]

    for _ in range(N):
        groups.append(grab("2", M, 3) + [next(zero_it) for _ in range(k - 3)])
    for i in range(1, M):
        for _ in range(3**i * N):
            groups.append(grab("2", M - i, 3) + grab("4", M - i + 1, 1) + [next(zero_it) for _ in range(k - 4)])
    for _ in range(3**M * N):
        groups.append(grab("2", 0, 1) + grab("4", 0, 1) + grab("4", 1, 1) + [next(zero_it) for _ in range(k - 3)])
    assert len(groups) == delta and next(zero_it, None) is None

    pair_bins = sum(count(j) for j in range(M + 1))
    predicted = n_zeros // k + pair_bins
    return _finish(
        "beta04_lower", {"k": k, "N": N, "M": M, "eps": eps, "Delta": delta}, b, k, groups, predicted,
        F(8, 3) - F(10, 3 * k), ("next_fit", "worst_fit"), beta,
    )


def gen_beta041_instance(k: int, N: int) -> GeneratedScenario:
    """beta = 41/100 family on which Worst Fit beats the beta = 2/5 bound for k >= 6."""
    _require(k >= 6, "k >= 6 required")
    _require(N >= 1 and N % k == 0, "N divisible by k required")
    beta = F(41, 100)
    b = _Builder()
    zeros = b.add_many((13 * k - 45) * N, ZERO)
    a4099, a1804, a0902, a41, a1801 = [], [], [], [], []
    for _ in range(10 * N):
        a4099.append(b.add(F(4099, 10000)))
        a1804.append(b.add(F(1804, 10000)))
    for _ in range(N):
        a4099.append(b.add(F(4099, 10000)))
        a0902.append(b.add(F(902, 10000)))
        a0902.append(b.add(F(902, 10000)))
    for _ in range(11 * N):
        a41.append(b.add(F(41, 100)))
        a1801.append(b.add(F(1801, 10000)))

    zero_it = iter(zeros)
    groups = [[a41[j], a4099[j], a1801[j], *(next(zero_it) for _ in range(k - 3))] for j in range(11 * N)]
    groups += [
        [*a1804[5 * j : 5 * j + 5], a0902[j], *(next(zero_it) for _ in range(k - 6))] for j in range(2 * N)
    ]
    predicted = (13 * k - 45) * N // k + 22 * N
    return _finish(
        "beta041", {"k": k, "N": N}, b, k, groups, predicted, (35 - F(45, k)) / 13,
        ("worst_fit", "next_fit"), beta,
    )


# ---------------------------------------------------------------------------
# First Fit, parametric case


@dataclass(frozen=True)
class CoreSequence:
    """Zero-free item sequence for the parametric First Fit bound.

    ``opt_bins`` lists, per optimal bin, indices into ``sizes`` (at most t+1
    per bin, N bins); ``ff_bins`` is the number of bins First Fit uses on the
    sequence when it starts after full bins.
    """

    sizes: tuple[Fraction, ...]
    opt_bins: tuple[tuple[int, ...], ...]
    ff_bins: int
    name: str = ""


CorePlugin = Callable[[int, int, int], CoreSequence]


def mix_core(N: int, t: int, k: int) -> CoreSequence:
    """N items of 1/(t+1) - t*delta, then tN items of 1/(t+1) + delta.

    First Fit fills bins with t+1 of the small ones; a partially filled last
    small bin (r = N mod (t+1) items) still absorbs t+1-r large ones; the rest
    go t per bin.  This does not reach the tight (t+1)/t core.
    """
    delta = decimal_below(F(1, t * (t + 1) ** 2 * (t + 2)))
    small = F(1, t + 1) - t * delta
    big = F(1, t + 1) + delta
    sizes = (small,) * N + (big,) * (t * N)
    opt = tuple((j, *range(N + j * t, N + (j + 1) * t)) for j in range(N))
    r = N % (t + 1)
    absorbed = t + 1 - r if r else 0
    ff = -(-N // (t + 1)) + -(-(t * N - absorbed) // t)
    return CoreSequence(sizes, opt, ff, "mix")


def gen_ff_param_lower(
    k: int, t: int, N: int, core: CorePlugin = mix_core, beta: Fraction | None = None
) -> GeneratedScenario:
    """N(k-t-1) zeros first (N(k-t-1)/k full bins under First Fit), then the core."""
    _require(t >= 2, "t >= 2 required")
    _require(k > t, "k > t required (for k <= t First Fit is optimal)")
    _require(N >= 1 and N % k == 0, "N divisible by k required")
    beta = F(1, t) if beta is None else F(beta)
    _require(math.floor(1 / beta) == t, f"beta={beta} does not have floor(1/beta) = {t}")
    seq = core(N, t, k)
    _require(len(seq.opt_bins) == N, "core must describe N optimal bins")
    b = _Builder()
    zeros = b.add_many(N * (k - t - 1), ZERO)
    core_ids = [b.add(s) for s in seq.sizes]
    z = k - t - 1
    groups = [[core_ids[i] for i in ob] + zeros[j * z : (j + 1) * z] for j, ob in enumerate(seq.opt_bins)]
    zero_bins = N * z // k
    return _finish(
        "ff_param_lower", {"k": k, "t": t, "N": N, "beta": beta, "core": seq.name}, b, k, groups,
        zero_bins + seq.ff_bins, 1 + F((k - t) * (t + 1), k * t), ("first_fit",), beta,
    )


GENERATORS: dict[str, Callable[..., GeneratedScenario]] = {
    "poc_general": gen_poc_general,
    "poc_parametric": gen_poc_parametric,
    "vp_poc_lower": gen_vp_poc_lower,
    "batched": gen_batched,
    "batched_halves": gen_batched_halves,
    "nf_lower": gen_nf_lower,
    "wf_lower": gen_wf_lower,
    "wf_k2_lower": gen_wf_k2_lower,
    "beta04_lower": gen_beta04_lower,
    "beta041": gen_beta041_instance,
    "ff_param_lower": gen_ff_param_lower,
}


def generate(kind: str, **params) -> GeneratedScenario:
    try:
        fn = GENERATORS[kind]
    except KeyError:
        raise GeneratorError(f"unknown scenario kind {kind!r}") from None
    return fn(**params)
