"""Instance-difficulty statistics: ranks, deciles, correlations, scaling fits, portfolios.

Difficulty measures and their direction:

* ``qw``: window-averaged success probability ``p_avg``; lower is harder.
* ``aqc``: anneal time ``t99``; higher is harder, not-found (``inf``) hardest.
* ``classical``: branch-and-bound problem calls ``n_calls``; higher is harder.
"""

from __future__ import annotations

import dataclasses
import math
from collections.abc import Callable, Iterable, Mapping, Sequence

import numpy as np
from scipy import stats

from .errors import DegenerateInput, MissingMeasure

MEASURES = ("qw", "aqc", "classical")
PERCENTILES = (10, 20, 30, 40, 50, 60, 70, 80, 90, 99)
LOG_BASE = 2


@dataclasses.dataclass(frozen=True)
class DifficultyRecord:
    instance_id: str
    n: int
    p_avg: float | None = None
    t99: float | None = None  # math.inf when the search gave up
    n_calls: int | None = None
    satisfiable: bool | None = None
    p_infinity: float | None = None

    def value(self, measure: str):
        """Raw value of a difficulty measure, or None when absent."""
        if measure == "qw":
            return self.p_avg
        if measure == "aqc":
            return self.t99
        if measure == "classical":
            return self.n_calls
        if measure == "pinf":
            return self.p_infinity
        raise ValueError(f"unknown measure {measure!r}")


@dataclasses.dataclass(frozen=True)
class DecilePartition:
    measure: str
    n: int
    decile_of: dict[str, int]
    top1pct: frozenset[str]
    boundary_ids: dict[int, str]
    order: tuple[str, ...]  # easiest first


@dataclasses.dataclass(frozen=True)
class ScalingFit:
    kappa: float
    stderr: float
    intercept: float
    axis_mode: str
    points: tuple[tuple[float, float], ...]
    residuals: tuple[float, ...]
    base: int = LOG_BASE

    def predict(self, n: float) -> float:
        x = n if self.axis_mode == "log-linear" else math.log(n, self.base)
        return self.base ** (self.intercept + self.kappa * x)


@dataclasses.dataclass(frozen=True)
class CorrelationReport:
    measure_x: str
    measure_y: str
    n: int
    rho: float
    sample_size: int


def spearman(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Spearman's rho as the Pearson correlation of average ranks."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or x.size < 2:
        raise DegenerateInput(f"spearman needs two equal-length lists of >= 2 values, got {x.shape} and {y.shape}")
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise DegenerateInput("spearman is undefined for a constant list")
    rx = stats.rankdata(x) - (x.size + 1) / 2
    ry = stats.rankdata(y) - (y.size + 1) / 2
    rho = float(rx @ ry / math.sqrt((rx @ rx) * (ry @ ry)))
    return max(-1.0, min(1.0, rho))


def _sort_key(measure: str) -> Callable[[DifficultyRecord], tuple]:
    def key(rec):
        value = rec.value(measure)
        if value is None:
            raise MissingMeasure(f"record {rec.instance_id} has no {measure} value")
        if measure == "qw":
            return (-value, rec.instance_id)
        return (value, rec.instance_id)

    return key


def _single_n(records: Sequence[DifficultyRecord]) -> int:
    sizes = {r.n for r in records}
    if len(sizes) != 1:
        raise DegenerateInput(f"records must share one n, got {sorted(sizes)}")
    return sizes.pop()


def rank_by_difficulty(records: Iterable[DifficultyRecord], measure: str) -> list[str]:
    """Instance ids from least to most difficult; ties broken by instance id."""
    records = list(records)
    if not records:
        return []
    _single_n(records)
    return [r.instance_id for r in sorted(records, key=_sort_key(measure))]


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def partition_deciles(records: Iterable[DifficultyRecord], measure: str) -> DecilePartition:
    records = list(records)
    total = len(records)
    if total < 100:
        raise DegenerateInput(f"decile partition needs at least 100 records, got {total}", "too-few-records")
    n = _single_n(records)
    order = rank_by_difficulty(records, measure)
    decile_of = {}
    for k in range(1, 11):
        for rank in range(_ceil_div((k - 1) * total, 10) + 1, _ceil_div(k * total, 10) + 1):
            decile_of[order[rank - 1]] = k
    boundary = {p: order[_ceil_div(p * total, 100) - 1] for p in PERCENTILES}
    top = frozenset(order[_ceil_div(99 * total, 100):])
    return DecilePartition(measure, n, decile_of, top, boundary, tuple(order))


def scaling_fit(points: Sequence[tuple[float, float]], axis_mode: str = "log-linear") -> ScalingFit:
    """Least-squares line through ``log2(value)`` against ``n`` or ``log2(n)``."""
    if axis_mode not in ("log-linear", "log-log"):
        raise ValueError(f"unknown axis mode {axis_mode!r}")
    pts = [(float(a), float(b)) for a, b in points]
    if len(pts) < 3:
        raise DegenerateInput(f"scaling fit needs at least 3 points, got {len(pts)}", "insufficient-points")
    if any(not v > 0 for _, v in pts):
        raise DegenerateInput("scaling fit needs positive values", "nonpositive-value")
    x = np.array([p[0] for p in pts])
    if axis_mode == "log-log":
        x = np.log2(x)
    y = np.log2([p[1] for p in pts])
    xm, ym = x.mean(), y.mean()
    sxx = float(((x - xm) ** 2).sum())
    if sxx == 0:
        raise DegenerateInput("scaling fit needs at least two distinct n", "insufficient-points")
    slope = float(((x - xm) * (y - ym)).sum() / sxx)
    intercept = float(ym - slope * xm)
    residuals = y - (intercept + slope * x)
    dof = len(pts) - 2
    stderr = math.sqrt(float((residuals**2).sum()) / dof / sxx)
    return ScalingFit(slope, stderr, intercept, axis_mode, tuple(pts), tuple(float(r) for r in residuals))


def lower_median(values: Iterable[float]) -> float:
    vals = sorted(values)
    if not vals:
        raise DegenerateInput("median of an empty group")
    return vals[(len(vals) - 1) // 2]


def group_members(partition: DecilePartition) -> dict[str, list[str]]:
    groups: dict[str, list[str]] = {f"d{k}": [] for k in range(1, 11)}
    for ident in partition.order:
        groups[f"d{partition.decile_of[ident]}"].append(ident)
    groups["top1"] = [i for i in partition.order if i in partition.top1pct]
    return groups


def cross_decile_medians(
    records_by_n: Mapping[int, Sequence[DifficultyRecord]],
    group_measure: str,
    report_measure: str,
) -> dict[str, list[tuple[int, float]]]:
    """Median of ``report_measure`` within each ``group_measure`` decile and the top 1%.

    Returns group label (``d1`` .. ``d10``, ``top1``) to a list of ``(n, median)``.
    """
    series: dict[str, list[tuple[int, float]]] = {}
    for n in sorted(records_by_n):
        recs = records_by_n[n]
        part = partition_deciles(recs, group_measure)
        by_id = {r.instance_id: r for r in recs}
        for label, members in group_members(part).items():
            values = []
            for ident in members:
                v = by_id[ident].value(report_measure)
                if v is None:
                    raise MissingMeasure(f"record {ident} has no {report_measure} value")
                values.append(v)
            series.setdefault(label, []).append((n, lower_median(values)))
    return series


def correlation(records: Sequence[DifficultyRecord], measure_x: str, measure_y: str) -> CorrelationReport:
    """Spearman correlation over records where both measures are present and finite."""
    pairs = [
        (r.value(measure_x), r.value(measure_y))
        for r in records
        if r.value(measure_x) is not None
        and r.value(measure_y) is not None
        and math.isfinite(r.value(measure_x))
        and math.isfinite(r.value(measure_y))
    ]
    n = _single_n(records)
    rho = spearman([p[0] for p in pairs], [p[1] for p in pairs])
    return CorrelationReport(measure_x, measure_y, n, rho, len(pairs))


# -- satisfiability split ----------------------------------------------------------

SAT_QUANTITIES = ("p_avg", "t99", "log10_t99", "n_calls", "log10_n_calls")


@dataclasses.dataclass(frozen=True)
class Histogram:
    edges: tuple[float, ...]
    density: tuple[float, ...]

    @property
    def mass(self) -> float:
        widths = np.diff(self.edges)
        return float((np.asarray(self.density) * widths).sum())


def density_histogram(values: Sequence[float], bins="fd") -> Histogram:
    vals = np.asarray(values, dtype=float)
    if vals.size == 0:
        return Histogram((), ())
    if vals.min() == vals.max():
        edges = np.array([vals[0] - 0.5, vals[0] + 0.5])
    else:
        edges = np.histogram_bin_edges(vals, bins=bins)
    density, edges = np.histogram(vals, bins=edges, density=True)
    return Histogram(tuple(float(e) for e in edges), tuple(float(d) for d in density))


def _quantity(rec: DifficultyRecord, name: str):
    if name == "p_avg":
        return rec.p_avg
    if name in ("t99", "log10_t99"):
        if rec.t99 is None or not math.isfinite(rec.t99):
            return None
        return rec.t99 if name == "t99" else math.log10(rec.t99)
    if name in ("n_calls", "log10_n_calls"):
        if rec.n_calls is None:
            return None
        return rec.n_calls if name == "n_calls" else math.log10(rec.n_calls)
    raise ValueError(name)


@dataclasses.dataclass(frozen=True)
class SatSplit:
    sat_ids: tuple[str, ...]
    unsat_ids: tuple[str, ...]
    medians: dict[tuple[str, str], float | None]  # (group, quantity) -> median
    histograms: dict[tuple[str, str], Histogram]
    empty_groups: tuple[str, ...]


def split_by_satisfiability(records: Sequence[DifficultyRecord], bins="fd") -> SatSplit:
    missing = [r.instance_id for r in records if r.satisfiable is None]
    if missing:
        raise MissingMeasure(f"satisfiability flag missing for {missing[0]}")
    groups = {
        "sat": [r for r in records if r.satisfiable],
        "unsat": [r for r in records if not r.satisfiable],
    }
    medians, hists = {}, {}
    for g, recs in groups.items():
        for q in SAT_QUANTITIES:
            vals = [v for v in (_quantity(r, q) for r in recs) if v is not None]
            medians[(g, q)] = lower_median(vals) if vals else None
            hists[(g, q)] = density_histogram(vals, bins)
    # unsolved anneals are the hardest, so they count in the t99 median
    for g, recs in groups.items():
        t = [r.t99 for r in recs if r.t99 is not None]
        medians[(g, "t99_with_unsolved")] = lower_median(t) if t else None
    empty = tuple(g for g, recs in groups.items() if not recs)
    return SatSplit(
        tuple(r.instance_id for r in groups["sat"]),
        tuple(r.instance_id for r in groups["unsat"]),
        medians,
        hists,
        empty,
    )


def heatmap(records: Sequence[DifficultyRecord], measure_x: str, measure_y: str, bins: int = 20):
    """2-D counts of log10 values; records missing either measure (or not-found) are dropped."""
    xs, ys = [], []
    for r in records:
        x, y = r.value(measure_x), r.value(measure_y)
        if x is None or y is None or not (math.isfinite(x) and math.isfinite(y)) or x <= 0 or y <= 0:
            continue
        xs.append(math.log10(x))
        ys.append(math.log10(y))
    if not xs:
        return np.zeros((0, 0)), np.zeros(0), np.zeros(0)
    counts, xe, ye = np.histogram2d(xs, ys, bins=bins)
    return counts, xe, ye


# -- portfolios -------------------------------------------------------------------


def default_cost(measure: str, rec: DifficultyRecord) -> float:
    """Native cost units: repeats ``1 / p_avg`` for QW, ``t99`` for AQC, calls for classical."""
    value = rec.value(measure)
    if value is None:
        raise MissingMeasure(f"record {rec.instance_id} has no {measure} cost", "missing-cost")
    if measure == "qw":
        return math.inf if value <= 0 else 1.0 / value
    return float(value)


@dataclasses.dataclass(frozen=True)
class PortfolioSummary:
    measures: tuple[str, str]
    normalizer: str
    instance_ids: tuple[str, ...]
    cost_a: np.ndarray
    cost_b: np.ndarray
    portfolio: np.ndarray
    speedup_vs_a: np.ndarray
    speedup_vs_b: np.ndarray

    def stats(self) -> dict[str, float]:
        out = {}
        for name, arr in (("a", self.cost_a), ("b", self.cost_b), ("portfolio", self.portfolio)):
            out[f"{name}_total"] = float(arr.sum())
            out[f"{name}_median"] = float(lower_median(arr))
            out[f"{name}_max"] = float(arr.max())
        for name, arr in (("vs_a", self.speedup_vs_a), ("vs_b", self.speedup_vs_b)):
            out[f"speedup_{name}_median"] = float(lower_median(arr))
            out[f"speedup_{name}_max"] = float(arr.max())
            out[f"speedup_{name}_min"] = float(arr.min())
        return out


def portfolio_eval(
    records: Sequence[DifficultyRecord],
    measure_a: str,
    measure_b: str,
    normalizer: str | Mapping[str, float] = "median",
    cost_a: Callable[[DifficultyRecord], float] | None = None,
    cost_b: Callable[[DifficultyRecord], float] | None = None,
) -> PortfolioSummary:
    """Two algorithms run side by side on half the resources each.

    The per-instance portfolio cost is ``2 * min(a, b)`` after normalization.
    ``normalizer`` is ``"median"`` (divide each cost by its median over the
    records, which should share one n), ``"raw"`` (native units), or a mapping
    from measure to a fixed divisor.
    """
    if not records:
        raise DegenerateInput("portfolio evaluation needs records")
    fa = cost_a or (lambda r: default_cost(measure_a, r))
    fb = cost_b or (lambda r: default_cost(measure_b, r))
    a = np.array([fa(r) for r in records], dtype=float)
    b = np.array([fb(r) for r in records], dtype=float)

    def divisor(measure, arr):
        if normalizer == "raw":
            return 1.0
        if normalizer == "median":
            return float(lower_median(arr))
        return float(normalizer[measure])

    if normalizer == "median":
        _single_n(records)
    a = a / divisor(measure_a, a)
    b = b / divisor(measure_b, b)
    port = 2.0 * np.minimum(a, b)
    with np.errstate(invalid="ignore"):
        sa = np.where(np.isinf(a) & np.isinf(port), 1.0, a / port)
        sb = np.where(np.isinf(b) & np.isinf(port), 1.0, b / port)
    label = normalizer if isinstance(normalizer, str) else "fixed"
    return PortfolioSummary((measure_a, measure_b), label, tuple(r.instance_id for r in records), a, b, port, sa, sb)
