"""Dataset generation, solver batches, analysis bundles, and oracle checks.

Layout under ``config.output_dir``::

    datasets/<name>/          one .cnf per instance + manifest.tsv (+ generation.txt)
    results/<name>/<solver>.jsonl
    analysis/fig*.csv, appendix_pinf.csv, summary.txt

Generated datasets are named ``n<n>``.  Every results file starts with a
header line carrying the config hash and dataset hash.
"""

from __future__ import annotations

import concurrent.futures
import csv
import hashlib
import io
import json
import math
import time
from collections.abc import Iterable, Sequence
from pathlib import Path

import numpy as np

from . import __version__
from .analytics import (
    PERCENTILES,
    DifficultyRecord,
    correlation,
    cross_decile_medians,
    density_histogram,
    heatmap,
    partition_deciles,
    portfolio_eval,
    scaling_fit,
    split_by_satisfiability,
    SAT_QUANTITIES,
)
from .classical import mixbandb_solve, two_sat_satisfiable
from .config import RunConfig
from .dynamics import WalkConfig, find_t99, qw_average_probability, qw_infinite_time_average
from .encoding import build_energy_table, build_ising, energy_spread, heuristic_gamma
from .errors import FormatError, M2SError
from .instances import (
    Instance,
    brute_force_optima,
    canonicalize_to_zero,
    count_satisfied,
    dataset_hash,
    derive_seed,
    generate_attempt,
    generate_instance,
    has_unique_optimum,
    index_to_bits,
    instance_rng,
    parse_instance,
    read_dataset,
    read_manifest,
    write_dataset,
)

SOLVERS = ("qw", "aqc", "classical", "twosat")


class DataError(M2SError):
    code = "data-error"


def dataset_dir(config: RunConfig, name: str) -> Path:
    return Path(config.output_dir) / "datasets" / name


def results_path(config: RunConfig, name: str, solver: str) -> Path:
    return Path(config.output_dir) / "results" / name / f"{solver}.jsonl"


# -- gen -----------------------------------------------------------------------------


def _attempt_worker(args):
    n, attempt, seed, factor = args
    return attempt, generate_attempt(n, attempt, seed, factor)


def _pool_map(fn, items, workers: int) -> Iterable:
    """Yield ``fn(item)`` in completion order (input order when ``workers == 1``)."""
    if workers <= 1:
        for item in items:
            yield fn(item)
        return
    with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, item) for item in items]
        for fut in concurrent.futures.as_completed(futures):
            yield fut.result()


def generate(config: RunConfig, n_values: Sequence[int] | None = None) -> dict[int, tuple[int, int]]:
    """Write one dataset per n; returns ``{n: (kept, attempted)}``."""
    summary = {}
    for n in n_values or config.n_values:
        jobs = [(n, a, config.master_seed, config.clause_factor) for a in range(config.target_count)]
        kept = {}
        for attempt, inst in _pool_map(_attempt_worker, jobs, config.workers):
            if inst is not None:
                kept[attempt] = inst
        instances = [kept[a] for a in sorted(kept)]
        target = dataset_dir(config, f"n{n}")
        if target.exists():
            for old in target.glob("*.cnf"):
                old.unlink()
        write_dataset(instances, target)
        (target / "generation.txt").write_text(
            f"n={n}\nattempted={config.target_count}\nkept={len(instances)}\n"
            f"clause_factor={config.clause_factor}\nmaster_seed={config.master_seed}\n",
            encoding="utf-8",
        )
        summary[n] = (len(instances), config.target_count)
    return summary


def ingest(source: str | Path, config: RunConfig, name: str, canonicalize: bool = True) -> int:
    """Copy an external directory of instance files into ``datasets/<name>``.

    Instances lacking an id get ``ext-<file stem>``.  With ``canonicalize``,
    instances that are not yet canonical and have a unique optimum are
    transformed so the all-zeros assignment is optimal.
    """
    source = Path(source)
    files = sorted(p for p in source.iterdir() if p.is_file() and p.suffix in (".cnf", ".txt", ".dimacs"))
    if not files:
        raise DataError(f"no instance files found in {source}")
    instances = []
    for path in files:
        try:
            inst = parse_instance(path.read_text(encoding="utf-8"), default_id=f"ext-{path.stem}")
        except FormatError as exc:
            raise DataError(f"{path.name}: {exc}", exc.code) from exc
        if canonicalize and not inst.canonicalized:
            best, optima = brute_force_optima(inst)
            if len(optima) == 1:
                inst = canonicalize_to_zero(inst, optima[0])
        instances.append(inst)
    write_dataset(instances, dataset_dir(config, name))
    return len(instances)


# -- run -----------------------------------------------------------------------------


def load_dataset(config: RunConfig, name: str) -> tuple[list[Instance], str]:
    path = dataset_dir(config, name)
    if not (path / "manifest.tsv").exists():
        raise DataError(f"dataset {name!r} not found under {path}")
    try:
        instances = read_dataset(path)
    except FormatError as exc:
        raise DataError(f"dataset {name}: {exc}", exc.code) from exc
    return instances, dataset_hash(path)


def resolve_gamma(config: RunConfig, name: str, instances: Sequence[Instance]) -> float:
    """Hopping rate for a dataset: explicit value or the per-n heuristic."""
    if config.gamma != "auto":
        return float(config.gamma)
    if config.gamma_from and config.gamma_from != name:
        other, _ = load_dataset(config, config.gamma_from)
        return resolve_gamma(config, config.gamma_from, other)
    if config.gamma_source == "all" and name.startswith("n") and name[1:].isdigit():
        n = int(name[1:])
        spreads = []
        for a in range(config.target_count):
            raw = generate_instance(n, config.clause_factor * n, instance_rng(derive_seed(config.master_seed, n, a)))
            spreads.append(energy_spread(build_energy_table(raw)))
        return sum(spreads) / len(spreads) / (2 * n)
    return heuristic_gamma([build_energy_table(inst) for inst in instances])


def _solve(job):
    solver, inst, params = job
    try:
        return _solve_inner(solver, inst, params)
    except M2SError as exc:
        return {"instance_id": inst.id, "n": inst.n, "error": exc.code, "message": str(exc)}


def _solve_inner(solver: str, inst: Instance, params: dict) -> dict:
    cfg: RunConfig = params["config"]
    base = {"instance_id": inst.id, "n": inst.n}
    if solver == "twosat":
        return {**base, "satisfiable": two_sat_satisfiable(inst)}
    if solver == "classical":
        rec = mixbandb_solve(inst, cfg.mix)
        return {
            **base,
            "n_calls": rec.n_calls,
            "best_unsatisfied": rec.best_unsatisfied,
            "node_count": rec.node_count,
            "seed": cfg.solver_seed,
            "config_hash": params["config_hash"],
        }
    table = build_energy_table(inst)
    if solver == "qw":
        gamma = params["gamma"]
        res = qw_average_probability(inst, table, WalkConfig(gamma, cfg.window), cfg.integrator)
        out = {
            **base,
            "gamma": gamma,
            "p_avg": res.p_avg,
            "step_count": res.step_count,
            "max_norm_deviation": res.max_norm_deviation,
        }
        if inst.n <= cfg.pinf_max_n:
            out["p_infinity"] = qw_infinite_time_average(inst, table, gamma)
        out.update(tolerance=cfg.rtol, code_version=__version__)
        return out
    if solver == "aqc":
        res = find_t99(
            inst,
            table,
            cfg.t99_t_init,
            cfg.t99_max_doublings,
            cfg.t99_wall_clock or None,
            cfg.integrator,
        )
        return {
            **base,
            "t99": res.t99,
            "found": res.found,
            "bracket": list(res.bracket) if res.bracket else None,
            "probes": [list(p) for p in res.probe_log],
            "reason": res.reason,
            "tolerance": cfg.rtol,
            "code_version": __version__,
        }
    raise ValueError(f"unknown solver {solver!r}")


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, allow_nan=False)


def read_results(path: Path) -> tuple[dict | None, dict[str, dict]]:
    """Header and records keyed by instance id; a truncated final line is ignored."""
    header, records = None, {}
    if not path.exists():
        return header, records
    lines = path.read_text(encoding="utf-8").splitlines()
    for i, line in enumerate(lines):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError:
            if i == len(lines) - 1:
                break
            raise DataError(f"{path}: corrupt line {i + 1}") from None
        if "header" in obj:
            header = obj["header"]
        else:
            records[obj["instance_id"]] = obj
    return header, records


def run_solver(
    config: RunConfig,
    solver: str,
    name: str,
    force: bool = False,
    limit: int | None = None,
) -> tuple[int, int]:
    """Run ``solver`` over dataset ``name``; returns ``(computed, skipped)``.

    Records already present in the results file are kept (resume); the file
    is rewritten sorted by instance id once the batch finishes.
    """
    if solver not in SOLVERS:
        raise ValueError(f"unknown solver {solver!r}")
    instances, dhash = load_dataset(config, name)
    path = results_path(config, name, solver)
    header = {
        "solver": solver,
        "dataset": name,
        "dataset_hash": dhash,
        "config_hash": config.config_hash(),
        "code_version": __version__,
    }
    old_header, done = read_results(path)
    if old_header is not None and not force:
        for key in ("dataset_hash", "config_hash"):
            if old_header.get(key) != header[key]:
                raise DataError(f"{path} was produced with a different {key}; use --force to discard it")
    if old_header is not None and force and any(old_header.get(k) != header[k] for k in ("dataset_hash", "config_hash")):
        done = {}
    todo = [inst for inst in instances if inst.id not in done]
    if limit is not None:
        todo = todo[:limit]
    params = {"config": config, "config_hash": header["config_hash"]}
    if solver == "qw" and todo:
        params["gamma"] = resolve_gamma(config, name, instances)
    path.parent.mkdir(parents=True, exist_ok=True)
    if old_header is None or not done:
        path.write_text(_dump({"header": header}) + "\n", encoding="utf-8")
    elif path.read_bytes()[-1:] != b"\n":
        # drop a partially written final line before appending
        text = path.read_text(encoding="utf-8")
        path.write_text(text[: text.rfind("\n") + 1], encoding="utf-8")
    computed = 0
    with path.open("a", encoding="utf-8") as out:
        for rec in _pool_map(_solve, [(solver, inst, params) for inst in todo], config.workers):
            out.write(_dump(rec) + "\n")
            out.flush()
            done[rec["instance_id"]] = rec
            computed += 1
    lines = [_dump({"header": header})] + [_dump(done[k]) for k in sorted(done)]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return computed, len(instances) - len(todo)


# -- analyze -------------------------------------------------------------------------


def load_records(config: RunConfig, name: str, n: int | None = None, force: bool = False):
    """Merge every solver's results for a dataset into DifficultyRecords.

    Returns ``(records, headers)``; raises DataError when files disagree on the
    dataset or config hash (unless ``force``).
    """
    merged: dict[str, dict] = {}
    headers = {}
    for solver in SOLVERS:
        header, recs = read_results(results_path(config, name, solver))
        if header is None:
            continue
        headers[solver] = header
        for ident, rec in recs.items():
            if "error" in rec:
                continue
            merged.setdefault(ident, {}).update(rec)
    for key in ("dataset_hash", "config_hash"):
        seen = {h[key] for h in headers.values()}
        if len(seen) > 1 and not force:
            raise DataError(f"results for {name} mix {key} values {sorted(seen)}")
    records = []
    for ident in sorted(merged):
        r = merged[ident]
        t99 = None
        if "found" in r:
            t99 = r["t99"] if r["found"] else math.inf
        records.append(
            DifficultyRecord(
                ident,
                r.get("n", n),
                p_avg=r.get("p_avg"),
                t99=t99,
                n_calls=r.get("n_calls"),
                satisfiable=r.get("satisfiable"),
                p_infinity=r.get("p_infinity"),
            )
        )
    return records, headers


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


class _Table:
    def __init__(self, columns):
        self.columns = columns
        self.rows = []

    def add(self, **row):
        self.rows.append([_fmt(row.get(c)) for c in self.columns])

    def render(self, provenance: str) -> str:
        buf = io.StringIO()
        buf.write(provenance)
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        w.writerows(self.rows)
        return buf.getvalue()


def _has(records, measure):
    return bool(records) and all(r.value(measure) is not None for r in records)


def _finite_points(series):
    return [(n, v) for n, v in series if v is not None and math.isfinite(v) and v > 0]


def analyze(config: RunConfig, names: Sequence[str] | None = None, force: bool = False, strict: bool = False) -> Path:
    """Write the CSV bundle and summary report; returns the analysis directory."""
    names = list(names) if names else [f"n{n}" for n in config.n_values]
    by_n: dict[int, list[DifficultyRecord]] = {}
    dhashes = []
    cfg_hashes = set()
    for name in names:
        records, headers = load_records(config, name, force=force)
        if not records:
            if strict:
                raise DataError(f"no results for dataset {name}")
            continue
        n = records[0].n
        by_n[n] = records
        dhashes.append(f"{name}:{next(iter(headers.values()))['dataset_hash']}")
        cfg_hashes.update(h["config_hash"] for h in headers.values())
    if not by_n:
        raise DataError("no results to analyze")
    if len(cfg_hashes) > 1 and not force:
        raise DataError(f"results mix config hashes {sorted(cfg_hashes)}")
    combined = hashlib.sha256("|".join(dhashes).encode()).hexdigest()[:16]
    provenance = (
        f"# dataset_hash={combined} config_hash={','.join(sorted(cfg_hashes))} code_version={__version__}\n"
        f"# datasets={' '.join(dhashes)}\n"
        f"# analysis {config.analysis_settings()}\n"
    )
    out_dir = Path(config.output_dir) / "analysis"
    out_dir.mkdir(parents=True, exist_ok=True)
    summary: list[str] = [provenance.rstrip("\n"), ""]
    ns = sorted(by_n)

    def require(measures, what):
        ok = all(_has(by_n[n], m) for n in ns for m in measures)
        if not ok:
            msg = f"{what}: skipped, missing {'/'.join(measures)} results"
            if strict:
                raise DataError(msg, "missing-measure")
            summary.append(msg)
        return ok

    # correlations and heatmaps
    fig2 = _Table(["n", "measure_x", "measure_y", "x_lo", "x_hi", "y_lo", "y_hi", "count"])
    summary.append("Spearman rank correlations")
    for mx, my in (("qw", "aqc"), ("qw", "classical"), ("aqc", "classical")):
        if not require((mx, my), f"correlation {mx}/{my}"):
            continue
        for n in ns:
            try:
                rep = correlation(by_n[n], mx, my)
                summary.append(f"  n={n} {mx} vs {my}: rho={rep.rho:.4f} (N={rep.sample_size})")
            except M2SError as exc:
                summary.append(f"  n={n} {mx} vs {my}: undefined ({exc})")
            counts, xe, ye = heatmap(by_n[n], mx, my, config.heatmap_bins)
            for i in range(counts.shape[0]):
                for j in range(counts.shape[1]):
                    fig2.add(n=n, measure_x=mx, measure_y=my, x_lo=float(xe[i]), x_hi=float(xe[i + 1]),
                             y_lo=float(ye[j]), y_hi=float(ye[j + 1]), count=int(counts[i, j]))
    (out_dir / "fig2_heatmap.csv").write_text(fig2.render(provenance), encoding="utf-8")

    # percentile boundaries and their scaling
    fig3 = _Table(["row", "measure", "percentile", "n", "instance_id", "value", "kappa", "stderr", "intercept", "base"])
    summary.append("")
    summary.append("Percentile-boundary scaling exponents (log2 value vs n)")
    eligible = [n for n in ns if len(by_n[n]) >= 100]
    for measure in ("qw", "aqc"):
        if not require((measure,), f"percentiles {measure}"):
            continue
        series: dict[int, list[tuple[int, float]]] = {p: [] for p in PERCENTILES}
        for n in eligible:
            part = partition_deciles(by_n[n], measure)
            vals = {r.instance_id: r.value(measure) for r in by_n[n]}
            for p in PERCENTILES:
                ident = part.boundary_ids[p]
                fig3.add(row="point", measure=measure, percentile=p, n=n, instance_id=ident, value=vals[ident])
                series[p].append((n, vals[ident]))
        for p in PERCENTILES:
            pts = _finite_points(series[p])
            if len(pts) >= 3:
                fit = scaling_fit(pts)
                fig3.add(row="fit", measure=measure, percentile=p, kappa=fit.kappa, stderr=fit.stderr,
                         intercept=fit.intercept, base=fit.base)
                summary.append(f"  {measure} p{p}: kappa={fit.kappa:.4f} +- {fit.stderr:.4f}")
    (out_dir / "fig3_percentiles.csv").write_text(fig3.render(provenance), encoding="utf-8")

    # cross-measure decile medians
    fig4 = _Table(["row", "group_measure", "report_measure", "group", "n", "median", "kappa", "stderr", "intercept", "base"])
    summary.append("")
    summary.append("Cross-measure decile medians, scaling exponents")
    for gm, rm in (("aqc", "qw"), ("qw", "aqc"), ("qw", "classical"), ("classical", "qw")):
        if not require((gm, rm), f"cross medians {rm} by {gm}"):
            continue
        series = cross_decile_medians({n: by_n[n] for n in eligible}, gm, rm)
        for label, pts in series.items():
            for n, med in pts:
                fig4.add(row="point", group_measure=gm, report_measure=rm, group=label, n=n, median=med)
            fpts = _finite_points(pts)
            if len(fpts) >= 3:
                fit = scaling_fit(fpts)
                fig4.add(row="fit", group_measure=gm, report_measure=rm, group=label, kappa=fit.kappa,
                         stderr=fit.stderr, intercept=fit.intercept, base=fit.base)
                summary.append(f"  {rm} by {gm} {label}: kappa={fit.kappa:.4f} +- {fit.stderr:.4f}")
    (out_dir / "fig4_cross.csv").write_text(fig4.render(provenance), encoding="utf-8")

    # classical call-count histograms
    fig5 = _Table(["n", "bin_lo", "bin_hi", "density"])
    if require(("classical",), "classical histogram"):
        for n in ns:
            hist = density_histogram([math.log10(r.n_calls) for r in by_n[n]], config.hist_bins)
            for lo, hi, d in zip(hist.edges, hist.edges[1:], hist.density):
                fig5.add(n=n, bin_lo=lo, bin_hi=hi, density=d)
    (out_dir / "fig5_hist.csv").write_text(fig5.render(provenance), encoding="utf-8")

    # satisfiable vs unsatisfiable
    fig6 = _Table(["row", "n", "quantity", "group", "bin_lo", "bin_hi", "density", "median", "count"])
    fig7 = _Table(["row", "measure", "group", "axis_mode", "n", "median", "fitted", "residual", "kappa", "stderr", "intercept", "base"])
    summary.append("")
    summary.append("Satisfiable vs unsatisfiable medians")
    if all(r.satisfiable is not None for n in ns for r in by_n[n]):
        med_series = {}
        for n in ns:
            split = split_by_satisfiability(by_n[n], config.hist_bins)
            for g in split.empty_groups:
                summary.append(f"  n={n}: {g} group empty")
            for q in SAT_QUANTITIES:
                for g in ("sat", "unsat"):
                    hist = split.histograms[(g, q)]
                    for lo, hi, d in zip(hist.edges, hist.edges[1:], hist.density):
                        fig6.add(row="bin", n=n, quantity=q, group=g, bin_lo=lo, bin_hi=hi, density=d)
                    count = len(split.sat_ids if g == "sat" else split.unsat_ids)
                    fig6.add(row="median", n=n, quantity=q, group=g, median=split.medians[(g, q)], count=count)
            for g in ("sat", "unsat"):
                for measure, q in (("qw", "p_avg"), ("aqc", "t99_with_unsolved"), ("classical", "n_calls")):
                    med_series.setdefault((measure, g), []).append((n, split.medians.get((g, q))))
            parts = []
            for measure, q in (("qw", "p_avg"), ("aqc", "t99_with_unsolved"), ("classical", "n_calls")):
                parts.append(f"{measure} {split.medians.get(('sat', q))} / {split.medians.get(('unsat', q))}")
            summary.append(f"  n={n} (sat / unsat): " + "; ".join(parts))
        for (measure, g), pts in sorted(med_series.items()):
            fpts = _finite_points(pts)
            if len(fpts) < 3:
                continue
            for mode in ("log-linear", "log-log"):
                fit = scaling_fit(fpts, mode)
                for (n, med), res in zip(fpts, fit.residuals):
                    fig7.add(row="point", measure=measure, group=g, axis_mode=mode, n=n, median=med,
                             fitted=fit.predict(n), residual=res)
                fig7.add(row="fit", measure=measure, group=g, axis_mode=mode, kappa=fit.kappa, stderr=fit.stderr,
                         intercept=fit.intercept, base=fit.base)
    else:
        msg = "  skipped, missing twosat results"
        if strict:
            raise DataError(msg.strip(), "missing-measure")
        summary.append(msg)
    (out_dir / "fig6_sat_hist.csv").write_text(fig6.render(provenance), encoding="utf-8")
    (out_dir / "fig7_scaling.csv").write_text(fig7.render(provenance), encoding="utf-8")

    # finite vs infinite window
    app = _Table(["n", "instance_id", "p_avg", "p_infinity"])
    summary.append("")
    summary.append("Window average vs infinite-time average")
    for n in ns:
        recs = [r for r in by_n[n] if r.p_avg is not None and r.p_infinity is not None]
        for r in recs:
            app.add(n=n, instance_id=r.instance_id, p_avg=r.p_avg, p_infinity=r.p_infinity)
        if len(recs) >= 2:
            rep = correlation(recs, "qw", "pinf")
            summary.append(f"  n={n}: rho={rep.rho:.4f} (N={rep.sample_size})")
    (out_dir / "appendix_pinf.csv").write_text(app.render(provenance), encoding="utf-8")

    # portfolios
    summary.append("")
    summary.append(f"Portfolios (cost = 2 * min of normalized costs; normalizer={config.portfolio_normalizer})")
    for ma, mb in (("qw", "aqc"), ("qw", "classical"), ("aqc", "classical")):
        if not all(_has(by_n[n], m) for n in ns for m in (ma, mb)):
            continue
        for n in ns:
            st = portfolio_eval(by_n[n], ma, mb, config.portfolio_normalizer).stats()
            summary.append(
                f"  n={n} {ma}+{mb}: max {st['a_max']:.4g}/{st['b_max']:.4g} -> {st['portfolio_max']:.4g}; "
                f"median speedup vs {ma} {st['speedup_vs_a_median']:.4g}, vs {mb} {st['speedup_vs_b_median']:.4g}"
            )
    (out_dir / "summary.txt").write_text("\n".join(summary) + "\n", encoding="utf-8")
    return out_dir


# -- oracle ----------------------------------------------------------------------------


def _check_instance(inst: Instance, config: RunConfig) -> list[str]:
    problems = []
    table = build_energy_table(inst)
    n, m = inst.n, inst.m
    if n <= 12:
        indices = range(1 << n)
    else:
        rng = np.random.default_rng(0)
        indices = sorted({int(i) for i in rng.integers(0, 1 << n, 4096)})
    for k in indices:
        if table.energies[k] != m - count_satisfied(inst, index_to_bits(k, n)):
            problems.append(f"energy table mismatch at assignment {k}")
            break
    if n <= 16 and not np.array_equal(build_ising(inst).diagonal(), table.energies.astype(float)):
        problems.append("Ising reconstruction mismatch")
    if inst.canonicalized and table.energies[0] != table.energies.min():
        problems.append("canonicalized but all-zeros assignment is not optimal")
    if inst.attempt is not None and not has_unique_optimum(inst):
        problems.append("generated instance lacks a unique optimum")
    best = int(table.energies.min())
    rec = mixbandb_solve(inst, config.mix)
    if rec.best_unsatisfied != best:
        problems.append(f"branch and bound found {rec.best_unsatisfied} unsatisfied, brute force {best}")
    elif m - count_satisfied(inst, rec.best_assignment) != best:
        problems.append("branch-and-bound assignment does not achieve its reported value")
    if two_sat_satisfiable(inst) != (best == 0):
        problems.append("2-SAT decision disagrees with brute force")
    return problems


def oracle(config: RunConfig, names: Sequence[str] | None = None) -> tuple[list[str], dict[int, float]]:
    """Cross-check every instance; returns ``(failure lines, mean seconds per instance by n)``."""
    names = list(names) if names else [f"n{n}" for n in config.n_values]
    failures: list[str] = []
    timing: dict[int, list[float]] = {}
    for name in names:
        path = dataset_dir(config, name)
        if not (path / "manifest.tsv").exists():
            raise DataError(f"dataset {name!r} not found under {path}")
        for ident, file in read_manifest(path):
            try:
                inst = parse_instance(file.read_text(encoding="utf-8"), default_id=ident)
            except (FormatError, OSError) as exc:
                failures.append(f"{ident}: unreadable instance file ({exc})")
                continue
            if inst.id != ident:
                failures.append(f"{ident}: file declares id {inst.id}")
            start = time.perf_counter()
            for problem in _check_instance(inst, config):
                failures.append(f"{ident}: {problem}")
            timing.setdefault(inst.n, []).append(time.perf_counter() - start)
    return failures, {n: float(np.mean(v)) for n, v in sorted(timing.items())}
