"""The ten acceptance criteria, each at its stated tolerance.

Every test records one PASS/FAIL line, printed in the "acceptance criteria"
section of the pytest summary.  The trend-reproduction data (criterion 8)
takes about an hour to build on one core; it is cached under
``M2S_ACCEPTANCE_DIR`` (default ``.acceptance-cache`` in the repository)
in a subdirectory keyed by a hash of the package source, so any code
change forces a rebuild.
"""

import hashlib
import math
import os
import shutil
import time
from pathlib import Path

import numpy as np
import pytest

import m2sbench
from conftest import ACCEPTANCE_LINES
from m2sbench import pipeline
from m2sbench.analytics import (
    PERCENTILES,
    DifficultyRecord,
    correlation,
    partition_deciles,
    portfolio_eval,
    scaling_fit,
    spearman,
    split_by_satisfiability,
)
from m2sbench.classical import MixConfig, mixbandb_solve, two_sat_satisfiable
from m2sbench.config import RunConfig
from m2sbench.dynamics import (
    AnnealSchedule,
    Blend,
    WalkConfig,
    aqc_probability,
    evolve,
    find_t99,
    qw_average_probability,
    qw_infinite_time_average,
)
from m2sbench.encoding import build_energy_table, build_ising, heuristic_gamma
from m2sbench.instances import (
    Instance,
    brute_force_optima,
    count_satisfied,
    generate_dataset,
    generate_instance,
    index_to_bits,
)
from oracles import EXAMPLE_CLAUSES, eig_propagate, kron_driver, truth_energies, uniform

PKG_SRC = Path(m2sbench.__file__).parent
REPO = PKG_SRC.parent.parent


def record(k, ok, detail):
    line = f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[k] = line
    print(line)
    assert ok, line


def source_key():
    h = hashlib.sha256()
    for path in sorted(PKG_SRC.glob("*.py")):
        h.update(path.name.encode())
        h.update(path.read_bytes())
    return h.hexdigest()[:12]


# -- 1 -------------------------------------------------------------------------------


def test_criterion_01_worked_example():
    start = time.perf_counter()
    inst = Instance(3, EXAMPLE_CLAUSES, id="example")
    best, optima = brute_force_optima(inst)
    table = build_energy_table(inst)
    rec = mixbandb_solve(inst)
    sat = two_sat_satisfiable(inst)
    elapsed = time.perf_counter() - start
    ok = (
        best == 5
        and len(optima) == 4
        and inst.m - table.energies.min() == 5
        and int(np.count_nonzero(table.energies == table.energies.min())) == 4
        and inst.m - rec.best_unsatisfied == 5
        and not sat
        and elapsed < 1.0
    )
    record(1, ok, f"brute force {best}/6 with {len(optima)} optima, table min {table.energies.min()}, "
                  f"branch and bound {inst.m - rec.best_unsatisfied}/6, 2-SAT satisfiable={sat}, {elapsed:.3f}s")


# -- 2 -------------------------------------------------------------------------------


def test_criterion_02_mapping_correctness():
    start = time.perf_counter()
    rng = np.random.default_rng(2002)
    bad = 0
    for _ in range(500):
        n = int(rng.integers(4, 11))
        inst = generate_instance(n, int(rng.integers(1, 3 * n + 1)), rng)
        table = build_energy_table(inst)
        direct = np.array([inst.m - count_satisfied(inst, index_to_bits(k, n)) for k in range(1 << n)])
        if not np.array_equal(table.energies, direct):
            bad += 1
        if not np.array_equal(build_ising(inst).diagonal(), direct.astype(float)):
            bad += 1
    elapsed = time.perf_counter() - start
    record(2, bad == 0 and elapsed < 60, f"500 instances n=4..10, {bad} mismatches, {elapsed:.1f}s")


# -- 3 -------------------------------------------------------------------------------


def test_criterion_03_dynamics_fidelity():
    start = time.perf_counter()
    rng = np.random.default_rng(3003)
    worst_err = worst_norm = 0.0
    for _ in range(50):
        n = int(rng.integers(2, 9))
        m = int(rng.integers(1, min(3 * n, 2 * n * (n - 1)) + 1))
        inst = generate_instance(n, m, rng)
        table = build_energy_table(inst)
        gamma = float(rng.uniform(0.3, 1.5))
        traj = evolve(table, Blend.constant(gamma), (0.0, 100.0), checkpoints=[1.0, 10.0, 100.0])
        ham = gamma * kron_driver(n) + np.diag(truth_energies(inst.clauses, n))
        for t, psi in zip((1.0, 10.0, 100.0), traj.checkpoint_states):
            worst_err = max(worst_err, float(np.linalg.norm(psi - eig_propagate(ham, uniform(n), t))))
        worst_norm = max(worst_norm, float(np.abs(np.linalg.norm(traj.states, axis=1) - 1).max()))
    elapsed = time.perf_counter() - start
    ok = worst_err < 1e-6 and worst_norm < 1e-6 and elapsed < 600
    record(3, ok, f"50 instances n<=8: max |dpsi| {worst_err:.2e}, max norm drift {worst_norm:.2e}, {elapsed:.1f}s")


# -- 4 -------------------------------------------------------------------------------


def test_criterion_04_driver_spectrum():
    spreads = {}
    for n in range(1, 7):
        w = np.linalg.eigvalsh(kron_driver(n))
        spreads[n] = w.max() - w.min()
    ok = all(round(s, 9) == 2 * n for n, s in spreads.items())
    record(4, ok, "spreads " + ", ".join(f"n={n}: {s:.12g}" for n, s in spreads.items()))


# -- 5 -------------------------------------------------------------------------------


def test_criterion_05_window_average_validity():
    start = time.perf_counter()
    data = generate_dataset(9, 1000, master_seed=5)[:200]
    assert len(data) == 200
    tables = [build_energy_table(i) for i in data]
    gamma = heuristic_gamma(tables)
    p_avg, p_inf = [], []
    for inst, table in zip(data, tables):
        p_avg.append(qw_average_probability(inst, table, WalkConfig(gamma)).p_avg)
        p_inf.append(qw_infinite_time_average(inst, table, gamma))
    rho = spearman(p_avg, p_inf)
    elapsed = time.perf_counter() - start
    record(5, rho >= 0.98 and elapsed < 3600, f"200 n=9 instances, gamma={gamma:.4f}: Spearman {rho:.4f} (>= 0.98), {elapsed:.0f}s")


# -- 6 -------------------------------------------------------------------------------


def test_criterion_06_t99_procedure():
    target = -math.log(0.01)
    res = find_t99(None, None, probability=lambda t: 1 - math.exp(-t))
    low, high = res.bracket
    closed_ok = res.found and high / low <= 1.01 and low < target <= high and abs(res.t99 / target - 1) <= 0.01
    data = generate_dataset(5, 400, master_seed=6)[:100]
    solved = bad = 0
    for inst in data:
        table = build_energy_table(inst)
        r = find_t99(inst, table)
        if not r.found:
            continue
        solved += 1
        lo, hi = r.bracket
        if hi / lo > 1.01 or aqc_probability(inst, table, AnnealSchedule(r.t99)) < 0.99:
            bad += 1
    ok = closed_ok and solved > 0 and bad == 0
    record(6, ok, f"closed form t99={res.t99:.5f} vs {target:.5f}, bracket ratio {high / low:.5f}; "
                  f"n=5: {solved}/100 solved, {bad} violations")


# -- 7 -------------------------------------------------------------------------------


def test_criterion_07_classical_exactness():
    start = time.perf_counter()
    rng = np.random.default_rng(7007)
    mismatches = 0
    count = 0
    for _ in range(2000):
        n = int(rng.integers(2, 11))
        m = int(rng.integers(1, min(4 * n, 2 * n * (n - 1)) + 1))
        inst = generate_instance(n, m, rng)
        inst = Instance(inst.n, inst.clauses, seed=int(rng.integers(2**63)), id=f"c7-{count}")
        best = int(truth_energies(inst.clauses, n).min())
        # audit mode raises if any node's bound exceeds, or rounding undercuts, the exact residual optimum
        rec = mixbandb_solve(inst, MixConfig(audit=True))
        bits = rec.best_assignment
        if rec.best_unsatisfied != best or inst.m - count_satisfied(inst, bits) != best:
            mismatches += 1
        count += 1
    elapsed = time.perf_counter() - start
    record(7, mismatches == 0 and elapsed < 1800,
           f"{count} instances n<=10, {mismatches} mismatches, bound sandwich audited at every node, {elapsed:.0f}s")


# -- 8 -------------------------------------------------------------------------------

TREND_N = (5, 6, 7, 8, 9)
TREND_ATTEMPTS = 4700  # reaches 1000 kept instances at n=9


@pytest.fixture(scope="module")
def trend_records():
    root = Path(os.environ.get("M2S_ACCEPTANCE_DIR", REPO / ".acceptance-cache")) / f"trend-{source_key()}"
    cfg = RunConfig(n_min=5, n_max=9, target_count=TREND_ATTEMPTS, output_dir=str(root))
    for n in TREND_N:
        if not (root / "datasets" / f"n{n}" / "manifest.tsv").exists():
            pipeline.generate(cfg, [n])
        for solver in pipeline.SOLVERS:
            pipeline.run_solver(cfg, solver, f"n{n}")
    pipeline.analyze(cfg)
    out = {}
    for n in TREND_N:
        recs, _ = pipeline.load_records(cfg, f"n{n}")
        out[n] = recs
    return out


def test_criterion_08_trend_reproduction(trend_records):
    sizes = {n: len(r) for n, r in trend_records.items()}
    rhos = {n: correlation(trend_records[n], "qw", "aqc").rho for n in TREND_N}
    decreasing = all(rhos[a] > rhos[b] for a, b in zip(TREND_N, TREND_N[1:]))
    a_ok = decreasing and rhos[9] <= -0.2

    kappas = {}
    for p in PERCENTILES:
        pts = []
        for n in TREND_N:
            part = partition_deciles(trend_records[n], "qw")
            value = {r.instance_id: r.p_avg for r in trend_records[n]}[part.boundary_ids[p]]
            pts.append((n, value))
        kappas[p] = scaling_fit(pts).kappa
    ordered = [kappas[p] for p in PERCENTILES]
    b_ok = all(x > y for x, y in zip(ordered, ordered[1:]))

    split = split_by_satisfiability(trend_records[9])
    med = split.medians
    aqc_sat, aqc_unsat = med[("sat", "t99_with_unsolved")], med[("unsat", "t99_with_unsolved")]
    cl_sat, cl_unsat = med[("sat", "n_calls")], med[("unsat", "n_calls")]
    c_ok = aqc_sat < aqc_unsat and cl_sat < cl_unsat

    detail = (
        f"kept {sizes}; (a) Spearman(p_avg,t99) "
        + " ".join(f"n={n}:{rhos[n]:+.3f}" for n in TREND_N)
        + f" -> {'ok' if a_ok else 'NOT met'}; (b) QW kappa by percentile "
        + " ".join(f"p{p}:{kappas[p]:+.3f}" for p in PERCENTILES)
        + f" -> {'ok' if b_ok else 'NOT met'}; (c) n=9 sat/unsat medians t99 {aqc_sat:.3g}/{aqc_unsat:.3g}, "
        f"n_calls {cl_sat}/{cl_unsat} -> {'ok' if c_ok else 'NOT met'}"
    )
    record(8, all(s >= 1000 for s in sizes.values()) and a_ok and b_ok and c_ok, detail)


# -- 9 -------------------------------------------------------------------------------


def test_criterion_09_portfolio_sanity():
    records = []
    for k in range(40):
        hard_a = k % 2 == 0
        records.append(DifficultyRecord(f"s{k:02d}", 5, t99=1000.0 if hard_a else 2.0, n_calls=3 if hard_a else 900))
    s = portfolio_eval(records, "aqc", "classical", "raw").stats()
    disjoint_ok = s["portfolio_max"] < s["a_max"] and s["portfolio_max"] < s["b_max"]
    same = [DifficultyRecord(f"t{k:02d}", 5, t99=float(k + 1), n_calls=k + 1) for k in range(40)]
    summary = portfolio_eval(same, "aqc", "classical", "raw")
    equal_ok = np.array_equal(summary.portfolio, 2 * summary.cost_a) and np.array_equal(summary.portfolio, 2 * summary.cost_b)
    record(9, disjoint_ok and equal_ok,
           f"disjoint: portfolio max {s['portfolio_max']:g} vs {s['a_max']:g}/{s['b_max']:g}; identical costs: exact 2x={equal_ok}")


# -- 10 ------------------------------------------------------------------------------


def _tree(root):
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def _full_pipeline(out: Path, workers: int):
    cfg = RunConfig(master_seed=10, n_min=5, n_max=5, target_count=400, workers=workers, output_dir=str(out))
    pipeline.generate(cfg)
    for solver in pipeline.SOLVERS:
        pipeline.run_solver(cfg, solver, "n5")
    pipeline.analyze(cfg)
    return _tree(out)


def test_criterion_10_determinism(tmp_path):
    first = _full_pipeline(tmp_path / "w1a", 1)
    second = _full_pipeline(tmp_path / "w1b", 1)
    parallel = _full_pipeline(tmp_path / "w8", 8)
    results = [k for k in first if k.startswith(("results", "analysis"))]
    ok = bool(results) and first == second == parallel
    diff = sorted(k for k in first if first.get(k) != parallel.get(k) or first.get(k) != second.get(k))
    record(10, ok, f"{len(first)} files ({len(results)} result/analysis) byte-identical across two runs and "
                   f"workers 1 vs 8" + (f"; differing: {diff[:5]}" if diff else ""))
    shutil.rmtree(tmp_path, ignore_errors=True)
