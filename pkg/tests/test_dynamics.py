import math

import numpy as np
import pytest

from m2sbench.dynamics import (
    AnnealSchedule,
    Blend,
    IntegratorSettings,
    TimeWindow,
    WalkConfig,
    aqc_probability,
    evolve,
    find_t99,
    qw_average_probability,
    qw_infinite_time_average,
)
from m2sbench.encoding import build_energy_table
from m2sbench.errors import IntegrationError
from m2sbench.instances import Instance, generate_dataset, generate_instance
from oracles import eig_propagate, expm_propagate, kron_driver, trotter_anneal, uniform, window_average_quadrature


@pytest.fixture(scope="module")
def n5():
    return generate_dataset(5, 40, master_seed=21)


def _ham(table, gamma):
    return gamma * kron_driver(table.n) + np.diag(table.energies.astype(float))


def test_zero_clause_walk_is_stationary():
    table = build_energy_table(Instance(4, ()))
    traj = evolve(table, Blend.constant(0.7), (0.0, 20.0))
    np.testing.assert_allclose(traj.probabilities, 1 / 16, atol=1e-9)


def test_diagonal_dynamics_preserve_populations():
    inst = generate_instance(5, 15, np.random.default_rng(1))
    table = build_energy_table(inst)
    traj = evolve(table, Blend.constant(0.0), (0.0, 10.0))
    np.testing.assert_allclose(np.abs(traj.states) ** 2, 1 / 32, atol=1e-9)


def test_evolve_matches_dense_propagator():
    rng = np.random.default_rng(2)
    for n in (3, 5, 7):
        inst = generate_instance(n, 3 * n, rng)
        table = build_energy_table(inst)
        gamma = 0.8
        traj = evolve(table, Blend.constant(gamma), (0.0, 100.0), checkpoints=[1.0, 10.0, 100.0], record_states=False)
        ham = _ham(table, gamma)
        for t, psi in zip([1.0, 10.0, 100.0], traj.checkpoint_states):
            assert np.linalg.norm(psi - eig_propagate(ham, uniform(n), t)) < 1e-6
        assert traj.max_norm_deviation < 1e-6


def test_evolve_matches_matrix_exponential_short_time():
    inst = generate_instance(4, 12, np.random.default_rng(3))
    table = build_energy_table(inst)
    traj = evolve(table, Blend.constant(1.3), (0.0, 2.5))
    exact = expm_propagate(_ham(table, 1.3), uniform(4), 2.5)
    assert np.linalg.norm(traj.final_state - exact) < 1e-8


def test_every_accepted_step_is_recorded():
    inst = generate_instance(4, 12, np.random.default_rng(4))
    table = build_energy_table(inst)
    traj = evolve(table, Blend.constant(1.0), (0.0, 5.0))
    assert traj.times[0] == 0.0 and traj.times[-1] == 5.0
    assert np.all(np.diff(traj.times) > 0)
    assert traj.states.shape == (len(traj.times), 16)
    np.testing.assert_allclose(np.linalg.norm(traj.states, axis=1), 1.0, atol=1e-6)
    np.testing.assert_allclose(traj.probabilities, np.abs(traj.states[:, table.ground_index]) ** 2)


def test_norm_drift_is_reported():
    inst = generate_instance(4, 12, np.random.default_rng(4))
    table = build_energy_table(inst)
    loose = IntegratorSettings(rtol=1e-2, atol=1e-2, norm_tol=1e-14)
    with pytest.raises(IntegrationError) as exc:
        evolve(table, Blend.constant(1.0), (0.0, 50.0), loose)
    assert exc.value.code == "norm-drift-exceeded"


def test_step_limit_is_reported():
    inst = generate_instance(4, 12, np.random.default_rng(4))
    table = build_energy_table(inst)
    with pytest.raises(IntegrationError) as exc:
        evolve(table, Blend.constant(1.0), (0.0, 50.0), IntegratorSettings(max_steps=5))
    assert exc.value.code == "step-limit-exceeded"


def test_walk_tiny_gamma_gives_uniform_probability():
    inst = generate_instance(5, 15, np.random.default_rng(5))
    table = build_energy_table(inst)
    res = qw_average_probability(inst, table, WalkConfig(1e-12))
    assert abs(res.p_avg - 2**-5) < 1e-6
    assert abs(qw_infinite_time_average(inst, table, 1e-12) - 2**-5) < 1e-6


def test_walk_average_matches_quadrature(n5):
    for inst in n5[:3]:
        table = build_energy_table(inst)
        res = qw_average_probability(inst, table, WalkConfig(0.6))
        oracle = window_average_quadrature(table.energies.astype(float), 5, 0.6, 100.0, dt=1e-3)
        assert abs(res.p_avg - oracle) < 1e-4


def test_walk_window_offset(n5):
    inst = n5[0]
    table = build_energy_table(inst)
    res = qw_average_probability(inst, table, WalkConfig(0.6, TimeWindow(20.0, 30.0)))
    whole = window_average_quadrature(table.energies.astype(float), 5, 0.6, 50.0, dt=1e-3) * 50
    head = window_average_quadrature(table.energies.astype(float), 5, 0.6, 20.0, dt=1e-3) * 20
    assert abs(res.p_avg - (whole - head) / 30) < 1e-4


def test_walk_average_invariant_under_relabeling(n5):
    inst = n5[1]
    perm = [3, 5, 1, 2, 4]  # variable i becomes perm[i-1]
    clauses = tuple(sorted(tuple(sorted(((perm[abs(l) - 1] * (1 if l > 0 else -1)) for l in c), key=abs)) for c in inst.clauses))
    relabeled = Instance(5, clauses)
    a = qw_average_probability(inst, build_energy_table(inst), WalkConfig(0.6)).p_avg
    b = qw_average_probability(relabeled, build_energy_table(relabeled), WalkConfig(0.6)).p_avg
    assert abs(a - b) < 1e-8


def test_infinite_time_average_matches_long_window():
    inst = Instance(3, ())
    table = build_energy_table(inst)
    # the uniform state is the driver ground state, so the walk never leaves it
    long = qw_average_probability(inst, table, WalkConfig(0.5, TimeWindow(0.0, 1e4)))
    assert abs(qw_infinite_time_average(inst, table, 0.5) - long.p_avg) < 1e-8


def test_infinite_time_average_is_long_time_limit(n5):
    inst = n5[2]
    table = build_energy_table(inst)
    pinf = qw_infinite_time_average(inst, table, 0.6)
    long = window_average_quadrature(table.energies.astype(float), 5, 0.6, 20000.0, dt=0.05)
    assert abs(pinf - long) < 5e-3


def test_aqc_matches_trotter_product(n5):
    inst = n5[3]
    table = build_energy_table(inst)
    p = aqc_probability(inst, table, AnnealSchedule(100.0))
    coarse = abs(trotter_anneal(table.energies.astype(float), 5, 100.0, 5000)[0]) ** 2
    fine = abs(trotter_anneal(table.energies.astype(float), 5, 100.0, 10000)[0]) ** 2
    assert abs(coarse - fine) < 1e-4  # the slicing has converged
    assert abs(p - fine) < 1e-4


def test_aqc_limits(n5):
    inst = n5[4]
    table = build_energy_table(inst)
    assert abs(aqc_probability(inst, table, AnnealSchedule(1e-6)) - 2**-5) < 1e-5
    assert 0.99 <= aqc_probability(inst, table, AnnealSchedule(1e4)) <= 1.0


def test_find_t99_closed_form():
    res = find_t99(None, None, probability=lambda t: 1 - math.exp(-t))
    target = -math.log(0.01)
    assert res.found
    low, high = res.bracket
    assert high / low <= 1.01
    assert low < target <= high
    assert abs(res.t99 / target - 1) <= 0.01


def test_find_t99_halving_branch():
    res = find_t99(None, None, t_init=64.0, probability=lambda t: 1 - math.exp(-t))
    assert res.found
    assert res.probe_log[1][0] == 32.0
    low, high = res.bracket
    assert 1 - math.exp(-low) < 0.99 <= 1 - math.exp(-high)


def test_find_t99_real_instance(n5):
    inst = n5[5]
    table = build_energy_table(inst)
    res = find_t99(inst, table)
    assert res.found
    low, high = res.bracket
    assert high / low <= 1.01
    assert aqc_probability(inst, table, AnnealSchedule(res.t99)) >= 0.99
    assert aqc_probability(inst, table, AnnealSchedule(low)) < 0.99


def test_find_t99_budget_not_found():
    res = find_t99(None, None, max_doublings=3, probability=lambda t: 0.5)
    assert not res.found and res.t99 is None
    assert len(res.probe_log) <= 5


def test_find_t99_step_limit_is_not_found(n5):
    inst = n5[6]
    table = build_energy_table(inst)
    res = find_t99(inst, table, settings=IntegratorSettings(max_steps=10))
    assert not res.found
    assert "step-limit" in res.reason


def test_find_t99_wall_clock(n5):
    res = find_t99(None, None, wall_clock=0.0, probability=lambda t: 1 - math.exp(-t))
    assert not res.found and "wall-clock" in res.reason
