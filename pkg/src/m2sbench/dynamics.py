"""Quantum-walk and adiabatic evolution of MAX 2-SAT problem Hamiltonians."""

from __future__ import annotations

import dataclasses
import math
import time
from collections.abc import Callable, Sequence

import numpy as np

from . import integrate as _integ
from .encoding import EnergyTable, driver_matrix
from .errors import BudgetExceeded, IntegrationError
from .instances import Instance

SUCCESS_TARGET = 0.99
DENSE_MAX_N = 14


@dataclasses.dataclass(frozen=True)
class Blend:
    """Affine control functions ``a(t) = a0 + a1 t`` (driver), ``b(t) = b0 + b1 t`` (problem)."""

    a0: float
    a1: float
    b0: float
    b1: float

    @classmethod
    def constant(cls, gamma: float, problem: float = 1.0) -> Blend:
        return cls(float(gamma), 0.0, float(problem), 0.0)

    @classmethod
    def linear_anneal(cls, total_time: float) -> Blend:
        return cls(1.0, -1.0 / total_time, 0.0, 1.0 / total_time)

    def __call__(self, t: float) -> tuple[float, float]:
        return self.a0 + self.a1 * t, self.b0 + self.b1 * t

    def as_array(self) -> np.ndarray:
        return np.array([self.a0, self.a1, self.b0, self.b1], dtype=np.float64)


@dataclasses.dataclass(frozen=True)
class IntegratorSettings:
    rtol: float = 1e-9
    atol: float = 1e-12
    max_steps: int = 2_000_000
    norm_tol: float = 1e-6

    def __post_init__(self):
        if self.rtol <= 0 or self.atol <= 0:
            raise ValueError("integrator tolerances must be positive")

    def tightened(self, factor: float = 0.5) -> IntegratorSettings:
        return dataclasses.replace(self, rtol=self.rtol * factor, atol=self.atol * factor)


DEFAULT_SETTINGS = IntegratorSettings()


@dataclasses.dataclass(frozen=True)
class TimeWindow:
    t_start: float = 0.0
    width: float = 100.0

    def __post_init__(self):
        if self.t_start < 0 or self.width <= 0:
            raise ValueError(f"invalid time window {self}")


@dataclasses.dataclass(frozen=True)
class WalkConfig:
    gamma: float
    window: TimeWindow = TimeWindow()

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError(f"hopping rate must be positive, got {self.gamma}")


@dataclasses.dataclass(frozen=True)
class AnnealSchedule:
    total_time: float

    def __post_init__(self):
        if not self.total_time > 0:
            raise ValueError(f"anneal time must be positive, got {self.total_time}")

    def blend(self) -> Blend:
        return Blend.linear_anneal(self.total_time)


@dataclasses.dataclass
class Trajectory:
    times: np.ndarray
    probabilities: np.ndarray  # ground-state probability at each accepted step
    states: np.ndarray | None  # one row per accepted step when recorded
    final_state: np.ndarray
    checkpoint_states: np.ndarray
    max_norm_deviation: float
    window_integral: float

    @property
    def step_count(self) -> int:
        return len(self.times) - 1


@dataclasses.dataclass(frozen=True)
class QwResult:
    instance_id: str
    gamma: float
    p_avg: float
    p_infinity: float | None
    step_count: int
    max_norm_deviation: float = 0.0


@dataclasses.dataclass(frozen=True)
class AqcResult:
    instance_id: str
    t99: float | None  # None marks "not found within budget"
    bracket: tuple[float, float] | None
    probe_log: tuple[tuple[float, float], ...]
    reason: str = ""

    @property
    def found(self) -> bool:
        return self.t99 is not None


def uniform_state(n: int) -> np.ndarray:
    dim = 1 << n
    return np.full(dim, 1.0 / math.sqrt(dim), dtype=np.complex128)


def evolve(
    table: EnergyTable,
    blend: Blend,
    t_span: tuple[float, float],
    settings: IntegratorSettings = DEFAULT_SETTINGS,
    *,
    record_states: bool = True,
    checkpoints: Sequence[float] = (),
    average_from: float | None = None,
    initial_state: np.ndarray | None = None,
) -> Trajectory:
    """Integrate the Schrodinger equation from the uniform superposition.

    Every accepted step is returned.  ``checkpoints`` are hit exactly and their
    states returned in ``checkpoint_states``; ``average_from`` starts the
    trapezoidal accumulation of the ground-state probability.

    Raises IntegrationError (code ``norm-drift-exceeded`` or
    ``step-limit-exceeded``) when the run cannot be trusted.
    """
    t0, t1 = float(t_span[0]), float(t_span[1])
    if not t1 > t0:
        raise ValueError(f"empty time span {t_span}")
    psi0 = uniform_state(table.n) if initial_state is None else np.asarray(initial_state, dtype=np.complex128)
    cps = np.asarray(sorted(float(c) for c in checkpoints), dtype=np.float64)
    start = t1 + 1.0 if average_from is None else float(average_from)
    status, times, probs, dev, psi, cp_states, traj, integral = _integ.integrate(
        np.asarray(table.energies, dtype=np.float64),
        table.n,
        blend.as_array(),
        psi0,
        t0,
        t1,
        table.ground_index,
        settings.rtol,
        settings.atol,
        settings.max_steps,
        settings.norm_tol,
        cps,
        start,
        record_states,
    )
    if status != _integ.OK:
        name = _integ.STATUS_NAMES[status]
        raise IntegrationError(f"integration stopped at t={times[-1]:.6g}: {name}", name)
    return Trajectory(
        times=times,
        probabilities=probs,
        states=traj if record_states else None,
        final_state=psi,
        checkpoint_states=cp_states,
        max_norm_deviation=float(dev),
        window_integral=float(integral),
    )


def qw_average_probability(
    instance: Instance,
    table: EnergyTable,
    config: WalkConfig,
    settings: IntegratorSettings = DEFAULT_SETTINGS,
) -> QwResult:
    window = config.window
    traj = evolve(
        table,
        Blend.constant(config.gamma),
        (0.0, window.t_start + window.width),
        settings,
        record_states=False,
        average_from=window.t_start,
    )
    p_avg = min(1.0, max(0.0, traj.window_integral / window.width))
    return QwResult(instance.id, config.gamma, p_avg, None, traj.step_count, traj.max_norm_deviation)


def qw_hamiltonian(table: EnergyTable, gamma: float) -> np.ndarray:
    if table.n > DENSE_MAX_N:
        raise BudgetExceeded(f"dense Hamiltonian limited to n <= {DENSE_MAX_N}, got n={table.n}")
    ham = gamma * driver_matrix(table.n)
    ham[np.diag_indices_from(ham)] += table.energies
    return ham


def _clusters(values: np.ndarray, rel_tol: float) -> list[slice]:
    groups, start = [], 0
    for i in range(1, len(values) + 1):
        if i == len(values) or values[i] - values[i - 1] > rel_tol * max(1.0, abs(values[i - 1])):
            groups.append(slice(start, i))
            start = i
    return groups


def qw_infinite_time_average(instance: Instance, table: EnergyTable, gamma: float, cluster_tol: float = 1e-9) -> float:
    """Long-time average of the ground-state probability by exact diagonalization.

    Sum over eigenspaces S of ``|<g|P_S|psi0>|^2``; eigenvalues closer than
    ``cluster_tol`` (relative) are treated as one degenerate eigenspace.
    """
    values, vectors = np.linalg.eigh(qw_hamiltonian(table, gamma))
    overlaps = vectors[table.ground_index] * (vectors.T @ uniform_state(table.n).real)
    total = sum(abs(overlaps[s].sum()) ** 2 for s in _clusters(values, cluster_tol))
    return float(min(1.0, total))


def aqc_probability(
    instance: Instance,
    table: EnergyTable,
    schedule: AnnealSchedule,
    settings: IntegratorSettings = DEFAULT_SETTINGS,
) -> float:
    traj = evolve(table, schedule.blend(), (0.0, schedule.total_time), settings, record_states=False)
    return float(traj.probabilities[-1])


def find_t99(
    instance: Instance,
    table: EnergyTable,
    t_init: float = 1.0,
    max_doublings: int = 20,
    wall_clock: float | None = None,
    settings: IntegratorSettings = DEFAULT_SETTINGS,
    *,
    max_halvings: int = 60,
    precision: float = 1.01,
    probability: Callable[[float], float] | None = None,
) -> AqcResult:
    """Shortest linear-anneal time with success probability at least 0.99.

    Doubles (or halves) ``t_f`` from ``t_init`` to bracket the threshold, then
    bisects until ``high / low <= precision``.  Returns the bracket's upper end
    so the reported time always meets the target.  Exhausting the doubling
    budget, the wall-clock budget, or the integrator step limit yields a
    not-found result rather than an exception.

    ``probability`` replaces the simulation; it exists so the search can be
    exercised against closed-form curves.
    """
    if probability is None:

        def probability(tf):
            return aqc_probability(instance, table, AnnealSchedule(tf), settings)

    ident = instance.id if instance is not None else ""
    deadline = None if wall_clock is None else time.monotonic() + wall_clock
    log: list[tuple[float, float]] = []

    def probe(tf):
        if deadline is not None and time.monotonic() > deadline:
            raise _OutOfBudget("wall-clock budget exhausted")
        try:
            p = float(probability(tf))
        except IntegrationError as exc:
            if exc.code == "step-limit-exceeded":
                raise _OutOfBudget(str(exc)) from exc
            raise
        log.append((tf, p))
        return p

    def not_found(reason):
        return AqcResult(ident, None, None, tuple(log), reason)

    try:
        tf = float(t_init)
        if probe(tf) < SUCCESS_TARGET:
            low = tf
            for _ in range(max_doublings):
                tf *= 2.0
                if probe(tf) >= SUCCESS_TARGET:
                    high = tf
                    break
                low = tf
            else:
                return not_found(f"no success within {max_doublings} doublings")
        else:
            high = tf
            for _ in range(max_halvings):
                tf /= 2.0
                if probe(tf) < SUCCESS_TARGET:
                    low = tf
                    break
                high = tf
            else:
                return not_found(f"success persisted through {max_halvings} halvings")
        while high / low > precision:
            mid = 0.5 * (low + high)
            if probe(mid) >= SUCCESS_TARGET:
                high = mid
            else:
                low = mid
    except _OutOfBudget as exc:
        return not_found(str(exc))
    return AqcResult(ident, high, (low, high), tuple(log))


class _OutOfBudget(Exception):
    pass
