"""Problem and driver Hamiltonians for MAX 2-SAT on n qubits.

The problem Hamiltonian is diagonal in the computational basis; its entry for
basis state ``k`` is the number of clauses left unsatisfied by assignment ``k``.
Spin convention: bit 0 has sigma-z eigenvalue +1.
"""

from __future__ import annotations

import dataclasses
from collections.abc import Sequence
from fractions import Fraction

import numpy as np

from .errors import DegenerateInput, DimensionMismatch
from .instances import Instance, unsatisfied_counts


@dataclasses.dataclass(frozen=True)
class EnergyTable:
    n: int
    energies: np.ndarray
    ground_index: int
    ground_degeneracy: int

    @property
    def spread(self) -> int:
        return energy_spread(self)


@dataclasses.dataclass(frozen=True)
class IsingCoefficients:
    """Two-body spin form ``offset + sum J_ij s_i s_j + sum h_i s_i``.

    Coefficients are kept as exact fractions (multiples of 1/4).
    """

    n: int
    couplings: dict[tuple[int, int], Fraction]
    fields: tuple[Fraction, ...]
    offset: Fraction

    def diagonal(self) -> np.ndarray:
        """Reconstruct the diagonal energies, computed in exact quarter units."""
        idx = np.arange(1 << self.n, dtype=np.int64)
        spins = [1 - 2 * ((idx >> i) & 1) for i in range(self.n)]
        quarters = np.full(1 << self.n, int(self.offset * 4), dtype=np.int64)
        for i, h in enumerate(self.fields):
            if h:
                quarters += int(h * 4) * spins[i]
        for (i, j), coupling in self.couplings.items():
            if coupling:
                quarters += int(coupling * 4) * spins[i - 1] * spins[j - 1]
        return quarters / 4.0

    def to_text(self) -> str:
        lines = [f"offset {float(self.offset)!r}"]
        lines += [f"h {i + 1} {float(h)!r}" for i, h in enumerate(self.fields) if h]
        lines += [f"J {i} {j} {float(c)!r}" for (i, j), c in sorted(self.couplings.items()) if c]
        return "\n".join(lines) + "\n"


def build_energy_table(instance: Instance) -> EnergyTable:
    energies = unsatisfied_counts(instance)
    lowest = energies.min()
    ground = np.flatnonzero(energies == lowest)
    energies.setflags(write=False)
    return EnergyTable(instance.n, energies, int(ground[0]), int(ground.size))


def build_ising(instance: Instance) -> IsingCoefficients:
    # each clause projector (1 - s_a Z_a)(1 - s_b Z_b) / 4, expanded term by term
    quarter = Fraction(1, 4)
    fields = [Fraction(0)] * instance.n
    couplings: dict[tuple[int, int], Fraction] = {}
    offset = Fraction(0)
    for lit_a, lit_b in instance.clauses:
        a, b = abs(lit_a), abs(lit_b)
        sa, sb = (1 if lit_a > 0 else -1), (1 if lit_b > 0 else -1)
        offset += quarter
        fields[a - 1] -= sa * quarter
        fields[b - 1] -= sb * quarter
        key = (min(a, b), max(a, b))
        couplings[key] = couplings.get(key, Fraction(0)) + sa * sb * quarter
    return IsingCoefficients(instance.n, couplings, tuple(fields), offset)


def apply_driver(state: np.ndarray, n: int | None = None) -> np.ndarray:
    """Action of the transverse-field driver ``-sum_i X_i`` on a state vector."""
    state = np.asarray(state)
    dim = state.shape[0]
    if n is None:
        n = dim.bit_length() - 1
    if dim != 1 << n:
        raise DimensionMismatch(f"state of length {dim} is not 2**{n}")
    out = np.zeros_like(state)
    for i in range(n):
        out -= state.reshape(-1, 2, 1 << i)[:, ::-1, :].reshape(dim)
    return out


def driver_matrix(n: int) -> np.ndarray:
    """Dense ``-sum_i X_i``; for oracles and small-n diagonalization only."""
    dim = 1 << n
    mat = np.zeros((dim, dim))
    idx = np.arange(dim)
    for i in range(n):
        mat[idx, idx ^ (1 << i)] -= 1.0
    return mat


def energy_spread(table: EnergyTable) -> int:
    return int(table.energies.max() - table.energies.min())


def heuristic_gamma(tables: Sequence[EnergyTable]) -> float:
    """Mean problem energy spread divided by the driver spread ``2n``."""
    if not tables:
        raise DegenerateInput("heuristic_gamma needs at least one energy table", "empty-set")
    sizes = {t.n for t in tables}
    if len(sizes) != 1:
        raise DegenerateInput(f"tables mix variable counts {sorted(sizes)}", "mixed-n")
    n = sizes.pop()
    total = sum(energy_spread(t) for t in tables)
    return total / len(tables) / (2 * n)
