"""Classical MAX 2-SAT solvers.

* ``two_sat_satisfiable``: linear-time 2-SAT decision via strongly connected
  components of the implication graph.
* ``mixbandb_solve``: exact depth-first branch and bound whose lower bounds
  come from a low-rank vector relaxation solved by the mixing method
  (cyclic coordinate descent over unit vectors), with hyperplane rounding for
  the initial incumbent.

Problem calls are counted as one per pass over the clause list (simplifying
under a partial assignment, or scoring a candidate assignment) plus one per
relaxation solve.
"""

from __future__ import annotations

import dataclasses
import math

import numba
import numpy as np

from .instances import Assignment, Instance

BOUND_EPS = 1e-6


# -- 2-SAT ---------------------------------------------------------------------


def _node(lit: int) -> int:
    return 2 * (abs(lit) - 1) + (0 if lit > 0 else 1)


def implication_graph(instance: Instance) -> list[list[int]]:
    """Adjacency lists over 2n literal nodes; clause (a or b) gives -a -> b and -b -> a."""
    adj: list[list[int]] = [[] for _ in range(2 * instance.n)]
    for a, b in instance.clauses:
        adj[_node(-a)].append(_node(b))
        adj[_node(-b)].append(_node(a))
    return adj


def strongly_connected_components(adj: list[list[int]]) -> list[int]:
    """Tarjan's algorithm, iterative; returns a component label per node."""
    n = len(adj)
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    comp = [-1] * n
    stack: list[int] = []
    counter = 0
    n_comp = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, i = work[-1]
            if i < len(adj[v]):
                work[-1] = (v, i + 1)
                w = adj[v][i]
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, 0))
                elif on_stack[w]:
                    low[v] = min(low[v], index[w])
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp[w] = n_comp
                    if w == v:
                        break
                n_comp += 1
    return comp


def two_sat_satisfiable(instance: Instance) -> bool:
    comp = strongly_connected_components(implication_graph(instance))
    return all(comp[2 * v] != comp[2 * v + 1] for v in range(instance.n))


# -- residual formulas -----------------------------------------------------------


@dataclasses.dataclass(frozen=True)
class Residual:
    """Clauses left undecided by a partial assignment.

    ``pairs`` are two-literal clauses and ``units`` one-literal clauses, both
    over the original variable numbering; ``falsified`` counts clauses already
    unsatisfied by the partial assignment.
    """

    pairs: tuple[tuple[int, int], ...]
    units: tuple[int, ...]
    falsified: int

    @property
    def empty(self) -> bool:
        return not self.pairs and not self.units

    def variables(self) -> list[int]:
        vs = {abs(l) for c in self.pairs for l in c} | {abs(l) for l in self.units}
        return sorted(vs)

    def unsatisfied(self, values: dict[int, int]) -> int:
        """Unsatisfied residual clauses (not counting ``falsified``) under full bits."""

        def false(lit):
            bit = values[abs(lit)]
            return bit == 1 if lit > 0 else bit == 0

        return sum(1 for a, b in self.pairs if false(a) and false(b)) + sum(1 for u in self.units if false(u))


def simplify(clauses, partial: np.ndarray) -> Residual:
    """Reduce clauses under ``partial`` (bits, -1 = unassigned; index 0 unused)."""
    pairs, units, falsified = [], [], 0
    for clause in clauses:
        live = []
        satisfied = False
        for lit in clause:
            bit = partial[abs(lit)]
            if bit < 0:
                live.append(lit)
            elif (bit == 0) == (lit > 0):
                satisfied = True
                break
        if satisfied:
            continue
        if len(live) == 2:
            pairs.append((live[0], live[1]))
        elif len(live) == 1:
            units.append(live[0])
        else:
            falsified += 1
    return Residual(tuple(pairs), tuple(units), falsified)


def dominated_literals(res: Residual) -> list[int]:
    """Literals that can be fixed true without losing optimality.

    A literal is safe when its unit-clause count is at least the number of
    residual clauses containing its negation (this covers pure literals).
    """
    units: dict[int, int] = {}
    occ: dict[int, int] = {}
    for u in res.units:
        units[u] = units.get(u, 0) + 1
        occ[u] = occ.get(u, 0) + 1
    for a, b in res.pairs:
        occ[a] = occ.get(a, 0) + 1
        occ[b] = occ.get(b, 0) + 1
    forced = []
    for v in res.variables():
        for lit in (v, -v):
            if units.get(lit, 0) >= occ.get(-lit, 0):
                forced.append(lit)
                break
    return forced


# -- vector relaxation ---------------------------------------------------------------


@dataclasses.dataclass
class VectorRelaxationState:
    """Unit vectors for the truth direction (row 0) and each residual variable."""

    dimension: int
    vectors: np.ndarray
    variables: tuple[int, ...]  # original variable number of rows 1..r
    objective: float  # relaxed energy at ``vectors``
    certified: float  # dual lower bound on the relaxation optimum
    residual: Residual
    sweeps: int = 0


def relaxation_matrix(res: Residual) -> tuple[np.ndarray, float, tuple[int, ...]]:
    """Cost matrix ``C`` (zero diagonal) and offset so energy = offset + <C, V V^T>."""
    variables = tuple(res.variables())
    pos = {v: i + 1 for i, v in enumerate(variables)}
    size = len(variables) + 1
    cost = np.zeros((size, size))
    offset = 0.0
    for a, b in res.pairs:
        ia, ib = pos[abs(a)], pos[abs(b)]
        sa, sb = (1.0 if a > 0 else -1.0), (1.0 if b > 0 else -1.0)
        offset += 0.25
        cost[0, ia] -= sa / 8
        cost[0, ib] -= sb / 8
        cost[ia, ib] += sa * sb / 8
    for u in res.units:
        iu, su = pos[abs(u)], (1.0 if u > 0 else -1.0)
        offset += 0.5
        cost[0, iu] -= su / 4
    cost = cost + cost.T
    return cost, offset, variables


@numba.njit(cache=True)
def _mix(cost, vectors, max_sweeps, tol):
    size, dim = vectors.shape
    grad = np.empty(dim)
    energy = 0.0
    for i in range(size):
        for j in range(size):
            if cost[i, j] != 0.0:
                energy += cost[i, j] * np.dot(vectors[i], vectors[j])
    sweeps = 0
    for _ in range(max_sweeps):
        sweeps += 1
        drop = 0.0
        for i in range(size):
            grad[:] = 0.0
            for j in range(size):
                c = cost[i, j]
                if c != 0.0:
                    grad += c * vectors[j]
            gn = np.sqrt(np.dot(grad, grad))
            if gn < 1e-12:
                continue
            drop += 2.0 * (np.dot(grad, vectors[i]) + gn)
            vectors[i] = -grad / gn
        energy -= drop
        if drop <= tol * max(1.0, abs(energy)):
            break
    return sweeps


def _certified_bound(cost: np.ndarray, offset: float, vectors: np.ndarray) -> tuple[float, float]:
    grads = cost @ vectors
    objective = offset + float(np.einsum("ij,ij->", vectors, grads))
    y = -np.linalg.norm(grads, axis=1)
    lam = float(np.linalg.eigvalsh(cost - np.diag(y))[0])
    certified = offset + float(y.sum()) + cost.shape[0] * min(0.0, lam)
    return objective, certified


def relaxation_rank(n: int) -> int:
    return math.ceil(math.sqrt(2 * n)) + 1


def mixing_lower_bound(
    res: Residual,
    k: int | None = None,
    max_sweeps: int = 200,
    tol: float = 1e-4,
    rng: np.random.Generator | None = None,
) -> tuple[int, VectorRelaxationState]:
    """Integer lower bound on the residual's minimum unsatisfied count.

    The relaxation is minimized by the mixing method; the bound comes from the
    dual certificate ``sum(y) + (r+1) min(0, lambda_min(C - diag(y)))`` with
    ``y_i = -|grad_i|``, which is valid whether or not the sweeps converged
    and matches the relaxation value at a stationary point.  ``falsified``
    clauses are not included.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    cost, offset, variables = relaxation_matrix(res)
    if k is None:
        k = relaxation_rank(len(variables))
    vectors = rng.standard_normal((len(variables) + 1, k))
    vectors /= np.linalg.norm(vectors, axis=1, keepdims=True)
    sweeps = _mix(cost, vectors, max_sweeps, tol) if len(variables) else 0
    objective, certified = _certified_bound(cost, offset, vectors)
    bound = max(0, math.ceil(certified - BOUND_EPS))
    state = VectorRelaxationState(k, vectors, variables, objective, certified, res, sweeps)
    return bound, state


def round_assignment(
    state: VectorRelaxationState,
    rounds: int,
    rng: np.random.Generator,
    target: int | None = None,
) -> tuple[dict[int, int], int, int]:
    """Random-hyperplane rounding of a relaxation state.

    A variable is set true (bit 0) when its vector falls on the same side of
    the hyperplane as the truth direction.  Stops early once a candidate's
    cost reaches ``target`` (a proven lower bound, so no later round can beat
    it).  Returns ``(bits by variable, unsatisfied residual clauses,
    candidates scored)``.
    """
    v0 = state.vectors[0]
    best_values, best_cost = None, None
    scored = 0
    for _ in range(max(1, rounds)):
        scored += 1
        r = rng.standard_normal(state.dimension)
        ref = np.sign(v0 @ r)
        signs = np.sign(state.vectors[1:] @ r)
        values = {var: 0 if s == ref else 1 for var, s in zip(state.variables, signs)}
        cost = state.residual.unsatisfied(values)
        if best_cost is None or cost < best_cost:
            best_values, best_cost = values, cost
        if target is not None and best_cost <= target:
            break
    return best_values, best_cost, scored


# -- branch and bound ---------------------------------------------------------------


@dataclasses.dataclass(frozen=True)
class MixConfig:
    k: int | None = None  # relaxation rank; None means ceil(sqrt(2n)) + 1
    max_sweeps: int = 200
    tol: float = 1e-4
    rounds: int = 20
    seed: int = 0
    audit: bool = False  # check bound sandwich against brute force at every node


@dataclasses.dataclass(frozen=True)
class ClassicalRunRecord:
    instance_id: str
    n_calls: int
    best_unsatisfied: int
    best_assignment: Assignment
    node_count: int


class BoundViolation(AssertionError):
    pass


def _residual_optimum(res: Residual) -> int:
    variables = res.variables()
    best = None
    for idx in range(1 << len(variables)):
        values = {v: (idx >> i) & 1 for i, v in enumerate(variables)}
        c = res.unsatisfied(values)
        best = c if best is None else min(best, c)
    return best


def mixbandb_solve(instance: Instance, config: MixConfig = MixConfig()) -> ClassicalRunRecord:
    n = instance.n
    k = config.k if config.k is not None else relaxation_rank(n)
    rng = np.random.default_rng(np.random.SeedSequence([config.seed, instance.seed or 0]))
    clauses = instance.clauses
    calls = 0
    nodes = 0
    best_cost = instance.m + 1
    best_bits = np.zeros(n + 1, dtype=np.int64)

    def reduce(partial):
        nonlocal calls
        while True:
            calls += 1
            res = simplify(clauses, partial)
            forced = dominated_literals(res)
            if not forced:
                return res
            for lit in forced:
                partial[abs(lit)] = 0 if lit > 0 else 1

    def record(partial, cost):
        nonlocal best_cost, best_bits
        if cost < best_cost:
            best_cost = cost
            best_bits = np.where(partial < 0, 0, partial)

    def search(partial, root=False):
        nonlocal calls, nodes
        nodes += 1
        res = reduce(partial)
        if res.empty:
            record(partial, res.falsified)
            return
        if res.falsified >= best_cost:
            return
        calls += 1
        bound, state = mixing_lower_bound(res, k, config.max_sweeps, config.tol, rng)
        if root or config.audit:
            target = None if config.audit else bound
            values, cost, scored = round_assignment(state, config.rounds, rng, target)
            calls += scored
            if config.audit:
                exact = _residual_optimum(res)
                if not bound <= exact <= cost:
                    raise BoundViolation(f"{instance.id}: bound {bound} <= optimum {exact} <= rounded {cost} fails")
            candidate = partial.copy()
            for var, bit in values.items():
                candidate[var] = bit
            record(candidate, res.falsified + cost)
        if res.falsified + bound >= best_cost:
            return
        occurrences: dict[int, int] = {}
        for a, b in res.pairs:
            occurrences[abs(a)] = occurrences.get(abs(a), 0) + 1
            occurrences[abs(b)] = occurrences.get(abs(b), 0) + 1
        for u in res.units:
            occurrences[abs(u)] = occurrences.get(abs(u), 0) + 1
        var = max(sorted(occurrences), key=lambda v: occurrences[v])
        row = state.variables.index(var) + 1
        first = 0 if state.vectors[0] @ state.vectors[row] >= 0 else 1
        for bit in (first, 1 - first):
            child = partial.copy()
            child[var] = bit
            search(child)

    search(np.full(n + 1, -1, dtype=np.int64), root=True)
    assignment = tuple(int(b) for b in best_bits[1:])
    return ClassicalRunRecord(instance.id, calls, int(best_cost), assignment, nodes)
