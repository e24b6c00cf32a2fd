"""MAX 2-SAT instances: generation, brute-force oracles, canonicalization, I/O.

Conventions used throughout the package:

* A literal is a nonzero signed int; ``+i`` is variable ``x_i``, ``-i`` is its
  negation.
* A clause is a pair ``(a, b)`` of literals on distinct variables, stored with
  ``abs(a) < abs(b)``.  Clause identity is the unordered literal pair.
* Truth values follow the quantum encoding: bit 0 means *true*, bit 1 means
  *false*.  An assignment is a tuple of ``n`` bits, and its integer index puts
  variable ``i`` at bit position ``i - 1``.
"""

from __future__ import annotations

import dataclasses
import hashlib
from collections.abc import Iterable, Sequence
from pathlib import Path

import numpy as np

from .errors import (
    BudgetExceeded,
    DimensionMismatch,
    FormatError,
    InfeasibleParameters,
    NonOptimalWitness,
)

BRUTE_FORCE_MAX_N = 24
MANIFEST_NAME = "manifest.tsv"

Clause = tuple[int, int]
Assignment = tuple[int, ...]


@dataclasses.dataclass(frozen=True)
class Instance:
    n: int
    clauses: tuple[Clause, ...]
    seed: int | None = None
    canonicalized: bool = False
    id: str = ""
    attempt: int | None = None

    def __post_init__(self):
        if self.n < 1:
            raise InfeasibleParameters(f"n must be positive, got {self.n}")
        object.__setattr__(self, "clauses", tuple(tuple(c) for c in self.clauses))
        seen = set()
        for clause in self.clauses:
            key = normalize_clause(clause, self.n)
            if key != clause:
                raise FormatError(f"clause {clause} is not in canonical order", "malformed-clause")
            if key in seen:
                raise FormatError(f"duplicate clause {clause}", "duplicate-clause")
            seen.add(key)

    @property
    def m(self) -> int:
        return len(self.clauses)

    @property
    def density(self) -> float:
        return self.m / self.n

    def literal_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Return the first and second literals of every clause as int arrays."""
        if not self.clauses:
            return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
        arr = np.asarray(self.clauses, dtype=np.int64)
        return arr[:, 0], arr[:, 1]


def normalize_clause(clause: Sequence[int], n: int | None = None) -> Clause:
    """Validate a two-literal clause and return it in canonical order."""
    if len(clause) != 2:
        raise FormatError(f"clause must have exactly two literals: {clause!r}", "malformed-clause")
    a, b = int(clause[0]), int(clause[1])
    if a == 0 or b == 0:
        raise FormatError(f"literal 0 is not allowed: {clause!r}", "malformed-clause")
    if n is not None and (abs(a) > n or abs(b) > n):
        raise FormatError(f"clause {clause!r} references a variable above n={n}", "variable-out-of-range")
    if abs(a) == abs(b):
        raise FormatError(f"clause {clause!r} repeats a variable", "tautological-or-repeated")
    return (a, b) if abs(a) < abs(b) else (b, a)


def max_clause_count(n: int) -> int:
    # n(n-1)/2 variable pairs, 4 sign patterns each
    return 2 * n * (n - 1)


def generate_instance(n: int, m: int, rng: np.random.Generator) -> Instance:
    """Draw ``m`` distinct clauses uniformly by rejection sampling."""
    if n < 1 or m < 1 or m > max_clause_count(n):
        raise InfeasibleParameters(f"cannot draw {m} distinct clauses on {n} variables")
    chosen: list[Clause] = []
    seen: set[Clause] = set()
    while len(chosen) < m:
        a = int(rng.integers(1, n + 1))
        b = int(rng.integers(1, n))
        if b >= a:
            b += 1
        sa, sb = rng.integers(0, 2, size=2)
        clause = normalize_clause((a if sa else -a, b if sb else -b))
        if clause in seen:
            continue
        seen.add(clause)
        chosen.append(clause)
    return Instance(n=n, clauses=tuple(chosen))


def index_to_bits(index: int, n: int) -> Assignment:
    return tuple((index >> i) & 1 for i in range(n))


def bits_to_index(bits: Sequence[int]) -> int:
    return sum(int(b) << i for i, b in enumerate(bits))


def _literal_false(lit: int, bits):
    # bit 0 = true, so a positive literal is false when its bit is 1
    b = bits[abs(lit) - 1]
    return b if lit > 0 else 1 - b


def count_satisfied(instance: Instance, assignment: Sequence[int]) -> int:
    if len(assignment) != instance.n:
        raise DimensionMismatch(f"assignment has length {len(assignment)}, instance has n={instance.n}")
    bits = [int(b) for b in assignment]
    unsat = sum(1 for a, b in instance.clauses if _literal_false(a, bits) and _literal_false(b, bits))
    return instance.m - unsat


def unsatisfied_counts(instance: Instance) -> np.ndarray:
    """Unsatisfied-clause count for every assignment index, as an int32 vector."""
    n = instance.n
    if n > BRUTE_FORCE_MAX_N:
        raise BudgetExceeded(f"exhaustive enumeration limited to n <= {BRUTE_FORCE_MAX_N}, got n={n}")
    idx = np.arange(1 << n, dtype=np.int64)
    bits = [((idx >> i) & 1).astype(np.int8) for i in range(n)]
    counts = np.zeros(1 << n, dtype=np.int32)
    for a, b in instance.clauses:
        counts += _literal_false(a, bits) & _literal_false(b, bits)
    return counts


def brute_force_optima(instance: Instance) -> tuple[int, list[Assignment]]:
    counts = unsatisfied_counts(instance)
    best = int(counts.min())
    optima = [index_to_bits(int(k), instance.n) for k in np.flatnonzero(counts == best)]
    return instance.m - best, optima


def has_unique_optimum(instance: Instance) -> bool:
    counts = unsatisfied_counts(instance)
    return int(np.count_nonzero(counts == counts.min())) == 1


def canonicalize_to_zero(instance: Instance, optimum: Sequence[int]) -> Instance:
    """Negate the literals of every variable set to 1 in ``optimum``.

    The result has the all-zeros assignment as an optimum and the same
    satisfied-count spectrum as the input.
    """
    if len(optimum) != instance.n:
        raise DimensionMismatch(f"optimum has length {len(optimum)}, instance has n={instance.n}")
    if instance.n <= BRUTE_FORCE_MAX_N:
        best, _ = brute_force_optima(instance)
        if count_satisfied(instance, optimum) != best:
            raise NonOptimalWitness(f"assignment {tuple(optimum)} is not optimal for {instance.id or 'instance'}")
    flip = [bool(b) for b in optimum]
    clauses = tuple(
        normalize_clause(tuple(-lit if flip[abs(lit) - 1] else lit for lit in clause))
        for clause in instance.clauses
    )
    return dataclasses.replace(instance, clauses=clauses, canonicalized=True)


def derive_seed(master_seed: int, n: int, attempt: int) -> int:
    """64-bit per-attempt seed, independent of generation order."""
    ss = np.random.SeedSequence([master_seed & (2**64 - 1), n, attempt])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def instance_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def instance_id(n: int, seed: int, attempt: int) -> str:
    return f"m2s-n{n}-s{seed}-a{attempt}"


def generate_attempt(n: int, attempt: int, master_seed: int, clause_factor: int = 3) -> Instance | None:
    """Run one generation attempt; return the canonical instance or None if rejected."""
    seed = derive_seed(master_seed, n, attempt)
    raw = generate_instance(n, clause_factor * n, instance_rng(seed))
    counts = unsatisfied_counts(raw)
    best = counts.min()
    winners = np.flatnonzero(counts == best)
    if winners.size != 1:
        return None
    raw = dataclasses.replace(raw, seed=seed, attempt=attempt, id=instance_id(n, seed, attempt))
    return canonicalize_to_zero(raw, index_to_bits(int(winners[0]), n))


def generate_dataset(n: int, target_count: int, clause_factor: int = 3, master_seed: int = 0) -> list[Instance]:
    """Attempt ``target_count`` instances and keep those with a unique optimum.

    ``target_count`` counts attempts, so the result is usually shorter.
    """
    if not 2 <= n <= BRUTE_FORCE_MAX_N:
        raise InfeasibleParameters(f"dataset generation needs 2 <= n <= {BRUTE_FORCE_MAX_N}, got {n}")
    kept = []
    for attempt in range(target_count):
        inst = generate_attempt(n, attempt, master_seed, clause_factor)
        if inst is not None:
            kept.append(inst)
    return kept


# -- text format ---------------------------------------------------------------

_META_KEYS = ("id", "seed", "attempt", "canonicalized")


def serialize_instance(instance: Instance) -> str:
    lines = []
    if instance.id:
        lines.append(f"c id={instance.id}")
    if instance.seed is not None:
        lines.append(f"c seed={instance.seed}")
    if instance.attempt is not None:
        lines.append(f"c attempt={instance.attempt}")
    lines.append(f"c canonicalized={'true' if instance.canonicalized else 'false'}")
    lines.append(f"p cnf {instance.n} {instance.m}")
    lines.extend(f"{a} {b} 0" for a, b in instance.clauses)
    return "\n".join(lines) + "\n"


def parse_instance(text: str, default_id: str = "") -> Instance:
    meta: dict[str, str] = {}
    header = None
    clauses: list[Clause] = []
    seen: set[Clause] = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("c"):
            body = line[1:].strip()
            key, sep, value = body.partition("=")
            if sep and key.strip() in _META_KEYS:
                meta[key.strip()] = value.strip()
            continue
        if line.startswith("p"):
            parts = line.split()
            if header is not None or len(parts) != 4 or parts[1] != "cnf":
                raise FormatError(f"line {lineno}: bad header {line!r}", "malformed-header")
            try:
                header = (int(parts[2]), int(parts[3]))
            except ValueError:
                raise FormatError(f"line {lineno}: bad header {line!r}", "malformed-header") from None
            if header[0] < 1 or header[1] < 0:
                raise FormatError(f"line {lineno}: bad header {line!r}", "malformed-header")
            continue
        if header is None:
            raise FormatError(f"line {lineno}: clause before header", "malformed-header")
        try:
            lits = [int(tok) for tok in line.split()]
        except ValueError:
            raise FormatError(f"line {lineno}: non-integer token in {line!r}", "malformed-clause") from None
        if len(lits) != 3 or lits[2] != 0:
            raise FormatError(f"line {lineno}: expected two literals then 0, got {line!r}", "malformed-clause")
        clause = normalize_clause(lits[:2], header[0])
        if clause in seen:
            raise FormatError(f"line {lineno}: duplicate clause {clause}", "duplicate-clause")
        seen.add(clause)
        clauses.append(clause)
    if header is None:
        raise FormatError("missing 'p cnf' header", "malformed-header")
    if len(clauses) != header[1]:
        raise FormatError(f"header declares {header[1]} clauses, found {len(clauses)}", "malformed-header")

    def _int(key):
        return int(meta[key]) if key in meta else None

    try:
        seed, attempt = _int("seed"), _int("attempt")
    except ValueError:
        raise FormatError(f"non-integer metadata in {meta}", "malformed-metadata") from None
    return Instance(
        n=header[0],
        clauses=tuple(clauses),
        seed=seed,
        canonicalized=meta.get("canonicalized", "false").lower() == "true",
        id=meta.get("id", default_id),
        attempt=attempt,
    )


def write_dataset(instances: Iterable[Instance], directory: str | Path) -> Path:
    """Write one ``<id>.cnf`` per instance plus a manifest mapping id to path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    rows = []
    for inst in instances:
        if not inst.id:
            raise FormatError("instances written to a dataset need an id", "missing-id")
        rel = f"{inst.id}.cnf"
        (directory / rel).write_text(serialize_instance(inst), encoding="utf-8", newline="\n")
        rows.append((inst.id, rel))
    rows.sort()
    manifest = directory / MANIFEST_NAME
    manifest.write_text("".join(f"{i}\t{p}\n" for i, p in rows), encoding="utf-8", newline="\n")
    return manifest


def read_manifest(directory: str | Path) -> list[tuple[str, Path]]:
    directory = Path(directory)
    entries = []
    for line in (directory / MANIFEST_NAME).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        ident, _, rel = line.partition("\t")
        entries.append((ident, directory / rel))
    return entries


def read_dataset(directory: str | Path) -> list[Instance]:
    return [parse_instance(path.read_text(encoding="utf-8"), default_id=ident) for ident, path in read_manifest(directory)]


def dataset_hash(directory: str | Path) -> str:
    """SHA-256 over the manifest and every instance file, in manifest order."""
    h = hashlib.sha256()
    for ident, path in read_manifest(directory):
        h.update(ident.encode())
        h.update(b"\0")
        h.update(path.read_bytes())
    return h.hexdigest()[:16]
