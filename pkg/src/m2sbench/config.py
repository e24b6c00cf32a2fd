"""Run configuration: a ``key=value`` text file with a stable hash."""

from __future__ import annotations

import dataclasses
import hashlib
import os
from pathlib import Path

from .classical import MixConfig
from .dynamics import IntegratorSettings, TimeWindow
from .errors import FormatError

WORKERS_ENV = "M2S_WORKERS"

# keys that change where or how fast things run, or which datasets are
# selected, never what a solver computes for a given instance
_UNHASHED = frozenset({"output_dir", "workers", "t99_wall_clock", "n_min", "n_max"})
# analysis-only keys; recorded in the analysis provenance instead
ANALYSIS_KEYS = ("hist_bins", "heatmap_bins", "portfolio_normalizer")


@dataclasses.dataclass(frozen=True)
class RunConfig:
    master_seed: int = 0
    n_min: int = 5
    n_max: int = 9
    target_count: int = 2000
    clause_factor: int = 3
    rtol: float = 1e-9
    atol: float = 1e-12
    max_steps: int = 2_000_000
    norm_tol: float = 1e-6
    qw_t_start: float = 0.0
    qw_width: float = 100.0
    gamma: str = "auto"  # "auto" or a float literal
    gamma_source: str = "kept"  # "kept" or "all" generated instances
    gamma_from: str = ""  # borrow the auto hopping rate of another dataset
    pinf_max_n: int = 10
    t99_t_init: float = 1.0
    t99_max_doublings: int = 20
    t99_wall_clock: float = 0.0  # seconds per instance, 0 disables
    mix_k: int = 0  # 0 means ceil(sqrt(2n)) + 1
    mix_max_sweeps: int = 200
    mix_tol: float = 1e-4
    mix_rounds: int = 20
    solver_seed: int = 0
    hist_bins: str = "fd"
    heatmap_bins: int = 20
    portfolio_normalizer: str = "median"
    workers: int = 1
    output_dir: str = "m2s-out"

    def __post_init__(self):
        if not 2 <= self.n_min <= self.n_max:
            raise FormatError(f"invalid n range {self.n_min}..{self.n_max}", "invalid-config")
        if self.gamma != "auto":
            try:
                if float(self.gamma) <= 0:
                    raise ValueError
            except ValueError:
                raise FormatError(f"gamma must be 'auto' or a positive number, got {self.gamma!r}", "invalid-config") from None
        if self.gamma_source not in ("kept", "all"):
            raise FormatError(f"gamma_source must be 'kept' or 'all', got {self.gamma_source!r}", "invalid-config")
        if self.workers < 1:
            raise FormatError("workers must be at least 1", "invalid-config")

    @property
    def n_values(self) -> list[int]:
        return list(range(self.n_min, self.n_max + 1))

    @property
    def integrator(self) -> IntegratorSettings:
        return IntegratorSettings(self.rtol, self.atol, self.max_steps, self.norm_tol)

    @property
    def window(self) -> TimeWindow:
        return TimeWindow(self.qw_t_start, self.qw_width)

    @property
    def mix(self) -> MixConfig:
        return MixConfig(self.mix_k or None, self.mix_max_sweeps, self.mix_tol, self.mix_rounds, self.solver_seed)

    def to_text(self, include_unhashed: bool = True) -> str:
        lines = []
        for f in dataclasses.fields(self):
            if not include_unhashed and (f.name in _UNHASHED or f.name in ANALYSIS_KEYS):
                continue
            lines.append(f"{f.name}={getattr(self, f.name)!s}")
        return "\n".join(lines) + "\n"

    def analysis_settings(self) -> str:
        return " ".join(f"{k}={getattr(self, k)}" for k in ANALYSIS_KEYS)

    def config_hash(self) -> str:
        return hashlib.sha256(self.to_text(include_unhashed=False).encode()).hexdigest()[:16]

    def with_overrides(self, **overrides) -> RunConfig:
        clean = {k: v for k, v in overrides.items() if v is not None}
        return dataclasses.replace(self, **clean) if clean else self


def _convert(field: dataclasses.Field, raw: str):
    kind = field.type if isinstance(field.type, str) else field.type.__name__
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
    except ValueError:
        raise FormatError(f"{field.name}: expected {kind}, got {raw!r}", "invalid-config") from None
    return raw


def parse_config(text: str) -> RunConfig:
    fields = {f.name: f for f in dataclasses.fields(RunConfig)}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep:
            raise FormatError(f"config line {lineno}: expected key=value, got {raw!r}", "invalid-config")
        if key == "n_range":
            lo, _, hi = value.partition("..")
            values["n_min"], values["n_max"] = int(lo), int(hi.lstrip("="))
            continue
        if key not in fields:
            raise FormatError(f"config line {lineno}: unknown key {key!r}", "invalid-config")
        values[key] = _convert(fields[key], value)
    return RunConfig(**values)


def load_config(path: str | Path | None) -> RunConfig:
    cfg = RunConfig() if path is None else parse_config(Path(path).read_text(encoding="utf-8"))
    env = os.environ.get(WORKERS_ENV)
    if env:
        cfg = dataclasses.replace(cfg, workers=int(env))
    return cfg
