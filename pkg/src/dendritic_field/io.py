"""Run configuration files, binary field snapshots and CSV series."""

from __future__ import annotations

import configparser
import csv
import math
import re
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .experiments import DEFAULT_NUS, FULL_GRID, SweepConfig
from .grid import Field, Grid, GridSpec, build_grid
from .model import FiringRateSpec, InitialConditionSpec, KernelSpec, ModelSpec
from .stepper import TimeGrid

MAGIC = b"DNF1"
VERSION = 1
# magic, version, n_x, n_xi, 4-byte zero pad, L_x, L_xi, t
_HEADER = struct.Struct("<4sIII4xddd")
HEADER_SIZE = _HEADER.size


class ConfigError(ValueError):
    """Invalid configuration; ``problems`` lists every issue found."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("\n".join(self.problems))


class SnapshotError(ValueError):
    pass


# ---------------------------------------------------------------- config

REQUIRED = {
    "grid": ("n_x", "n_xi", "L_x", "L_xi"),
    "model": ("gamma", "nu", "kappa", "sigma", "xi0", "mu", "theta", "rho", "x0"),
    "time": ("T", "tau"),
}
OPTIONAL = {
    "grid": (),
    "model": ("init_sigma", "input"),
    "time": (),
    "sweep": ("nus", "profile_nu"),
    "output": ("directory", "snapshot_every", "scale", "threads", "plots"),
}


@dataclass(frozen=True)
class RunConfig:
    grid: GridSpec
    model: ModelSpec
    timegrid: TimeGrid
    nus: tuple[float, ...] = DEFAULT_NUS
    profile_nu: float = 0.1
    output_dir: str = "out"
    snapshot_every: int = 20
    scale: str = "desk"
    threads: int = 1
    plots: bool = True

    @property
    def effective_grid(self) -> GridSpec:
        """The configured grid, or the full 4096x1024 resolution when ``scale = full``."""
        if self.scale == "full":
            return GridSpec(FULL_GRID.n_x, FULL_GRID.n_xi, self.grid.L_x, self.grid.L_xi)
        return self.grid

    def sweep_config(self) -> SweepConfig:
        return SweepConfig(self.model, self.effective_grid, self.timegrid, self.nus)


_NUM = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)?\s*\*?\s*(pi)?\s*$")


def parse_number(text: str) -> float:
    """Parse a float, also accepting ``pi`` and ``<number>*pi``."""
    try:
        return float(text)
    except ValueError:
        pass
    m = _NUM.match(text)
    if not m or not m.group(2):
        raise ValueError(f"not a number: {text!r}")
    return float(m.group(1) or 1.0) * math.pi


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_int(text: str) -> int:
    v = parse_number(text)
    if v != int(v):
        raise ValueError(f"not an integer: {text!r}")
    return int(v)


def parse_config_text(text: str, source: str = "<string>") -> RunConfig:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: parse error: {exc}") from exc

    problems = []
    for sec in cp.sections():
        if sec not in OPTIONAL:
            problems.append(f"unknown section [{sec}]")
            continue
        allowed = set(REQUIRED.get(sec, ())) | set(OPTIONAL[sec])
        for key in cp[sec]:
            if key not in allowed:
                problems.append(f"unknown key {key!r} in [{sec}]")
    for sec, keys in REQUIRED.items():
        for key in keys:
            if not cp.has_option(sec, key):
                problems.append(f"missing required key {key!r} in [{sec}]")
    if problems:
        raise ConfigError(problems)

    vals = {}

    def get(sec, key, conv, default=None):
        if not cp.has_option(sec, key):
            return default
        try:
            return conv(cp.get(sec, key))
        except ValueError as exc:
            problems.append(f"[{sec}] {key}: {exc}")
            return default

    for key in REQUIRED["grid"]:
        vals[key] = get("grid", key, _parse_int if key.startswith("n_") else parse_number)
    m = {key: get("model", key, parse_number) for key in REQUIRED["model"]}
    init_sigma = get("model", "init_sigma", parse_number, m["sigma"])
    input_kind = get("model", "input", str.strip, "zero")
    T = get("time", "T", parse_number)
    tau = get("time", "tau", parse_number)
    nus = get("sweep", "nus", lambda s: tuple(parse_number(p) for p in s.split(",") if p.strip()),
              DEFAULT_NUS)
    profile_nu = get("sweep", "profile_nu", parse_number, 0.1)
    outdir = get("output", "directory", str.strip, "out")
    every = get("output", "snapshot_every", _parse_int, 20)
    scale = get("output", "scale", str.strip, "desk")
    threads = get("output", "threads", _parse_int, 1)
    plots = get("output", "plots", _parse_bool, True)
    if problems:
        raise ConfigError(problems)

    if input_kind != "zero":
        problems.append(f"[model] input: only 'zero' is supported in config files, got {input_kind!r}")
    if scale not in ("desk", "full"):
        problems.append(f"[output] scale must be 'desk' or 'full', got {scale!r}")
    if every < 1:
        problems.append("[output] snapshot_every must be >= 1")
    if threads < 1:
        problems.append("[output] threads must be >= 1")

    grid = model = timegrid = None
    grid_probs = GridSpec.problems(_Unchecked(**vals))
    problems += [f"[grid] {p}" for p in grid_probs]
    if not grid_probs:
        grid = GridSpec(**vals)
    parts = []
    for build in (
        lambda: FiringRateSpec(m["mu"], m["theta"]),
        lambda: KernelSpec(m["kappa"], m["sigma"], m["xi0"]),
        lambda: InitialConditionSpec(m["rho"], m["x0"], init_sigma),
    ):
        try:
            parts.append(build())
        except ValueError as exc:
            problems.append(f"[model] {exc}")
    for key in ("gamma", "nu"):
        if not m[key] >= 0:
            problems.append(f"[model] {key} must be >= 0, got {m[key]}")
    if len(parts) == 3 and m["gamma"] >= 0 and m["nu"] >= 0:
        model = ModelSpec(m["gamma"], m["nu"], *parts)
    if grid is not None and not -grid.L_xi < m["xi0"] < grid.L_xi:
        problems.append(f"[model] xi0={m['xi0']} must lie inside (-L_xi, L_xi)")
    try:
        timegrid = TimeGrid(T, tau)
    except ValueError as exc:
        problems.append(f"[time] {exc}")
    if None not in (grid, model, timegrid):
        try:
            SweepConfig(model, grid, timegrid, nus)
        except ValueError as exc:
            problems.append(f"[sweep] {exc}")
    if profile_nu < 0:
        problems.append("[sweep] profile_nu must be >= 0")
    if problems:
        raise ConfigError(problems)
    return RunConfig(grid, model, timegrid, nus, profile_nu, outdir, every, scale, threads, plots)


class _Unchecked:
    """Attribute bag so GridSpec.problems can run without raising."""

    def __init__(self, **kw):
        self.__dict__.update(kw)


def parse_config(path) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"configuration file not found: {path}")
    return parse_config_text(path.read_text(), source=str(path))


def dump_config(cfg: RunConfig) -> str:
    """Render ``cfg`` in the config-file format (parse_config_text inverts it)."""
    g, m = cfg.grid, cfg.model
    r = repr
    lines = [
        "[grid]", f"n_x = {g.n_x}", f"n_xi = {g.n_xi}", f"L_x = {r(g.L_x)}", f"L_xi = {r(g.L_xi)}", "",
        "[model]", f"gamma = {r(m.gamma)}", f"nu = {r(m.nu)}", f"kappa = {r(m.kernel.kappa)}",
        f"sigma = {r(m.kernel.sigma)}", f"xi0 = {r(m.kernel.xi0)}", f"mu = {r(m.firing.mu)}",
        f"theta = {r(m.firing.theta)}", f"rho = {r(m.init.rho)}", f"x0 = {r(m.init.x0)}",
        f"init_sigma = {r(m.init.sigma)}", "input = zero", "",
        "[time]", f"T = {r(cfg.timegrid.T)}", f"tau = {r(cfg.timegrid.tau)}", "",
        "[sweep]", "nus = " + ", ".join(r(n) for n in cfg.nus), f"profile_nu = {r(cfg.profile_nu)}", "",
        "[output]", f"directory = {cfg.output_dir}", f"snapshot_every = {cfg.snapshot_every}",
        f"scale = {cfg.scale}", f"threads = {cfg.threads}", f"plots = {str(cfg.plots).lower()}", "",
    ]
    return "\n".join(lines)


# ---------------------------------------------------------------- snapshots

def write_snapshot(f: Field, t: float, path) -> Path:
    path = Path(path)
    s = f.grid.spec
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, s.n_x, s.n_xi, s.L_x, s.L_xi, float(t)))
        fh.write(np.ascontiguousarray(f.values, dtype="<f8").tobytes())
    return path


@dataclass(frozen=True)
class SnapshotHeader:
    n_x: int
    n_xi: int
    L_x: float
    L_xi: float
    t: float


def read_snapshot_header(path) -> SnapshotHeader:
    with open(path, "rb") as fh:
        raw = fh.read(HEADER_SIZE)
    if len(raw) < HEADER_SIZE:
        raise SnapshotError(f"{path}: file shorter than the {HEADER_SIZE}-byte header")
    magic, version, n_x, n_xi, L_x, L_xi, t = _HEADER.unpack(raw)
    if magic != MAGIC:
        raise SnapshotError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise SnapshotError(f"{path}: unsupported format version {version}")
    return SnapshotHeader(n_x, n_xi, L_x, L_xi, t)


def read_snapshot(path, grid: Grid | None = None) -> tuple[Field, float]:
    """Read a snapshot; returns ``(field, t)``.  A fresh grid is built unless one is given."""
    path = Path(path)
    h = read_snapshot_header(path)
    expected = HEADER_SIZE + 8 * h.n_x * h.n_xi
    size = path.stat().st_size
    if size != expected:
        raise SnapshotError(f"{path}: size {size} does not match expected {expected} bytes")
    spec = GridSpec(h.n_x, h.n_xi, h.L_x, h.L_xi)
    if grid is None:
        grid = build_grid(spec)
    elif grid.spec != spec:
        raise SnapshotError(f"{path}: snapshot grid {spec} differs from {grid.spec}")
    with open(path, "rb") as fh:
        fh.seek(HEADER_SIZE)
        values = np.frombuffer(fh.read(), dtype="<f8").reshape(h.n_x, h.n_xi)
    return Field(grid, values.astype(float)), h.t


# ---------------------------------------------------------------- CSV

def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def write_csv(path, header: list[str], rows) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def read_csv(path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array([[float(v) for v in r] for r in rows[1:]], dtype=float).reshape(-1, len(rows[0]))
