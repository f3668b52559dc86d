"""Profile dynamics, the nu-sweep with linear regression, and order checks."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Sequence

import numpy as np

from .grid import Field, GridSpec, build_grid, l2_distance_sq
from .model import FiringRateSpec, InitialConditionSpec, KernelSpec, ModelSpec
from .oracle import CosineBasis, linear_exact_regular, rate_probe
from .stepper import TimeGrid, Trajectory, run

log = logging.getLogger(__name__)

#: reference figure parameters (gamma, sigma, kappa, xi0, mu, theta, rho, x0)
FIG2_MODEL = ModelSpec(
    gamma=0.5,
    nu=0.0,
    firing=FiringRateSpec(mu=1e3, theta=0.1),
    kernel=KernelSpec(kappa=1.0, sigma=0.5, xi0=1.0),
    init=InitialConditionSpec(rho=5.0, x0=20.0, sigma=0.5),
)
DESK_GRID = GridSpec(n_x=2**10, n_xi=2**8, L_x=24 * math.pi, L_xi=3.0)
FULL_GRID = GridSpec(n_x=2**12, n_xi=2**10, L_x=24 * math.pi, L_xi=3.0)
FIG2_TIME = TimeGrid(T=3.0, tau=0.05)
DEFAULT_NUS = (0.0, 0.0125, 0.025, 0.05, 0.1)


class LinearFit(NamedTuple):
    slope: float
    intercept: float
    r2: float
    degenerate: bool = False


def linear_fit(points: Sequence[tuple[float, float]]) -> LinearFit:
    """Ordinary least squares ``y = slope*x + intercept`` with R^2.

    When all ``y`` coincide the fit is flagged degenerate and ``r2`` is 1.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    x, y = pts[:, 0], pts[:, 1]
    if np.unique(x).size < 2:
        raise ValueError("linear_fit needs at least two distinct abscissae")
    xm, ym = x.mean(), y.mean()
    sxx = np.sum((x - xm) ** 2)
    slope = float(np.sum((x - xm) * (y - ym)) / sxx)
    intercept = float(ym - slope * xm)
    ss_tot = float(np.sum((y - ym) ** 2))
    ss_res = float(np.sum((y - slope * x - intercept) ** 2))
    if ss_tot == 0.0:
        return LinearFit(slope, intercept, 1.0, True)
    return LinearFit(slope, intercept, 1.0 - ss_res / ss_tot, False)


@dataclass(frozen=True)
class SweepConfig:
    model: ModelSpec = FIG2_MODEL
    grid: GridSpec = DESK_GRID
    timegrid: TimeGrid = FIG2_TIME
    nus: tuple[float, ...] = DEFAULT_NUS
    v0: Field | None = None  # overrides the model's initial condition

    def __post_init__(self):
        nus = tuple(float(n) for n in self.nus)
        object.__setattr__(self, "nus", nus)
        if len(nus) < 3:
            raise ValueError("a sweep needs at least three nu values (reference plus two)")
        if nus[0] != 0.0:
            raise ValueError("the first nu of a sweep must be 0 (the reference run)")
        if any(b <= a for a, b in zip(nus, nus[1:])):
            raise ValueError(f"nus must be strictly increasing, got {nus}")


@dataclass
class SweepResult:
    nus: np.ndarray
    e: np.ndarray
    fit: LinearFit
    nus_fitted: np.ndarray = field(repr=False, default=None)

    @property
    def slope(self) -> float:
        return self.fit.slope

    @property
    def intercept(self) -> float:
        return self.fit.intercept

    @property
    def r2(self) -> float:
        return self.fit.r2

    @property
    def pairs(self) -> list[tuple[float, float]]:
        return list(zip(self.nus.tolist(), self.e.tolist()))


class SweepError(RuntimeError):
    def __init__(self, nu: float, cause: Exception):
        super().__init__(f"sweep aborted at nu={nu}: {cause}")
        self.nu = nu


def nu_sweep(config: SweepConfig, workers: int = 1) -> SweepResult:
    """Distance e(nu) between each diffusive run and the nu=0 reference.

    The reference trajectory is computed once and shared; the regression is
    over the nu > 0 points only, so the (0, 0) point does not pin the
    intercept.
    """
    grid = build_grid(config.grid)

    def trajectory(nu):
        try:
            return run(config.model.with_nu(nu), grid, config.timegrid, v0=config.v0)
        except FloatingPointError as exc:
            raise SweepError(nu, exc) from exc

    ref = trajectory(0.0)

    def distance(nu):
        e = rate_probe(ref, trajectory(nu))
        log.info("nu=%g e=%.17g", nu, e)
        return e

    positive = config.nus[1:]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            es = list(pool.map(distance, positive))
    else:
        es = [distance(nu) for nu in positive]
    fit = linear_fit(list(zip(positive, es)))
    return SweepResult(np.array(config.nus), np.array([0.0, *es]), fit, np.array(positive))


def local_maxima(values: np.ndarray) -> np.ndarray:
    """Indices of strict interior local maxima."""
    v = np.asarray(values)
    return np.flatnonzero((v[1:-1] > v[:-2]) & (v[1:-1] > v[2:])) + 1


def half_height_width(xi: np.ndarray, values: np.ndarray) -> float:
    """Width of the connected region around the global maximum where v >= max/2.

    Crossings are located by linear interpolation between nodes.
    """
    v = np.asarray(values, dtype=float)
    j = int(np.argmax(v))
    half = 0.5 * v[j]
    lo = j
    while lo > 0 and v[lo - 1] >= half:
        lo -= 1
    hi = j
    while hi < v.size - 1 and v[hi + 1] >= half:
        hi += 1
    left = xi[lo]
    if lo > 0:
        left = xi[lo - 1] + (half - v[lo - 1]) / (v[lo] - v[lo - 1]) * (xi[lo] - xi[lo - 1])
    right = xi[hi]
    if hi < v.size - 1:
        right = xi[hi] + (v[hi] - half) / (v[hi] - v[hi + 1]) * (xi[hi + 1] - xi[hi])
    return float(right - left)


@dataclass
class ProfileResult:
    xi: np.ndarray
    times: tuple[float, ...]
    nus: tuple[float, ...]
    fields: dict[tuple[float, float], Field]

    def slice(self, nu: float, t: float, x: float = 0.0) -> np.ndarray:
        return self.fields[(nu, t)].slice_at_x(x)


def profile_experiment(model: ModelSpec = FIG2_MODEL, grid_spec: GridSpec = DESK_GRID,
                       timegrid: TimeGrid = FIG2_TIME, nus: Sequence[float] = (0.0, 0.1),
                       times: Sequence[float] = (1.0, 3.0), workers: int = 1) -> ProfileResult:
    """Run each nu and keep the fields at ``times`` (x=0 slices via :meth:`ProfileResult.slice`)."""
    grid = build_grid(grid_spec)
    fields = {}
    for nu in nus:
        traj = run(model.with_nu(nu), grid, timegrid, snapshot_at=times, workers=workers)
        for t in times:
            fields[(float(nu), float(t))] = traj.at_time(t)
    return ProfileResult(grid.xi_nodes, tuple(map(float, times)), tuple(map(float, nus)), fields)


@dataclass(frozen=True)
class OrderCheckConfig:
    """Frozen-source linear problem used for refinement studies.

    ``v0_modes`` and ``source_modes`` map cosine mode numbers to amplitudes;
    an x-modulation ``1 + x_mod*cos(pi x / L_x)`` multiplies the initial data.
    """

    gamma: float = 0.5
    nu: float = 0.1
    L_x: float = 1.0
    L_xi: float = 3.0
    n_x: int = 4
    x_mod: float = 0.5
    v0_modes: dict = field(default_factory=lambda: {2: 1.0})
    source_modes: dict = field(default_factory=lambda: {0: 0.3, 1: 0.2})
    v0_constant: float = 0.0
    # time refinement
    t_final: float = 1.0
    taus: tuple[float, ...] = (0.1, 0.05, 0.025, 0.0125)
    n_xi_time: int = 257
    # space refinement (long horizon: the discrete steady state is tau-free)
    space_T: float = 40.0
    space_tau: float = 0.5
    n_xis: tuple[int, ...] = (17, 33, 65, 129)
    machine_tol: float = 1e-10


def space_order_config() -> OrderCheckConfig:
    return OrderCheckConfig(nu=1.0, v0_modes={}, source_modes={3: 1.0, 5: 0.5})


class OrderResult(NamedTuple):
    order: float
    sizes: tuple[float, ...]
    errors: tuple[float, ...]
    monotone: bool
    skipped: bool = False


def _mode_field(grid, cfg: OrderCheckConfig, modes: dict, modulate: bool, constant: float = 0.0):
    basis = CosineBasis(grid.spec.L_xi, max(modes, default=0))
    prof = sum((a * basis.psi(k, grid.xi_nodes) for k, a in modes.items()), np.zeros(grid.spec.n_xi))
    xfac = 1.0 + cfg.x_mod * np.cos(math.pi * grid.x_nodes / cfg.L_x) if modulate else np.ones(grid.spec.n_x)
    return Field(grid, np.outer(xfac, prof) + constant)


def linear_error(cfg: OrderCheckConfig, n_xi: int, tau: float, T: float) -> float:
    """L2 error at ``T`` of the IMEX run against the modal closed form."""
    grid = build_grid(GridSpec(cfg.n_x, n_xi, cfg.L_x, cfg.L_xi))
    v0 = _mode_field(grid, cfg, cfg.v0_modes, True, cfg.v0_constant)
    N0 = _mode_field(grid, cfg, cfg.source_modes, False)
    model = ModelSpec(gamma=cfg.gamma, nu=cfg.nu, kernel=KernelSpec(kappa=0.0), input=N0)
    traj = run(model, grid, TimeGrid(T, tau), snapshot_at=[T], v0=v0)
    exact = linear_exact_regular(v0, N0, T, cfg.nu, cfg.gamma)
    return math.sqrt(l2_distance_sq(traj.at_time(T), exact))


def order_check(problem: str, config: OrderCheckConfig | None = None) -> OrderResult:
    """Observed convergence order of the stepper in ``"time"`` or ``"space"``.

    The order is the least-squares slope of log(error) against log(step size).
    """
    if problem == "time":
        cfg = config or OrderCheckConfig()
        sizes = tuple(cfg.taus)
        errors = tuple(linear_error(cfg, cfg.n_xi_time, tau, cfg.t_final) for tau in sizes)
    elif problem == "space":
        cfg = config or space_order_config()
        sizes = tuple(2.0 * cfg.L_xi / (n - 1) for n in cfg.n_xis)
        errors = tuple(linear_error(cfg, n, cfg.space_tau, cfg.space_T) for n in cfg.n_xis)
    else:
        raise ValueError(f"problem must be 'time' or 'space', got {problem!r}")
    if len(sizes) < 3:
        raise ValueError("an order check needs at least three refinements")
    if max(errors) <= cfg.machine_tol:
        return OrderResult(math.nan, sizes, errors, True, skipped=True)
    monotone = all(b < a for a, b in zip(errors, errors[1:]))
    if not monotone:
        log.warning("%s refinement errors are not monotone: %s", problem, errors)
    slope = np.polyfit(np.log(sizes), np.log(errors), 1)[0]
    return OrderResult(float(slope), sizes, errors, monotone)
