"""IMEX Euler time stepping for the regular (nu > 0) and singular (nu = 0) problems.

Each step solves, column by column in x,

    ((1 + tau*gamma) I - tau*nu*D2) v_new = v + tau*(F(v) + G(t_n))

where ``D2`` is the central second difference in xi closed with mirrored
ghost nodes (zero flux at both dendritic ends).  The nonlocal term and the
input are explicit; decay and diffusion are implicit.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .grid import Field, Grid, GridError, weighted_sq_sum
from .model import ModelSpec, initial_condition
from .nonlocal_term import NonlocalOperator, PeriodicKernelTable, periodize_kernel

log = logging.getLogger(__name__)

#: L2 norm above which a run is declared blown up
BLOWUP_NORM = 1e6


class BlowUpError(FloatingPointError):
    """Raised when a step produces non-finite values or an exploding norm."""

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message if step is None else f"step {step}: {message}")
        self.step = step


@dataclass(frozen=True)
class TimeGrid:
    T: float
    tau: float

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"tau must be > 0, got {self.tau}")
        if not self.T >= 0:
            raise ValueError(f"T must be >= 0, got {self.T}")
        n = round(self.T / self.tau)
        if abs(n * self.tau - self.T) > 1e-12 * max(self.T, self.tau):
            raise ValueError(f"T={self.T} is not an integer multiple of tau={self.tau}")

    @property
    def n_steps(self) -> int:
        return round(self.T / self.tau)

    def time(self, n: int) -> float:
        return n * self.tau

    def step_of(self, t: float) -> int:
        n = round(t / self.tau)
        if abs(n * self.tau - t) > 1e-9 * max(abs(t), self.tau) or not 0 <= n <= self.n_steps:
            raise ValueError(f"t={t} is not a point of the time grid")
        return n


def thomas_factor(lower, diag, upper):
    """Forward-elimination factors for a tridiagonal matrix.

    ``lower[0]`` and ``upper[-1]`` are ignored.  Returns ``(lower, denom,
    cprime)`` so that :func:`thomas_solve` only touches the right-hand side.
    """
    n = len(diag)
    denom = np.empty(n)
    cprime = np.zeros(n)
    denom[0] = diag[0]
    for k in range(1, n):
        cprime[k - 1] = upper[k - 1] / denom[k - 1]
        denom[k] = diag[k] - lower[k] * cprime[k - 1]
    return np.asarray(lower, dtype=float), denom, cprime


def thomas_solve(factors, rhs: np.ndarray) -> np.ndarray:
    """Solve with prefactored tridiagonal ``factors`` along axis 0 of ``rhs``.

    Trailing axes of ``rhs`` are independent systems.
    """
    lower, denom, cprime = factors
    n = rhs.shape[0]
    y = np.empty_like(rhs, dtype=float)
    y[0] = rhs[0] / denom[0]
    for k in range(1, n):
        y[k] = (rhs[k] - lower[k] * y[k - 1]) / denom[k]
    for k in range(n - 2, -1, -1):
        y[k] -= cprime[k] * y[k + 1]
    return y


@dataclass(eq=False)
class DiffusionSolver:
    """Prefactored ``(1 + tau*gamma) I - tau*nu*D2`` with Neumann closure."""

    grid: Grid
    tau: float
    nu: float
    gamma: float
    lower: np.ndarray = field(init=False, repr=False)
    diag: np.ndarray = field(init=False, repr=False)
    upper: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.tau < 0 or self.nu < 0 or self.gamma < 0:
            raise ValueError("tau, nu and gamma must be non-negative")
        n = self.grid.spec.n_xi
        r = self.tau * self.nu / self.grid.h_xi**2
        self.decay = 1.0 + self.tau * self.gamma
        self.diag = np.full(n, self.decay + 2.0 * r)
        self.lower = np.full(n, -r)
        self.upper = np.full(n, -r)
        # mirrored ghost nodes: v_{-1} = v_1, v_n = v_{n-2}
        self.upper[0] = -2.0 * r
        self.lower[-1] = -2.0 * r
        self.lower[0] = self.upper[-1] = 0.0
        self._factors = None if self.nu == 0.0 else thomas_factor(self.lower, self.diag, self.upper)

    def matrix(self) -> np.ndarray:
        """Dense copy of the system matrix (for checks)."""
        return np.diag(self.diag) + np.diag(self.lower[1:], -1) + np.diag(self.upper[:-1], 1)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """Solve for every x-column of an ``(n_x, n_xi)`` right-hand side."""
        if self._factors is None:
            return rhs / self.decay
        return np.ascontiguousarray(thomas_solve(self._factors, np.ascontiguousarray(rhs.T)).T)


def second_difference(values: np.ndarray, h: float) -> np.ndarray:
    """D2 along xi (last axis) with the same mirrored-ghost closure as the solver."""
    v = np.asarray(values, dtype=float)
    out = np.empty_like(v)
    out[..., 1:-1] = v[..., 2:] - 2.0 * v[..., 1:-1] + v[..., :-2]
    out[..., 0] = 2.0 * (v[..., 1] - v[..., 0])
    out[..., -1] = 2.0 * (v[..., -2] - v[..., -1])
    return out / h**2


def _step_array(v, op, dsolver, G, tau, step=None):
    with np.errstate(over="ignore", invalid="ignore"):
        rhs = v + tau * op(v) if G is None else v + tau * (op(v) + G)
    if not np.all(np.isfinite(rhs)):
        raise BlowUpError("non-finite right-hand side", step)
    return dsolver.solve(rhs)


def imex_step(v: Field, model: ModelSpec, ktab: PeriodicKernelTable,
              dsolver: DiffusionSolver, G_at_t: Field | None, tau: float) -> Field:
    """One IMEX Euler step of the regular problem."""
    if not (v.grid.same_as(ktab.grid) and v.grid.same_as(dsolver.grid)):
        raise GridError("field, kernel table and diffusion solver grids disagree")
    if dsolver.tau != tau or dsolver.nu != model.nu or dsolver.gamma != model.gamma:
        raise ValueError("diffusion solver was factored for different tau/nu/gamma")
    G = None if G_at_t is None else G_at_t.values
    return Field(v.grid, _step_array(v.values, NonlocalOperator(model, ktab), dsolver, G, tau))


def singular_step(v: Field, model: ModelSpec, ktab: PeriodicKernelTable,
                  G_at_t: Field | None, tau: float) -> Field:
    """One step of the diffusion-free problem: ``(v + tau*(F + G)) / (1 + tau*gamma)``."""
    dsolver = DiffusionSolver(v.grid, tau, 0.0, model.gamma)
    return imex_step(v, model.with_nu(0.0), ktab, dsolver, G_at_t, tau)


@dataclass(eq=False)
class Trajectory:
    """Snapshots of one run plus the per-step squared L2 norms."""

    grid: Grid
    timegrid: TimeGrid
    snapshot_steps: list[int] = field(default_factory=list)
    snapshots: list[Field] = field(default_factory=list)
    norms_sq: list[float] = field(default_factory=list)

    @property
    def times(self) -> np.ndarray:
        return np.array([self.timegrid.time(n) for n in self.snapshot_steps])

    @property
    def sup_norm_sq(self) -> float:
        """sup over the time grid of ||v(t_n)||^2."""
        return max(self.norms_sq)

    def at_step(self, n: int) -> Field:
        return self.snapshots[self.snapshot_steps.index(n)]

    def at_time(self, t: float) -> Field:
        return self.at_step(self.timegrid.step_of(t))

    @property
    def final(self) -> Field:
        return self.snapshots[-1]

    def record(self, n: int, values: np.ndarray, keep: bool) -> None:
        self.norms_sq.append(weighted_sq_sum(values, self.grid))
        if keep:
            self.snapshot_steps.append(n)
            self.snapshots.append(Field(self.grid, values.copy()))


def _wanted(every: int, at_steps: set[int] | None, n: int, last: int) -> bool:
    if at_steps is not None:
        return n in at_steps
    return n % every == 0 or n == last


def run(model: ModelSpec, grid: Grid, timegrid: TimeGrid, snapshot_every: int = 1,
        snapshot_at=None, v0: Field | None = None, workers: int = 1) -> Trajectory:
    """Integrate from ``v0`` (default: the localised initial condition) to ``T``.

    Snapshots are kept every ``snapshot_every`` steps (always including the
    first and last), or exactly at the times in ``snapshot_at`` when given.
    """
    if snapshot_every < 1:
        raise ValueError("snapshot_every must be >= 1")
    at_steps = None if snapshot_at is None else {timegrid.step_of(t) for t in snapshot_at}
    if v0 is None:
        v0 = initial_condition(grid, model.init)
    elif not v0.grid.same_as(grid):
        raise GridError("initial field lives on a different grid")
    tau, last = timegrid.tau, timegrid.n_steps
    op = NonlocalOperator(model, periodize_kernel(model.kernel.kappa, grid), workers=workers)
    dsolver = DiffusionSolver(grid, tau, model.nu, model.gamma)
    traj = Trajectory(grid, timegrid)
    v = v0.values.copy()
    traj.record(0, v, _wanted(snapshot_every, at_steps, 0, last))
    for n in range(last):
        G = model.input_at(timegrid.time(n), grid)
        v = _step_array(v, op, dsolver, None if G is None else G.values, tau, step=n + 1)
        if not np.all(np.isfinite(v)):
            raise BlowUpError("non-finite solution", n + 1)
        traj.record(n + 1, v, _wanted(snapshot_every, at_steps, n + 1, last))
        if traj.norms_sq[-1] > BLOWUP_NORM**2:
            raise BlowUpError(f"L2 norm {math.sqrt(traj.norms_sq[-1]):.3g} exceeds {BLOWUP_NORM:g}", n + 1)
    log.debug("run nu=%g finished %d steps, sup ||v||^2=%g", model.nu, last, traj.sup_norm_sq)
    return traj


def neumann_defect(f: Field) -> float:
    """Largest one-sided second-order estimate of |d v / d xi| at either dendritic end."""
    v, h = f.values, f.grid.h_xi
    left = (-3.0 * v[:, 0] + 4.0 * v[:, 1] - v[:, 2]) / (2.0 * h)
    right = (3.0 * v[:, -1] - 4.0 * v[:, -2] + v[:, -3]) / (2.0 * h)
    return float(max(np.abs(left).max(), np.abs(right).max()))


def check_neumann(f: Field, C: float = 1.0) -> bool:
    """True when ``neumann_defect(f) <= C * h_xi**2``."""
    return neumann_defect(f) <= C * f.grid.h_xi**2

