"""Quick oracle and property checks behind ``dendritic-field validate``."""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .experiments import FIG2_MODEL, OrderCheckConfig, order_check
from .grid import Field, GridSpec, build_grid, l2_distance_sq, l2_norm_sq
from .model import KernelSpec, ModelSpec, estimate_KF, initial_condition
from .nonlocal_term import apply_F, apply_F_direct, periodize_kernel
from .stepper import TimeGrid, check_neumann, run


class Check(NamedTuple):
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


def _small_grid(n_x=64, n_xi=33):
    return build_grid(GridSpec(n_x, n_xi, 24 * math.pi, 3.0))


def check_operator_oracle(seed=0, n_fields=3) -> Check:
    rng = np.random.default_rng(seed)
    grid = _small_grid()
    ktab = periodize_kernel(FIG2_MODEL.kernel.kappa, grid)
    worst = 0.0
    for _ in range(n_fields):
        u = Field(grid, rng.uniform(-1.0, 1.0, grid.shape))
        fast, ref = apply_F(u, FIG2_MODEL, ktab), apply_F_direct(u, FIG2_MODEL)
        worst = max(worst, math.sqrt(l2_distance_sq(fast, ref) / l2_norm_sq(ref)))
    return Check("FFT operator matches direct quadrature", worst <= 1e-10, f"max rel err {worst:.2e}")


def check_lipschitz_bounds(seed=1, n=20) -> Check:
    rng = np.random.default_rng(seed)
    grid = _small_grid()
    model = ModelSpec(gamma=0.5, firing=FIG2_MODEL.firing, kernel=FIG2_MODEL.kernel)
    KF = estimate_KF(model, grid)
    ktab = periodize_kernel(model.kernel.kappa, grid)
    ok = True
    for _ in range(n):
        u = Field(grid, rng.uniform(-5, 5, grid.shape))
        v = Field(grid, rng.uniform(-5, 5, grid.shape))
        Fu, Fv = apply_F(u, model, ktab), apply_F(v, model, ktab)
        ok &= math.sqrt(l2_norm_sq(Fu)) <= KF + 1e-6
        ok &= math.sqrt(l2_distance_sq(Fu, Fv)) <= KF * math.sqrt(l2_distance_sq(u, v)) + 1e-6
    return Check("nonlocal operator bound and Lipschitz constant", bool(ok), f"K_F = {KF:.6g}")


def check_orders() -> list[Check]:
    t = order_check("time")
    s = order_check("space")
    return [
        Check("IMEX time order", abs(t.order - 1.0) <= 0.2 and t.monotone, f"observed {t.order:.3f}"),
        Check("diffusion space order", abs(s.order - 2.0) <= 0.2 and s.monotone, f"observed {s.order:.3f}"),
    ]


def check_pure_decay() -> Check:
    grid = _small_grid(16, 17)
    model = ModelSpec(gamma=0.5, nu=0.1, kernel=KernelSpec(kappa=0.0))
    tg = TimeGrid(3.0, 0.05)
    v0 = grid.full(1.0)
    traj = run(model, grid, tg, v0=v0)
    err = max(
        float(np.max(np.abs(f.values - (1.0 + 0.05 * 0.5) ** -n)) * (1.0 + 0.05 * 0.5) ** n)
        for n, f in zip(traj.snapshot_steps, traj.snapshots)
    )
    return Check("pure decay matches v0/(1+tau*gamma)^n", err <= 1e-12, f"max rel err {err:.2e}")


def check_stability_and_neumann() -> Check:
    grid = _small_grid(32, 65)
    v0 = initial_condition(grid, FIG2_MODEL.init)
    ok = True
    for tau in (0.01, 0.5):
        for nu in (0.0, 0.1, 10.0):
            for gamma in (0.0, 0.5):
                m = ModelSpec(gamma=gamma, nu=nu, kernel=KernelSpec(kappa=0.0))
                tr = run(m, grid, TimeGrid(20 * tau, tau), v0=v0)
                ok &= all(b <= a * (1 + 1e-12) for a, b in zip(tr.norms_sq, tr.norms_sq[1:]))
                if nu > 0:
                    ok &= all(check_neumann(f) for f in tr.snapshots[1:])
    return Check("unconditional decay and zero-flux ends", bool(ok), "tau x nu x gamma grid")


def run_all() -> list[Check]:
    return [
        check_operator_oracle(),
        check_lipschitz_bounds(),
        *check_orders(),
        check_pure_decay(),
        check_stability_and_neumann(),
    ]
