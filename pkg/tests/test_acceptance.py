"""Exit criteria, one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v``.
"""

import math
import time

import numpy as np
import pytest

from dendritic_field import (
    Field, KernelSpec, ModelSpec, TimeGrid, apply_F, apply_F_direct, build_grid, estimate_KF,
    initial_condition, l2_distance_sq, l2_norm_sq, nu_sweep, order_check, periodize_kernel, run,
)
from dendritic_field.cli import main
from dendritic_field.experiments import (
    DESK_GRID, FIG2_MODEL, FIG2_TIME, GridSpec, SweepConfig, half_height_width, local_maxima,
    profile_experiment,
)
from dendritic_field.stepper import check_neumann

SWEEP_NUS = (0.0, 0.0125, 0.025, 0.05, 0.1)
NEUMANN_C = 1.0
ROUNDING = 1e-12


@pytest.fixture
def report(capsys):
    def _report(n, title, passed, detail):
        with capsys.disabled():
            print(f"\n[criterion {n}] {'PASS' if passed else 'FAIL'} {title}: {detail}")
        return passed

    return _report


@pytest.fixture(scope="module")
def desk_sweep():
    t0 = time.perf_counter()
    res = nu_sweep(SweepConfig(FIG2_MODEL, DESK_GRID, FIG2_TIME, SWEEP_NUS))
    return res, time.perf_counter() - t0


@pytest.fixture(scope="module")
def profiles():
    return profile_experiment(FIG2_MODEL, DESK_GRID, FIG2_TIME, nus=(0.0, 0.1), times=(1.0, 3.0))


def test_c1_order_nu_scaling(desk_sweep, report):
    res, elapsed = desk_sweep
    e = res.e
    increasing = bool(np.all(np.diff(e) > 0))
    intercept_ratio = abs(res.intercept) / e[-1]
    ok = res.r2 >= 0.98 and intercept_ratio <= 0.05 and increasing and elapsed <= 180
    detail = (f"e={np.array2string(e, precision=5)} R2={res.r2:.5f} (>=0.98) "
              f"|b|/e(0.1)={intercept_ratio:.4f} (<=0.05) increasing={increasing} time={elapsed:.1f}s")
    assert report(1, "e(nu) = O(nu) linear fit", ok, detail), detail


def test_c2_profile_peaks(profiles, report):
    xi = profiles.xi
    s1 = profiles.slice(0.0, 1.0)
    m1 = local_maxima(s1)
    near0 = [j for j in m1 if abs(xi[j]) <= 0.25]
    near1 = [j for j in m1 if abs(xi[j] - 1.0) <= 0.25]
    two_peaks = len(m1) == 2 and len(near0) == 1 and len(near1) == 1
    s3 = profiles.slice(0.0, 3.0)
    m3 = local_maxima(s3)
    top = int(np.argmax(s3))
    others = [s3[j] for j in m3 if j != top]
    secondary = max(others, default=0.0) / s3[top]
    single = abs(xi[top] - 1.0) <= 0.25 and secondary <= 0.25
    detail = (f"t=1 maxima at xi={np.round(xi[m1], 3).tolist()}; t=3 global max at xi={xi[top]:.3f}, "
              f"secondary/global={secondary:.3f}")
    assert report(2, "two bumps then one at xi0 (nu=0)", two_peaks and single, detail), detail


def test_c3_diffusion_widens(profiles, report):
    xi = profiles.xi
    s0, s1 = profiles.slice(0.0, 3.0), profiles.slice(0.1, 3.0)
    w0, w1 = half_height_width(xi, s0), half_height_width(xi, s1)
    ok = s1.max() < s0.max() and w1 > w0
    detail = f"peak {s1.max():.4f} vs {s0.max():.4f}; half-height width {w1:.4f} vs {w0:.4f}"
    assert report(3, "nu=0.1 profile lower and wider at t=3", ok, detail), detail


def test_c4_operator_oracle(report):
    grid = build_grid(GridSpec(128, 65, DESK_GRID.L_x, DESK_GRID.L_xi))
    ktab = periodize_kernel(FIG2_MODEL.kernel.kappa, grid)
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(20):
        u = Field(grid, FIG2_MODEL.firing.theta + 0.1 * rng.standard_normal(grid.shape))
        fast, ref = apply_F(u, FIG2_MODEL, ktab), apply_F_direct(u, FIG2_MODEL)
        worst = max(worst, math.sqrt(l2_distance_sq(fast, ref) / l2_norm_sq(ref)))
    detail = f"max relative L2 error over 20 fields = {worst:.2e} (<=1e-10)"
    assert report(4, "FFT operator equals direct quadrature", worst <= 1e-10, detail), detail


def test_c5_operator_bounds(report):
    grid = build_grid(DESK_GRID)
    KF = estimate_KF(FIG2_MODEL, grid)
    ktab = periodize_kernel(FIG2_MODEL.kernel.kappa, grid)
    rng = np.random.default_rng(5)
    bound_ratio = lip_ratio = 0.0
    ok = True
    for _ in range(100):
        u = Field(grid, rng.uniform(-5, 5, grid.shape))
        v = Field(grid, rng.uniform(-5, 5, grid.shape))
        Fu, Fv = apply_F(u, FIG2_MODEL, ktab), apply_F(v, FIG2_MODEL, ktab)
        nF = math.sqrt(l2_norm_sq(Fu))
        dF = math.sqrt(l2_distance_sq(Fu, Fv))
        duv = math.sqrt(l2_distance_sq(u, v))
        ok &= nF <= KF + 1e-6 and dF <= KF * duv + 1e-6
        bound_ratio, lip_ratio = max(bound_ratio, nF / KF), max(lip_ratio, dF / (KF * duv))
    detail = f"K_F={KF:.6g}; max ||F(u)||/K_F={bound_ratio:.3e}, max Lipschitz ratio={lip_ratio:.3e}"
    assert report(5, "bound and Lipschitz constant K_F", ok, detail), detail


def test_c6_linear_problem(report):
    t_res, s_res = order_check("time"), order_check("space")
    grid = build_grid(GridSpec(16, 33, 2.0, 3.0))
    model = ModelSpec(gamma=0.5, nu=0.1, kernel=KernelSpec(0.0, 0.5, 1.0))
    v0 = initial_condition(grid, FIG2_MODEL.init)
    geo_err, decay_errs = 0.0, []
    v0c = grid.full(1.0)
    for tau in (0.1, 0.05, 0.025):
        # nu = 0 so the non-constant v0 only decays
        tr = run(model.with_nu(0.0), grid, TimeGrid(2.0, tau), v0=v0)
        for n, f in zip(tr.snapshot_steps, tr.snapshots):
            ref = v0.values / (1 + tau * 0.5) ** n
            geo_err = max(geo_err, float(np.max(np.abs(f.values - ref) / np.maximum(np.abs(ref), 1e-300))))
        # a constant field is unaffected by diffusion: compare with exp(-gamma t)
        trc = run(model, grid, TimeGrid(2.0, tau), v0=v0c)
        decay_errs.append(float(np.max(np.abs(trc.final.values - math.exp(-1.0)))))
    decay_order = float(np.polyfit(np.log([0.1, 0.05, 0.025]), np.log(decay_errs), 1)[0])
    ok = (abs(t_res.order - 1) <= 0.2 and abs(s_res.order - 2) <= 0.2 and t_res.monotone
          and s_res.monotone and geo_err <= 1e-12 and abs(decay_order - 1) <= 0.2)
    detail = (f"time order {t_res.order:.3f}, space order {s_res.order:.3f}, "
              f"geometric-decay rel err {geo_err:.1e}, exp-decay order {decay_order:.3f}")
    assert report(6, "frozen-source runs match closed forms", ok, detail), detail


def test_c7_boundary_and_stability(report):
    grid = build_grid(DESK_GRID)
    neumann_ok, worst = True, 0.0
    for nu in SWEEP_NUS[1:]:
        tr = run(FIG2_MODEL.with_nu(nu), grid, FIG2_TIME)
        for f in tr.snapshots:
            neumann_ok &= check_neumann(f, NEUMANN_C)
    v0 = initial_condition(grid, FIG2_MODEL.init)
    stable = True
    for tau in (0.01, 0.05, 0.5):
        for nu in (0.0, 0.1, 10.0):
            for gamma in (0.0, 0.5):
                m = ModelSpec(gamma=gamma, nu=nu, kernel=KernelSpec(0.0, 0.5, 1.0))
                m_norms = n = run(m, grid, TimeGrid(20 * tau, tau), snapshot_at=[20 * tau], v0=v0).norms_sq
                stable &= all(b <= a * (1 + ROUNDING) for a, b in zip(n, n[1:]))
                worst = max(worst, max(b / a - 1 for a, b in zip(m_norms, m_norms[1:])))
    detail = f"Neumann check (C={NEUMANN_C}) on all nu>0 snapshots: {neumann_ok}; norm nonincreasing: {stable} (max step growth {worst:.1e})"
    assert report(7, "zero-flux ends and unconditional decay", neumann_ok and stable, detail), detail


def test_c8_sweep_determinism(tmp_path, report):
    cfg = tmp_path / "fig2.cfg"
    from pathlib import Path

    cfg.write_text((Path(__file__).resolve().parents[1] / "configs" / "fig2.cfg").read_text())
    outs = [tmp_path / "a", tmp_path / "b"]
    for out in outs:
        assert main(["sweep", str(cfg), "-o", str(out), "--no-plots"]) == 0
    same = all((outs[0] / n).read_bytes() == (outs[1] / n).read_bytes() for n in ("sweep.csv", "summary.csv"))
    detail = "sweep.csv and summary.csv byte-identical across two runs" if same else "CSV outputs differ"
    assert report(8, "bitwise-reproducible sweep", same, detail), detail
