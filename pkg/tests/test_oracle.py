import math

import numpy as np
import pytest

from dendritic_field import (
    CosineBasis, Field, GridSpec, KernelSpec, ModelSpec, TimeGrid, build_grid, l2_distance_sq,
    linear_exact_regular, linear_exact_singular, project, rate_probe, run, synthesize,
)
from dendritic_field.oracle import ModalCoefficients


def grid_xi(n_xi, L_xi=3.0, n_x=4):
    return build_grid(GridSpec(n_x, n_xi, 1.0, L_xi))


def test_project_single_mode():
    g = grid_xi(65)
    b = CosineBasis(3.0, 10)
    c = project(g.from_function(lambda x, xi: b.psi(1, xi) + 0 * x), b).coef
    expected = np.zeros(11)
    expected[1] = 1.0
    np.testing.assert_allclose(c, np.tile(expected, (4, 1)), atol=g.h_xi**2)


def test_project_constant():
    g = grid_xi(65)
    b = CosineBasis(3.0, 6)
    c = project(g.full(2.5), b).coef
    np.testing.assert_allclose(c[:, 0], 2.5 * math.sqrt(6.0), rtol=1e-13)
    np.testing.assert_allclose(c[:, 1:], 0, atol=g.h_xi**2)


def test_project_rejects_too_many_modes():
    with pytest.raises(ValueError):
        project(grid_xi(9).zeros(), CosineBasis(3.0, 9))


def random_smooth_field(g, seed):
    """Random combination of fixed smooth (non-basis) functions, resolvable at any n_xi."""
    r = np.random.default_rng(seed)
    a = r.normal(size=6)
    c = r.uniform(-2.5, 2.5, size=3)
    X, XI = np.meshgrid(g.x_nodes, g.xi_nodes, indexing="ij")
    f = sum(a[i] * np.exp(-((XI - c[i]) / 0.7) ** 2) for i in range(3))
    f = f + a[3] * np.sin(1.3 * XI) + a[4] * XI**3 / 10 + a[5] * np.cos(X) * np.tanh(XI)
    return Field(g, f)


def test_parseval_defect_decreases():
    defects = []
    for n_xi in (2**8, 2**9):
        g = grid_xi(n_xi)
        b = CosineBasis(3.0, n_xi - 1)
        worst = 0.0
        for seed in range(5):
            f = random_smooth_field(g, seed)
            c = project(f, b).coef
            slices = (f.values**2) @ g.xi_weights
            worst = max(worst, np.max(np.abs(np.sum(c**2, axis=1) - slices)))
        defects.append(worst)
    assert defects[0] <= 1e-3
    assert defects[1] < defects[0]


def test_orthonormality_defect():
    for n_xi in (65, 129):
        g = grid_xi(n_xi)
        P = CosineBasis(3.0, 16).matrix(g.xi_nodes)
        gram = (P * g.xi_weights) @ P.T
        assert np.max(np.abs(gram - np.eye(17))) <= g.h_xi**2


def test_reconstruction_of_gaussian():
    g = grid_xi(2**8)
    f = g.from_function(lambda x, xi: (1 + 0.1 * x) * np.exp(-((xi - 0.4) / 0.5) ** 2))
    rec = synthesize(project(f, CosineBasis(3.0, 2**8 - 1)))
    assert np.max(np.abs(rec.values - f.values)) <= 1e-6


def test_reconstruction_identity_for_random_field(rng):
    g = grid_xi(33)
    f = Field(g, rng.normal(size=g.shape))
    rec = synthesize(project(f, CosineBasis(3.0, 32)))
    np.testing.assert_allclose(rec.values, f.values, atol=1e-12)


def test_eigenvalues():
    b0 = CosineBasis(3.0, 8, gamma=0.7, nu=0.0)
    np.testing.assert_array_equal(b0.eigenvalues, -0.7)
    b = CosineBasis(3.0, 8, gamma=0.7, nu=0.1)
    assert np.all(np.diff(b.eigenvalues) < 0)
    assert b.eigenvalues[2] == pytest.approx(-0.7 - 0.1 * (2 * math.pi / 6) ** 2)


def test_regular_zero_mode_decays_exponentially():
    g = grid_xi(33)
    b = CosineBasis(3.0, 32)
    v0 = g.from_function(lambda x, xi: b.psi(0, xi) + 0 * x)
    out = linear_exact_regular(v0, g.zeros(), 2.0, 0.3, 0.5)
    np.testing.assert_allclose(out.values, v0.values * math.exp(-1.0), rtol=1e-13)


def test_regular_identity_at_zero_time(rng):
    g = grid_xi(33)
    v0 = Field(g, rng.normal(size=g.shape))
    out = linear_exact_regular(v0, Field(g, rng.normal(size=g.shape)), 0.0, 0.3, 0.5)
    np.testing.assert_allclose(out.values, v0.values, atol=1e-12)


def test_regular_mode_two_against_refined_stepper():
    """psi_2 decays at rate gamma + nu (2 pi / 6)^2; IMEX converges to it at first order."""
    g = grid_xi(257)
    b = CosineBasis(3.0, 2)
    v0 = g.from_function(lambda x, xi: b.psi(2, xi) + 0 * x)
    exact = linear_exact_regular(v0, g.zeros(), 1.0, 0.1, 0.5)
    amp = math.exp(-(0.5 + 0.1 * (2 * math.pi / 6) ** 2))
    np.testing.assert_allclose(exact.values, amp * v0.values, rtol=1e-12, atol=1e-14)
    m = ModelSpec(gamma=0.5, nu=0.1, kernel=KernelSpec(0.0, 0.5, 1.0))
    errs = [math.sqrt(l2_distance_sq(run(m, g, TimeGrid(1.0, tau), v0=v0).final, exact))
            for tau in (0.05, 0.005)]
    assert errs[0] / errs[1] == pytest.approx(10, rel=0.1)


def test_singular_examples():
    g = grid_xi(9)
    v0 = g.full(1.7)
    np.testing.assert_allclose(linear_exact_singular(v0, g.zeros(), 2.0, 0.5).values, 1.7 * math.exp(-1.0))
    out = linear_exact_singular(g.zeros(), g.full(0.5), 2.0, 0.5)
    np.testing.assert_allclose(out.values, 1 - math.exp(-1.0), rtol=1e-14)
    out = linear_exact_singular(v0, g.full(0.5), 2.0, 0.0)
    np.testing.assert_allclose(out.values, 1.7 + 1.0)


def test_regular_removable_limit():
    g = grid_xi(9)
    out = linear_exact_regular(g.full(1.0), g.full(0.25), 2.0, 0.0, 0.0)
    np.testing.assert_allclose(out.values, 1.5, rtol=1e-13)


def test_singular_agrees_with_regular_at_zero_diffusion(rng):
    g = grid_xi(65, n_x=8)
    v0 = Field(g, rng.normal(size=g.shape))
    N0 = Field(g, rng.normal(size=g.shape))
    a = linear_exact_regular(v0, N0, 1.3, 0.0, 0.5)
    b = linear_exact_singular(v0, N0, 1.3, 0.5)
    assert np.max(np.abs(a.values - b.values)) <= 1e-6


def test_hatted_coefficients_sum_to_norm(rng):
    g = grid_xi(33, n_x=8)
    f = random_smooth_field(g, 3)
    c = project(f, CosineBasis(3.0, 32))
    total = c.hatted()
    total[-1] *= 0.5  # alternating mode has discrete norm 2
    assert total.sum() == pytest.approx(g.h_x * np.sum((f.values**2) @ g.xi_weights), rel=1e-12)


def _traj(g, fields):
    from dendritic_field.stepper import Trajectory

    tr = Trajectory(g, TimeGrid(0.1 * (len(fields) - 1), 0.1))
    for n, f in enumerate(fields):
        tr.record(n, f.values, True)
    return tr


def test_rate_probe_examples(rng):
    g = grid_xi(9, n_x=8)
    fields = [Field(g, rng.normal(size=g.shape)) for _ in range(4)]
    a = _traj(g, fields)
    assert rate_probe(a, _traj(g, fields)) == 0.0
    shifted = list(fields)
    shifted[2] = Field(g, fields[2].values + 0.3)
    assert rate_probe(a, _traj(g, shifted)) == pytest.approx(0.09 * g.area, rel=1e-12)


def test_rate_probe_rejects_mismatch(rng):
    g = grid_xi(9, n_x=8)
    a = _traj(g, [g.zeros()] * 3)
    with pytest.raises(ValueError):
        rate_probe(a, _traj(g, [g.zeros()] * 4))
    sparse = run(ModelSpec(kernel=KernelSpec(0.0, 0.5, 1.0)), g, TimeGrid(0.2, 0.1), snapshot_at=[0.2])
    with pytest.raises(ValueError):
        rate_probe(a, sparse)
