"""Cosine eigenfunction expansions and closed-form linear solutions.

With the nonlinearity frozen into a time-constant source ``N``, the regular
problem decouples in the Neumann cosine basis of ``[-L_xi, L_xi]``:

    psi_0 = sqrt(1/L),  psi_k = sqrt(2/L) cos(k pi (xi + L_xi) / L),  L = 2 L_xi
    lambda_k = -gamma - nu (k pi / L)**2

and each coefficient obeys ``g_k' = lambda_k g_k + N_k``.  These formulas
are the reference solutions the time steppers are checked against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import Field, Grid, GridError, l2_distance_sq
from .stepper import Trajectory


@dataclass(frozen=True)
class CosineBasis:
    L_xi: float
    K_max: int
    gamma: float = 0.0
    nu: float = 0.0

    @property
    def L(self) -> float:
        return 2.0 * self.L_xi

    @property
    def wavenumbers(self) -> np.ndarray:
        return np.arange(self.K_max + 1) * math.pi / self.L

    @property
    def eigenvalues(self) -> np.ndarray:
        return -self.gamma - self.nu * self.wavenumbers**2

    def psi(self, k: int, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        if k == 0:
            return np.full_like(xi, math.sqrt(1.0 / self.L))
        return math.sqrt(2.0 / self.L) * np.cos(k * math.pi * (xi + self.L_xi) / self.L)

    def matrix(self, xi) -> np.ndarray:
        """``(K_max+1, len(xi))`` array of basis functions sampled at ``xi``."""
        return np.stack([self.psi(k, xi) for k in range(self.K_max + 1)])


@dataclass(frozen=True, eq=False)
class ModalCoefficients:
    """Per-x coefficient vectors, shape ``(n_x, K_max+1)``."""

    grid: Grid
    basis: CosineBasis
    coef: np.ndarray

    def hatted(self) -> np.ndarray:
        """x-integrated squares: hat{c}_k**2 = int_T c_k(x)**2 dx."""
        return self.grid.h_x * np.sum(self.coef**2, axis=0)


def _check_basis(grid: Grid, basis: CosineBasis) -> None:
    if basis.K_max > grid.spec.n_xi - 1:
        raise ValueError(f"K_max={basis.K_max} exceeds n_xi-1={grid.spec.n_xi - 1}")
    if not math.isclose(basis.L_xi, grid.spec.L_xi, rel_tol=1e-14):
        raise GridError("basis interval does not match the grid")


def project(field: Field, basis: CosineBasis) -> ModalCoefficients:
    """Trapezoid inner products ``(v(x, .), psi_k)`` for every x node."""
    _check_basis(field.grid, basis)
    P = basis.matrix(field.grid.xi_nodes)
    return ModalCoefficients(field.grid, basis, (field.values * field.grid.xi_weights) @ P.T)


def synthesize(coeffs: ModalCoefficients) -> Field:
    """Sum ``c_k(x) psi_k(xi)`` on the grid nodes.

    The sampled k = n_xi-1 mode has discrete norm 2 under the trapezoid
    rule (it alternates sign node to node), so its coefficient is halved;
    with that, project followed by synthesize is the identity when
    ``K_max = n_xi - 1``.
    """
    grid, basis = coeffs.grid, coeffs.basis
    c = coeffs.coef
    nyq = grid.spec.n_xi - 1
    if basis.K_max == nyq:
        c = c.copy()
        c[:, nyq] *= 0.5
    return Field(grid, c @ basis.matrix(grid.xi_nodes))


def _relaxation(lam: np.ndarray, t: float) -> np.ndarray:
    """(1 - exp(lam t)) / (-lam), with the lam -> 0 limit t."""
    out = np.empty_like(lam)
    small = np.abs(lam * t) < 1e-12
    out[small] = t
    big = ~small
    out[big] = -np.expm1(lam[big] * t) / (-lam[big])
    return out


def linear_exact_regular(v0: Field, N0: Field, t: float, nu: float, gamma: float,
                         basis: CosineBasis | None = None) -> Field:
    """Modal solution of ``v_t = -gamma v + nu v_xixi + N0`` with Neumann ends.

    ``g_k(t) = v0_k e^{lambda_k t} + N_k (1 - e^{lambda_k t}) / (-lambda_k)``.
    """
    grid = v0.grid
    if not grid.same_as(N0.grid):
        raise GridError("v0 and N0 live on different grids")
    if basis is None:
        basis = CosineBasis(grid.spec.L_xi, grid.spec.n_xi - 1)
    basis = CosineBasis(basis.L_xi, basis.K_max, gamma, nu)
    lam = basis.eigenvalues
    a = project(v0, basis).coef
    n = project(N0, basis).coef
    g = a * np.exp(lam * t) + n * _relaxation(lam, t)
    return synthesize(ModalCoefficients(grid, basis, g))


def linear_exact_singular(v0: Field, N0: Field, t: float, gamma: float) -> Field:
    """``v0 e^{-gamma t} + N0 (1 - e^{-gamma t}) / gamma`` pointwise (``v0 + N0 t`` at gamma=0)."""
    if not v0.grid.same_as(N0.grid):
        raise GridError("v0 and N0 live on different grids")
    relax = _relaxation(np.array([-float(gamma)]), t)[0]
    return Field(v0.grid, v0.values * math.exp(-gamma * t) + N0.values * relax)


def rate_probe(v_traj: Trajectory, vnu_traj: Trajectory) -> float:
    """Squared L-infinity-in-time, L2-in-space distance between two trajectories."""
    if not v_traj.grid.same_as(vnu_traj.grid) or v_traj.timegrid != vnu_traj.timegrid:
        raise GridError("trajectories use different grids or time grids")
    every = list(range(v_traj.timegrid.n_steps + 1))
    if v_traj.snapshot_steps != every or vnu_traj.snapshot_steps != every:
        raise ValueError("rate_probe needs snapshots at every time step")
    return max(l2_distance_sq(a, b) for a, b in zip(v_traj.snapshots, vnu_traj.snapshots))
