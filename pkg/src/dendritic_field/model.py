"""Concrete model ingredients: firing rate, kernel profiles, initial data.

The dendritic profile is the normalised Gaussian
``delta_sigma(xi) = exp(-(xi/sigma)**2) / (sigma*sqrt(pi))`` and the firing
rate is the logistic sigmoid ``S(u) = 1/(1+exp(-mu*(u-theta)))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np
from scipy import integrate, special

from .grid import Field, Grid

SQRT_PI = math.sqrt(math.pi)


@dataclass(frozen=True)
class FiringRateSpec:
    mu: float = 1e3
    theta: float = 0.1

    def __post_init__(self):
        if not self.mu >= 0:
            raise ValueError(f"firing-rate gain mu must be >= 0, got {self.mu}")


@dataclass(frozen=True)
class KernelSpec:
    kappa: float = 1.0
    sigma: float = 0.5
    xi0: float = 1.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"kernel spread sigma must be > 0, got {self.sigma}")


@dataclass(frozen=True)
class InitialConditionSpec:
    rho: float = 5.0
    x0: float = 20.0
    sigma: float = 0.5

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"initial-condition sigma must be > 0, got {self.sigma}")


# None means G == 0; a Field is time-constant; a callable maps t -> Field.
ExternalInput = Union[None, Field, Callable[[float], Field]]


@dataclass(frozen=True)
class ModelSpec:
    gamma: float = 0.5
    nu: float = 0.0
    firing: FiringRateSpec = field(default_factory=FiringRateSpec)
    kernel: KernelSpec = field(default_factory=KernelSpec)
    init: InitialConditionSpec = field(default_factory=InitialConditionSpec)
    input: ExternalInput = None

    def __post_init__(self):
        if not self.gamma >= 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if not self.nu >= 0:
            raise ValueError(f"nu must be >= 0, got {self.nu}")

    def with_nu(self, nu: float) -> "ModelSpec":
        from dataclasses import replace

        return replace(self, nu=float(nu))

    def input_at(self, t: float, grid: Grid) -> Field | None:
        if self.input is None:
            return None
        g = self.input(t) if callable(self.input) else self.input
        if not g.grid.same_as(grid):
            raise ValueError("external input lives on a different grid")
        return g


def delta_profile(xi, sigma: float):
    """Normalised Gaussian dendritic profile of width ``sigma``."""
    if not sigma > 0:
        raise ValueError(f"spread must be positive, got {sigma}")
    xi = np.asarray(xi, dtype=float)
    out = np.exp(-((xi / sigma) ** 2)) / (sigma * SQRT_PI)
    return out if out.ndim else float(out)


def firing_rate(u, spec: FiringRateSpec):
    # expit saturates to exactly 0 or 1 instead of overflowing
    out = special.expit(spec.mu * (np.asarray(u, dtype=float) - spec.theta))
    return out if np.ndim(out) else float(out)


def firing_rate_deriv(u, spec: FiringRateSpec):
    z = spec.mu * (np.asarray(u, dtype=float) - spec.theta)
    # S(z) * S(-z) keeps relative accuracy in both tails
    out = spec.mu * special.expit(z) * special.expit(-z)
    return out if np.ndim(out) else float(out)


def initial_condition(grid: Grid, spec: InitialConditionSpec) -> Field:
    """Localised strip ``alpha(|x|) * delta_sigma(xi)`` with ``alpha = 1 - S(.; rho, x0)``."""
    # 1 - S(|x|; rho, x0) written as S(-.) so the tail keeps its digits
    alpha = special.expit(-spec.rho * (np.abs(grid.x_nodes) - spec.x0))
    return Field(grid, np.outer(alpha, delta_profile(grid.xi_nodes, spec.sigma)))


def periodic_exp_kernel(d, kappa: float, period: float):
    """Exact periodisation of ``kappa/2 * exp(-|r|)`` on a circle of length ``period``.

    ``d`` is reduced into ``[0, period)`` first.
    """
    d = np.mod(np.asarray(d, dtype=float), period)
    em = math.exp(-period)
    return 0.5 * kappa * (np.exp(-d) + np.exp(-(period - d))) / (1.0 - em)


@dataclass(frozen=True)
class KFEstimate:
    """Pieces of the bound/Lipschitz constant of the nonlocal operator."""

    kernel_norm: float  # ||W||_{L2(Omega x Omega)}
    sup_S: float
    sup_dS: float
    area: float

    @property
    def value(self) -> float:
        return self.kernel_norm * max(math.sqrt(self.area) * self.sup_S, self.sup_dS)


def kernel_norm_sq(model: ModelSpec, grid: Grid) -> float:
    """||W||^2 as a product of three 1D quadratures (x-offset, target xi, source xi)."""
    k = model.kernel
    C = 2.0 * grid.spec.L_x
    L = grid.spec.L_xi

    def wsq(d):
        return periodic_exp_kernel(d, k.kappa, C) ** 2

    # int_T int_T w(x - x')^2 dx dx' = C * int_0^C w(d)^2 dd (cusp at the ends only)
    ix, _ = integrate.quad(wsq, 0.0, C, epsabs=0.0, epsrel=1e-13, limit=200)
    ix *= C
    i_target, _ = integrate.quad(
        lambda s: delta_profile(s - k.xi0, k.sigma) ** 2,
        -L, L, points=[min(max(k.xi0, -L), L)], epsabs=0.0, epsrel=1e-13, limit=200,
    )
    i_source, _ = integrate.quad(
        lambda s: delta_profile(s, k.sigma) ** 2,
        -L, L, points=[0.0], epsabs=0.0, epsrel=1e-13, limit=200,
    )
    return ix * i_target * i_source


def estimate_KF(model: ModelSpec, grid: Grid, detail: bool = False):
    """A priori constant K_F with ||F(u)|| <= K_F and ||F(u)-F(v)|| <= K_F ||u-v||.

    ``K_F = ||W|| * max(|Omega|^{1/2} sup|S|, sup|S'|)`` with ``sup|S| = 1`` and
    ``sup|S'| = mu/4`` for the logistic firing rate.
    """
    if not isinstance(model.kernel, KernelSpec):
        raise TypeError("estimate_KF supports only the separable exponential/Gaussian kernel")
    est = KFEstimate(
        kernel_norm=math.sqrt(kernel_norm_sq(model, grid)),
        sup_S=1.0,
        sup_dS=model.firing.mu / 4.0,
        area=grid.area,
    )
    return est if detail else est.value

