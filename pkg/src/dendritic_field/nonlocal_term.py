"""The nonlocal synaptic operator ``F``.

For the separable kernel

    W(x, xi, x', xi') = kappa/2 exp(-|x - x'|) delta_sigma(xi - xi0) delta_sigma(xi')

the operator factorises: a xi'-quadrature of ``delta_sigma * S(u)`` per x'
column, a circular convolution in x, and an outer product with the target
profile ``delta_sigma(xi - xi0)``.  :func:`apply_F` does this with FFTs;
:func:`apply_F_direct` is a brute-force reference used for verification.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft

from .grid import Field, Grid, GridError
from .model import ModelSpec, delta_profile, firing_rate, periodic_exp_kernel

#: apply_F_direct refuses grids with more nodes than this
DIRECT_MAX_NODES = 2**14


@dataclass(frozen=True, eq=False)
class PeriodicKernelTable:
    grid: Grid
    kappa: float
    samples: np.ndarray
    fft_cache: np.ndarray

    @property
    def period_integral(self) -> float:
        return float(self.grid.h_x * self.samples.sum())


def periodize_kernel(kappa: float, grid: Grid) -> PeriodicKernelTable:
    """Sample the periodised exponential kernel at offsets ``i*h_x`` and cache its spectrum."""
    n = grid.spec.n_x
    i = np.arange(n)
    # offsets i*h and (n-i)*h formed by multiplication keep the table exactly symmetric
    near, far = grid.h_x * i, grid.h_x * (n - i)
    samples = 0.5 * kappa * (np.exp(-near) + np.exp(-far)) / (1.0 - np.exp(-2.0 * grid.spec.L_x))
    samples.setflags(write=False)
    spectrum = scipy.fft.rfft(samples) * grid.h_x
    spectrum.setflags(write=False)
    return PeriodicKernelTable(grid, float(kappa), samples, spectrum)


class NonlocalOperator:
    """Precomputed pieces of ``F`` for one (model, grid) pair.

    Callable on raw ``(n_x, n_xi)`` arrays; used by the time steppers to avoid
    re-evaluating profiles each step.
    """

    def __init__(self, model: ModelSpec, ktab: PeriodicKernelTable, workers: int = 1):
        grid = ktab.grid
        k = model.kernel
        if k.kappa != ktab.kappa:
            raise ValueError("kernel table kappa does not match the model")
        self.grid = grid
        self.firing = model.firing
        self.ktab = ktab
        self.workers = workers
        self.source = grid.xi_weights * delta_profile(grid.xi_nodes, k.sigma)
        self.target = delta_profile(grid.xi_nodes - k.xi0, k.sigma)

    def somatic_drive(self, values: np.ndarray) -> np.ndarray:
        """c(x) = h_x * sum_x' w(x - x') m(x'), m = xi-quadrature of delta_sigma * S(u)."""
        m = firing_rate(values, self.firing) @ self.source
        return scipy.fft.irfft(
            scipy.fft.rfft(m, workers=self.workers) * self.ktab.fft_cache,
            n=self.grid.spec.n_x,
            workers=self.workers,
        )

    def __call__(self, values: np.ndarray) -> np.ndarray:
        if not np.all(np.isfinite(values)):
            raise FloatingPointError("non-finite input to the nonlocal operator")
        if self.ktab.kappa == 0.0:
            return np.zeros(self.grid.shape)
        return np.outer(self.somatic_drive(values), self.target)


def apply_F(u: Field, model: ModelSpec, ktab: PeriodicKernelTable) -> Field:
    """Evaluate ``F(u)`` on the grid via FFT circular convolution."""
    if not u.grid.same_as(ktab.grid):
        raise GridError("field and kernel table live on different grids")
    return Field(u.grid, NonlocalOperator(model, ktab)(u.values))


def apply_F_direct(u: Field, model: ModelSpec, max_nodes: int = DIRECT_MAX_NODES) -> Field:
    """Reference evaluation of ``F(u)`` by the full four-fold quadrature.

    No separability is exploited: for every target x_i the complete kernel
    slab ``W(x_i, xi, x', xi')`` is formed and contracted against
    ``S(u(x', xi'))``.  Cost is ``O(n_x**2 * n_xi**2)``.
    """
    grid = u.grid
    n_x, n_xi = grid.shape
    if n_x * n_xi > max_nodes:
        raise ValueError(
            f"grid {n_x}x{n_xi} exceeds the direct-quadrature limit of {max_nodes} nodes"
        )
    if not np.all(np.isfinite(u.values)):
        raise FloatingPointError("non-finite input to the nonlocal operator")
    k = model.kernel
    C = 2.0 * grid.spec.L_x
    x, xi = grid.x_nodes, grid.xi_nodes
    Su = firing_rate(u.values, model.firing)
    # quadrature weights on (x', xi')
    wq = grid.h_x * grid.xi_weights[None, :] * Su
    target = delta_profile(xi - k.xi0, k.sigma)
    source = delta_profile(xi, k.sigma)
    out = np.empty((n_x, n_xi))
    for i in range(n_x):
        wx = periodic_exp_kernel(x[i] - x, k.kappa, C)
        slab = wx[None, :, None] * target[:, None, None] * source[None, None, :]
        out[i] = np.einsum("jab,ab->j", slab, wq)
    return Field(grid, out)
