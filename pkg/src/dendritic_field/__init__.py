"""Dendritic neural field simulation: a nonlocal neural field on a periodic
cortex with cable-equation diffusion along the dendritic coordinate."""

from .experiments import (
    LinearFit, OrderCheckConfig, SweepConfig, SweepResult, linear_fit, nu_sweep,
    order_check, profile_experiment,
)
from .grid import Field, Grid, GridError, GridSpec, build_grid, l2_distance_sq, l2_norm_sq
from .model import (
    FiringRateSpec, InitialConditionSpec, KernelSpec, ModelSpec, delta_profile,
    estimate_KF, firing_rate, firing_rate_deriv, initial_condition,
)
from .nonlocal_term import PeriodicKernelTable, apply_F, apply_F_direct, periodize_kernel
from .oracle import CosineBasis, linear_exact_regular, linear_exact_singular, project, rate_probe, synthesize
from .stepper import BlowUpError, DiffusionSolver, TimeGrid, Trajectory, imex_step, run, singular_step

__version__ = "0.1.0"
