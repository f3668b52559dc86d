"""Discretisation of the periodic-cortex x dendrite domain.

The cortex coordinate ``x`` lives on the circle of circumference ``2*L_x``
and is sampled without the duplicate periodic endpoint.  The dendritic
coordinate ``xi`` lives on ``[-L_xi, L_xi]`` and is sampled *with* both
endpoints, so that Neumann conditions can be imposed and checked there.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class GridError(ValueError):
    """Raised for invalid discretisations or mismatched fields."""


@dataclass(frozen=True)
class GridSpec:
    n_x: int
    n_xi: int
    L_x: float
    L_xi: float

    def __post_init__(self):
        problems = self.problems()
        if problems:
            raise GridError("; ".join(problems))

    def problems(self) -> list[str]:
        out = []
        if int(self.n_x) != self.n_x or self.n_x < 4 or self.n_x % 2:
            out.append(f"n_x must be an even integer >= 4, got {self.n_x}")
        if int(self.n_xi) != self.n_xi or self.n_xi < 3:
            out.append(f"n_xi must be an integer >= 3, got {self.n_xi}")
        if not (np.isfinite(self.L_x) and self.L_x > 0):
            out.append(f"L_x must be positive, got {self.L_x}")
        if not (np.isfinite(self.L_xi) and self.L_xi > 0):
            out.append(f"L_xi must be positive, got {self.L_xi}")
        return out

    @property
    def h_x(self) -> float:
        return 2.0 * self.L_x / self.n_x

    @property
    def h_xi(self) -> float:
        return 2.0 * self.L_xi / (self.n_xi - 1)


@dataclass(frozen=True, eq=False)
class Grid:
    """Nodes and quadrature weights for a :class:`GridSpec`.

    Build with :func:`build_grid` rather than directly.
    """

    spec: GridSpec
    x_nodes: np.ndarray
    xi_nodes: np.ndarray
    xi_weights: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return (self.spec.n_x, self.spec.n_xi)

    @property
    def h_x(self) -> float:
        return self.spec.h_x

    @property
    def h_xi(self) -> float:
        return self.spec.h_xi

    @property
    def area(self) -> float:
        """|Omega| = 2 L_x * 2 L_xi."""
        return 4.0 * self.spec.L_x * self.spec.L_xi

    def same_as(self, other: "Grid") -> bool:
        return self is other or self.spec == other.spec

    def zeros(self) -> "Field":
        return Field(self, np.zeros(self.shape))

    def full(self, value: float) -> "Field":
        return Field(self, np.full(self.shape, float(value)))

    def from_function(self, fn) -> "Field":
        """Sample ``fn(x, xi)`` (broadcasting) on the nodes."""
        X, XI = np.meshgrid(self.x_nodes, self.xi_nodes, indexing="ij")
        return Field(self, np.broadcast_to(fn(X, XI), self.shape).astype(float))


def build_grid(spec: GridSpec) -> Grid:
    """Construct nodes and trapezoid weights for ``spec``."""
    bad = spec.problems()
    if bad:
        raise GridError("; ".join(bad))
    n_x, n_xi = int(spec.n_x), int(spec.n_xi)
    x = -spec.L_x + spec.h_x * np.arange(n_x)
    xi = -spec.L_xi + spec.h_xi * np.arange(n_xi)
    w = np.full(n_xi, spec.h_xi)
    w[0] = w[-1] = 0.5 * spec.h_xi
    for arr in (x, xi, w):
        arr.setflags(write=False)
    return Grid(spec, x, xi, w)


@dataclass(eq=False)
class Field:
    """Samples ``v(x_i, xi_j)`` stored as an ``(n_x, n_xi)`` array."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            raise GridError(
                f"field shape {self.values.shape} does not match grid {self.grid.shape}"
            )
        if not np.all(np.isfinite(self.values)):
            raise GridError("field contains non-finite entries")

    def __sub__(self, other: "Field") -> "Field":
        _check_same_grid(self, other)
        return Field(self.grid, self.values - other.values)

    def __add__(self, other: "Field") -> "Field":
        _check_same_grid(self, other)
        return Field(self.grid, self.values + other.values)

    def __mul__(self, c: float) -> "Field":
        return Field(self.grid, self.values * c)

    __rmul__ = __mul__

    def slice_at_x(self, x: float = 0.0) -> np.ndarray:
        """Values along xi at the x node closest to ``x``."""
        i = int(np.argmin(np.abs(self.grid.x_nodes - x)))
        return self.values[i].copy()


def _check_same_grid(f: Field, g: Field) -> None:
    if not f.grid.same_as(g.grid):
        raise GridError(f"incompatible fields: {f.grid.spec} vs {g.grid.spec}")


def weighted_sq_sum(values: np.ndarray, grid: Grid) -> float:
    # row-major: xi-quadrature per x-row first, then sum over x
    with np.errstate(over="ignore"):
        return float(grid.h_x * np.sum((values * values) @ grid.xi_weights))


def l2_norm_sq(f: Field) -> float:
    """Squared discrete L2(Omega) norm: rectangle rule in x, trapezoid in xi."""
    return weighted_sq_sum(f.values, f.grid)


def l2_distance_sq(f: Field, g: Field) -> float:
    _check_same_grid(f, g)
    return weighted_sq_sum(f.values - g.values, f.grid)
