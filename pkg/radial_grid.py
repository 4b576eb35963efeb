"""Radial discretization of H^1_r(R^3): grids, sampled functions, quadrature and dilation.

A radial function u(|x|) is stored by its values at the grid nodes 0 = r_0 < ... < r_{n-1} = r_max
and is taken to vanish beyond r_max.
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, Literal, Optional

import joblib
import numpy as np
from scipy import sparse
from scipy.interpolate import PchipInterpolator

from errors import ConfigError

logger = logging.getLogger(__name__)

FOUR_PI = 4.0 * np.pi
MIN_NODES = 16

Scheme = Literal["uniform", "graded"]
Sampler = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class RadialGrid:
    r_max: float
    n: int
    scheme: str
    nodes: np.ndarray
    weights: np.ndarray
    lumped: np.ndarray
    midpoints: np.ndarray
    spacing: np.ndarray
    derivative: sparse.csr_matrix
    derivative_free: sparse.csr_matrix
    stiffness: sparse.csr_matrix

    @property
    def uniform(self) -> bool:
        return self.scheme == "uniform"

    @property
    def mass(self) -> np.ndarray:
        """Lumped volume weights 4*pi*r_i^2*w_i used by the field functionals."""
        return FOUR_PI * self.nodes**2 * self.lumped

    @property
    def midpoint_weights(self) -> np.ndarray:
        return FOUR_PI * self.midpoints**2 * self.spacing

    def integrate(self, g: np.ndarray) -> float:
        """Quadrature of int_0^{r_max} g(r) dr with the grid's rule."""
        return float(self.weights @ np.asarray(g, dtype=float))


def _simpson_weights(n: int, h: float) -> np.ndarray:
    # composite Simpson; an odd interval count closes with a 3/8 panel
    w = np.zeros(n)
    m = n - 1
    even = m if m % 2 == 0 else m - 3
    w[: even + 1] = 2.0
    w[1:even:2] = 4.0
    w[0] = w[even] = 1.0
    w[: even + 1] *= h / 3.0
    if even != m:
        w[even:] += 3.0 * h / 8.0 * np.array([1.0, 3.0, 3.0, 1.0])
    return w


def _trapezoid_weights(nodes: np.ndarray) -> np.ndarray:
    h = np.diff(nodes)
    w = np.zeros_like(nodes)
    w[:-1] += 0.5 * h
    w[1:] += 0.5 * h
    return w


def _midpoint_derivative(nodes: np.ndarray, uniform: bool, decay: bool) -> sparse.csr_matrix:
    """Operator mapping node values to u' at the cell midpoints.

    Uniform grids use the compact fourth-order stencil
    (27(u_{i+1} - u_i) - (u_{i+2} - u_{i-1})) / 24h with u_{-1} = u_1 (u is even in r).
    Past r_max the ghost value is 0 when ``decay`` is set, u_{n-1} otherwise.
    """
    n = nodes.size
    h = np.diff(nodes)
    if not uniform:
        rows = np.repeat(np.arange(n - 1), 2)
        cols = np.column_stack([np.arange(n - 1), np.arange(1, n)]).ravel()
        vals = np.column_stack([-1.0 / h, 1.0 / h]).ravel()
        return sparse.csr_matrix((vals, (rows, cols)), shape=(n - 1, n))

    step = h[0]
    rows, cols, vals = [], [], []
    for offset, coef in ((-1, 1.0), (0, -27.0), (1, 27.0), (2, -1.0)):
        idx = np.arange(n - 1) + offset
        target = idx.copy()
        target[idx == -1] = 1
        keep = target < n
        if not decay:
            target[idx == n] = n - 1
            keep = np.ones_like(keep)
        rows.append(np.arange(n - 1)[keep])
        cols.append(target[keep])
        vals.append(np.full(keep.sum(), coef / (24.0 * step)))
    matrix = sparse.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n - 1, n)
    )
    return matrix.tocsr()


def make_grid(r_max: float = 20.0, n: int = 2001, scheme: Scheme = "uniform") -> RadialGrid:
    if not (np.isfinite(r_max) and r_max > 0):
        raise ConfigError(f"The truncation radius must be positive and finite, got r_max={r_max}.")
    if int(n) != n or n < MIN_NODES:
        raise ConfigError(f"The grid needs an integer node count of at least {MIN_NODES}, got n={n}.")
    n = int(n)
    if scheme == "uniform":
        nodes = np.linspace(0.0, r_max, n)
        weights = _simpson_weights(n, r_max / (n - 1))
    elif scheme == "graded":
        nodes = r_max * np.linspace(0.0, 1.0, n) ** 2
        weights = _trapezoid_weights(nodes)
    else:
        raise ConfigError(f"Unknown grid scheme '{scheme}'. Use 'uniform' or 'graded'.")

    uniform = scheme == "uniform"
    midpoints = 0.5 * (nodes[:-1] + nodes[1:])
    spacing = np.diff(nodes)
    derivative = _midpoint_derivative(nodes, uniform, decay=True)
    c = sparse.diags(FOUR_PI * midpoints**2 * spacing)
    stiffness = (derivative.T @ c @ derivative).tocsr()
    for arr in (nodes, weights, midpoints, spacing):
        arr.setflags(write=False)
    lumped = _trapezoid_weights(nodes)
    lumped.setflags(write=False)
    logger.debug("built %s grid r_max=%g n=%d", scheme, r_max, n)
    return RadialGrid(
        r_max=float(r_max),
        n=n,
        scheme=scheme,
        nodes=nodes,
        weights=weights,
        lumped=lumped,
        midpoints=midpoints,
        spacing=spacing,
        derivative=derivative,
        derivative_free=_midpoint_derivative(nodes, uniform, decay=False),
        stiffness=stiffness,
    )


@dataclass(frozen=True, eq=False)
class RadialFunction:
    """Values u(r_i) on a grid. Immutable; derived quantities are cached per instance.

    ``sampler`` optionally evaluates u exactly at arbitrary radii (used by rescale instead of
    interpolation, e.g. for shooting profiles backed by an ODE dense output).
    """

    grid: RadialGrid
    values: np.ndarray
    sampler: Optional[Sampler] = field(default=None, repr=False)
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != self.grid.nodes.shape:
            raise ValueError(
                f"Expected {self.grid.n} node values, got array of shape {values.shape}."
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("Sampled values must be finite.")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_callable(cls, grid: RadialGrid, func: Sampler, exact: bool = False) -> "RadialFunction":
        values = np.asarray(func(grid.nodes), dtype=float)
        return cls(grid, values, sampler=func if exact else None)

    def with_values(self, values: np.ndarray) -> "RadialFunction":
        return RadialFunction(self.grid, values)

    @property
    def digest(self) -> str:
        if "digest" not in self._cache:
            self._cache["digest"] = joblib.hash((self.grid.scheme, self.grid.nodes, self.values))
        return self._cache["digest"]

    def is_zero(self) -> bool:
        return not np.any(self.values)


def l2_norm_sq(u: RadialFunction) -> float:
    """||u||_2^2 = 4*pi*int u(r)^2 r^2 dr."""
    if "l2" not in u._cache:
        u._cache["l2"] = float(u.grid.mass @ u.values**2)
    return u._cache["l2"]


def grad_norm_sq(u: RadialFunction, decay: bool = True) -> float:
    """||grad u||_2^2 = 4*pi*int u'(r)^2 r^2 dr, u' taken at cell midpoints."""
    if not decay:
        du = u.grid.derivative_free @ u.values
        return float(u.grid.midpoint_weights @ du**2)
    if "grad" not in u._cache:
        du = u.grid.derivative @ u.values
        u._cache["grad"] = float(u.grid.midpoint_weights @ du**2)
    return u._cache["grad"]


def grad_norm_sq_gradient(u: RadialFunction) -> np.ndarray:
    """Gradient of u -> ||grad u||_2^2 with respect to the node values."""
    return 2.0 * (u.grid.stiffness @ u.values)


def node_derivatives(u: RadialFunction) -> tuple:
    """(u', u'') at the nodes; fourth-order with even reflection at r = 0 on uniform grids."""
    grid = u.grid
    if not grid.uniform:
        d1 = np.gradient(u.values, grid.nodes, edge_order=2)
        d1[0] = 0.0
        return d1, np.gradient(d1, grid.nodes, edge_order=2)
    h = grid.spacing[0]
    ext = np.concatenate([u.values[[2, 1]], u.values, np.zeros(2)])
    um2, um1, u0, up1, up2 = (ext[k : k + grid.n] for k in range(5))
    d1 = (um2 - 8.0 * um1 + 8.0 * up1 - up2) / (12.0 * h)
    d2 = (-um2 + 16.0 * um1 - 30.0 * u0 + 16.0 * up1 - up2) / (12.0 * h * h)
    return d1, d2


def _even_interpolant(u: RadialFunction) -> PchipInterpolator:
    if "pchip" not in u._cache:
        nodes = u.grid.nodes
        x = np.concatenate([-nodes[:0:-1], nodes])
        y = np.concatenate([u.values[:0:-1], u.values])
        u._cache["pchip"] = PchipInterpolator(x, y, extrapolate=False)
    return u._cache["pchip"]


def rescale(u: RadialFunction, t: float) -> RadialFunction:
    """Dilation u_t(r) = u(r/t), zero past r_max."""
    if not (np.isfinite(t) and t > 0):
        raise ValueError(f"The dilation factor must be positive, got t={t}.")
    if t == 1.0:
        return RadialFunction(u.grid, u.values, sampler=u.sampler)
    x = u.grid.nodes / t
    if u.sampler is not None:
        parent, r_max = u.sampler, u.grid.r_max

        def sampler(r):
            y = np.abs(np.asarray(r, dtype=float)) / t
            return np.where(y <= r_max, parent(np.minimum(y, r_max)), 0.0)

        return RadialFunction(u.grid, sampler(u.grid.nodes), sampler=sampler)
    inside = x <= u.grid.r_max
    values = np.zeros_like(x)
    values[inside] = _even_interpolant(u)(x[inside])
    return RadialFunction(u.grid, values)


def hardy_margin(u: RadialFunction) -> float:
    """||grad u||^2 - (1/4) int u^2/|x|^2 dx.

    In radial coordinates int u^2/|x|^2 dx = 4*pi*int u(r)^2 dr: the 1/r^2 weight cancels the
    r^2 volume factor exactly, so the integrand is regular at r = 0.
    """
    return grad_norm_sq(u) - 0.25 * FOUR_PI * u.grid.integrate(u.values**2)
