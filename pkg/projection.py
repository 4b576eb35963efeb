"""Lambda-set membership and projection onto the Pohozaev manifold along dilation orbits."""
import logging
import math
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field
from scipy.optimize import brentq

from errors import BracketingFailed, NotInLambda
from functionals import energy_terms, pohozaev_terms, primitive_integral, nonlinearity_gradient
from problem import ProblemSpec
from radial_grid import RadialFunction, grad_norm_sq, grad_norm_sq_gradient, l2_norm_sq

logger = logging.getLogger(__name__)

LAMBDA_MARGIN_TOL = 1e-10
PROJECTION_RTOL = 1e-9
T_SCAN = (1e-2, 1e2)
T_SCAN_POINTS = 64
T_CAP = 1e6


class ProjectionResult(BaseModel):
    t_u: float
    reduced_energy: float
    pohozaev_residual: float
    bracket: Tuple[float, float]
    iterations: int
    roots: List[float] = Field(default_factory=list, description="Every zero of zeta' found by the scan")


def lambda_margin(u: RadialFunction, ps: ProblemSpec, lam: float = 1.0) -> float:
    """int [V_inf u^2 / 2 - lam F(u)] dx; negative inside Lambda."""
    return 0.5 * ps.v_inf * l2_norm_sq(u) - lam * primitive_integral(u, ps.nonlinearity)


def in_lambda_set(u: RadialFunction, ps: ProblemSpec, lam: float = 1.0) -> bool:
    if u.is_zero():
        return False
    return lambda_margin(u, ps, lam) < -LAMBDA_MARGIN_TOL


def project_to_manifold(
    u: RadialFunction,
    ps: ProblemSpec,
    lam: float = 1.0,
    limit: bool = False,
    t_range: Tuple[float, float] = T_SCAN,
    points: int = T_SCAN_POINTS,
) -> ProjectionResult:
    """Locate the maximiser t_u of t -> I(u_t), i.e. the zero of P(u_t)."""
    if not in_lambda_set(u, ps, lam):
        raise NotInLambda(
            "The function is not in the Lambda set; its dilation orbit does not cross the manifold.",
            margin=lambda_margin(u, ps, lam),
        )

    def p_of(t: float) -> float:
        return pohozaev_terms(u, ps, t, lam, limit).total

    ts = np.geomspace(t_range[0], t_range[1], points)
    values = np.array([p_of(t) for t in ts])
    signs = np.sign(values)
    crossings = np.flatnonzero(signs[:-1] * signs[1:] < 0)
    if not crossings.size:
        raise BracketingFailed(
            f"zeta' has no sign change on t in [{t_range[0]:g}, {t_range[1]:g}]; "
            "the grid may truncate the orbit or u lies near the boundary of Lambda.",
            scan={"t": ts.tolist(), "pohozaev": values.tolist()},
            iterate=u,
        )

    roots, candidates = [], []
    for k in crossings:
        lo, hi = ts[k], ts[k + 1]
        root, info = brentq(p_of, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, full_output=True)
        roots.append(float(root))
        if values[k] > 0 > values[k + 1]:
            candidates.append((energy_terms(u, ps, root, lam, limit).total, root, (lo, hi), info.iterations))
    if not candidates:
        raise BracketingFailed(
            "zeta' changes sign only upwards; no maximiser along the orbit.",
            scan={"t": ts.tolist(), "pohozaev": values.tolist()},
            iterate=u,
        )
    if len(roots) > 1:
        logger.warning("zeta' changes sign %d times at t=%s; keeping the largest maximum", len(roots), roots)

    value, t_u, bracket, iterations = max(candidates)
    terms = pohozaev_terms(u, ps, t_u, lam, limit)
    residual = abs(terms.total)
    if residual > PROJECTION_RTOL * terms.scale:
        logger.warning("projection residual %.3e above tolerance at t_u=%.17g", residual, t_u)
    return ProjectionResult(
        t_u=t_u,
        reduced_energy=value,
        pohozaev_residual=residual,
        bracket=(float(bracket[0]), float(bracket[1])),
        iterations=iterations,
        roots=roots,
    )


def project_with_widening(
    u: RadialFunction, ps: ProblemSpec, lam: float = 1.0, limit: bool = False, t_cap: float = T_CAP
) -> ProjectionResult:
    """project_to_manifold, extending the scan by decades while P(u_t) is still positive at its top.

    Near the boundary of Lambda t_u grows like b||grad u||^4 / (6 |lambda_margin|).
    """
    lo, hi = T_SCAN
    while True:
        decades = math.log10(hi / lo)
        points = int(math.ceil(T_SCAN_POINTS * decades / 4.0))
        try:
            return project_to_manifold(u, ps, lam, limit, t_range=(lo, hi), points=points)
        except BracketingFailed as exc:
            if exc.scan is None or exc.scan["pohozaev"][-1] <= 0 or hi >= t_cap:
                raise
            hi *= 10.0
            logger.debug("widening the fibering scan to t in [%g, %g]", lo, hi)


def reduced_energy(u: RadialFunction, ps: ProblemSpec, lam: float = 1.0, limit: bool = False) -> float:
    """max_t I(u_t) for u in Lambda."""
    return project_to_manifold(u, ps, lam, limit).reduced_energy


def reduced_gradient(
    u: RadialFunction,
    ps: ProblemSpec,
    lam: float = 1.0,
    limit: bool = False,
    projection: Optional[ProjectionResult] = None,
) -> RadialFunction:
    """Gradient of the discrete reduced energy with respect to the node values of u.

    Envelope rule: t_u is stationary for t -> I(u_t), so only the explicit u-dependence of the
    closed-form fibering value at t = t_u contributes.
    """
    if projection is None:
        projection = project_to_manifold(u, ps, lam, limit)
    t = projection.t_u
    G = grad_norm_sq(u)
    if limit:
        v_t = np.full(u.grid.n, ps.v_inf)
    else:
        v_t = ps.potential.value(t * u.grid.nodes)
    g = (0.5 * ps.a * t + 0.5 * ps.b * t**2 * G) * grad_norm_sq_gradient(u)
    g = g + t**3 * u.grid.mass * v_t * u.values
    g = g - lam * t**3 * nonlinearity_gradient(u, ps.nonlinearity)
    return RadialFunction(u.grid, g)


def directional_derivative(
    u: RadialFunction, ps: ProblemSpec, direction: np.ndarray, lam: float = 1.0, limit: bool = False
) -> float:
    return float(reduced_gradient(u, ps, lam, limit).values @ np.asarray(direction, dtype=float))
