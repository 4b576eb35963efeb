"""Energy and Pohozaev functionals of the Kirchhoff problem and the fibering map t -> I(u_t).

Every functional is assembled from four labelled parts (kinetic a-term, potential term, Kirchhoff
b-term, nonlinear term). Along the dilation orbit u_t(x) = u(x/t) the parts are closed-form
polynomials in t except the potential term, which needs one quadrature of V(t r) u(r)^2.
"""
import logging
from collections import OrderedDict
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import joblib
import numpy as np
from pydantic import BaseModel, ConfigDict, computed_field

from problem import Nonlinearity, ProblemSpec
from radial_grid import RadialFunction, grad_norm_sq, l2_norm_sq

logger = logging.getLogger(__name__)

TOL_QUADRATURE = 1e-6
DEFAULT_T_SCAN = (1e-2, 1e2, 64)


class FunctionalValue(BaseModel):
    model_config = ConfigDict(frozen=True)

    kinetic: float
    potential: float
    kirchhoff: float
    nonlinear: float

    @computed_field
    @property
    def total(self) -> float:
        return self.kinetic + self.potential + self.kirchhoff + self.nonlinear

    @property
    def parts(self) -> Dict[str, float]:
        return {
            "kinetic": self.kinetic,
            "potential": self.potential,
            "kirchhoff": self.kirchhoff,
            "nonlinear": self.nonlinear,
        }

    @property
    def scale(self) -> float:
        return max(1.0, *(abs(v) for v in self.parts.values()))


def check_lambda(lam: float) -> float:
    if not 0.5 <= lam <= 1.0:
        raise ValueError(f"The weight lambda must lie in [1/2, 1], got {lam}.")
    return float(lam)


def check_dilation(t: float) -> float:
    if not (np.isfinite(t) and t > 0):
        raise ValueError(f"The dilation factor must be positive, got t={t}.")
    return float(t)


PRIMITIVE_CACHE_SIZE = 4096
_primitive_cache: "OrderedDict[Tuple[str, str], float]" = OrderedDict()


def primitive_integral(u: RadialFunction, nonlinearity: Nonlinearity) -> float:
    """int F(u) dx, cached on the content digest of u and the nonlinearity."""
    key = (u.digest, joblib.hash(nonlinearity.model_dump()))
    if key in _primitive_cache:
        _primitive_cache.move_to_end(key)
        return _primitive_cache[key]
    value = float(u.grid.mass @ nonlinearity.F(u.values))
    _primitive_cache[key] = value
    if len(_primitive_cache) > PRIMITIVE_CACHE_SIZE:
        _primitive_cache.popitem(last=False)
    return value


def nonlinearity_gradient(u: RadialFunction, nonlinearity: Nonlinearity) -> np.ndarray:
    """Gradient of u -> int F(u) dx with respect to the node values."""
    return u.grid.mass * nonlinearity.f(u.values)


def _potential_moment(u: RadialFunction, ps: ProblemSpec, t: float, limit: bool) -> float:
    """int V(t r) u(r)^2 dx."""
    if limit or ps.potential.kind == "constant":
        return ps.v_inf * l2_norm_sq(u)
    return float(u.grid.mass @ (ps.potential.value(t * u.grid.nodes) * u.values**2))


def _pohozaev_moment(u: RadialFunction, ps: ProblemSpec, t: float, limit: bool) -> float:
    """int [3V(t r) + (t r) V'(t r)] u(r)^2 dx."""
    if limit or ps.potential.kind == "constant":
        return 3.0 * ps.v_inf * l2_norm_sq(u)
    s = t * u.grid.nodes
    weight = 3.0 * ps.potential.value(s) + ps.potential.radial_derivative(s)
    return float(u.grid.mass @ (weight * u.values**2))


def energy_terms(
    u: RadialFunction, ps: ProblemSpec, t: float = 1.0, lam: float = 1.0, limit: bool = False
) -> FunctionalValue:
    """Parts of I_lam(u_t) (or I_lam^inf(u_t) when ``limit``)."""
    G = grad_norm_sq(u)
    return FunctionalValue(
        kinetic=0.5 * ps.a * t * G,
        potential=0.5 * t**3 * _potential_moment(u, ps, t, limit),
        kirchhoff=0.25 * ps.b * t**2 * G**2,
        nonlinear=-lam * t**3 * primitive_integral(u, ps.nonlinearity),
    )


def pohozaev_terms(
    u: RadialFunction, ps: ProblemSpec, t: float = 1.0, lam: float = 1.0, limit: bool = False
) -> FunctionalValue:
    """Parts of P_lam(u_t) (or the limit version)."""
    G = grad_norm_sq(u)
    return FunctionalValue(
        kinetic=0.5 * ps.a * t * G,
        potential=0.5 * t**3 * _pohozaev_moment(u, ps, t, limit),
        kirchhoff=0.5 * ps.b * t**2 * G**2,
        nonlinear=-3.0 * lam * t**3 * primitive_integral(u, ps.nonlinearity),
    )


def energy(u: RadialFunction, ps: ProblemSpec) -> FunctionalValue:
    return energy_terms(u, ps)


def energy_limit(u: RadialFunction, ps: ProblemSpec) -> FunctionalValue:
    return energy_terms(u, ps, limit=True)


def energy_lambda(u: RadialFunction, ps: ProblemSpec, lam: float, limit: bool = False) -> FunctionalValue:
    return energy_terms(u, ps, lam=check_lambda(lam), limit=limit)


def pohozaev(u: RadialFunction, ps: ProblemSpec) -> float:
    return pohozaev_terms(u, ps).total


def pohozaev_limit(u: RadialFunction, ps: ProblemSpec) -> float:
    return pohozaev_terms(u, ps, limit=True).total


def pohozaev_lambda(u: RadialFunction, ps: ProblemSpec, lam: float) -> float:
    return pohozaev_terms(u, ps, lam=check_lambda(lam)).total


def pohozaev_lambda_limit(u: RadialFunction, ps: ProblemSpec, lam: float) -> float:
    return pohozaev_terms(u, ps, lam=check_lambda(lam), limit=True).total


def fibering_value(u: RadialFunction, ps: ProblemSpec, t: float, lam: float = 1.0, limit: bool = False) -> float:
    """zeta(t) = I(u_t) in closed form."""
    return energy_terms(u, ps, check_dilation(t), lam, limit).total


def fibering_derivative(
    u: RadialFunction, ps: ProblemSpec, t: float, lam: float = 1.0, limit: bool = False
) -> float:
    """zeta'(t) = P(u_t) / t."""
    t = check_dilation(t)
    return pohozaev_terms(u, ps, t, lam, limit).total / t


def iip_gap(u: RadialFunction, ps: ProblemSpec, t: float, lam: float = 1.0, limit: bool = False) -> float:
    """I(u) - I(u_t) - (1 - t^3)/3 P(u) - b(1 - t)^2(1 + 2t)/12 ||grad u||^4.

    Nonnegative whenever V satisfies (V1), (V2), (V4); the lam/limit flags select the weighted
    and limit versions of the same inequality.
    """
    t = check_dilation(t)
    G = grad_norm_sq(u)
    base = energy_terms(u, ps, 1.0, lam, limit).total
    dilated = energy_terms(u, ps, t, lam, limit).total
    poh = pohozaev_terms(u, ps, 1.0, lam, limit).total
    correction = ps.b * (1.0 - t) ** 2 * (1.0 + 2.0 * t) / 12.0 * G**2
    return base - dilated - (1.0 - t**3) / 3.0 * poh - correction


@dataclass(frozen=True)
class FiberingScan:
    u: RadialFunction
    ts: np.ndarray
    zeta: np.ndarray
    dzeta: np.ndarray
    pohozaev_of_ut: np.ndarray
    iip_gap: np.ndarray

    COLUMNS = ("t", "zeta", "dzeta", "pohozaev", "iip_gap")

    def table(self) -> np.ndarray:
        return np.column_stack([self.ts, self.zeta, self.dzeta, self.pohozaev_of_ut, self.iip_gap])

    def sign_changes(self) -> List[int]:
        """Indices k with dzeta[k] and dzeta[k + 1] of strictly opposite sign."""
        s = np.sign(self.dzeta)
        return [int(k) for k in np.flatnonzero(s[:-1] * s[1:] < 0)]


def fibering_scan(
    u: RadialFunction,
    ps: ProblemSpec,
    ts: Optional[np.ndarray] = None,
    lam: float = 1.0,
    limit: bool = False,
) -> FiberingScan:
    if ts is None:
        lo, hi, count = DEFAULT_T_SCAN
        ts = np.geomspace(lo, hi, count)
    ts = np.asarray(ts, dtype=float)
    if np.any(ts <= 0):
        raise ValueError("Fibering scans need positive dilation factors.")
    zeta = np.empty_like(ts)
    poh = np.empty_like(ts)
    gap = np.empty_like(ts)
    for k, t in enumerate(ts):
        zeta[k] = energy_terms(u, ps, t, lam, limit).total
        poh[k] = pohozaev_terms(u, ps, t, lam, limit).total
        gap[k] = iip_gap(u, ps, t, lam, limit)
    return FiberingScan(u=u, ts=ts, zeta=zeta, dzeta=poh / ts, pohozaev_of_ut=poh, iip_gap=gap)
