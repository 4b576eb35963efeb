"""Ground states on the Pohozaev manifold, the scalar-field shooting oracle and lambda diagnostics."""
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from pydantic import BaseModel, ConfigDict, Field
from scipy import sparse
from scipy.integrate import solve_ivp
from scipy.optimize import minimize, minimize_scalar
from scipy.sparse.linalg import factorized

from errors import (
    HypothesisViolation,
    InitialIterateNotInLambda,
    KirchhoffError,
    MixtureFitFailed,
    NotInLambda,
    ShootingBracketFailed,
    TNotFound,
)
from functionals import check_lambda, energy_terms, fibering_value, pohozaev_terms
from problem import Nonlinearity, ProblemSpec, check_nonlinearity_hypotheses, check_potential_hypotheses
from projection import (
    ProjectionResult,
    in_lambda_set,
    lambda_margin,
    project_to_manifold,
    project_with_widening,
    reduced_gradient,
)
from radial_grid import RadialFunction, RadialGrid, grad_norm_sq, l2_norm_sq, make_grid, node_derivatives, rescale

logger = logging.getLogger(__name__)

Status = Literal["converged", "max_iters", "stalled"]


class SolverOptions(BaseModel):
    model_config = ConfigDict(extra="forbid")

    tol: float = Field(default=1e-6, gt=0, description="Relative reduced-gradient tolerance")
    max_iters: int = Field(default=500, ge=1)
    stall_window: int = Field(default=20, ge=1)
    stall_threshold: float = Field(default=1e-12, ge=0)
    optimizer: Literal["descent", "gaussian_mixture"] = "descent"
    armijo: float = Field(default=1e-4, gt=0, lt=0.5)
    max_step: float = Field(default=4.0, gt=0)
    min_step: float = Field(default=1e-14, gt=0)
    resample_band: Tuple[float, float] = (0.9, 1.1)
    polish_tol: float = Field(default=1e-12, gt=0)
    polish_rounds: int = Field(default=5, ge=0)
    mixture_terms: int = Field(default=8, ge=1)
    t_start: float = Field(default=2.0, gt=1, description="First endpoint tried for the mountain-pass path")
    t_max: float = Field(default=64.0, gt=1)
    seed: int = 0


@dataclass
class TraceRow:
    iteration: int
    energy: float
    step: float
    grad_norm: float


@dataclass
class SolveResult:
    u_hat: RadialFunction
    m: float
    pohozaev_residual: float
    ode_residual: float
    grad_norm: float
    reduced_grad_norm: float
    energy_lower_bound: float
    status: Status
    iterations: int
    t_u: float
    lam: float = 1.0
    parts: Dict[str, float] = field(default_factory=dict)
    trace: List[TraceRow] = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.status == "converged"

    def summary(self) -> Dict[str, Any]:
        return {
            "m": self.m,
            "status": self.status,
            "iterations": self.iterations,
            "pohozaev_residual": self.pohozaev_residual,
            "ode_residual": self.ode_residual,
            "grad_norm": self.grad_norm,
            "reduced_grad_norm": self.reduced_grad_norm,
            "energy_lower_bound": self.energy_lower_bound,
            "t_u": self.t_u,
            "lambda": self.lam,
            "parts": self.parts,
        }


@dataclass
class LambdaSweep:
    lambdas: np.ndarray
    m_inf_values: List[Optional[float]]
    c_upper_values: List[Optional[float]]
    statuses: List[str]
    gap_margins: List[Optional[float]] = field(default_factory=list)
    strict_gap_from: Optional[float] = None

    COLUMNS = ("lambda", "m_inf", "c_upper", "gap_margin", "status")

    def rows(self) -> List[Tuple]:
        return list(zip(self.lambdas.tolist(), self.m_inf_values, self.c_upper_values, self.gap_margins, self.statuses))


@dataclass
class OracleResult:
    v: RadialFunction
    u: RadialFunction
    t: float
    m: float
    pohozaev_residual: float
    ode_residual: float
    shooting_value: float


def _audit_preconditions(ps: ProblemSpec, lam: float) -> float:
    """Raise unless (V1), (V2) hold; return the (F3) witness s0."""
    report = check_potential_hypotheses(ps.potential, ps.a)
    failed = [k for k in ("V1", "V2") if report.status(k) == "fail"]
    if failed:
        raise HypothesisViolation(f"The potential fails {', '.join(failed)}.", report=report)
    f_report = check_nonlinearity_hypotheses(ps.nonlinearity, ps.v_inf, lam=lam)
    if f_report.s0 is None:
        raise HypothesisViolation(
            "No s0 with F(s0) > V_inf s0^2 / 2 on the sample grid; the Lambda set is empty.",
            report=f_report,
        )
    return f_report.s0


PLATEAU_RAISES = 8
PLATEAU_FILL = 0.75


def _plateau(height: float, R: float):
    def sampler(r):
        return height * np.clip(R + 1.0 - np.abs(np.asarray(r, dtype=float)), 0.0, 1.0)

    return sampler


def plateau_iterate(grid: RadialGrid, ps: ProblemSpec, s0: float, lam: float = 1.0) -> RadialFunction:
    """Plateau of height >= s0 on [0, R] falling linearly to 0 on [R, R + 1], dilated onto the manifold.

    R grows until the plateau is in Lambda. Its dilation by t_u must keep the support inside
    PLATEAU_FILL * r_max; otherwise the plateau is raised, which lowers t_u.
    """
    widest = grid.r_max - 1.0
    radii = [R for R in 2.0 ** np.arange(0, 10) if R < widest] + [widest]
    height = s0
    for _ in range(PLATEAU_RAISES):
        for R in radii:
            if R <= 0:
                continue
            u0 = RadialFunction.from_callable(grid, _plateau(height, R), exact=True)
            if not in_lambda_set(u0, ps, lam):
                continue
            try:
                proj = project_with_widening(u0, ps, lam)
            except KirchhoffError as exc:
                logger.debug("plateau height=%.6g R=%.6g not projectable: %s", height, R, exc.detail)
                break
            if proj.t_u * (R + 1.0) > PLATEAU_FILL * grid.r_max:
                # wider plateaus only push t_u * (R + 1) further out
                break
            logger.info("initial plateau height=%.6g R=%.6g dilated by t_u=%.6g", height, R, proj.t_u)
            return rescale(u0, proj.t_u)
        height *= 1.25
    raise InitialIterateNotInLambda(
        f"No plateau of height >= {s0:.6g} lies in Lambda with its manifold dilation inside r_max={grid.r_max:g}.",
        s0=s0,
    )


def _descent_metric(u: RadialFunction, ps: ProblemSpec):
    """Factorised S = (a + b G) K + V_inf M restricted to the free nodes (u(r_max) is held)."""
    grid = u.grid
    S = (ps.a + ps.b * grad_norm_sq(u)) * grid.stiffness + ps.v_inf * sparse.diags(grid.mass)
    return factorized(sparse.csc_matrix(S)[:-1, :-1])


def _gradient_step(u: RadialFunction, ps: ProblemSpec, proj: ProjectionResult, lam: float, limit: bool):
    g = reduced_gradient(u, ps, lam, limit, projection=proj).values.copy()
    g[-1] = 0.0
    d = np.zeros_like(g)
    d[:-1] = _descent_metric(u, ps)(g[:-1])
    return g, d, math.sqrt(max(float(g @ d), 0.0))


def _descent(
    u: RadialFunction, ps: ProblemSpec, opts: SolverOptions, lam: float, limit: bool
) -> Tuple[RadialFunction, ProjectionResult, Status, List[TraceRow], float]:
    proj = project_with_widening(u, ps, lam, limit)
    lo, hi = opts.resample_band
    if not lo <= proj.t_u <= hi:
        u = rescale(u, proj.t_u)
        proj = project_to_manifold(u, ps, lam, limit)
    J = proj.reduced_energy
    trace: List[TraceRow] = []
    history = [J]
    alpha = 1.0
    polish_left = opts.polish_rounds
    status: Status = "max_iters"
    gnorm = math.inf

    for it in range(opts.max_iters):
        g, d, gnorm = _gradient_step(u, ps, proj, lam, limit)
        trace.append(TraceRow(iteration=it, energy=J, step=alpha, grad_norm=gnorm))
        logger.debug("iter %d J=%.17g |g|=%.3e t_u=%.12g", it, J, gnorm, proj.t_u)
        if gnorm <= opts.tol * max(1.0, abs(J)):
            if abs(proj.t_u - 1.0) <= opts.polish_tol or polish_left == 0:
                status = "converged"
                break
            polish_left -= 1
            u = rescale(u, proj.t_u)
            proj = project_to_manifold(u, ps, lam, limit)
            J = proj.reduced_energy
            continue

        gd = gnorm**2
        alpha = min(2.0 * alpha, opts.max_step)
        while alpha >= opts.min_step:
            trial = u.with_values(u.values - alpha * d)
            try:
                trial_proj = project_to_manifold(trial, ps, lam, limit)
            except KirchhoffError:
                trial_proj = None
            if trial_proj is not None and trial_proj.reduced_energy <= J - opts.armijo * alpha * gd:
                break
            alpha *= 0.5
        else:
            status = "stalled"
            logger.info("line search failed at iteration %d", it)
            break

        u, proj = trial, trial_proj
        if not lo <= proj.t_u <= hi:
            u = rescale(u, proj.t_u)
            proj = project_to_manifold(u, ps, lam, limit)
        J = proj.reduced_energy
        history.append(J)
        window = opts.stall_window
        if len(history) > window and history[-window - 1] - J < opts.stall_threshold:
            status = "stalled"
            break
    return u, proj, status, trace, gnorm


MIXTURE_PENALTY = 1e300
MIXTURE_DEPTH = 0.25


def _mixture_basis(r: np.ndarray, widths: np.ndarray) -> np.ndarray:
    return np.exp(-((np.asarray(r, dtype=float)[:, None] / widths[None, :]) ** 2))


def _mixture_minimize(
    u0: RadialFunction, ps: ProblemSpec, opts: SolverOptions, lam: float, limit: bool
) -> Tuple[RadialFunction, ProjectionResult, Status, List[TraceRow], float]:
    """Derivative-free fallback over coefficients of exp(-(r/s_k)^2)."""
    grid = u0.grid
    widths = np.geomspace(0.25, grid.r_max / 4.0, opts.mixture_terms)
    basis = _mixture_basis(grid.nodes, widths)
    coef0, *_ = np.linalg.lstsq(basis, u0.values, rcond=None)
    # the least-squares fit undershoots the plateau; scale it back inside Lambda
    for _ in range(40):
        fit = RadialFunction(grid, basis @ coef0)
        depth = MIXTURE_DEPTH * 0.5 * ps.v_inf * l2_norm_sq(fit)
        if in_lambda_set(fit, ps, lam) and lambda_margin(fit, ps, lam) <= -depth:
            break
        coef0 = 1.5 * coef0
    else:
        raise MixtureFitFailed("The Gaussian-mixture fit of the initial iterate cannot be scaled into Lambda.")
    trace: List[TraceRow] = []
    best: Dict[str, Any] = {"value": math.inf, "coef": None}

    def objective(c: np.ndarray) -> float:
        u = RadialFunction(grid, basis @ c)
        if not in_lambda_set(u, ps, lam):
            return MIXTURE_PENALTY
        try:
            value = project_with_widening(u, ps, lam, limit).reduced_energy
        except KirchhoffError:
            return MIXTURE_PENALTY
        if value < best["value"]:
            best.update(value=value, coef=np.array(c, dtype=float))
        return value

    def record(c: np.ndarray) -> None:
        trace.append(TraceRow(iteration=len(trace), energy=objective(c), step=math.nan, grad_norm=math.nan))

    res = minimize(
        objective,
        coef0,
        method="Nelder-Mead",
        callback=record,
        options={"maxiter": 20 * opts.max_iters, "xatol": 1e-10, "fatol": opts.tol},
    )
    if best["coef"] is None:
        raise MixtureFitFailed("No simplex vertex of the Gaussian-mixture search lies in Lambda.")
    coef = best["coef"]
    u = RadialFunction.from_callable(grid, lambda r: _mixture_basis(np.abs(r), widths) @ coef, exact=True)
    proj = project_with_widening(u, ps, lam, limit)
    u = rescale(u, proj.t_u)
    proj = project_to_manifold(u, ps, lam, limit)
    g = reduced_gradient(u, ps, lam, limit, projection=proj).values
    gnorm = float(np.linalg.norm(basis.T @ g))
    status: Status = "converged" if res.success else "max_iters"
    return u, proj, status, trace, gnorm


def solve_ground_state(
    ps: ProblemSpec,
    grid: RadialGrid,
    opts: Optional[SolverOptions] = None,
    lam: float = 1.0,
    warm_start: Optional[RadialFunction] = None,
) -> SolveResult:
    """Minimise max_t I_lam(u_t) over Lambda; the minimiser is a ground state on the manifold."""
    opts = opts or SolverOptions()
    lam = check_lambda(lam)
    s0 = _audit_preconditions(ps, lam)
    if warm_start is not None and warm_start.grid is grid and in_lambda_set(warm_start, ps, lam):
        u0 = warm_start
    else:
        if warm_start is not None:
            logger.info("warm start rejected; building a plateau iterate")
        u0 = plateau_iterate(grid, ps, s0, lam)

    if opts.optimizer == "descent":
        u, proj, status, trace, gnorm = _descent(u0, ps, opts, lam, False)
    else:
        u, proj, status, trace, gnorm = _mixture_minimize(u0, ps, opts, lam, False)

    G = grad_norm_sq(u)
    parts = energy_terms(u, ps, 1.0, lam)
    result = SolveResult(
        u_hat=u,
        m=proj.reduced_energy,
        pohozaev_residual=abs(pohozaev_terms(u, ps, 1.0, lam).total),
        ode_residual=ode_residual(u, ps, lam=lam),
        grad_norm=math.sqrt(G),
        reduced_grad_norm=gnorm,
        energy_lower_bound=ps.b * G**2 / 12.0,
        status=status,
        iterations=len(trace),
        t_u=proj.t_u,
        lam=lam,
        parts=parts.parts,
        trace=trace,
    )
    logger.info(
        "solve finished status=%s m=%.12g |P|=%.3e iterations=%d", status, result.m, result.pohozaev_residual, len(trace)
    )
    return result


def ode_residual(
    u: RadialFunction, ps: ProblemSpec, lam: float = 1.0, limit: bool = False, norm: Literal["l2", "max"] = "l2"
) -> float:
    """Residual of -(a + b||grad u||^2)(u'' + 2u'/r) + V u - lam f(u) over interior nodes."""
    grid = u.grid
    d1, d2 = node_derivatives(u)
    r = grid.nodes
    inner = slice(1, grid.n - 2)
    coeff = ps.a + ps.b * grad_norm_sq(u)
    v = np.full(grid.n, ps.v_inf) if limit else ps.potential.value(r)
    res = (
        -coeff * (d2[inner] + 2.0 * d1[inner] / r[inner])
        + v[inner] * u.values[inner]
        - lam * ps.nonlinearity.f(u.values[inner])
    )
    if norm == "max":
        return float(np.max(np.abs(res)))
    return math.sqrt(float(grid.mass[inner] @ res**2))


def _shoot(s: float, a_eff: float, v_inf: float, f: Nonlinearity, lam: float, r_end: float, r0: float):
    """Integrate from r0 with v(0) = s; returns (kind, solution) with kind in {under, over}."""
    curvature = (v_inf * s - lam * float(f.f(s))) / (3.0 * a_eff)
    y0 = [s + 0.5 * curvature * r0**2, curvature * r0]
    if curvature >= 0:
        return "under", None

    def rhs(r, y):
        v, w = y
        return [w, (v_inf * v - lam * f.f(v)) / a_eff - 2.0 * w / r]

    def crosses_zero(r, y):
        return y[0]

    def turns_up(r, y):
        return y[1]

    crosses_zero.terminal, crosses_zero.direction = True, -1
    turns_up.terminal, turns_up.direction = True, 1
    sol = solve_ivp(
        rhs, (r0, r_end), y0, method="DOP853", rtol=1e-12, atol=1e-14 * max(s, 1e-300),
        dense_output=True, events=(crosses_zero, turns_up),
    )
    if sol.t_events[0].size:
        return "over", sol
    if sol.t_events[1].size:
        return "under", sol
    kappa = math.sqrt(v_inf / a_eff)
    v, w = sol.y[:, -1]
    return ("under" if w + kappa * v > 0 else "over"), sol


def solve_scalar_field_shooting(
    a_eff: float,
    v_inf: float,
    f: Nonlinearity,
    grid: RadialGrid,
    lam: float = 1.0,
    scan: Tuple[float, float, int] = (1e-3, 1e3, 64),
) -> RadialFunction:
    """Positive radial solution of -a_eff Lap v + V_inf v = lam f(v) by shooting on v(0).

    The returned profile carries an exact sampler (ODE dense output, then the linear far-field
    tail A exp(-kappa r)/r), so dilations of it need no interpolation.
    """
    if a_eff <= 0 or v_inf <= 0:
        raise ValueError("Shooting needs a_eff > 0 and V_inf > 0.")
    kappa = math.sqrt(v_inf / a_eff)
    r0 = 1e-4
    r_end = grid.r_max + 40.0 / kappa

    below = above = None
    previous = None
    for s in np.geomspace(*scan):
        kind, sol = _shoot(float(s), a_eff, v_inf, f, lam, r_end, r0)
        if previous is not None and previous[0] == "under" and kind == "over":
            below, above = previous, (kind, sol, float(s))
            break
        previous = (kind, sol, float(s))
    if below is None:
        raise ShootingBracketFailed(
            f"No under/over-shoot pair for v(0) in [{scan[0]:g}, {scan[1]:g}].", a_eff=a_eff, v_inf=v_inf
        )

    lo, sol_lo = below[2], below[1]
    hi, sol_hi = above[2], above[1]
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        kind, sol = _shoot(mid, a_eff, v_inf, f, lam, r_end, r0)
        if kind == "under":
            lo, sol_lo = mid, sol
        else:
            hi, sol_hi = mid, sol
    if sol_lo is None:
        raise ShootingBracketFailed("The undershoot side never left the linear regime.", s=lo)

    r_cap = min(sol_lo.t[-1], sol_hi.t[-1])
    rr = np.linspace(r0, r_cap, 20001)
    v_lo, v_hi = sol_lo.sol(rr)[0], sol_hi.sol(rr)[0]
    bad = (np.abs(v_hi - v_lo) > 1e-7 * np.abs(v_lo)) | (v_lo <= 0) | (v_hi <= 0)
    k = int(np.argmax(bad)) if bad.any() else rr.size
    if k < 2:
        raise ShootingBracketFailed("Shooting trajectories separate immediately.", s=lo)
    r_m = float(rr[k - 1])
    v_m = 0.5 * float(sol_lo.sol(r_m)[0] + sol_hi.sol(r_m)[0])
    amplitude = v_m * r_m * math.exp(kappa * r_m)
    curvature = (v_inf * lo - lam * float(f.f(lo))) / (3.0 * a_eff)
    logger.info("shooting v(0)=%.17g matched to the tail at r=%.6g", lo, r_m)

    def sampler(r):
        r = np.abs(np.asarray(r, dtype=float))
        out = np.empty_like(r)
        core = r < r0
        body = (r >= r0) & (r <= r_m)
        tail = r > r_m
        out[core] = lo + 0.5 * curvature * r[core] ** 2
        if body.any():
            out[body] = 0.5 * (sol_lo.sol(r[body])[0] + sol_hi.sol(r[body])[0])
        out[tail] = amplitude * np.exp(-kappa * r[tail]) / r[tail]
        return out

    return RadialFunction.from_callable(grid, sampler, exact=True)


def kirchhoff_from_scalar_field(
    v: RadialFunction, a: float, b: float, grid: Optional[RadialGrid] = None
) -> Tuple[RadialFunction, float]:
    """u(r) = v(t r) with a t^2 + b||grad v||^2 t = 1 maps scalar-field solutions to Kirchhoff ones.

    ||grad v||^2 is taken on v's own grid, which must resolve v. With ``grid`` the result is
    sampled there through v's exact sampler.
    """
    G = grad_norm_sq(v)
    disc = (b * G) ** 2 + 4.0 * a
    if a <= 0 or b < 0 or disc <= 0:
        raise ValueError(f"The rescaling needs a > 0 and b >= 0, got a={a}, b={b}.")
    t = 2.0 / (b * G + math.sqrt(disc))
    if grid is None or grid is v.grid:
        return rescale(v, 1.0 / t), t
    if v.sampler is None:
        raise ValueError("Moving the rescaled profile to another grid needs an exact sampler on v.")
    parent = v.sampler
    return RadialFunction.from_callable(grid, lambda r: parent(t * np.asarray(r)), exact=True), t


SCALAR_DECAY_LENGTHS = 25.0
SCALAR_NODES = 2501


def scalar_field_grid(v_inf: float, a_eff: float = 1.0) -> RadialGrid:
    """Uniform grid spanning SCALAR_DECAY_LENGTHS decay lengths sqrt(a_eff / V_inf) of a scalar-field profile."""
    return make_grid(SCALAR_DECAY_LENGTHS * math.sqrt(a_eff / v_inf), SCALAR_NODES)


def oracle_ground_state(ps: ProblemSpec, grid: RadialGrid, lam: float = 1.0) -> OracleResult:
    """Ground state of the limit problem from shooting plus the Kirchhoff rescaling.

    v is shot on its own length scale; u is then sampled on ``grid``.
    """
    lam = check_lambda(lam)
    v = solve_scalar_field_shooting(1.0, ps.v_inf, ps.nonlinearity, scalar_field_grid(ps.v_inf), lam)
    u, t = kirchhoff_from_scalar_field(v, ps.a, ps.b, grid)
    limit = ps.limit()
    return OracleResult(
        v=v,
        u=u,
        t=t,
        m=energy_terms(u, limit, 1.0, lam).total,
        pohozaev_residual=abs(pohozaev_terms(u, limit, 1.0, lam).total),
        ode_residual=ode_residual(u, limit, lam=lam),
        shooting_value=float(v.sampler(np.zeros(1))[0]),
    )


def mountain_pass_upper_bound(
    ps: ProblemSpec, lam: float, seed: RadialFunction, opts: Optional[SolverOptions] = None
) -> float:
    """max over s in (0, T] of I_lam(seed_s), with T the first doubling endpoint where I_lam < 0."""
    opts = opts or SolverOptions()
    lam = check_lambda(lam)
    if not in_lambda_set(seed, ps, lam):
        raise NotInLambda("The mountain-pass seed must lie in the Lambda set.")
    T = opts.t_start
    while fibering_value(seed, ps, T, lam) >= 0:
        T *= 2.0
        if T > opts.t_max:
            raise TNotFound(f"I_lam(seed_T) stays nonnegative for T up to {opts.t_max:g}.", lam=lam)

    ss = np.geomspace(T * 1e-4, T, 256)
    values = np.array([fibering_value(seed, ps, s, lam) for s in ss])
    k = int(np.argmax(values))
    lo, hi = ss[max(k - 1, 0)], ss[min(k + 1, ss.size - 1)]
    refined = minimize_scalar(
        lambda s: -fibering_value(seed, ps, s, lam), bounds=(lo, hi), method="bounded", options={"xatol": 1e-12}
    )
    return float(max(values[k], -refined.fun))


def lambda_sweep(
    ps: ProblemSpec, grid: RadialGrid, lambdas: Sequence[float], opts: Optional[SolverOptions] = None
) -> LambdaSweep:
    """m_lam^inf for each lam (solved from the largest down, warm-started) and bounds on c_lam."""
    opts = opts or SolverOptions()
    lambdas = np.asarray(lambdas, dtype=float)
    if lambdas.ndim != 1 or not lambdas.size or np.any(np.diff(lambdas) <= 0):
        raise ValueError("Lambda grids must be nonempty and strictly increasing.")
    for lam in lambdas:
        check_lambda(lam)

    limit = ps.limit()
    m_inf: List[Optional[float]] = [None] * lambdas.size
    statuses = ["skipped"] * lambdas.size
    solutions: Dict[float, RadialFunction] = {}
    previous = None
    for k in range(lambdas.size - 1, -1, -1):
        lam = float(lambdas[k])
        try:
            res = solve_ground_state(limit, grid, opts, lam=lam, warm_start=previous)
        except KirchhoffError as exc:
            logger.warning("lambda=%g failed: %s", lam, exc.detail)
            statuses[k] = type(exc).__name__
            continue
        statuses[k] = res.status
        m_inf[k] = res.m
        solutions[lam] = res.u_hat
        previous = res.u_hat

    seed = solutions.get(1.0)
    if seed is None:
        try:
            seed = solve_ground_state(limit, grid, opts).u_hat
        except KirchhoffError as exc:
            logger.warning("no lambda=1 limit ground state for the mountain-pass seed: %s", exc.detail)

    c_upper: List[Optional[float]] = [None] * lambdas.size
    if seed is not None:
        for k, lam in enumerate(lambdas):
            try:
                c_upper[k] = mountain_pass_upper_bound(ps, float(lam), seed, opts)
            except KirchhoffError as exc:
                logger.warning("mountain-pass bound at lambda=%g failed: %s", lam, exc.detail)

    margins = [m - c if m is not None and c is not None else None for m, c in zip(m_inf, c_upper)]
    strict_from = None
    for k in range(lambdas.size - 1, -1, -1):
        if margins[k] is None or margins[k] <= 0:
            break
        strict_from = float(lambdas[k])
    return LambdaSweep(
        lambdas=lambdas,
        m_inf_values=m_inf,
        c_upper_values=c_upper,
        statuses=statuses,
        gap_margins=margins,
        strict_gap_from=strict_from,
    )


SWEEP_AXES = ("a", "b", "p", "potential.alpha", "potential.beta", "potential.sigma")


def with_axis_value(ps: ProblemSpec, axis: str, value: float) -> ProblemSpec:
    if axis not in SWEEP_AXES:
        raise ValueError(f"Unknown sweep axis '{axis}'. Use one of {', '.join(SWEEP_AXES)}.")
    data = ps.model_dump()
    if axis == "p":
        data["nonlinearity"]["p"] = value
    elif axis.startswith("potential."):
        data["potential"][axis.split(".", 1)[1]] = value
    else:
        data[axis] = value
    return ProblemSpec.model_validate(data)


def _sweep_point(ps: ProblemSpec, grid: RadialGrid, opts: SolverOptions, axis: str, value: float) -> Dict[str, Any]:
    row: Dict[str, Any] = {"axis": axis, "value": value}
    try:
        res = solve_ground_state(with_axis_value(ps, axis, value), grid, opts)
    except (KirchhoffError, ValueError) as exc:
        row.update(m=None, pohozaev_residual=None, ode_residual=None, status=type(exc).__name__)
        return row
    row.update(m=res.m, pohozaev_residual=res.pohozaev_residual, ode_residual=res.ode_residual, status=res.status)
    return row


def axis_sweep(
    ps: ProblemSpec,
    grid: RadialGrid,
    axis: str,
    values: Sequence[float],
    opts: Optional[SolverOptions] = None,
    workers: int = 1,
) -> List[Dict[str, Any]]:
    """Independent solves along one parameter axis; rows come back in input order."""
    opts = opts or SolverOptions()
    if axis not in SWEEP_AXES:
        raise ValueError(f"Unknown sweep axis '{axis}'. Use one of {', '.join(SWEEP_AXES)}.")
    rows = Parallel(n_jobs=workers)(delayed(_sweep_point)(ps, grid, opts, axis, float(v)) for v in values)
    for row in rows:
        if row["m"] is None:
            logger.warning("sweep point %s=%g failed: %s", axis, row["value"], row["status"])
    return rows
