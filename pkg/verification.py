"""Randomised inequality scans over Gaussian-mixture test functions."""
import logging
from typing import Dict, List, Optional, Tuple

import numpy as np
from joblib import Parallel, delayed
from pydantic import BaseModel, ConfigDict, Field

from errors import KirchhoffError
from functionals import fibering_scan, iip_gap, pohozaev, pohozaev_limit, pohozaev_terms
from problem import (
    HypothesisReport,
    ProblemSpec,
    SampleSpec,
    Verdict,
    check_nonlinearity_hypotheses,
    check_potential_hypotheses,
)
from projection import in_lambda_set, lambda_margin, project_to_manifold
from radial_grid import RadialFunction, RadialGrid, hardy_margin, l2_norm_sq

logger = logging.getLogger(__name__)

MIXTURE_TERMS = 3
IIP_SLACK = 1e-6
HARDY_SLACK = 1e-8
PROJECTION_RTOL = 1e-9
UNIQUENESS_SCAN = (1e-4, 1e4, 128)
# near the boundary of Lambda the maximiser t_u runs off to infinity
MEMBER_DEPTH = 0.25
SUITES = ("iip", "hardy", "lambda_inclusion", "fibering_uniqueness")
# reported but never counted as failures
INFORMATIONAL = ("nonlinearity.AR", "nonlinearity.S1")


class VerifySpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    samples: SampleSpec = Field(default_factory=SampleSpec)
    random_samples: int = Field(default=100, ge=1)
    t_range: Tuple[float, float] = (0.1, 10.0)
    suites: List[str] = Field(default_factory=lambda: list(SUITES))


class VerifyReport(BaseModel):
    potential: HypothesisReport
    nonlinearity: HypothesisReport
    suites: Dict[str, Verdict]

    @property
    def verdicts(self) -> Dict[str, Verdict]:
        merged = {f"potential.{k}": v for k, v in self.potential.verdicts.items()}
        merged.update({f"nonlinearity.{k}": v for k, v in self.nonlinearity.verdicts.items()})
        merged.update(self.suites)
        return merged

    @property
    def failed(self) -> List[str]:
        return [k for k, v in self.verdicts.items() if v.status == "fail" and k not in INFORMATIONAL]

    @property
    def passed(self) -> bool:
        return not self.failed


def draw_mixtures(rng: np.random.Generator, count: int, amplitude=(0.1, 10.0)) -> np.ndarray:
    """Rows (c_1..c_k, s_1..s_k): weights and widths of sum c_j exp(-(r/s_j)^2)."""
    total = rng.uniform(np.log(amplitude[0]), np.log(amplitude[1]), size=(count, 1))
    shares = rng.dirichlet(np.ones(MIXTURE_TERMS), size=count)
    widths = np.exp(rng.uniform(np.log(0.5), np.log(4.0), size=(count, MIXTURE_TERMS)))
    return np.hstack([np.exp(total) * shares, widths])


def mixture(grid: RadialGrid, params: np.ndarray) -> RadialFunction:
    coef, widths = params[:MIXTURE_TERMS], params[MIXTURE_TERMS:]

    def sampler(r):
        r = np.abs(np.asarray(r, dtype=float))
        return np.exp(-((r[:, None] / widths[None, :]) ** 2)) @ coef

    return RadialFunction.from_callable(grid, sampler, exact=True)


def lambda_member(grid: RadialGrid, ps: ProblemSpec, params: np.ndarray) -> Optional[RadialFunction]:
    """Scale the mixture up until it lies MEMBER_DEPTH inside Lambda (relative to the mass term)."""
    params = params.copy()
    for _ in range(40):
        u = mixture(grid, params)
        if in_lambda_set(u, ps) and lambda_margin(u, ps) <= -MEMBER_DEPTH * 0.5 * ps.v_inf * l2_norm_sq(u):
            return u
        params[:MIXTURE_TERMS] *= 1.5
    return None


def _iip_point(ps: ProblemSpec, grid: RadialGrid, params: np.ndarray, t: float) -> float:
    return iip_gap(mixture(grid, params), ps, t)


def _hardy_point(grid: RadialGrid, params: np.ndarray) -> float:
    return hardy_margin(mixture(grid, params))


def _inclusion_point(ps: ProblemSpec, grid: RadialGrid, params: np.ndarray) -> Dict[str, float]:
    u = mixture(grid, params)
    return {
        "pohozaev": pohozaev(u, ps),
        "pohozaev_limit": pohozaev_limit(u, ps),
        "margin": lambda_margin(u, ps),
        "member": float(in_lambda_set(u, ps)),
    }


def _uniqueness_point(ps: ProblemSpec, grid: RadialGrid, params: np.ndarray) -> Dict[str, float]:
    u = lambda_member(grid, ps, params)
    if u is None:
        return {"changes": -1.0, "residual": np.nan}
    lo, hi, points = UNIQUENESS_SCAN
    changes = len(fibering_scan(u, ps, np.geomspace(lo, hi, points)).sign_changes())
    try:
        proj = project_to_manifold(u, ps, t_range=(lo, hi), points=points)
    except KirchhoffError:
        return {"changes": float(changes), "residual": np.inf}
    scale = pohozaev_terms(u, ps, proj.t_u).scale
    return {"changes": float(changes), "residual": proj.pohozaev_residual / scale}


def iip_suite(ps, grid, params, ts, v4_status, workers=1) -> Verdict:
    gaps = np.array(Parallel(n_jobs=workers)(delayed(_iip_point)(ps, grid, p, t) for p, t in zip(params, ts)))
    k = int(np.argmin(gaps))
    status = "pass" if gaps[k] >= -IIP_SLACK else "fail"
    detail = "I(u) - I(u_t) - (1-t^3)/3 P(u) - b(1-t)^2(1+2t)/12 ||grad u||^4 >= -1e-6"
    if status == "fail" and v4_status != "pass":
        status = "inconclusive"
        detail += " (not implied: V4 does not pass)"
    return Verdict(status=status, margin=float(gaps[k]), location={"sample": k, "t": float(ts[k])}, detail=detail)


def hardy_suite(grid, params, workers=1) -> Verdict:
    margins = np.array(Parallel(n_jobs=workers)(delayed(_hardy_point)(grid, p) for p in params))
    k = int(np.argmin(margins))
    return Verdict(
        status="pass" if margins[k] >= -HARDY_SLACK else "fail",
        margin=float(margins[k]),
        location={"sample": k},
        detail="||grad u||^2 >= (1/4) int u^2/|x|^2",
    )


def inclusion_suite(ps, grid, params, workers=1) -> Verdict:
    rows = Parallel(n_jobs=workers)(delayed(_inclusion_point)(ps, grid, p) for p in params)
    relevant = [k for k, row in enumerate(rows) if row["pohozaev"] <= 0 or row["pohozaev_limit"] <= 0]
    misses = [k for k in relevant if not rows[k]["member"]]
    detail = f"P(u) <= 0 or P_inf(u) <= 0 implies u in Lambda; {len(relevant)} of {len(rows)} samples qualify"
    if not relevant:
        return Verdict(status="inconclusive", detail=detail)
    worst = max(relevant, key=lambda k: rows[k]["margin"])
    return Verdict(
        status="fail" if misses else "pass",
        margin=float(-rows[worst]["margin"]),
        location={"sample": worst},
        detail=detail,
    )


def uniqueness_suite(ps, grid, params, workers=1) -> Verdict:
    rows = Parallel(n_jobs=workers)(delayed(_uniqueness_point)(ps, grid, p) for p in params)
    usable = [k for k, row in enumerate(rows) if row["changes"] >= 0]
    if not usable:
        return Verdict(status="inconclusive", detail="no sample could be scaled into Lambda")
    bad = [k for k in usable if rows[k]["changes"] != 1 or not rows[k]["residual"] <= PROJECTION_RTOL]
    worst = max(usable, key=lambda k: rows[k]["residual"] if np.isfinite(rows[k]["residual"]) else np.inf)
    return Verdict(
        status="fail" if bad else "pass",
        margin=float(rows[worst]["residual"]) if np.isfinite(rows[worst]["residual"]) else None,
        location={"sample": bad[0] if bad else worst},
        detail=f"exactly one sign change of zeta' on the t-scan for {len(usable) - len(bad)} of {len(usable)} samples",
    )


def run_verification(
    ps: ProblemSpec, grid: RadialGrid, spec: Optional[VerifySpec] = None, seed: int = 0, workers: int = 1
) -> VerifyReport:
    spec = spec or VerifySpec()
    potential = check_potential_hypotheses(ps.potential, ps.a, spec.samples)
    nonlinearity = check_nonlinearity_hypotheses(ps.nonlinearity, ps.v_inf, spec.samples)
    rng = np.random.default_rng(seed)
    params = draw_mixtures(rng, spec.random_samples)
    lo, hi = spec.t_range
    ts = np.exp(rng.uniform(np.log(lo), np.log(hi), size=spec.random_samples))

    suites: Dict[str, Verdict] = {}
    unknown = sorted(set(spec.suites) - set(SUITES))
    if unknown:
        raise ValueError(f"Unknown verification suites: {', '.join(unknown)}.")
    if "iip" in spec.suites:
        suites["iip"] = iip_suite(ps, grid, params, ts, potential.status("V4"), workers)
    if "hardy" in spec.suites:
        suites["hardy"] = hardy_suite(grid, params, workers)
    if "lambda_inclusion" in spec.suites:
        suites["lambda_inclusion"] = inclusion_suite(ps, grid, params, workers)
    if "fibering_uniqueness" in spec.suites:
        suites["fibering_uniqueness"] = uniqueness_suite(ps, grid, params, workers)

    report = VerifyReport(potential=potential, nonlinearity=nonlinearity, suites=suites)
    for key, verdict in report.verdicts.items():
        if verdict.status == "inconclusive":
            logger.warning("%s inconclusive: %s", key, verdict.detail)
    logger.info("verification finished with %d failing checks", len(report.failed))
    return report
