"""Problem data for -(a + b||grad u||^2) Lap u + V(x) u = f(u) and numeric hypothesis audits."""
import logging
import math
from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, field_validator, model_validator
from scipy.interpolate import CubicSpline

logger = logging.getLogger(__name__)

PotentialKind = Literal["constant", "inverse_poly", "sine_decay", "exp_decay", "tabulated"]
NonlinearityKind = Literal["pure_power", "power_combination", "tabulated"]
Status = Literal["pass", "fail", "inconclusive"]

TREND_BLOCKS = 4


def _load_table(path: str) -> np.ndarray:
    try:
        table = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    except ValueError:
        table = np.loadtxt(path, delimiter=",", comments="#", ndmin=2, skiprows=1)
    if table.shape[1] != 2:
        raise ValueError(f"The table '{path}' must have exactly two columns.")
    return table


def _table_points(table: Optional[str], points: Optional[List[Tuple[float, float]]]) -> np.ndarray:
    if points is not None:
        data = np.asarray(points, dtype=float)
    elif table is not None:
        if not Path(table).exists():
            raise ValueError(f"The table file '{table}' does not exist.")
        data = _load_table(table)
    else:
        raise ValueError("A tabulated kind requires either 'table' (CSV path) or 'points'.")
    if data.ndim != 2 or data.shape[0] < 4:
        raise ValueError("A tabulated kind needs at least four (x, y) rows.")
    if data[0, 0] != 0.0 or np.any(np.diff(data[:, 0]) <= 0):
        raise ValueError("Tabulated abscissae must start at 0 and increase strictly.")
    return data


class Potential(BaseModel):
    """Radial potential V(|x|). The decaying families are alpha - beta*g(r) with V_inf = alpha."""

    model_config = ConfigDict(extra="forbid")

    kind: PotentialKind = "constant"
    alpha: float = Field(default=1.0, ge=0, description="Value of V at infinity for built-in kinds")
    beta: float = Field(default=0.0, ge=0, description="Depth of the well")
    sigma: float = Field(default=2.0, gt=0, description="Decay exponent")
    table: Optional[str] = Field(default=None, description="Two-column CSV (r, V)")
    points: Optional[List[Tuple[float, float]]] = None

    _spline: Optional[CubicSpline] = PrivateAttr(default=None)
    _r_end: float = PrivateAttr(default=math.inf)

    @model_validator(mode="after")
    def build_table(self) -> "Potential":
        if self.kind == "tabulated":
            data = _table_points(self.table, self.points)
            self._spline = CubicSpline(data[:, 0], data[:, 1], bc_type="clamped")
            self._r_end = float(data[-1, 0])
        return self

    @property
    def v_inf(self) -> float:
        if self.kind == "tabulated":
            return float(self._spline(self._r_end))
        return self.alpha

    def value(self, r) -> np.ndarray:
        r = np.abs(np.asarray(r, dtype=float))
        if self.kind == "constant":
            return np.full_like(r, self.alpha)
        if self.kind == "inverse_poly":
            return self.alpha - self.beta / (r**self.sigma + 1.0)
        if self.kind == "sine_decay":
            return self.alpha - self.beta * np.sin(r) ** 2 / (r**3 + 1.0)
        if self.kind == "exp_decay":
            return self.alpha - self.beta * np.exp(-(r**self.sigma))
        return self._spline(np.minimum(r, self._r_end))

    def radial_derivative(self, r) -> np.ndarray:
        """grad V(x) . x = r V'(r); zero at r = 0 for every kind."""
        r = np.abs(np.asarray(r, dtype=float))
        if self.kind == "constant":
            return np.zeros_like(r)
        if self.kind == "inverse_poly":
            rs = r**self.sigma
            return self.beta * self.sigma * rs / (rs + 1.0) ** 2
        if self.kind == "sine_decay":
            q = r**3 + 1.0
            return -self.beta * r * (np.sin(2.0 * r) * q - 3.0 * r**2 * np.sin(r) ** 2) / q**2
        if self.kind == "exp_decay":
            rs = r**self.sigma
            return self.beta * self.sigma * rs * np.exp(-rs)
        slope = self._spline(np.minimum(r, self._r_end), 1)
        return np.where(r < self._r_end, r * slope, 0.0)

    def family_conditions(self, a: float) -> Dict[str, bool]:
        """Closed-form sufficient parameter conditions for the decaying families."""
        alpha, beta, sigma = self.alpha, self.beta, self.sigma
        ordered = alpha > beta > 0
        if self.kind == "inverse_poly":
            base = ordered and sigma >= 2
            return {
                "V1-V3": base and a >= 2 * sigma * beta,
                "V4": base and a >= 2 * sigma * beta * (3 + sigma),
            }
        if self.kind == "sine_decay":
            return {"V1-V3": ordered and a >= 4 * beta}
        if self.kind == "exp_decay":
            power = (sigma + 2) / sigma
            lhs = a * math.exp(power)
            rhs = 2 * beta * (sigma + 2) ** power * sigma ** (-2 / sigma)
            return {"V1-V3": ordered and lhs >= rhs}
        return {}


class PowerTerm(BaseModel):
    model_config = ConfigDict(extra="forbid")

    coefficient: float
    exponent: float = Field(gt=2, description="Power q in c|t|^{q-2}t")


class Nonlinearity(BaseModel):
    """Odd nonlinearity f with primitive F(t) = int_0^t f."""

    model_config = ConfigDict(extra="forbid")

    kind: NonlinearityKind = "pure_power"
    p: float = Field(default=4.0, gt=2, description="Exponent of |t|^{p-2}t")
    terms: List[PowerTerm] = Field(default_factory=list)
    table: Optional[str] = Field(default=None, description="Two-column CSV (t, f) for t >= 0")
    points: Optional[List[Tuple[float, float]]] = None

    _spline: Optional[CubicSpline] = PrivateAttr(default=None)
    _primitive: Optional[CubicSpline] = PrivateAttr(default=None)
    _t_end: float = PrivateAttr(default=math.inf)

    @model_validator(mode="after")
    def check_kind(self) -> "Nonlinearity":
        if self.kind == "power_combination" and not self.terms:
            raise ValueError("A power_combination nonlinearity needs at least one term.")
        if self.kind == "tabulated":
            data = _table_points(self.table, self.points)
            if data[0, 1] != 0.0:
                raise ValueError("A tabulated nonlinearity must satisfy f(0) = 0.")
            self._spline = CubicSpline(data[:, 0], data[:, 1])
            self._primitive = self._spline.antiderivative()
            self._t_end = float(data[-1, 0])
        return self

    def _powers(self) -> List[Tuple[float, float]]:
        if self.kind == "pure_power":
            return [(1.0, self.p)]
        return [(term.coefficient, term.exponent) for term in self.terms]

    def f(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        a = np.abs(t)
        if self.kind == "tabulated":
            inside = self._spline(np.minimum(a, self._t_end))
            return np.sign(t) * inside
        out = np.zeros_like(t)
        for c, q in self._powers():
            out = out + c * a ** (q - 2.0) * t
        return out

    def F(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        a = np.abs(t)
        if self.kind == "tabulated":
            clipped = np.minimum(a, self._t_end)
            tail = (a - clipped) * self._spline(self._t_end)
            return self._primitive(clipped) + tail
        out = np.zeros_like(t)
        for c, q in self._powers():
            out = out + c * a**q / q
        return out


class ProblemSpec(BaseModel):
    """Coefficients and data of the Kirchhoff problem."""

    model_config = ConfigDict(extra="forbid")

    a: float = Field(gt=0, description="Gradient coefficient")
    b: float = Field(ge=0, description="Kirchhoff coefficient")
    potential: Potential = Field(default_factory=Potential)
    nonlinearity: Nonlinearity = Field(default_factory=Nonlinearity)
    oracle_mode: bool = Field(default=False, description="Allows b = 0 for scalar-field checks")

    @model_validator(mode="after")
    def check_kirchhoff(self) -> "ProblemSpec":
        if self.b == 0 and not self.oracle_mode:
            raise ValueError(
                "The Kirchhoff coefficient b must be positive. "
                "b = 0 is only accepted for oracle-mode problems."
            )
        return self

    @property
    def v_inf(self) -> float:
        return self.potential.v_inf

    def limit(self) -> "ProblemSpec":
        """Same problem with V replaced by its value at infinity."""
        return self.model_copy(update={"potential": Potential(kind="constant", alpha=self.v_inf)})


class SampleSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    r_lo: float = Field(default=1e-2, gt=0)
    r_hi: float = Field(default=1e2, gt=0)
    r_count: int = Field(default=200, ge=16)
    t_lo: float = Field(default=1e-2, gt=0)
    t_hi: float = Field(default=1e2, gt=0)
    t_count: int = Field(default=200, ge=16)
    seed: int = 0

    @model_validator(mode="after")
    def check_ranges(self) -> "SampleSpec":
        if self.r_lo >= self.r_hi or self.t_lo >= self.t_hi:
            raise ValueError("Sample ranges need lo < hi for both r and t.")
        return self

    def radii(self) -> np.ndarray:
        return np.geomspace(self.r_lo, self.r_hi, self.r_count)

    def dilations(self) -> np.ndarray:
        return np.geomspace(self.t_lo, self.t_hi, self.t_count)


class Verdict(BaseModel):
    status: Status
    margin: Optional[float] = None
    location: Dict[str, float] = Field(default_factory=dict)
    detail: str = ""

    @field_validator("margin")
    @classmethod
    def finite_margin(cls, v: Optional[float]) -> Optional[float]:
        if v is not None and not math.isfinite(v):
            return None
        return v


class HypothesisReport(BaseModel):
    subject: Literal["potential", "nonlinearity"]
    verdicts: Dict[str, Verdict]
    samples: SampleSpec
    s0: Optional[float] = None
    c0: Optional[float] = None
    theta: Optional[float] = None
    family_conditions: Dict[str, bool] = Field(default_factory=dict)
    discrepancies: List[str] = Field(default_factory=list)

    def status(self, key: str) -> Status:
        return self.verdicts[key].status

    def passed(self, *keys: str) -> bool:
        return all(self.verdicts[k].status == "pass" for k in keys)

    @property
    def failed(self) -> List[str]:
        return [k for k, v in self.verdicts.items() if v.status == "fail"]


def _trend(values: np.ndarray) -> str:
    """Direction of the block maxima of |values| (given in the order of approach)."""
    mags = np.abs(values)
    if not np.any(mags):
        return "zero"
    peaks = np.array([chunk.max() for chunk in np.array_split(mags, TREND_BLOCKS)])
    steps = np.diff(peaks)
    if np.all(steps <= 0) and peaks[-1] < peaks[0]:
        return "decreasing"
    if np.all(steps >= 0) and peaks[-1] > peaks[0]:
        return "increasing"
    return "mixed"


def _min_verdict(margins: np.ndarray, slack: np.ndarray, where: Dict[str, np.ndarray], detail: str) -> Verdict:
    shifted = margins + slack
    k = int(np.argmin(shifted))
    status = "pass" if shifted.flat[k] >= 0 else "fail"
    location = {name: float(np.ravel(grid)[k]) for name, grid in where.items()}
    return Verdict(status=status, margin=float(margins.flat[k]), location=location, detail=detail)


def _inconclusive(keys, detail: str) -> Dict[str, Verdict]:
    return {k: Verdict(status="inconclusive", detail=detail) for k in keys}


POTENTIAL_CHECKS = ("V1", "V2", "V3", "V4", "dilation_inequality", "pohozaev_weight_bounds")


def check_potential_hypotheses(V: Potential, a: float, samples: Optional[SampleSpec] = None) -> HypothesisReport:
    samples = samples or SampleSpec()
    r = samples.radii()
    t = samples.dilations()
    v_inf = V.v_inf
    with np.errstate(all="ignore"):
        v = V.value(r)
        rdv = V.radial_derivative(r)
        s = np.outer(r, t)
        v_s = V.value(s)
        rdv_s = V.radial_derivative(s)
    report = HypothesisReport(subject="potential", verdicts={}, samples=samples)
    report.family_conditions = V.family_conditions(a)
    if not all(np.all(np.isfinite(arr)) for arr in (v, rdv, v_s, rdv_s)):
        report.verdicts = _inconclusive(POTENTIAL_CHECKS, "evaluation overflow on the sample grid")
        logger.warning("potential audit inconclusive: evaluation overflow")
        return report

    verdicts = {}
    verdicts["V1"] = _min_verdict(v, np.zeros_like(v), {"r": r}, "V(r) >= 0")

    below = v_inf - v
    upper = _min_verdict(below, 1e-12 * max(1.0, abs(v_inf)) + np.zeros_like(v), {"r": r}, "V(r) <= V_inf")
    if upper.status == "pass":
        outer = r >= r[-1] / 10.0
        trend = _trend(v[outer] - v_inf)
        if trend not in ("zero", "decreasing"):
            upper.status = "inconclusive"
            upper.detail = f"|V - V_inf| shows a {trend} trend over the outermost decade"
    verdicts["V2"] = upper

    v3 = a / (2.0 * r**2) - rdv
    verdicts["V3"] = _min_verdict(v3, 1e-12 * (1.0 + np.abs(rdv)), {"r": r}, "r V'(r) <= a / (2 r^2)")
    report.theta = float(np.max(np.abs(rdv) * 2.0 * r**2 / a))

    # t -> 3V(tr) + tr V'(tr) + a/(4 t^2 r^2), nonincreasing along each row
    g = 3.0 * v_s + rdv_s + a / (4.0 * s**2)
    rise = np.diff(g, axis=1)
    verdicts["V4"] = _min_verdict(
        -rise,
        1e-9 * (1.0 + np.abs(g[:, 1:])),
        {"r": np.repeat(r[:, None], t.size - 1, axis=1), "t": np.tile(t[1:], (r.size, 1))},
        "3V(tr) + tr V'(tr) + a/(4 t^2 r^2) nonincreasing in t",
    )

    rr = r[:, None]
    tt = t[None, :]
    terms = (
        3.0 * tt**3 * (v[:, None] - v_s),
        -(1.0 - tt**3) * rdv[:, None],
        a * (1.0 - tt) ** 2 * (2.0 + tt) / (4.0 * rr**2),
    )
    scale = np.maximum.reduce([np.abs(term) for term in terms])
    verdicts["dilation_inequality"] = _min_verdict(
        sum(terms),
        1e-9 * np.maximum(1.0, scale * 1e-6),
        {"r": np.broadcast_to(rr, s.shape), "t": np.broadcast_to(tt, s.shape)},
        "3t^3[V(r) - V(tr)] - (1 - t^3) r V'(r) >= -a(1-t)^2(2+t)/(4r^2)",
    )

    weight = 3.0 * v + rdv
    low = weight - (3.0 * v_inf - a / (4.0 * r**2))
    high = 3.0 * v_inf + a / (2.0 * r**2) - weight
    both = np.minimum(low, high)
    verdicts["pohozaev_weight_bounds"] = _min_verdict(
        both, 1e-9 + np.zeros_like(both), {"r": r}, "3V_inf - a/(4r^2) <= 3V + rV' <= 3V_inf + a/(2r^2)"
    )
    report.verdicts = verdicts

    for claim, keys in (("V1-V3", ("V1", "V2", "V3")), ("V4", ("V4",))):
        if report.family_conditions.get(claim) and any(verdicts[k].status == "fail" for k in keys):
            report.discrepancies.append(
                f"parameter condition for {claim} holds but the direct audit fails "
                + ", ".join(k for k in keys if verdicts[k].status == "fail")
            )
    for note in report.discrepancies:
        logger.warning("potential audit: %s", note)
    return report


NONLINEARITY_CHECKS = ("F1", "F2", "F3", "AR", "S1")


def check_nonlinearity_hypotheses(
    f: Nonlinearity, v_inf: float, samples: Optional[SampleSpec] = None, lam: float = 1.0
) -> HypothesisReport:
    """Audit (F1)-(F3) for lam*f (lam = 1 is the problem itself), plus (AR) and (S1)."""
    samples = samples or SampleSpec()
    t = samples.dilations()
    report = HypothesisReport(subject="nonlinearity", verdicts={}, samples=samples)
    with np.errstate(all="ignore"):
        fp, fm = lam * f.f(t), lam * f.f(-t)
        Fp, Fm = lam * f.F(t), lam * f.F(-t)
    if not all(np.all(np.isfinite(arr)) for arr in (fp, fm, Fp, Fm)):
        report.verdicts = _inconclusive(NONLINEARITY_CHECKS, "evaluation overflow on the sample grid")
        return report

    verdicts = {}
    growth = np.maximum(np.abs(fp), np.abs(fm)) / (1.0 + t**5)
    c0 = float(growth.max())
    report.c0 = c0
    verdicts["F1"] = Verdict(
        status="pass" if math.isfinite(c0) else "fail",
        margin=c0,
        detail="C0 = max |f(t)| / (1 + |t|^5) over the samples",
    )

    size = np.maximum(np.abs(fp), np.abs(fm))
    inner = t <= t[0] * 10.0
    outer = t >= t[-1] / 10.0
    near_zero = _trend((size / t)[inner][::-1])
    at_infinity = _trend((size / t**5)[outer])
    parts = []
    for label, trend in (("f(t)/t as t -> 0", near_zero), ("f(t)/t^5 as t -> inf", at_infinity)):
        parts.append(f"{label}: {trend}")
    trends = (near_zero, at_infinity)
    if "increasing" in trends:
        status = "fail"
    elif all(tr in ("zero", "decreasing") for tr in trends):
        status = "pass"
    else:
        status = "inconclusive"
    verdicts["F2"] = Verdict(status=status, detail="; ".join(parts))

    excess = Fp - 0.5 * v_inf * t**2
    hits = np.flatnonzero(excess > 0)
    if hits.size:
        k = int(hits[0])
        report.s0 = float(t[k])
        verdicts["F3"] = Verdict(
            status="pass", margin=float(excess[k]), location={"s0": float(t[k])},
            detail="F(s0) > V_inf s0^2 / 2",
        )
    else:
        verdicts["F3"] = Verdict(
            status="fail", margin=float(excess.max()), detail="no sampled s with F(s) > V_inf s^2 / 2"
        )

    ar = np.minimum(
        np.concatenate([fp * t - 4.0 * Fp, -fm * t - 4.0 * Fm]),
        np.concatenate([Fp, Fm]),
    )
    slack = 1e-12 * (1.0 + np.abs(np.concatenate([fp * t, fm * t])))
    tt = np.concatenate([t, -t])
    verdicts["AR"] = _min_verdict(ar, slack, {"t": tt}, "f(t)t >= 4F(t) >= 0 (informational)")

    ratio = fp / t**3
    step = np.diff(ratio)
    k = int(np.argmin(step))
    verdicts["S1"] = Verdict(
        status="pass" if step[k] > 0 else "fail",
        margin=float(step[k]),
        location={"t": float(t[k + 1])},
        detail="f(t)/|t|^3 strictly increasing (informational)",
    )
    report.verdicts = verdicts
    return report
