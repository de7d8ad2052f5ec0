"""Entropy quantities: exact constant-curvature values, the curvature-integral
lower bound for metric entropy, Riccati-average estimates, and word-counting
lower bounds for topological entropy.

The critical value sqrt(4 pi (G-1)/V) separates the two entropies: for a
variable negatively curved metric of total area V the Liouville metric
entropy sits strictly below it and the topological entropy strictly above.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad

from . import mesh as mesh_mod
from .flow import (
    GeodesicState,
    WarpedMetric,
    flat_riccati_integral,
    integrate_geodesic_riccati,
    riccati_step,
    unit_speed_state,
)
from .profiles import Profile


class PositiveCurvatureError(ValueError):
    """sqrt(-K) undefined: the profile has positive curvature in the window."""


def critical_entropy(genus: int, area: float) -> float:
    """sqrt(4 pi (G-1)/V): the common entropy value at constant curvature."""
    if genus < 2:
        raise ValueError("need genus >= 2")
    if area <= 0.0:
        raise ValueError("need positive area")
    return math.sqrt(4.0 * math.pi * (genus - 1) / area)


# ---------------------------------------------------------------------------
# curvature-integral (Manning-type) lower bound for metric entropy
# ---------------------------------------------------------------------------


def manning_bound(
    K_outside: float,
    area_outside: float,
    collar_profile: Profile | None = None,
    u_range: tuple[float, float] | None = None,
    total_area: float | None = None,
    include_collar: bool = True,
    scan_n: int = 2001,
) -> float:
    """Lower bound for metric entropy: integral of sqrt(-K) against the
    normalized area measure.

    The constant-curvature part contributes sqrt(-K_outside) * mu(outside);
    the collar contributes (1/V) * 2 pi * integral of sqrt(-K(u)) f(u) du,
    which may be omitted (the bound is valid without it).  Positive curvature
    anywhere in the collar window makes the integrand undefined and is
    rejected.
    """
    if K_outside > 0.0:
        raise PositiveCurvatureError("outside curvature must be <= 0")
    if area_outside < 0.0:
        raise ValueError("outside area must be >= 0")
    collar_term = 0.0
    collar_area_term = 0.0
    if collar_profile is not None and include_collar:
        lo, hi = u_range if u_range is not None else (collar_profile.u_min, collar_profile.u_max)
        step = (hi - lo) / (scan_n - 1)
        for i in range(scan_n):
            u = lo + i * step
            if collar_profile.curvature(u) > 1e-9:
                raise PositiveCurvatureError(
                    f"collar profile has positive curvature at u={u:.6f}; "
                    "restrict u_range to the non-positive-curvature core"
                )
        for seg in collar_profile.segments:
            a, b = max(lo, seg.lo), min(hi, seg.hi)
            if b <= a:
                continue
            val, _ = quad(
                lambda u: math.sqrt(max(0.0, -collar_profile.curvature(u)))
                * collar_profile.value(u),
                a,
                b,
                epsabs=1e-12,
                epsrel=1e-12,
                limit=200,
            )
            collar_term += 2.0 * math.pi * val
    if collar_profile is not None:
        lo, hi = u_range if u_range is not None else (collar_profile.u_min, collar_profile.u_max)
        from .profiles import collar_area as _collar_area

        collar_area_term = _collar_area(collar_profile, (lo, hi))
    V = total_area if total_area is not None else area_outside + collar_area_term
    if V <= 0.0:
        raise ValueError("total area must be positive")
    return (math.sqrt(-K_outside) * area_outside + collar_term) / V


# ---------------------------------------------------------------------------
# Riccati-average metric entropy estimates
# ---------------------------------------------------------------------------


def numeric_floor(dt: float) -> float:
    """Accuracy floor of the RK4 Riccati average; reported uncertainties are
    never allowed below it (sample spread alone understates the error when
    all samples share the same discretization bias)."""
    return 1e-13 + 0.01 * dt**4


@dataclass(frozen=True)
class EntropyEstimate:
    value: float
    stderr: float
    samples: tuple[float, ...]
    vertex_hits: int = 0

    def __str__(self) -> str:
        return f"{self.value:.6f} +/- {self.stderr:.2e}"


def _summarize(values: Sequence[float], dt: float, vertex_hits: int = 0) -> EntropyEstimate:
    n = len(values)
    mean = sum(values) / n
    if n > 1:
        var = sum((x - mean) ** 2 for x in values) / (n - 1)
        sem = math.sqrt(var / n)
    else:
        sem = 0.0
    return EntropyEstimate(mean, max(sem, numeric_floor(dt)), tuple(values), vertex_hits)


def profile_curvature_cap(profile: Profile, n: int = 2001) -> float:
    """max sqrt(-K) over the nominal domain (grid scan)."""
    worst = 0.0
    for u in profile.grid(n):
        try:
            worst = max(worst, math.sqrt(max(0.0, -profile.curvature(u))))
        except Exception:
            continue
    return worst


def metric_entropy_estimate(
    source: WarpedMetric | Callable[[float], float],
    T: float,
    n_samples: int,
    dt: float = 1e-2,
    seed: int = 0,
    burn: float = 10.0,
    u_band: tuple[float, float] | None = None,
    w0: float | None = None,
    w_cap: float | None = None,
) -> EntropyEstimate:
    """Mean Riccati time average (1/T) integral of w over random geodesics.

    On a warped metric the starts are uniform in the u band, uniform in v and
    direction, with w0 uniform in [0, max sqrt(-K)] unless given.  A callable
    source is treated as the curvature signal t -> K(t) directly.  On
    constant curvature the average equals sqrt(-K) up to an O(1/T) transient,
    which the burn-in removes.
    """
    if T <= burn:
        raise ValueError("need T > burn-in time")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    sample_seeds = rng.integers(0, 2**63 - 1, size=n_samples)
    values = []
    if callable(source):
        cap = w_cap
        for s in sample_seeds:
            r = np.random.default_rng(np.random.SeedSequence(int(s)))
            w_start = w0 if w0 is not None else (cap if cap is not None else 1.0) * r.random()
            res = riccati_step(source, w_start, T, dt=dt, w_bound=None)
            burn_res = riccati_step(source, w_start, burn, dt=dt, w_bound=None)
            values.append((res.integral - burn_res.integral) / (T - burn))
        return _summarize(values, dt)

    metric = source
    prof = metric.profile
    if u_band is None:
        u_band = (prof.u_min, prof.u_max)
    cap = w_cap if w_cap is not None else profile_curvature_cap(prof)
    for s in sample_seeds:
        r = np.random.default_rng(np.random.SeedSequence(int(s)))
        u = u_band[0] + (u_band[1] - u_band[0]) * r.random()
        v = 2.0 * math.pi * r.random()
        theta = 2.0 * math.pi * r.random()
        w_start = w0 if w0 is not None else cap * r.random()
        state = unit_speed_state(metric, u, v, theta)
        traj = integrate_geodesic_riccati(metric, state, w_start, T, dt, burn=burn)
        values.append(traj.riccati_average)
    return _summarize(values, dt)


def flat_surface_entropy_estimate(
    surface: mesh_mod.TriangulatedSurface,
    T: float,
    n_samples: int,
    seed: int = 0,
    w0: float = 1.0,
    burn: float = 10.0,
    max_retries: int = 64,
) -> EntropyEstimate:
    """Riccati average along geodesic traces of a flat cone surface.

    The curvature along any trace that avoids the cone points is identically
    zero, so the average per trace is the exact flat decay
    (log(1 + w0 T) - log(1 + w0 burn)) / (T - burn), of order log(T)/T.
    Traces that hit a vertex are discarded, counted, and replaced by a
    deterministically reseeded start.
    """
    if T <= burn:
        raise ValueError("need T > burn-in time")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    values = []
    hits = 0
    attempts = 0
    while len(values) < n_samples:
        if attempts > max_retries + n_samples:
            raise RuntimeError("too many vertex-hit retries")
        attempts += 1
        f, p, theta = mesh_mod.random_flat_start(surface, rng)
        trace = mesh_mod.trace_geodesic(surface, f, p, theta, T)
        if trace.vertex_hit:
            hits += 1
            continue
        integral = flat_riccati_integral(w0, T) - flat_riccati_integral(w0, burn)
        values.append(integral / (T - burn))
    return _summarize(values, dt=1e-3, vertex_hits=hits)


# ---------------------------------------------------------------------------
# word counting
# ---------------------------------------------------------------------------


def word_growth_lower(c: float, s: float) -> float:
    """Exponential growth rate of positive words in two loops of lengths c
    and s: (1/2c) log(1 + c/s).  Blows up as the systole length s -> 0."""
    if c <= 0.0 or s <= 0.0:
        raise ValueError("need positive lengths")
    return math.log1p(c / s) / (2.0 * c)


def _log_factorial_bounds(n: int) -> tuple[float, float]:
    # sqrt(2 pi) n^(n+1/2) e^-n <= n! <= e n^(n+1/2) e^-n, for n >= 1
    if n == 0:
        return 0.0, 0.0
    base = (n + 0.5) * math.log(n) - n
    return 0.5 * math.log(2.0 * math.pi) + base, 1.0 + base


@dataclass(frozen=True)
class LoopCount:
    R: float
    c: float
    s: float
    k: int  # floor(R/2s), powers of the short loop
    i: int  # floor(R/2c), powers of the long loop
    exact: int
    log_exact: float
    stirling_log_lower: float
    stirling_log_upper: float

    @property
    def rate(self) -> float:
        """log(count)/R, the word-growth rate read off at radius R."""
        return self.log_exact / self.R

    @property
    def asymptotic_rate(self) -> float:
        """R -> infinity limit of log(count)/R at these weights."""
        return math.log1p(self.s / self.c) / (2.0 * self.s) + math.log1p(self.c / self.s) / (
            2.0 * self.c
        )


def binomial_loop_count(R: float, c: float, s: float) -> LoopCount:
    """Exact binomial count C(k+i, k) of positive two-letter words of total
    length <= R, with Stirling brackets and the growth rate per unit length.

    The exact value always lies between the brackets, and the rate dominates
    the closed-form lower bound (1/2c) log(1 + c/s) as R grows.
    """
    if R <= 0.0 or c <= 0.0 or s <= 0.0:
        raise ValueError("need positive R, c, s")
    k = int(R / (2.0 * s))
    i = int(R / (2.0 * c))
    exact = math.comb(k + i, k)
    log_exact = _log_big(exact)
    if k == 0 or i == 0:
        lo = hi = 0.0 if exact == 1 else log_exact
    else:
        n_lo, n_hi = _log_factorial_bounds(k + i)
        k_lo, k_hi = _log_factorial_bounds(k)
        i_lo, i_hi = _log_factorial_bounds(i)
        lo = n_lo - k_hi - i_hi
        hi = n_hi - k_lo - i_lo
    return LoopCount(R, c, s, k, i, exact, log_exact, lo, hi)


def _log_big(n: int) -> float:
    if n <= 0:
        raise ValueError("log of non-positive integer")
    if n.bit_length() <= 1000:
        return math.log(n)
    shift = n.bit_length() - 900
    return math.log(n >> shift) + shift * math.log(2.0)


# ---------------------------------------------------------------------------
# report assembly and verdicts
# ---------------------------------------------------------------------------


@dataclass
class EntropyReport:
    genus: int
    total_area: float
    critical: float
    manning_lower: float | None = None
    metric_entropy_est: float | None = None
    metric_entropy_stderr: float | None = None
    top_entropy_lower: float | None = None
    flags: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "genus": self.genus,
            "total_area": self.total_area,
            "critical": self.critical,
            "manning_lower": self.manning_lower,
            "metric_entropy_est": self.metric_entropy_est,
            "metric_entropy_stderr": self.metric_entropy_stderr,
            "top_entropy_lower": self.top_entropy_lower,
            "flags": dict(self.flags),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=2)


@dataclass(frozen=True)
class InequalityVerdict:
    ok: bool
    status: str
    messages: tuple[str, ...]


def verify_inequalities(
    report: EntropyReport,
    constant_curvature: bool,
    equality_tol: float = 1e-2,
) -> InequalityVerdict:
    """Check the entropy ordering encoded in a report.

    Constant curvature demands equality of everything with the critical value
    (within ``equality_tol``); variable curvature demands the estimate stay
    below critical + 3 stderr, and records whether the word-count bound
    already certifies topological entropy above critical.  An estimate
    significantly below its own lower bound is flagged as numerically
    inconsistent.
    """
    msgs = []
    crit = report.critical
    est = report.metric_entropy_est
    sem = report.metric_entropy_stderr or 0.0
    if est is None and report.manning_lower is None and report.top_entropy_lower is None:
        raise ValueError("report has no entropy content to verify")

    if report.manning_lower is not None and est is not None:
        if report.manning_lower > est + 3.0 * sem:
            return InequalityVerdict(
                False,
                "numerically inconsistent",
                (f"lower bound {report.manning_lower:.6f} exceeds estimate "
                 f"{est:.6f} + 3*stderr",),
            )
    if report.manning_lower is not None and report.manning_lower > crit + 1e-9:
        return InequalityVerdict(
            False,
            "numerically inconsistent",
            (f"curvature-integral bound {report.manning_lower:.6f} exceeds the "
             f"critical value {crit:.6f}",),
        )

    if constant_curvature:
        failures = []
        if est is not None and abs(est - crit) > max(equality_tol, 3.0 * sem):
            failures.append(f"metric entropy {est:.6f} != critical {crit:.6f}")
        if report.top_entropy_lower is not None and report.top_entropy_lower > crit + equality_tol:
            failures.append(
                f"top-entropy lower bound {report.top_entropy_lower:.6f} above critical"
            )
        if failures:
            return InequalityVerdict(False, "violated", tuple(failures))
        return InequalityVerdict(True, "constant-curvature-equality", ())

    if est is not None:
        if est > crit + 3.0 * sem:
            return InequalityVerdict(
                False, "violated",
                (f"metric entropy estimate {est:.6f} above critical {crit:.6f}",),
            )
        msgs.append(f"metric entropy {est:.6f} <= critical {crit:.6f} (3-sigma)")
    if report.top_entropy_lower is not None:
        if report.top_entropy_lower > crit:
            msgs.append(
                f"topological entropy certified above critical: "
                f"{report.top_entropy_lower:.6f} > {crit:.6f}"
            )
        else:
            msgs.append(
                f"word-count bound {report.top_entropy_lower:.6f} below critical "
                "(no strictness certificate at this parameter)"
            )
    return InequalityVerdict(True, "variable-ok", tuple(msgs))
