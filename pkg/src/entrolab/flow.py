"""Geodesic flow on warped metrics, and Jacobi/Riccati integration.

Geodesics of du^2 + f(u)^2 dv^2 satisfy u'' = f f' v'^2 and
v'' = -2 (f'/f) u' v'; the unit-speed and Clairaut quantities are monitored
every step.  The Riccati variable w = y'/y of a perpendicular Jacobi field
satisfies w' = -K - w^2 and stays inside [0, max sqrt(-K)] whenever it starts
there; its running time average is accumulated alongside.

Fixed-step RK4 throughout: reproducible trajectories matter more here than
adaptive step control.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable

from scipy.integrate import quad

from .profiles import Profile


class IntegrationError(RuntimeError):
    """Invariant drift or bound violation during fixed-step integration."""


@dataclass(frozen=True)
class WarpedMetric:
    profile: Profile
    v_period: float = 2.0 * math.pi

    def speed(self, u: float, du: float, dv: float) -> float:
        f = self.profile.value(u)
        return math.sqrt(du * du + f * f * dv * dv)

    def clairaut(self, u: float, dv: float) -> float:
        f = self.profile.value(u)
        return f * f * dv


@dataclass(frozen=True)
class GeodesicState:
    u: float
    v: float
    du: float
    dv: float


def unit_speed_state(metric: WarpedMetric, u: float, v: float, direction: float) -> GeodesicState:
    """State at (u, v) with velocity at angle `direction` from the u-axis."""
    f = metric.profile.value(u)
    return GeodesicState(u, v, math.cos(direction), math.sin(direction) / f)


@dataclass
class Trajectory:
    final: GeodesicState
    w_final: float | None
    w_integral: float
    time: float
    burn: float
    speed_drift: float
    clairaut_drift: float
    samples: list[tuple[float, float, float, float, float, float, float]] = field(
        default_factory=list
    )  # (t, u, v, du, dv, K, w)

    @property
    def riccati_average(self) -> float:
        span = self.time - self.burn
        if span <= 0.0:
            raise ValueError("no averaging window after burn-in")
        return self.w_integral / span


def _curvature_or_nan(prof: Profile, u: float) -> float:
    try:
        return prof.curvature(u)
    except Exception:
        return math.nan


def integrate_geodesic(
    metric: WarpedMetric,
    state: GeodesicState,
    T: float,
    dt: float,
    drift_tol: float = 1e-6,
    record_every: int = 0,
) -> Trajectory:
    """Integrate a unit-speed geodesic with RK4.

    Aborts with IntegrationError if the unit-speed or Clairaut invariant
    drifts beyond ``drift_tol`` (step too large, or the profile is being
    evaluated across a non-smooth point).
    """
    prof = metric.profile
    fval = prof.value
    fder = prof.deriv
    period = metric.v_period

    u, v, du, dv = state.u, state.v, state.du, state.dv
    f = fval(u)
    speed0 = math.sqrt(du * du + f * f * dv * dv)
    if abs(speed0 - 1.0) > 1e-8:
        raise ValueError(f"initial state is not unit speed: |v| = {speed0}")
    clair0 = f * f * dv

    n = int(round(T / dt))
    max_speed_drift = 0.0
    max_clair_drift = 0.0
    samples: list[tuple[float, float, float, float, float, float, float]] = []

    def rhs(u_, du_, dv_):
        f_ = fval(u_)
        fp_ = fder(u_)
        return du_, dv_, f_ * fp_ * dv_ * dv_, -2.0 * (fp_ / f_) * du_ * dv_

    t = 0.0
    for i in range(n):
        if record_every and i % record_every == 0:
            samples.append((t, u, v, du, dv, _curvature_or_nan(prof, u), math.nan))
        a1 = rhs(u, du, dv)
        a2 = rhs(u + 0.5 * dt * a1[0], du + 0.5 * dt * a1[2], dv + 0.5 * dt * a1[3])
        a3 = rhs(u + 0.5 * dt * a2[0], du + 0.5 * dt * a2[2], dv + 0.5 * dt * a2[3])
        a4 = rhs(u + dt * a3[0], du + dt * a3[2], dv + dt * a3[3])
        u += dt / 6.0 * (a1[0] + 2.0 * a2[0] + 2.0 * a3[0] + a4[0])
        v += dt / 6.0 * (a1[1] + 2.0 * a2[1] + 2.0 * a3[1] + a4[1])
        du += dt / 6.0 * (a1[2] + 2.0 * a2[2] + 2.0 * a3[2] + a4[2])
        dv += dt / 6.0 * (a1[3] + 2.0 * a2[3] + 2.0 * a3[3] + a4[3])
        t += dt

        fu = fval(u)
        sp = du * du + fu * fu * dv * dv
        max_speed_drift = max(max_speed_drift, abs(sp - 1.0))
        max_clair_drift = max(max_clair_drift, abs(fu * fu * dv - clair0))
        if max_speed_drift > drift_tol or max_clair_drift > drift_tol * max(1.0, abs(clair0)):
            raise IntegrationError(
                f"invariant drift exceeded {drift_tol:.1e} at t={t:.3f} "
                f"(speed drift {max_speed_drift:.2e}, Clairaut drift {max_clair_drift:.2e}); "
                "reduce dt or check the profile for non-smooth points"
            )

    final = GeodesicState(u, math.fmod(v, period), du, dv)
    return Trajectory(final, None, 0.0, T, 0.0, max_speed_drift, max_clair_drift, samples)


def integrate_geodesic_riccati(
    metric: WarpedMetric,
    state: GeodesicState,
    w0: float,
    T: float,
    dt: float,
    burn: float = 0.0,
    drift_tol: float = 1e-6,
    w_slack: float = 1e-6,
    record_every: int = 0,
) -> Trajectory:
    """Unit-speed geodesic with the Riccati variable riding along.

    The curvature driving w is K(u(t)) from the profile, so a single source
    of truth serves both the trajectory and the Jacobi/Riccati layer.  w is
    confined to [-slack, max sqrt(-K) + slack], the max taken over curvature
    values actually visited; leaving the band aborts the run.  The integral
    of w is accumulated only after the burn-in time.
    """
    prof = metric.profile
    fval, fder, fsec = prof.value, prof.deriv, prof.second
    period = metric.v_period

    u, v, du, dv = state.u, state.v, state.du, state.dv
    f = fval(u)
    if abs(math.sqrt(du * du + f * f * dv * dv) - 1.0) > 1e-8:
        raise ValueError("initial state is not unit speed")
    clair0 = f * f * dv
    w = w0
    integral = 0.0
    n = int(round(T / dt))
    n_burn = int(round(burn / dt))
    max_speed_drift = 0.0
    max_clair_drift = 0.0
    w_cap = 0.0
    samples: list[tuple[float, float, float, float, float, float, float]] = []

    def rhs(u_, du_, dv_, w_):
        f_ = fval(u_)
        fp_ = fder(u_)
        K_ = -fsec(u_) / f_
        return du_, dv_, f_ * fp_ * dv_ * dv_, -2.0 * (fp_ / f_) * du_ * dv_, -K_ - w_ * w_, K_

    t = 0.0
    for i in range(n):
        a1 = rhs(u, du, dv, w)
        if record_every and i % record_every == 0:
            samples.append((t, u, v, du, dv, a1[5], w))
        w_cap = max(w_cap, math.sqrt(max(0.0, -a1[5])))
        u2 = u + 0.5 * dt * a1[0]; v2 = v + 0.5 * dt * a1[1]
        du2 = du + 0.5 * dt * a1[2]; dv2 = dv + 0.5 * dt * a1[3]; w2 = w + 0.5 * dt * a1[4]
        a2 = rhs(u2, du2, dv2, w2)
        u3 = u + 0.5 * dt * a2[0]; v3 = v + 0.5 * dt * a2[1]
        du3 = du + 0.5 * dt * a2[2]; dv3 = dv + 0.5 * dt * a2[3]; w3 = w + 0.5 * dt * a2[4]
        a3 = rhs(u3, du3, dv3, w3)
        u4 = u + dt * a3[0]; v4 = v + dt * a3[1]
        du4 = du + dt * a3[2]; dv4 = dv + dt * a3[3]; w4 = w + dt * a3[4]
        a4 = rhs(u4, du4, dv4, w4)

        if i >= n_burn:
            integral += dt / 6.0 * (w + 2.0 * w2 + 2.0 * w3 + w4)
        u += dt / 6.0 * (a1[0] + 2.0 * a2[0] + 2.0 * a3[0] + a4[0])
        v += dt / 6.0 * (a1[1] + 2.0 * a2[1] + 2.0 * a3[1] + a4[1])
        du += dt / 6.0 * (a1[2] + 2.0 * a2[2] + 2.0 * a3[2] + a4[2])
        dv += dt / 6.0 * (a1[3] + 2.0 * a2[3] + 2.0 * a3[3] + a4[3])
        w += dt / 6.0 * (a1[4] + 2.0 * a2[4] + 2.0 * a3[4] + a4[4])
        t += dt

        fu = fval(u)
        sp = du * du + fu * fu * dv * dv
        max_speed_drift = max(max_speed_drift, abs(sp - 1.0))
        max_clair_drift = max(max_clair_drift, abs(fu * fu * dv - clair0))
        if max_speed_drift > drift_tol:
            raise IntegrationError(
                f"unit-speed drift {max_speed_drift:.2e} > {drift_tol:.1e} at t={t:.3f}"
            )
        if w < -w_slack or w > w_cap + w_slack:
            raise IntegrationError(
                f"Riccati variable left [0, max sqrt(-K)] band: w={w:.6f}, "
                f"cap={w_cap:.6f} at t={t:.3f}"
            )

    final = GeodesicState(u, math.fmod(v, period), du, dv)
    return Trajectory(final, w, integral, T, min(burn, T), max_speed_drift,
                      max_clair_drift, samples)


# ---------------------------------------------------------------------------
# Riccati and Jacobi equations along a prescribed curvature signal
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RiccatiResult:
    w_final: float
    integral: float
    time: float

    @property
    def average(self) -> float:
        return self.integral / self.time


def riccati_step(
    K_along: Callable[[float], float],
    w0: float,
    T: float,
    dt: float = 1e-3,
    t0: float = 0.0,
    w_bound: float | None = None,
    w_slack: float = 1e-6,
) -> RiccatiResult:
    """RK4 on w' = -K(t) - w^2 with the running integral of w.

    ``w_bound`` (max sqrt(-K), if known) arms the confinement check: solutions
    started in [0, w_bound] must stay in it, up to ``w_slack``.
    """
    w = w0
    integral = 0.0
    n = int(round(T / dt))
    t = t0
    for _ in range(n):
        k1 = -K_along(t) - w * w
        w2 = w + 0.5 * dt * k1
        k2 = -K_along(t + 0.5 * dt) - w2 * w2
        w3 = w + 0.5 * dt * k2
        k3 = -K_along(t + 0.5 * dt) - w3 * w3
        w4 = w + dt * k3
        k4 = -K_along(t + dt) - w4 * w4
        integral += dt / 6.0 * (w + 2.0 * w2 + 2.0 * w3 + w4)
        w += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t += dt
        if w_bound is not None and not (-w_slack <= w <= w_bound + w_slack):
            raise IntegrationError(
                f"Riccati solution left [0, {w_bound}] at t={t:.4f}: w={w:.8f}"
            )
    return RiccatiResult(w, integral, T)


def flat_riccati(w1: float, elapsed: float) -> float:
    """Exact solution on a zero-curvature stretch: w(t) = 1/(t - s1 + 1/w(s1))."""
    if w1 == 0.0:
        return 0.0
    return 1.0 / (elapsed + 1.0 / w1)


def flat_riccati_integral(w1: float, elapsed: float) -> float:
    """Exact integral of w over a zero-curvature stretch: log(1 + w1 * dt)."""
    if w1 == 0.0:
        return 0.0
    return math.log1p(w1 * elapsed)


def jacobi_integrate(
    K_along: Callable[[float], float],
    y0: float,
    dy0: float,
    T: float,
    dt: float = 1e-3,
    t0: float = 0.0,
) -> tuple[float, float]:
    """RK4 on the Jacobi equation y'' = -K(t) y; returns (y(T), y'(T))."""
    if y0 == 0.0 and dy0 == 0.0:
        raise ValueError("trivial Jacobi initial data")
    y, dy = y0, dy0
    n = int(round(T / dt))
    t = t0
    for _ in range(n):
        K1 = K_along(t)
        Kh = K_along(t + 0.5 * dt)
        K2 = K_along(t + dt)
        a1 = (dy, -K1 * y)
        a2 = (dy + 0.5 * dt * a1[1], -Kh * (y + 0.5 * dt * a1[0]))
        a3 = (dy + 0.5 * dt * a2[1], -Kh * (y + 0.5 * dt * a2[0]))
        a4 = (dy + dt * a3[1], -K2 * (y + dt * a3[0]))
        y += dt / 6.0 * (a1[0] + 2.0 * a2[0] + 2.0 * a3[0] + a4[0])
        dy += dt / 6.0 * (a1[1] + 2.0 * a2[1] + 2.0 * a3[1] + a4[1])
        t += dt
    return y, dy


def jacobi_norm(y: float, dy: float) -> float:
    return math.hypot(y, dy)


def gronwall_bound(K_along: Callable[[float], float], t1: float, t2: float) -> float:
    """exp(0.5 * integral of (1 - K) over [t1, t2]).

    Dominates the growth of sqrt(y^2 + y'^2) along any Jacobi solution on the
    same stretch whenever K <= 0 there.
    """
    if t2 < t1:
        raise ValueError("need t2 >= t1")
    if t2 == t1:
        return 1.0
    val, _ = quad(lambda t: 1.0 - K_along(t), t1, t2, epsabs=1e-12, epsrel=1e-12, limit=400)
    return math.exp(0.5 * val)


def write_trajectory_csv(traj: Trajectory, path) -> None:
    """CSV of recorded samples (t, u, v, du, dv, K, w)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "u", "v", "du", "dv", "K", "w"])
        for row in traj.samples:
            writer.writerow([format(x, ".17g") for x in row])
