"""Registry of runnable invariant checks, one per documented module property.

Each check runs at a default tolerance that can be overridden globally (a
deliberately absurd override like 1e-20 is the standard way to demonstrate
failure reporting).  Checks are deterministic: every randomized check seeds
its own generator.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import entropy as ent
from . import flow, hypgeom, mesh, profiles, smoothing


@dataclass
class CheckResult:
    check_id: str
    passed: bool
    measured: float
    tolerance: float
    detail: str
    seconds: float


@dataclass(frozen=True)
class Check:
    check_id: str
    tolerance: float
    # runner(tol) -> (passed, measured, detail); measured is whatever scalar
    # the tolerance was compared against
    runner: Callable[[float], tuple[bool, float, str]]

    def run(self, tolerance_override: float | None = None) -> CheckResult:
        tol = self.tolerance if tolerance_override is None else tolerance_override
        t0 = time.perf_counter()
        passed, measured, detail = self.runner(tol)
        dt = time.perf_counter() - t0
        return CheckResult(self.check_id, passed, measured, tol, detail, dt)


def _max_under(pairs, tol):
    worst = max(abs(x) for x in pairs)
    return worst <= tol, worst, f"max residual {worst:.3e}"


# --------------------------------------------------------------------------
# hypgeom
# --------------------------------------------------------------------------


def _check_angle_area_identity(tol):
    rng = np.random.default_rng(101)
    worst = 0.0
    for _ in range(200):
        K = -float(rng.uniform(0.05, 4.0)) if rng.random() < 0.7 else 0.0
        a, b, c = (float(rng.uniform(0.1, 2.0)) for _ in range(3))
        if not (a < b + c and b < c + a and c < a + b):
            continue
        tri = hypgeom.triangle_from_sides(K, a, b, c)
        if K < 0:
            resid = abs(tri.area - (math.pi - tri.angle_sum) / (-K)) / max(tri.area, 1e-30)
        else:
            resid = abs(tri.angle_sum - math.pi) / math.pi
        worst = max(worst, resid)
    return worst <= tol, worst, f"max relative identity residual {worst:.3e}"


def _check_scaling_covariance(tol):
    rng = np.random.default_rng(102)
    worst = 0.0
    for _ in range(100):
        K = -float(rng.uniform(0.1, 3.0))
        a, b, c = 0.5, 0.7, 0.9
        cc = float(rng.uniform(0.2, 5.0))
        t1 = hypgeom.triangle_from_sides(K, a, b, c)
        t2 = hypgeom.triangle_from_sides(K / cc, *(math.sqrt(cc) * x for x in (a, b, c)))
        for x, y in zip(t1.angles, t2.angles):
            worst = max(worst, abs(x - y))
        worst = max(worst, abs(t2.area - cc * t1.area) / (cc * t1.area))
    return worst <= tol, worst, f"max scaling mismatch {worst:.3e}"


def _check_compare_order(tol):
    devs = []
    for d in (1e-1, 1e-2, 1e-3):
        comp = hypgeom.compare_triangles(-1.0, 0.0, d, d, d)
        devs.append(comp.max_angle_deviation())
    slope = (math.log(devs[0]) - math.log(devs[2])) / (math.log(1e-1) - math.log(1e-3))
    return slope >= tol, slope, f"log-log slope {slope:.3f} (deviations {devs})"


def _check_hexagon_roundtrip(tol):
    rng = np.random.default_rng(103)
    worst = 0.0
    for _ in range(50):
        p = tuple(float(rng.uniform(0.2, 3.0)) for _ in range(3))
        K = -float(rng.uniform(0.2, 4.0))
        hexa = hypgeom.hexagon_solve(p, K)
        back = hypgeom.hexagon_solve(hexa.solved, K)
        worst = max(worst, max(abs(x - y) for x, y in zip(back.solved, p)))
    return worst <= tol, worst, f"max roundtrip error {worst:.3e}"


# --------------------------------------------------------------------------
# profiles
# --------------------------------------------------------------------------


def _shrunk_mollified(a=0.1, K=-1.0, s=0.08):
    spec = profiles.CollarSpec.resolve(a, K, s)
    prof = profiles.quartic_shrink(spec)
    delta = 0.1 * spec.u0
    prof = smoothing.mollify_convex(prof, spec.u0, delta)
    prof = smoothing.mollify_convex(prof, -spec.u0, delta)
    return spec, prof


def _check_profile_positivity(tol):
    spec, prof = _shrunk_mollified()
    m1 = profiles.positivity_scan(profiles.base_profile(1.0, -1.0, 3.0), 10001)
    m2 = profiles.positivity_scan(prof, 10001)
    worst = min(m1, m2)
    return worst > tol, worst, f"min profile value {worst:.3e}"


def _check_profile_convexity(tol):
    spec, prof = _shrunk_mollified()
    worst = profiles.convexity_scan(prof, n=10001)
    scale = prof.value(prof.u_max)
    return worst >= -tol * scale, worst, f"min second-difference quotient {worst:.3e}"


def _check_closed_geodesic(tol):
    spec = profiles.CollarSpec.resolve(0.1, -1.0, 0.01)
    prof = profiles.quartic_shrink(spec)
    worst = max(abs(prof.value(0.0) - spec.s), abs(prof.deriv(0.0)))
    return worst <= tol, worst, f"|f(0)-s|, |f'(0)| <= {worst:.3e}"


def _check_area_monotone(tol):
    areas = []
    for s in (0.1, 0.05, 0.02, 0.01, 0.001):
        spec = profiles.CollarSpec.resolve(0.1, -1.0, s)
        areas.append(profiles.collar_area(profiles.quartic_shrink(spec), (-spec.u0, spec.u0)))
    drops = [areas[i] - areas[i + 1] for i in range(len(areas) - 1)]
    worst = min(drops)
    return worst > tol, worst, f"smallest area drop along shrinking {worst:.3e}"


def _check_quadrature_vs_closed(tol):
    from scipy.integrate import quad

    prof = profiles.base_profile(0.1, -1.0, 1.2)
    closed = profiles.collar_area(prof, (0.0, 1.1996786402577337))
    direct = 2.0 * math.pi * quad(prof.value, 0.0, 1.1996786402577337, epsabs=1e-13)[0]
    rel = abs(closed - direct) / direct
    return rel <= tol, rel, f"closed-vs-quadrature relative gap {rel:.3e}"


# --------------------------------------------------------------------------
# smoothing
# --------------------------------------------------------------------------


def _check_kernel_mass(tol):
    worst = max(abs(smoothing.Mollifier(e).mass() - 1.0) for e in (1.0, 0.1, 1e-3))
    return worst <= tol, worst, f"max |mass - 1| {worst:.3e}"


def _check_cap_residuals(tol):
    worst = 0.0
    for b in (1.1, 1.5, 2.0, 4.0):
        for eps in (1e-1, 1e-2, 1e-3):
            for spec in (smoothing.cap_parameters(b, -1.0, eps),
                         smoothing.cap_parameters(b, 0.0, eps),
                         smoothing.cap_parameters_two_sector(b, eps)):
                r1, r2 = spec.residuals()
                scale = max(1.0, spec.boundary_length)
                worst = max(worst, abs(r1) / scale, abs(r2))
    return worst <= tol, worst, f"max cap system residual {worst:.3e}"


def _check_keps_scaling(tol):
    worst = 0.0
    for b in (1.3, 2.0):
        vals = [smoothing.cap_parameters_two_sector(b, e).k_eps * e * e
                for e in (1e-1, 1e-2, 1e-3)]
        worst = max(worst, max(abs(v - vals[0]) for v in vals))
        one = [smoothing.cap_parameters(b, 0.0, e).k_eps * e * e for e in (1e-1, 1e-2, 1e-3)]
        worst = max(worst, max(abs(v - one[-1]) / abs(one[-1]) for v in one[1:]))
    return worst <= tol, worst, f"max k_eps*eps^2 drift {worst:.3e}"


def _check_cap_origin(tol):
    # f(0) = 0 and f'(0) = 1 make the cap tip a smooth point (no cone)
    spec = smoothing.cap_parameters(1.3, -1.0, 1e-2)
    prof = smoothing.build_cap_profile(spec)
    worst = max(abs(prof.value(0.0)), abs(prof.segments[0].deriv(0.0) - 1.0))
    return worst <= tol, worst, f"cap tip mismatch {worst:.3e}"


def _check_mollify_support(tol):
    spec, prof = _shrunk_mollified()
    base = profiles.quartic_shrink(spec)
    delta = 0.1 * spec.u0
    worst = 0.0
    for u in np.linspace(-2.0 * spec.u0, 2.0 * spec.u0, 801):
        if min(abs(u - spec.u0), abs(u + spec.u0)) > delta:
            worst = max(worst, abs(prof.value(float(u)) - base.value(float(u))))
    return worst <= tol, worst, f"max deviation outside windows {worst:.3e}"


# --------------------------------------------------------------------------
# mesh
# --------------------------------------------------------------------------


def _check_gauss_bonnet(tol):
    worst = 0.0
    for level in (0, 1, 2):
        surf = mesh.build_octagon_surface(-1.0, level)
        for t in (0.0, 0.25, 0.5, 0.75, 1.0):
            resid = abs(mesh.gauss_bonnet_residual(mesh.interpolate_curvature(surf, t)))
            worst = max(worst, resid / (surf.n_faces + surf.n_vertices))
    return worst <= tol, worst, f"max residual per (F+V) {worst:.3e}"


def _check_interp_identity(tol):
    surf = mesh.build_octagon_surface(-1.0, 1)
    same = mesh.interpolate_curvature(surf, 0.0)
    worst = max(abs(x - y) for x, y in zip(surf.cone_angles, same.cone_angles))
    worst = max(worst, max(abs(x - y) for x, y in zip(surf.edge_lengths, same.edge_lengths)))
    return worst <= tol, worst, f"max t=0 deviation {worst:.3e}"


def _check_edge_preservation(tol):
    surf = mesh.build_octagon_surface(-1.0, 1)
    interp = mesh.interpolate_curvature(surf, 0.7)
    same = all(x == y for x, y in zip(surf.edge_lengths, interp.edge_lengths))
    return same, 0.0 if same else 1.0, "edge lengths preserved exactly" if same else "changed"


def _check_rescale_commutes(tol):
    surf = mesh.build_octagon_surface(-1.0, 0)
    a = mesh.rescale(mesh.interpolate_curvature(surf, 0.5), 2.0)
    b = mesh.interpolate_curvature(mesh.rescale(surf, 2.0), 0.5)
    worst = 0.0
    for f in range(a.n_faces):
        for x, y in zip(a.face_shapes[f].angles, b.face_shapes[f].angles):
            worst = max(worst, abs(x - y))
    return worst <= tol, worst, f"max angle mismatch {worst:.3e}"


def _check_trace_unfolding(tol):
    surf = mesh.interpolate_curvature(mesh.build_octagon_surface(-1.0, 1), 1.0)
    rng = np.random.default_rng(104)
    worst = 0.0
    for _ in range(10):
        f, p, theta = mesh.random_flat_start(surf, rng)
        trace = mesh.trace_geodesic(surf, f, p, theta, 50.0)
        if trace.vertex_hit:
            continue
        total = sum(seg.length for seg in trace.segments)
        worst = max(worst, abs(total - trace.total_length) / trace.total_length)
        for s1, s2 in zip(trace.segments, trace.segments[1:]):
            worst = max(worst, _edge_transfer_gap(surf, s1, s2))
    return worst <= tol, worst, f"max unfolding defect {worst:.3e}"


def _edge_transfer_gap(surf, s1, s2) -> float:
    # exit point of s1 and entry point of s2 are the same physical edge point:
    # their distances to the shared edge endpoints must agree (order swapped)
    lay1 = mesh.face_layout(surf, s1.face)
    lay2 = mesh.face_layout(surf, s2.face)
    p1, p2 = s1.exit, s2.entry
    d1 = sorted(math.hypot(p1[0] - vx, p1[1] - vy) for vx, vy in lay1)[:2]
    d2 = sorted(math.hypot(p2[0] - vx, p2[1] - vy) for vx, vy in lay2)[:2]
    return max(abs(x - y) for x, y in zip(sorted(d1), sorted(d2)))


# --------------------------------------------------------------------------
# flow
# --------------------------------------------------------------------------


def _check_riccati_confinement(tol):
    # vectorized sweep: 1e5 random piecewise-constant curvature signals in [-1, 0]
    rng = np.random.default_rng(105)
    n_traj, n_intervals = 100_000, 20
    Ks = -rng.uniform(0.0, 1.0, size=(n_traj, n_intervals))
    w = rng.uniform(0.0, 1.0, size=n_traj)
    dt = 0.05
    steps_per = 4
    worst_hi = 0.0
    worst_lo = 0.0
    for j in range(n_intervals):
        K = Ks[:, j]
        for _ in range(steps_per):
            k1 = -K - w * w
            w2 = w + 0.5 * dt * k1
            k2 = -K - w2 * w2
            w3 = w + 0.5 * dt * k2
            k3 = -K - w3 * w3
            w4 = w + dt * k3
            k4 = -K - w4 * w4
            w = w + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        worst_hi = max(worst_hi, float(w.max()) - 1.0)
        worst_lo = max(worst_lo, -float(w.min()))
    worst = max(worst_hi, worst_lo)
    return worst <= tol, worst, f"max excursion beyond [0, 1]: {worst:.3e}"


def _check_riccati_jacobi(tol):
    # oscillating curvature signal, strictly non-positive
    K_along = lambda t: -(0.5 + 0.4 * math.sin(t)) ** 2
    dt = 1e-3
    w0 = 0.3
    worst = 0.0
    y, dy = 1.0, w0
    w = w0
    t = 0.0
    for _ in range(2000):
        y, dy = flow.jacobi_integrate(K_along, y, dy, 0.01, dt=dt, t0=t)
        w = flow.riccati_step(K_along, w, 0.01, dt=dt, t0=t).w_final
        t += 0.01
        if abs(y) > 1e-3:
            worst = max(worst, abs(w - dy / y))
    return worst <= tol, worst, f"max |w - y'/y| {worst:.3e}"


def _check_constant_attraction(tol):
    worst = 0.0
    for K in (-0.25, -1.0, -4.0):
        root = math.sqrt(-K)
        for w0 in (0.0, 0.5 * root, 2.0 * root):
            res = flow.riccati_step(lambda t: K, w0, 15.0, dt=1e-3)
            gap = abs(res.w_final - root)
            bound = math.exp(-root * 15.0) * max(1.0, 2.0 * root) * 4.0
            worst = max(worst, gap - bound)
    return worst <= tol, worst, f"max excess over exponential attraction {worst:.3e}"


def _check_gronwall(tol):
    rng = np.random.default_rng(106)
    worst = 0.0
    for _ in range(100):
        amp = float(rng.uniform(0.0, 1.0))
        phase = float(rng.uniform(0.0, 2 * math.pi))
        K_along = lambda t: -amp * (1.0 + math.sin(t + phase)) / 2.0
        y0, dy0 = float(rng.uniform(0.1, 2.0)), float(rng.uniform(0.0, 2.0))
        t1, t2 = 0.0, float(rng.uniform(0.5, 5.0))
        y, dy = flow.jacobi_integrate(K_along, y0, dy0, t2, dt=1e-3)
        growth = flow.jacobi_norm(y, dy) / flow.jacobi_norm(y0, dy0)
        bound = flow.gronwall_bound(K_along, t1, t2)
        worst = max(worst, growth / bound - 1.0)
    return worst <= tol, worst, f"max growth/bound - 1: {worst:.3e}"


def _check_time_reversal(tol):
    prof = profiles.base_profile(1.0, -1.0, 4.0)
    metric = flow.WarpedMetric(prof)
    state = flow.unit_speed_state(metric, 0.4, 1.0, 0.9)
    fwd = flow.integrate_geodesic(metric, state, 10.0, 1e-3)
    back_state = flow.GeodesicState(fwd.final.u, fwd.final.v, -fwd.final.du, -fwd.final.dv)
    back = flow.integrate_geodesic(metric, back_state, 10.0, 1e-3)
    worst = max(abs(back.final.u - state.u), abs(back.final.du + state.du))
    return worst <= tol, worst, f"return gap {worst:.3e}"


# --------------------------------------------------------------------------
# entropy
# --------------------------------------------------------------------------


def _check_critical_scaling(tol):
    worst = 0.0
    for G in (2, 3, 5):
        for V in (1.0, 4 * math.pi, 30.0):
            for c in (0.5, 2.0, 7.0):
                lhs = ent.critical_entropy(G, c * V)
                rhs = ent.critical_entropy(G, V) / math.sqrt(c)
                worst = max(worst, abs(lhs - rhs) / rhs)
    return worst <= tol, worst, f"max scaling violation {worst:.3e}"


def _check_estimate_constant(tol):
    metric = flow.WarpedMetric(profiles.base_profile(1.0, -1.0, 2.0))
    est = ent.metric_entropy_estimate(metric, T=50.0, n_samples=5, dt=1e-2, seed=7)
    gap = abs(est.value - 1.0)
    return gap <= tol, gap, f"|estimate - 1| = {gap:.3e} (stderr {est.stderr:.1e})"


def _check_word_monotone(tol):
    rng = np.random.default_rng(107)
    worst = 0.0
    for _ in range(100):
        c = float(rng.uniform(0.2, 3.0))
        s = float(rng.uniform(0.01, 2.0))
        factor = float(rng.uniform(0.1, 0.9))
        hi = ent.word_growth_lower(c, s * factor)
        lo = ent.word_growth_lower(c, s)
        worst = max(worst, lo - hi)
    return worst < tol, worst, f"max monotonicity violation {worst:.3e}"


def _check_stirling_brackets(tol):
    rng = np.random.default_rng(108)
    worst = 0.0
    for _ in range(100):
        R = float(rng.uniform(5.0, 500.0))
        c = float(rng.uniform(0.2, 3.0))
        s = float(rng.uniform(0.05, 2.0))
        lc = ent.binomial_loop_count(R, c, s)
        worst = max(worst, lc.stirling_log_lower - lc.log_exact,
                    lc.log_exact - lc.stirling_log_upper)
    return worst <= tol, worst, f"max bracket violation {worst:.3e}"


def _check_entropy_rescale(tol):
    base = profiles.base_profile(1.0, -1.0, 2.0)
    m1 = flow.WarpedMetric(base)
    e1 = ent.metric_entropy_estimate(m1, T=50.0, n_samples=4, dt=1e-2, seed=11)
    c = 4.0
    scaled = profiles.base_profile(math.sqrt(c) * 1.0, -1.0 / c, 2.0 * math.sqrt(c))
    m2 = flow.WarpedMetric(scaled)
    e2 = ent.metric_entropy_estimate(m2, T=50.0 * math.sqrt(c), n_samples=4, dt=1e-2, seed=11)
    gap = abs(e2.value - e1.value / math.sqrt(c))
    return gap <= tol, gap, f"|scaled - original/sqrt(c)| = {gap:.3e}"


CHECKS: tuple[Check, ...] = (
    Check("hypgeom.angle_area_identity", 1e-12, _check_angle_area_identity),
    Check("hypgeom.scaling_covariance", 1e-12, _check_scaling_covariance),
    Check("hypgeom.compare_ratio_order", 1.9, _check_compare_order),
    Check("hypgeom.hexagon_roundtrip", 1e-9, _check_hexagon_roundtrip),
    Check("profiles.positivity", 0.0, _check_profile_positivity),
    Check("profiles.convexity_mollified", 1e-8, _check_profile_convexity),
    Check("profiles.closed_geodesic", 1e-12, _check_closed_geodesic),
    Check("profiles.area_monotone", 0.0, _check_area_monotone),
    Check("profiles.quadrature_vs_closed", 1e-8, _check_quadrature_vs_closed),
    Check("smoothing.kernel_unit_mass", 1e-12, _check_kernel_mass),
    Check("smoothing.cap_residuals", 1e-10, _check_cap_residuals),
    Check("smoothing.keps_eps2_invariance", 1e-2, _check_keps_scaling),
    Check("smoothing.cap_origin_smooth", 1e-10, _check_cap_origin),
    Check("smoothing.mollify_support", 1e-12, _check_mollify_support),
    Check("mesh.gauss_bonnet", 1e-9, _check_gauss_bonnet),
    Check("mesh.interpolate_identity", 1e-12, _check_interp_identity),
    Check("mesh.edge_preservation", 0.5, _check_edge_preservation),
    Check("mesh.rescale_commutes", 1e-12, _check_rescale_commutes),
    Check("mesh.trace_unfolding", 1e-10, _check_trace_unfolding),
    Check("flow.riccati_confinement", 1e-6, _check_riccati_confinement),
    Check("flow.riccati_jacobi_consistency", 1e-6, _check_riccati_jacobi),
    Check("flow.constant_attraction", 0.0, _check_constant_attraction),
    Check("flow.gronwall_domination", 1e-9, _check_gronwall),
    Check("flow.time_reversal", 1e-6, _check_time_reversal),
    Check("entropy.critical_scaling", 1e-12, _check_critical_scaling),
    Check("entropy.estimate_constant_curvature", 1e-2, _check_estimate_constant),
    Check("entropy.word_monotone_in_systole", 0.0, _check_word_monotone),
    Check("entropy.stirling_brackets", 0.0, _check_stirling_brackets),
    Check("entropy.rescale_scaling", 1e-2, _check_entropy_rescale),
)


def run_all(tolerance_override: float | None = None) -> list[CheckResult]:
    return [check.run(tolerance_override) for check in CHECKS]
