"""Convexity-preserving mollification and constant-curvature cone caps.

A corner of a convex profile is smoothed by blending the profile with its
convolution against a compactly supported bump kernel; the blend is local, so
the profile is untouched outside the requested window.  Cone points of total
angle alpha = 2*pi*b > 2*pi are replaced by caps of constant negative
curvature k_eps whose value and slope match the surrounding cone profile.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from scipy.integrate import quad

from .profiles import NonSmoothPointError, Profile, Segment, convexity_scan


class ConvexityError(ValueError):
    """Input to a convexity-preserving operation is not convex."""


# ---------------------------------------------------------------------------
# bump kernel and smooth transitions
# ---------------------------------------------------------------------------

_BUMP_MASS: float | None = None  # integral of exp(-1/(1-t^2)) over (-1, 1)


def _bump_mass() -> float:
    global _BUMP_MASS
    if _BUMP_MASS is None:
        val, _ = quad(lambda t: math.exp(-1.0 / (1.0 - t * t)), -1.0, 1.0,
                      epsabs=1e-15, epsrel=1e-14, limit=200)
        _BUMP_MASS = val
    return _BUMP_MASS


@dataclass(frozen=True)
class Mollifier:
    """Smooth, even, nonnegative kernel with unit mass supported on [-eps, eps]."""

    eps: float

    def value(self, x: float) -> float:
        t = x / self.eps
        if abs(t) >= 1.0:
            return 0.0
        return math.exp(-1.0 / (1.0 - t * t)) / (_bump_mass() * self.eps)

    def mass(self) -> float:
        val, _ = quad(self.value, -self.eps, self.eps, epsabs=1e-14, epsrel=1e-13, limit=200)
        return val


def smooth_step(t: float) -> float:
    """C-infinity transition: 0 for t <= 0, 1 for t >= 1."""
    if t <= 0.0:
        return 0.0
    if t >= 1.0:
        return 1.0
    a = math.exp(-1.0 / t)
    b = math.exp(-1.0 / (1.0 - t))
    return a / (a + b)


def convolve_at(
    f: Callable[[float], float], u: float, kernel: Mollifier, kinks: tuple[float, ...] = ()
) -> float:
    """(theta_eps * f)(u) by adaptive quadrature, split at interior kinks."""
    eps = kernel.eps
    inner = sorted(u - k for k in kinks if abs(u - k) < eps)
    val, _ = quad(
        lambda x: f(u - x) * kernel.value(x),
        -eps,
        eps,
        points=inner if inner else None,
        epsabs=1e-13,
        epsrel=1e-12,
        limit=200,
    )
    return val


# ---------------------------------------------------------------------------
# convexity-preserving local smoothing
# ---------------------------------------------------------------------------


def mollify_convex(
    profile: Profile,
    point: float,
    delta: float,
    kernel_eps: float | None = None,
    scan_n: int = 4001,
    max_halvings: int = 30,
) -> Profile:
    """Smooth a convex profile near ``point``, leaving it untouched outside
    the delta-neighborhood.

    The kernel width starts at delta/6 and is halved until the blended piece
    passes a second-difference convexity scan; convexity of the input implies
    this terminates for small enough width.  Exact on linear pieces for any
    width (even kernel, unit mass).
    """
    if delta <= 0.0:
        raise ValueError("delta must be positive")
    lo, hi = point - delta, point + delta
    # reject non-convex input near the window (away from the corner itself)
    pre = convexity_scan(profile, n=scan_n, lo=lo - delta, hi=hi + delta)
    f_scale = max(abs(profile.value(lo)), abs(profile.value(hi)), 1e-300)
    if pre < -1e-8 * f_scale:
        raise ConvexityError(
            f"input profile is not convex near u={point}: min second-difference "
            f"quotient {pre:.3e}"
        )

    f = profile.value
    window_kinks = tuple(k for k in profile.kinks if lo < k < hi)

    def make_blend(eps_k: float) -> Callable[[float], float]:
        kernel = Mollifier(eps_k)

        def blend(u: float) -> float:
            w = smooth_step(2.0 - 2.0 * abs(u - point) / delta)
            if w == 0.0:
                return f(u)
            smoothed = convolve_at(f, u, kernel, window_kinks)
            return (1.0 - w) * f(u) + w * smoothed

        return blend

    eps_k = kernel_eps if kernel_eps is not None else delta / 6.0
    for _ in range(max_halvings):
        blend = make_blend(eps_k)
        trial = _replace_window(profile, lo, hi, blend, kind="blend")
        worst = convexity_scan(trial, n=scan_n, lo=lo, hi=hi)
        if worst >= -1e-8 * f_scale:
            return trial
        eps_k *= 0.5
    raise ConvexityError(
        f"could not certify convexity of blend at u={point} after "
        f"{max_halvings} kernel halvings (last min quotient {worst:.3e})"
    )


def _replace_window(
    profile: Profile, lo: float, hi: float, value: Callable[[float], float], kind: str
) -> Profile:
    """New profile with [lo, hi] replaced by a non-analytic closure segment."""
    new_segments: list[Segment] = []
    for seg in profile.segments:
        if seg.hi <= lo or seg.lo >= hi:
            new_segments.append(seg)
            continue
        if seg.lo < lo:
            new_segments.append(Segment(seg.lo, lo, seg.kind, seg.value, seg.deriv,
                                        seg.second, seg.primitive))
        if seg.hi > hi:
            new_segments.append(Segment(hi, seg.hi, seg.kind, seg.value, seg.deriv,
                                        seg.second, seg.primitive))
    new_segments.append(Segment(lo, hi, kind, value))
    new_segments.sort(key=lambda s: s.lo)
    kinks = tuple(k for k in profile.kinks if not (lo < k < hi))
    return Profile(tuple(new_segments), profile.u_min, profile.u_max, kinks=kinks,
                   info=dict(profile.info))


# ---------------------------------------------------------------------------
# cone profiles and caps
# ---------------------------------------------------------------------------


def conic_profile(b: float, kbar: float, r_max: float) -> Profile:
    """Radial profile of a cone of total angle 2*pi*b in curvature kbar <= 0.

    f(r) = b*r for kbar = 0 and b*sinh(sqrt(-kbar) r)/sqrt(-kbar) otherwise.
    """
    if b <= 1.0:
        raise ValueError(f"total angle must exceed 2*pi (b > 1), got b={b}")
    if kbar > 0.0:
        raise ValueError("surrounding curvature must be <= 0")
    if kbar == 0.0:
        seg = Segment(
            0.0, math.inf, "conic",
            value=lambda r: b * r,
            deriv=lambda r: b,
            second=lambda r: 0.0,
            primitive=lambda r: 0.5 * b * r * r,
        )
    else:
        q = math.sqrt(-kbar)
        seg = Segment(
            0.0, math.inf, "conic",
            value=lambda r: b * math.sinh(q * r) / q,
            deriv=lambda r: b * math.cosh(q * r),
            second=lambda r: b * q * math.sinh(q * r),
            primitive=lambda r: b * (math.cosh(q * r) - 1.0) / (q * q),
        )
    return Profile((seg,), 0.0, r_max, info={"b": b, "kbar": kbar})


@dataclass(frozen=True)
class CapSpec:
    """Cap of constant curvature k_eps < 0 and radius r0 replacing a cone point.

    ``boundary_length`` is the circumference of the cap boundary circle, which
    equals the circumference it replaces.  ``variant`` records which matching
    system produced the pair (gluing directly to the cone at radius eps, or
    the two-sector corner variant matching slope b with half the flat length).
    """

    b: float
    kbar: float
    eps: float
    k_eps: float
    r0: float
    boundary_length: float
    variant: str

    def residuals(self) -> tuple[float, float]:
        """Residuals of the defining system; both ~0 for a valid spec."""
        q = math.sqrt(-self.k_eps)
        if self.variant == "one_sector":
            qb = math.sqrt(-self.kbar) if self.kbar < 0.0 else 0.0
            ch = math.cosh(qb * self.eps) if self.kbar < 0.0 else 1.0
            res1 = 2.0 * math.pi / q * math.sinh(q * self.r0) - self.boundary_length
            res2 = math.cosh(q * self.r0) - self.b * ch
        else:
            res1 = math.sinh(q * self.r0) / q - 0.5 * self.b * self.eps
            res2 = math.cosh(q * self.r0) - self.b
        return res1, res2


def cap_parameters(b: float, kbar: float, eps: float) -> CapSpec:
    """Solve the C^1 cap-matching system at gluing radius eps.

    The boundary length is 2*pi*fbar(eps) of the cone profile; curvature and
    radius follow in closed form from the hyperbolic Pythagorean identity:
    k_eps = -(4 pi^2/L^2)(b^2 cosh^2(sqrt(-kbar) eps) - 1).
    """
    if b <= 1.0:
        raise ValueError(f"no negative-curvature cap exists for b <= 1, got b={b}")
    if kbar > 0.0 or eps <= 0.0:
        raise ValueError("need kbar <= 0 and eps > 0")
    if kbar == 0.0:
        fbar = b * eps
        ch = b
    else:
        q = math.sqrt(-kbar)
        fbar = b * math.sinh(q * eps) / q
        ch = b * math.cosh(q * eps)
    L = 2.0 * math.pi * fbar
    k_eps = -(4.0 * math.pi**2 / (L * L)) * (ch * ch - 1.0)
    r0 = L * math.acosh(ch) / (2.0 * math.pi * math.sqrt(ch * ch - 1.0))
    return CapSpec(b, kbar, eps, k_eps, r0, L, "one_sector")


def cap_parameters_two_sector(b: float, eps: float) -> CapSpec:
    """Closed-form cap pair for the two-sector corner smoothing.

    k_eps = 4(1-b^2)/(b^2 eps^2) and r0 = b*arccosh(b)*eps/(2 sqrt(b^2-1)),
    matching sinh-length b*eps/2 and slope b at the cap boundary.
    """
    if b <= 1.0:
        raise ValueError(f"no negative-curvature cap exists for b <= 1, got b={b}")
    if eps <= 0.0:
        raise ValueError("need eps > 0")
    k_eps = 4.0 * (1.0 - b * b) / (b * b * eps * eps)
    r0 = b * math.acosh(b) * eps / (2.0 * math.sqrt(b * b - 1.0))
    return CapSpec(b, 0.0, eps, k_eps, r0, math.pi * b * eps, "two_sector")


def _cap_segment(k_eps: float, lo: float, hi: float) -> Segment:
    q = math.sqrt(-k_eps)
    return Segment(
        lo, hi, "cap",
        value=lambda r: math.sinh(q * r) / q,
        deriv=lambda r: math.cosh(q * r),
        second=lambda r: q * math.sinh(q * r),
        primitive=lambda r: (math.cosh(q * r) - 1.0) / (q * q),
    )


def build_cap_profile(
    spec: CapSpec,
    outer: Profile | None = None,
    sector_curvature: float | None = None,
    mollify: bool = True,
    r_max: float | None = None,
) -> Profile:
    """Assemble the capped radial profile: sinh cap up to r0, shifted cone
    profile beyond, then (optionally) mollified at the junctions.

    For the two-sector variant with a negative ``sector_curvature`` the
    profile follows that sector's column of the corner construction: a linear
    stretch of slope b bridges the cap to the shifted sinh cone.  The returned
    profile records the measured support radius (where it stops differing
    from the shifted cone profile) in ``info["support_radius"]``.
    """
    b, eps, r0 = spec.b, spec.eps, spec.r0
    delta = eps / 4.0  # junction mollification half-width

    if spec.variant == "one_sector":
        if outer is None:
            outer = conic_profile(b, spec.kbar, 10.0 * (r0 + eps))
        shift = eps - r0
        ov, od, o2, op = (outer.segments[0].value, outer.segments[0].deriv,
                          outer.segments[0].second, outer.segments[0].primitive)
        tail = Segment(
            r0, math.inf, "conic",
            value=lambda r: ov(r + shift),
            deriv=lambda r: od(r + shift),
            second=lambda r: o2(r + shift),
            primitive=lambda r: op(r + shift),
        )
        segments = (_cap_segment(spec.k_eps, 0.0, r0), tail)
        kinks = (r0,)
        support = r0 + delta
    elif sector_curvature is None or sector_curvature == 0.0:
        # flat sector: shifted linear cone, shift eps/2
        shift = 0.5 * eps - r0
        tail = Segment(
            r0, math.inf, "conic",
            value=lambda r: b * (r + shift),
            deriv=lambda r: b,
            second=lambda r: 0.0,
            primitive=lambda r: 0.5 * b * (r + shift) ** 2,
        )
        segments = (_cap_segment(spec.k_eps, 0.0, r0), tail)
        kinks = (r0,)
        support = r0 + delta
    else:
        if sector_curvature > 0.0:
            raise ValueError("sector curvature must be <= 0")
        q = math.sqrt(-sector_curvature)
        r1 = r0 + b * math.sinh(0.5 * q * eps) / q - 0.5 * eps
        bridge = Segment(
            r0, r1, "linear",
            value=lambda r: 0.5 * b * eps + b * (r - r0),
            deriv=lambda r: b,
            second=lambda r: 0.0,
            primitive=lambda r: 0.5 * b * eps * r + 0.5 * b * (r - r0) ** 2,
        )
        shift = 0.5 * eps - r1
        tail = Segment(
            r1, math.inf, "conic",
            value=lambda r: b * math.sinh(q * (r + shift)) / q,
            deriv=lambda r: b * math.cosh(q * (r + shift)),
            second=lambda r: b * q * math.sinh(q * (r + shift)),
            primitive=lambda r: b * (math.cosh(q * (r + shift)) - 1.0) / (q * q),
        )
        segments = (_cap_segment(spec.k_eps, 0.0, r0), bridge, tail)
        kinks = (r0, r1)
        support = r1 + delta

    if r_max is None:
        r_max = support + 4.0 * eps
    info = {"support_radius": support, "b": b, "k_eps": spec.k_eps, "r0": r0}
    profile = Profile(segments, 0.0, r_max, kinks=kinks, info=info)

    # C^1 matching at the cap boundary must hold before any smoothing
    gap_v = segments[0].value(r0) - segments[1].value(r0)
    gap_d = segments[0].deriv(r0) - segments[1].deriv(r0)
    if abs(gap_v) > 1e-10 * max(1.0, abs(segments[0].value(r0))):
        raise ValueError(f"cap value mismatch at r0: {gap_v:.3e}")
    if abs(gap_d) > 1e-10 * max(1.0, abs(segments[0].deriv(r0))):
        raise ValueError(f"cap slope mismatch at r0: {gap_d:.3e}")

    if not mollify:
        return profile
    for junction in kinks:
        profile = mollify_convex(profile, junction, delta)
    worst = convexity_scan(profile, n=4001, lo=max(0.0, r0 - 2 * delta), hi=support + eps)
    if worst < -1e-8 * profile.value(support):
        raise RuntimeError(f"cap blend lost convexity: min quotient {worst:.3e}")
    return Profile(profile.segments, profile.u_min, profile.u_max,
                   kinks=profile.kinks, info=info)
