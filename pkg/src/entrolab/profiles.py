"""Warping profiles f(u) for rotationally symmetric metrics du^2 + f(u)^2 dv^2.

The v-period is normalized to 2*pi everywhere, so the circle u = const has
length 2*pi*f(u) and a patch area is 2*pi * integral of f.  Curvature is
K(u) = -f''(u)/f(u): the metric is non-positively curved exactly where f is
convex.
"""

from __future__ import annotations

import csv
import math
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

from scipy.integrate import quad
from scipy.optimize import brentq

from .hypgeom import check_curvature

FD_STEP_FACTOR = 1e-5  # central-difference step = factor * profile scale


class ProfileDomainError(ValueError):
    """Evaluation outside the representable range of the profile."""


class NonSmoothPointError(ValueError):
    """Second derivative requested at a recorded non-C^2 point."""


@dataclass(frozen=True)
class Segment:
    """One piece of a piecewise profile on [lo, hi].

    ``second`` may be None; derivatives then fall back to central differences
    of ``value`` (only blended pieces do this).  ``primitive`` is an
    antiderivative of ``value`` when one is available in closed form.
    """

    lo: float
    hi: float
    kind: str
    value: Callable[[float], float]
    deriv: Callable[[float], float] | None = None
    second: Callable[[float], float] | None = None
    primitive: Callable[[float], float] | None = None

    @property
    def analytic(self) -> bool:
        return self.second is not None


@dataclass(frozen=True)
class Profile:
    """Piecewise profile with nominal domain [u_min, u_max].

    ``kinks`` are the points where the profile is continuous (C^0 or C^1) but
    not C^2; curvature evaluation there is refused.  Segments may extend past
    the nominal domain (the cosh piece is entire), which keeps geodesic
    integration well defined when a trajectory leaves the stated window.
    """

    segments: tuple[Segment, ...]
    u_min: float
    u_max: float
    kinks: tuple[float, ...] = ()
    info: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        bounds = [s.lo for s in self.segments]
        if bounds != sorted(bounds):
            raise ValueError("segments must be ordered by lower bound")
        object.__setattr__(self, "_starts", tuple(bounds))

    @property
    def scale(self) -> float:
        return max(self.u_max - self.u_min, 1e-12)

    @property
    def fd_step(self) -> float:
        return FD_STEP_FACTOR * self.scale

    def _segment(self, u: float) -> Segment:
        i = bisect_right(self._starts, u) - 1
        if i < 0:
            seg = self.segments[0]
            if u < seg.lo:
                raise ProfileDomainError(f"u={u} below representable range {seg.lo}")
            return seg
        seg = self.segments[i]
        if u > seg.hi and i == len(self.segments) - 1:
            raise ProfileDomainError(f"u={u} above representable range {seg.hi}")
        return seg

    def value(self, u: float) -> float:
        return self._segment(u).value(u)

    def deriv(self, u: float) -> float:
        seg = self._segment(u)
        if seg.deriv is not None:
            return seg.deriv(u)
        h = self.fd_step
        return (self.value(u + h) - self.value(u - h)) / (2.0 * h)

    def second(self, u: float) -> float:
        seg = self._segment(u)
        if seg.second is not None:
            self._guard_kink(u)
            return seg.second(u)
        h = self.fd_step
        return (self.value(u + h) - 2.0 * self.value(u) + self.value(u - h)) / (h * h)

    def curvature(self, u: float) -> float:
        """Gauss curvature -f''/f at u."""
        return -self.second(u) / self.value(u)

    def _guard_kink(self, u: float) -> None:
        guard = 2.0 * self.fd_step
        for k in self.kinks:
            if abs(u - k) < guard:
                raise NonSmoothPointError(
                    f"profile is not C^2 at u={k}; mollify before evaluating "
                    f"curvature within {guard:.2e} of it"
                )

    def grid(self, n: int) -> list[float]:
        step = (self.u_max - self.u_min) / (n - 1)
        return [self.u_min + i * step for i in range(n)]


def curvature_of_profile(profile: Profile, u: float) -> float:
    return profile.curvature(u)


# ---------------------------------------------------------------------------
# construction: constant-curvature collar and the quartic shrink
# ---------------------------------------------------------------------------


def _cosh_segment(a: float, K: float, lo: float, hi: float) -> Segment:
    q = math.sqrt(-K)
    return Segment(
        lo,
        hi,
        "cosh",
        value=lambda u: a * math.cosh(q * u),
        deriv=lambda u: a * q * math.sinh(q * u),
        second=lambda u: a * q * q * math.cosh(q * u),
        primitive=lambda u: a / q * math.sinh(q * u),
    )


def base_profile(a: float, K: float, u_max: float) -> Profile:
    """f(u) = a*cosh(sqrt(-K)*u), the constant-curvature collar profile."""
    check_curvature(K)
    if K == 0.0:
        raise ValueError("base profile requires strictly negative curvature")
    if a <= 0.0 or u_max <= 0.0:
        raise ValueError("need a > 0 and u_max > 0")
    return Profile((_cosh_segment(a, K, -math.inf, math.inf),), -u_max, u_max)


def _coth_root() -> float:
    # unique positive root of coth(x) = x; coth(x) - x is monotone on x > 1
    x = brentq(lambda x: 1.0 / math.tanh(x) - x, 1.0, 2.0, xtol=1e-15, rtol=8.9e-16)
    for _ in range(2):  # Newton polish
        g = 1.0 / math.tanh(x) - x
        dg = -1.0 / math.sinh(x) ** 2 - 1.0
        x -= g / dg
    return x


COTH_FIXED_POINT = _coth_root()  # 1.19967864...


def tangent_point(K: float) -> float:
    """Abscissa u0 > 0 where the tangent to a*cosh(sqrt(-K)u) passes through 0.

    Scales like 1/sqrt(-K) and does not depend on a.
    """
    check_curvature(K)
    if K == 0.0:
        raise ValueError("tangent point requires strictly negative curvature")
    return COTH_FIXED_POINT / math.sqrt(-K)


@dataclass(frozen=True)
class CollarSpec:
    """Resolved parameters of the quartic systole shrink.

    The quartic A*u^4 + B*u^2 + s meets a*cosh(sqrt(-K)u) with matching value
    and slope at +-u0, so the glued profile is C^1 with a second-derivative
    jump at the junctions.
    """

    a: float
    K: float
    s: float
    u0: float
    A: float
    B: float

    @classmethod
    def resolve(cls, a: float, K: float, s: float) -> "CollarSpec":
        check_curvature(K)
        if K == 0.0:
            raise ValueError("collar requires strictly negative curvature")
        if a <= 0.0:
            raise ValueError("need a > 0")
        if not (0.0 < s <= a):
            raise ValueError(f"shrunk value must satisfy 0 < s <= a, got s={s}, a={a}")
        q = math.sqrt(-K)
        u0 = tangent_point(K)
        f0 = a * math.cosh(q * u0)
        fp0 = a * q * math.sinh(q * u0)
        A = (fp0 * u0 - 2.0 * f0 + 2.0 * s) / (2.0 * u0**4)
        B = (4.0 * f0 - fp0 * u0 - 4.0 * s) / (2.0 * u0**2)
        return cls(a, K, s, u0, A, B)

    @property
    def convex_radius(self) -> float:
        """Largest r <= u0 with the quartic convex on [-r, r].

        The quartic is convex on all of (-u0, u0) only for s >= 3*f(u0)/8;
        below that threshold the inflection sits at sqrt(-B/(6A)).
        """
        if self.A >= 0.0:
            return self.u0
        return min(self.u0, math.sqrt(-self.B / (6.0 * self.A)))

    @property
    def convexity_threshold(self) -> float:
        """Smallest s for which the quartic stays convex up to u0."""
        return 0.375 * self.a * math.cosh(math.sqrt(-self.K) * self.u0)


def quartic_shrink(spec: CollarSpec, u_max: float | None = None) -> Profile:
    """Shrunk collar profile: quartic inside (-u0, u0), a*cosh outside."""
    A, B, s, u0 = spec.A, spec.B, spec.s, spec.u0
    if u_max is None:
        u_max = 2.0 * u0
    quartic = Segment(
        -u0,
        u0,
        "quartic",
        value=lambda u: (A * u * u + B) * u * u + s,
        deriv=lambda u: (4.0 * A * u * u + 2.0 * B) * u,
        second=lambda u: 12.0 * A * u * u + 2.0 * B,
        primitive=lambda u: ((A / 5.0 * u * u + B / 3.0) * u * u + s) * u,
    )
    segments = (
        _cosh_segment(spec.a, spec.K, -math.inf, -u0),
        quartic,
        _cosh_segment(spec.a, spec.K, u0, math.inf),
    )
    return Profile(segments, -u_max, u_max, kinks=(-u0, u0))


# ---------------------------------------------------------------------------
# areas and scans
# ---------------------------------------------------------------------------


def cosh_collar_area(a: float, K: float, lo: float, hi: float) -> float:
    """Closed-form area 2*pi*integral of a*cosh(sqrt(-K)u) over [lo, hi]."""
    q = math.sqrt(-K)
    return 2.0 * math.pi * a / q * (math.sinh(q * hi) - math.sinh(q * lo))


def collar_area(profile: Profile, u_range: tuple[float, float] | None = None) -> float:
    """Area 2*pi*integral of f over u_range (default: the nominal domain).

    Uses closed-form antiderivatives on analytic pieces and adaptive
    quadrature on blended pieces; both routes agree on cosh pieces.
    """
    lo, hi = u_range if u_range is not None else (profile.u_min, profile.u_max)
    if hi < lo:
        raise ValueError("empty range")
    total = 0.0
    for seg in profile.segments:
        a = max(lo, seg.lo)
        b = min(hi, seg.hi)
        if b <= a:
            continue
        if seg.primitive is not None:
            total += seg.primitive(b) - seg.primitive(a)
        else:
            val, _ = quad(seg.value, a, b, epsabs=1e-13, epsrel=1e-13, limit=200)
            total += val
    return 2.0 * math.pi * total


def positivity_scan(profile: Profile, n: int = 10001) -> float:
    """Minimum of f over an n-point grid on the nominal domain."""
    return min(profile.value(u) for u in profile.grid(n))


def convexity_scan(
    profile: Profile,
    n: int = 10001,
    lo: float | None = None,
    hi: float | None = None,
) -> float:
    """Minimum second-difference quotient (f(u-h)-2f(u)+f(u+h))/h^2 on a grid.

    Non-negative up to roundoff exactly when the profile is convex on the
    scanned window.
    """
    lo = profile.u_min if lo is None else lo
    hi = profile.u_max if hi is None else hi
    h = (hi - lo) / (n + 1)
    worst = math.inf
    prev2 = profile.value(lo)
    prev1 = profile.value(lo + h)
    u = lo + 2.0 * h
    inv_h2 = 1.0 / (h * h)
    for _ in range(n):
        cur = profile.value(u)
        worst = min(worst, (prev2 - 2.0 * prev1 + cur) * inv_h2)
        prev2, prev1 = prev1, cur
        u += h
    return worst


def curvature_sign_scan(profile: Profile, n: int = 10001) -> float:
    """Maximum of K(u) = -f''/f over the grid via second differences."""
    lo, hi = profile.u_min, profile.u_max
    h = (hi - lo) / (n + 1)
    worst = -math.inf
    prev2 = profile.value(lo)
    prev1 = profile.value(lo + h)
    u = lo + 2.0 * h
    for _ in range(n):
        cur = profile.value(u)
        second = (prev2 - 2.0 * prev1 + cur) / (h * h)
        worst = max(worst, -second / prev1)
        prev2, prev1 = prev1, cur
        u += h
    return worst


def sample_rows(profile: Profile, n: int = 201) -> list[tuple[float, float, float, float, float]]:
    """Rows (u, f, f', f'', K); f'' and K are nan at guarded kinks."""
    rows = []
    for u in profile.grid(n):
        f = profile.value(u)
        fp = profile.deriv(u)
        try:
            fpp = profile.second(u)
            Ku = -fpp / f
        except NonSmoothPointError:
            fpp = math.nan
            Ku = math.nan
        rows.append((u, f, fp, fpp, Ku))
    return rows


def write_profile_csv(profile: Profile, path, n: int = 201) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["u", "f", "fp", "fpp", "K"])
        for row in sample_rows(profile, n):
            writer.writerow([format(x, ".17g") for x in row])
