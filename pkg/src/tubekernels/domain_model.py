"""Convex defining functions for tube domains over epigraphs in the plane.

A domain here is the tube R^2 + i*omega_f with omega_f = {(x, y): y > f(x)}
and f(x) = x^(2m) g(x), g(0) > 0.  The origin is a weakly pseudoconvex
boundary point of type 2m; everything downstream (kernels, blow-up charts,
asymptotics) consumes a :class:`DefiningFunction` built here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicHermiteSpline, CubicSpline

__all__ = [
    "DomainError",
    "DualCone",
    "BoundaryRelativePoint",
    "DefiningFunction",
    "eval_f",
    "make_defining_function",
    "dual_cone",
    "mollify",
    "damp_tails",
    "model_domain",
    "rational_domain",
    "blended_linear_domain",
    "table_domain",
]


class DomainError(ValueError):
    """Input outside the represented class: bad parameters, exterior points,
    or a requested construction that cannot satisfy its own constraints."""


@dataclass(frozen=True)
class DualCone:
    """Admissible Laplace directions: zeta1/zeta2 must lie in (-r_minus, r_plus).

    ``r_plus`` is the tail slope of f on the x -> -infinity branch and
    ``r_minus`` the slope on the x -> +infinity branch (math.inf for
    superlinear tails).  ``estimated`` marks numerically extrapolated values.
    """

    r_plus: float
    r_minus: float
    estimated: bool = False


@dataclass(frozen=True)
class BoundaryRelativePoint:
    """Imaginary parts (x, y) of a point of the tube; interior means y > f(x)."""

    x: float
    y: float


def _vectorize(fn: Callable) -> Callable:
    """Return a callable guaranteed to map 1-d float arrays to 1-d arrays."""

    def wrapped(x: np.ndarray) -> np.ndarray:
        try:
            out = np.asarray(fn(x), dtype=float)
            if out.shape == x.shape:
                return out
        except (TypeError, ValueError):
            pass
        return np.asarray([float(fn(float(v))) for v in x])

    return wrapped


class DefiningFunction:
    """f(x) = x^(2m) g(x) with f convex and g(0) > 0.

    Internal callables operate on 1-d numpy arrays; the public accessors
    accept scalars or arrays and return matching shapes.  ``tail_slopes``,
    when provided, are the exact limits of f(x)/|x| on the (x -> -inf,
    x -> +inf) branches, with ``math.inf`` for superlinear growth; ``None``
    means "estimate numerically on demand" (see :func:`dual_cone`).
    """

    def __init__(
        self,
        m: int,
        f: Callable,
        fprime: Callable,
        fsecond: Callable,
        g: Callable,
        gprime: Callable,
        *,
        label: str,
        full_theorem_class: bool = True,
        tail_slopes: tuple[float, float] | None = None,
        is_mollified: bool = False,
        validate: bool = True,
    ):
        if not (isinstance(m, (int, np.integer)) and int(m) >= 1):
            raise DomainError(f"m must be an integer >= 1, got {m!r}")
        self.m = int(m)
        self._f = f
        self._fp = fprime
        self._fpp = fsecond
        self._g = g
        self._gp = gprime
        self.label = str(label)
        self.full_theorem_class = bool(full_theorem_class)
        self.tail_slopes = tail_slopes
        self.is_mollified = bool(is_mollified)
        g0 = float(self._g(np.asarray([0.0]))[0])
        if not (math.isfinite(g0) and g0 > 0):
            raise DomainError(f"g(0) must be positive and finite, got {g0!r}")
        self.g0 = g0
        if validate:
            self._validate()

    # -- public accessors ---------------------------------------------------

    def f(self, x):
        return self._call(self._f, x)

    def fprime(self, x):
        return self._call(self._fp, x)

    def fsecond(self, x):
        return self._call(self._fpp, x)

    def g(self, x):
        return self._call(self._g, x)

    def gprime(self, x):
        return self._call(self._gp, x)

    def contains(self, p: BoundaryRelativePoint) -> bool:
        """True when (p.x, p.y) lies strictly inside omega_f."""
        return bool(p.y > self.f(p.x))

    def require_interior(self, p: BoundaryRelativePoint) -> None:
        if not self.contains(p):
            raise DomainError(
                f"point (x={p.x!r}, y={p.y!r}) is not interior: f(x)={self.f(p.x)!r}"
            )

    def __repr__(self):
        return f"DefiningFunction({self.label}, m={self.m}, g0={self.g0})"

    @staticmethod
    def _call(fn, x):
        arr = np.asarray(x, dtype=float)
        out = np.asarray(fn(np.atleast_1d(arr).ravel()), dtype=float)
        if arr.ndim == 0:
            return float(out[0])
        return out.reshape(arr.shape)

    # -- validation ---------------------------------------------------------

    def _validate(self) -> None:
        xs = np.concatenate(
            [[0.0], np.geomspace(1e-8, 12.0, 400), -np.geomspace(1e-8, 12.0, 400)]
        )
        f = self.f(xs)
        fpp = self.fsecond(xs)
        g = self.g(xs)
        gp = self.gprime(xs)

        if abs(self.f(0.0)) > 1e-12:
            raise DomainError(f"f(0) must vanish, got {self.f(0.0)!r}")
        if not np.all(np.isfinite(f)):
            raise DomainError("f takes non-finite values on the sample grid")

        tol = 1e-9 * (1.0 + np.abs(fpp))
        bad = fpp < -tol
        if np.any(bad):
            i = int(np.argmin(fpp + tol))
            raise DomainError(
                f"f is not convex: f''({xs[i]!r}) = {fpp[i]!r}"
            )

        # structural consistency f = x^(2m) g on a moderate window
        mid = np.abs(xs) <= 3.0
        lhs = f[mid]
        rhs = xs[mid] ** (2 * self.m) * g[mid]
        if not np.allclose(lhs, rhs, rtol=1e-6, atol=1e-12):
            raise DomainError("f and x^(2m) g(x) disagree on the sample grid")

        if self.full_theorem_class:
            xg = xs * gp
            if np.any(xg > 1e-9 * (1.0 + np.abs(g))):
                i = int(np.argmax(xg))
                raise DomainError(
                    f"x g'(x) <= 0 violated at x={xs[i]!r}: x g' = {xg[i]!r}"
                )


def eval_f(f: DefiningFunction, x, order: int = 0):
    """Evaluate f (order 0), f' (order 1) or f'' (order 2) at x."""
    if order == 0:
        return f.f(x)
    if order == 1:
        return f.fprime(x)
    if order == 2:
        return f.fsecond(x)
    raise DomainError(f"derivative order must be 0, 1 or 2, got {order!r}")


def make_defining_function(
    m: int,
    g: Callable,
    gprime: Callable | None = None,
    gsecond: Callable | None = None,
    *,
    label: str = "custom",
    full_theorem_class: bool = True,
    tail_slopes: tuple[float, float] | None = None,
    is_mollified: bool = False,
) -> DefiningFunction:
    """Build a DefiningFunction from g (and optional analytic derivatives).

    Missing derivatives are filled in by central differences, which is
    plenty for their only consumers (validation and peak seeding); the
    kernel evaluators use f values only.
    """
    gv = _vectorize(g)
    if gprime is not None:
        gpv = _vectorize(gprime)
    else:

        def gpv(x, _g=gv):
            h = 1e-6 * (1.0 + np.abs(x))
            return (_g(x + h) - _g(x - h)) / (2.0 * h)

    if gsecond is not None:
        gppv = _vectorize(gsecond)
    else:

        def gppv(x, _g=gv):
            h = 2e-5 * (1.0 + np.abs(x))
            return (_g(x + h) - 2.0 * _g(x) + _g(x - h)) / (h * h)

    n = 2 * int(m)

    def fv(x):
        return x**n * gv(x)

    def fpv(x):
        return x ** (n - 1) * (n * gv(x) + x * gpv(x))

    def fppv(x):
        return x ** (n - 2) * (
            n * (n - 1) * gv(x) + 2.0 * n * x * gpv(x) + x * x * gppv(x)
        )

    return DefiningFunction(
        m,
        fv,
        fpv,
        fppv,
        gv,
        gpv,
        label=label,
        full_theorem_class=full_theorem_class,
        tail_slopes=tail_slopes,
        is_mollified=is_mollified,
    )


# ---------------------------------------------------------------------------
# dual cone
# ---------------------------------------------------------------------------


def _tail_slope(f: DefiningFunction, sign: float) -> tuple[float, bool]:
    """Chord-slope estimate of lim f(x)/|x| on one branch.

    Convexity makes the chord slopes over [2^k, 2^(k+1)] increase to the
    limit, so divergence and convergence are both detectable.
    """
    prev = None
    for k in range(3, 27):
        a, b = 2.0**k, 2.0 ** (k + 1)
        fa = f.f(sign * a)
        fb = f.f(sign * b)
        s = (fb - fa) / (b - a)
        if not math.isfinite(s) or s > 1e9:
            return math.inf, True
        if prev is not None and abs(s - prev) <= 1e-9 * max(abs(s), 1e-30):
            return s, True
        prev = s
    return prev, True


def dual_cone(f: DefiningFunction) -> DualCone:
    """Dual cone opening (-r_minus, r_plus) for the direction zeta1/zeta2.

    Exact when the definition carries analytic tail slopes; otherwise
    estimated from chord slopes on a doubling grid and flagged.
    """
    if f.tail_slopes is not None:
        neg, pos = f.tail_slopes
        return DualCone(r_plus=float(neg), r_minus=float(pos), estimated=False)
    rp, _ = _tail_slope(f, -1.0)
    rm, _ = _tail_slope(f, +1.0)
    if not (rp > 0 and rm > 0):
        raise DomainError(f"degenerate tail slopes ({rp!r}, {rm!r})")
    return DualCone(r_plus=rp, r_minus=rm, estimated=True)


# ---------------------------------------------------------------------------
# built-in domains
# ---------------------------------------------------------------------------


def model_domain(m: int, g0: float = 1.0) -> DefiningFunction:
    """The homogeneous model f(x) = g0 x^(2m)."""
    if not (g0 > 0 and math.isfinite(g0)):
        raise DomainError(f"g0 must be positive, got {g0!r}")
    n = 2 * int(m)
    return DefiningFunction(
        m,
        lambda x: g0 * x**n,
        lambda x: n * g0 * x ** (n - 1),
        lambda x: n * (n - 1) * g0 * x ** (n - 2),
        lambda x: np.full_like(x, g0),
        lambda x: np.zeros_like(x),
        label=f"model(m={int(m)},g0={g0:g})",
        tail_slopes=(math.inf, math.inf),
    )


def rational_domain(m: int) -> DefiningFunction:
    """f(x) = x^(2m) / (1 + x^2): curvature decays but tails stay superlinear.

    Needs m >= 2; at m = 1 this profile loses convexity near |x| ~ 1.
    """
    if int(m) < 2:
        raise DomainError(f"rational_domain needs m >= 2, got {m!r}")
    n = 2 * int(m)

    def g(x):
        return 1.0 / (1.0 + x * x)

    def gp(x):
        return -2.0 * x / (1.0 + x * x) ** 2

    def gpp(x):
        return (6.0 * x * x - 2.0) / (1.0 + x * x) ** 3

    def fv(x):
        return x**n * g(x)

    def fpv(x):
        return x ** (n - 1) * (n * g(x) + x * gp(x))

    def fppv(x):
        return x ** (n - 2) * (n * (n - 1) * g(x) + 2.0 * n * x * gp(x) + x * x * gpp(x))

    return DefiningFunction(
        m,
        fv,
        fpv,
        fppv,
        g,
        gp,
        label=f"rational(m={int(m)})",
        tail_slopes=(math.inf, math.inf),
    )


def blended_linear_domain(m: int, slope: float = 1.0) -> DefiningFunction:
    """Type-2m core with exactly linear tails of the given slope.

    Realized through f'(x) = slope * tanh(2m x^(2m-1) / slope), which keeps
    x g'(x) <= 0 globally and saturates to +-slope so fast that the tail
    slopes are exact at double precision.  The resulting dual cone is the
    finite square (-slope, slope).
    """
    if not (slope > 0 and math.isfinite(slope)):
        raise DomainError(f"slope must be positive and finite, got {slope!r}")
    n = 2 * int(m)
    s = float(slope)
    # tanh argument 21.5 leaves a relative saturation gap below 2e-19
    x_sat = (21.5 * s / n) ** (1.0 / (n - 1))

    grid = np.linspace(0.0, x_sat, 4001)

    def fp_half(x):
        return s * np.tanh(n * x ** (n - 1) / s)

    def fpp_half(x):
        t = np.tanh(n * x ** (n - 1) / s)
        return (1.0 - t * t) * n * (n - 1) * x ** (n - 2)

    F = CubicHermiteSpline(grid, fp_half(grid), fpp_half(grid)).antiderivative()
    f_sat = float(F(x_sat))

    # series region: the spline antiderivative carries roundoff-scale
    # negatives near 0, so tiny |x| goes through the expansion of g instead
    c_series = n**3 / (3.0 * s * s * (3 * n - 2))
    x_series = (1e-8 / c_series) ** (1.0 / (2 * n - 2))

    def fv(x):
        ax = np.abs(x)
        out = np.empty_like(ax)
        small = ax < x_series
        xs = ax[small]
        out[small] = xs**n * (1.0 - c_series * xs ** (2 * n - 2))
        xb = ax[~small]
        inner = np.minimum(xb, x_sat)
        out[~small] = F(inner) + s * np.maximum(xb - x_sat, 0.0)
        return out

    def fpv(x):
        return np.sign(x) * fp_half(np.abs(x))

    def fppv(x):
        return fpp_half(np.abs(x))

    def gv(x):
        ax = np.abs(x)
        out = np.empty_like(ax)
        small = ax < x_series
        out[small] = 1.0 - c_series * ax[small] ** (2 * n - 2)
        xs = ax[~small]
        out[~small] = fv(xs) / xs**n
        return out

    def gpv(x):
        ax = np.abs(x)
        out = np.empty_like(ax)
        small = ax < x_series
        out[small] = -(2 * n - 2) * c_series * ax[small] ** (2 * n - 3)
        xs = ax[~small]
        out[~small] = (xs * fp_half(xs) - n * fv(xs)) / xs ** (n + 1)
        return out * np.sign(x)

    dom = DefiningFunction(
        m,
        fv,
        fpv,
        fppv,
        gv,
        gpv,
        label=f"blended-linear(m={int(m)},slope={s:g})",
        tail_slopes=(s, s),
    )
    dom._f_sat = f_sat  # kept for introspection in tests
    return dom


def table_domain(
    xs: Sequence[float],
    gs: Sequence[float],
    gprimes: Sequence[float],
    m: int,
    *,
    label: str = "table",
    full_theorem_class: bool = True,
) -> DefiningFunction:
    """Domain from sampled (x, g, g') rows; g is frozen outside the table range.

    The constant extension keeps the tails superlinear (x^(2m) times the
    boundary value), so the dual cone is the full half-plane; the usual
    class invariants are still validated on the represented grid.
    """
    xs = np.asarray(xs, dtype=float)
    gs = np.asarray(gs, dtype=float)
    gps = np.asarray(gprimes, dtype=float)
    if xs.ndim != 1 or xs.size < 4:
        raise DomainError("table needs at least 4 sample rows")
    if np.any(np.diff(xs) <= 0):
        raise DomainError("table x-values must be strictly increasing")
    if not (xs[0] < 0.0 < xs[-1]):
        raise DomainError("table must bracket x = 0")
    spl = CubicHermiteSpline(xs, gs, gps)
    dspl = spl.derivative()
    ddspl = dspl.derivative()
    lo, hi = float(xs[0]), float(xs[-1])
    glo, ghi = float(gs[0]), float(gs[-1])

    def gv(x):
        xc = np.clip(x, lo, hi)
        out = np.asarray(spl(xc), dtype=float)
        out[x < lo] = glo
        out[x > hi] = ghi
        return out

    def gpv(x):
        out = np.asarray(dspl(np.clip(x, lo, hi)), dtype=float)
        out[(x < lo) | (x > hi)] = 0.0
        return out

    def gppv(x):
        out = np.asarray(ddspl(np.clip(x, lo, hi)), dtype=float)
        out[(x < lo) | (x > hi)] = 0.0
        return out

    n = 2 * int(m)

    def fv(x):
        return x**n * gv(x)

    def fpv(x):
        return x ** (n - 1) * (n * gv(x) + x * gpv(x))

    def fppv(x):
        return x ** (n - 2) * (n * (n - 1) * gv(x) + 2.0 * n * x * gpv(x) + x * x * gppv(x))

    return DefiningFunction(
        m,
        fv,
        fpv,
        fppv,
        gv,
        gpv,
        label=label,
        full_theorem_class=full_theorem_class,
        tail_slopes=(math.inf, math.inf),
    )


# ---------------------------------------------------------------------------
# mollification
# ---------------------------------------------------------------------------


def _smooth_step(t: np.ndarray) -> np.ndarray:
    """C-infinity step: 0 for t<=0, 1 for t>=1, flat to all orders at both ends."""
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        a = np.where(t > 0.0, np.exp(-1.0 / np.clip(t, 1e-300, None)), 0.0)
        b = np.where(t < 1.0, np.exp(-1.0 / np.clip(1.0 - t, 1e-300, None)), 0.0)
    return a / (a + b)


def _plateau(s: np.ndarray, a: float, b: float, ramp: float = 0.2) -> np.ndarray:
    """Unit-height plateau bump on [a, b] with smooth-step ramps."""
    r = ramp * (b - a)
    return _smooth_step((s - a) / r) * _smooth_step((b - s) / r)


def mollify(f: DefiningFunction, delta: float) -> DefiningFunction:
    """Flatten g outside |x| <= delta so the boundary is strictly convex
    away from the origin while the germ at 0 is untouched.

    The blend keeps g~ = g on |x| <= delta, lands exactly on (9/10) g(0)
    with zero slope at |x| = 1, and stays constant beyond.  The curvature
    budget |x^2 g~''| < g(0)/5 caps how much drop a given delta can carry;
    deltas beyond roughly 0.19 cannot reach the required 0.1 g(0) drop with
    any admissible profile and are rejected.
    """
    d = float(delta)
    if not (0.0 < d < 1.0):
        raise DomainError(f"delta must lie in (0, 1), got {delta!r}")
    g0 = f.g0
    target = 0.9 * g0
    bound = g0 / 5.0

    g_d = f.g(d)
    gp_d = f.gprime(d)
    if g_d < target:
        raise DomainError(
            f"g({d}) = {g_d} already below the flat level {target}; "
            "choose a smaller delta"
        )

    # two plateau bumps in s^2 g~''(s): down on [delta, xs], up on [xs, 1]
    xs_split = 2.0 * d / (1.0 + d)

    def b1(s):
        return _plateau(s, d, xs_split)

    def b2(s):
        return _plateau(s, xs_split, 1.0)

    I1 = quad(lambda s: b1(np.asarray([s]))[0] / s**2, d, xs_split, limit=200)[0]
    I2 = quad(lambda s: b2(np.asarray([s]))[0] / s**2, xs_split, 1.0, limit=200)[0]
    J1 = quad(lambda s: (1.0 - s) * b1(np.asarray([s]))[0] / s**2, d, xs_split, limit=200)[0]
    J2 = quad(lambda s: (1.0 - s) * b2(np.asarray([s]))[0] / s**2, xs_split, 1.0, limit=200)[0]

    # g~'' = (-c1 B1 + c2 B2)/s^2 with: slope zero at 1, value 0.9 g0 at 1
    # [ -I1  I2 ] [c1]   [ -g'(delta)                         ]
    # [ -J1  J2 ] [c2] = [ 0.9 g0 - g(delta) - g'(delta)(1-d) ]
    det = (-I1) * J2 - I2 * (-J1)
    rhs1 = -gp_d
    rhs2 = target - g_d - gp_d * (1.0 - d)
    if abs(det) < 1e-300:
        raise DomainError("singular mollifier system")
    c1 = (rhs1 * J2 - I2 * rhs2) / det
    c2 = ((-I1) * rhs2 - rhs1 * (-J1)) / det

    amp = max(abs(c1), abs(c2))
    if amp >= 0.95 * bound:
        raise DomainError(
            f"delta = {d} too large for the blend to exist: the required "
            f"curvature amplitude {amp:.4g} exceeds the budget "
            f"|x^2 g~''| < {bound:.4g}"
        )

    def gpp_blend(s):
        return (-c1 * b1(s) + c2 * b2(s)) / (s * s)

    nodes = np.unique(
        np.concatenate(
            [
                np.linspace(d, 1.0, 6001),
                np.linspace(d, xs_split, 1500),
                np.linspace(xs_split, 1.0, 1500),
            ]
        )
    )
    sp2 = CubicSpline(nodes, gpp_blend(nodes))
    sp1 = sp2.antiderivative()  # zero at delta
    sp0 = sp1.antiderivative()

    g_end = g_d + gp_d * (1.0 - d) + float(sp0(1.0))

    def gv(x):
        s = np.abs(x)
        out = np.empty_like(s)
        inner = s <= d
        outer = s >= 1.0
        midm = ~(inner | outer)
        out[inner] = f.g(x[inner])
        out[outer] = g_end
        sm = s[midm]
        out[midm] = g_d + gp_d * (sm - d) + sp0(sm)
        return out

    def gpv(x):
        s = np.abs(x)
        out = np.empty_like(s)
        inner = s <= d
        outer = s >= 1.0
        midm = ~(inner | outer)
        out[inner] = f.gprime(x[inner])
        out[outer] = 0.0
        out[midm] = (gp_d + sp1(s[midm])) * np.sign(x[midm])
        return out

    def gppv_signed(x):
        s = np.abs(x)
        out = np.zeros_like(s)
        midm = (s > d) & (s < 1.0)
        out[midm] = sp2(s[midm])
        inner = s <= d
        if np.any(inner):
            # fall back on the parent's curvature inside the core
            h = 2e-6 * (1.0 + s[inner])
            out[inner] = (f.g(x[inner] + h) - 2 * f.g(x[inner]) + f.g(x[inner] - h)) / (h * h)
        return out

    n = 2 * f.m

    def fv(x):
        return x**n * gv(x)

    def fpv(x):
        return x ** (n - 1) * (n * gv(x) + x * gpv(x))

    def fppv(x):
        return x ** (n - 2) * (
            n * (n - 1) * gv(x) + 2.0 * n * x * gpv(x) + x * x * gppv_signed(x)
        )

    out = DefiningFunction(
        f.m,
        fv,
        fpv,
        fppv,
        gv,
        gpv,
        label=f"mollified({f.label},delta={d:g})",
        full_theorem_class=f.full_theorem_class,
        tail_slopes=(math.inf, math.inf),
        is_mollified=True,
    )

    # post-conditions of the construction itself
    ss = np.linspace(d, 1.0, 2001)[1:-1]
    if np.any(np.abs(ss * ss * sp2(ss)) >= bound):
        raise DomainError("mollifier curvature bound violated on the blend")
    if np.any(gp_d + sp1(ss) > 1e-12):
        raise DomainError("mollified g failed to stay non-increasing")
    return out


def damp_tails(f: DefiningFunction, radius: float) -> DefiningFunction:
    """Same core as f, exactly linear tails: the localization partner.

    The second derivative is multiplied by a plateau that equals 1 through
    1.1 * radius (so the two domains agree there exactly by double
    integration from 0) and falls smoothly to zero by 2.4 * radius, after
    which the function continues as an exact straight line.  Convexity is
    inherited; the dual cone is known in closed form.
    """
    r = float(radius)
    if not (r > 0 and math.isfinite(r)):
        raise DomainError(f"radius must be positive, got {radius!r}")
    r1, r2 = 1.1 * r, 2.4 * r

    def theta(s):
        return _smooth_step((r2 - s) / (r2 - r1))

    s_nodes = np.linspace(r1, r2, 4001)
    sp2 = CubicSpline(s_nodes, f.fsecond(s_nodes) * theta(s_nodes))
    sp1 = sp2.antiderivative()
    sp0 = sp1.antiderivative()
    f_r1 = f.f(r1)
    fp_r1 = f.fprime(r1)
    slope = fp_r1 + float(sp1(r2))
    f_r2 = f_r1 + fp_r1 * (r2 - r1) + float(sp0(r2))

    def half_f(s):
        out = np.empty_like(s)
        a = s <= r1
        c = s >= r2
        b = ~(a | c)
        out[a] = f.f(s[a])
        out[b] = f_r1 + fp_r1 * (s[b] - r1) + sp0(s[b])
        out[c] = f_r2 + slope * (s[c] - r2)
        return out

    def half_fp(s):
        out = np.empty_like(s)
        a = s <= r1
        c = s >= r2
        b = ~(a | c)
        out[a] = f.fprime(s[a])
        out[b] = fp_r1 + sp1(s[b])
        out[c] = slope
        return out

    def half_fpp(s):
        out = np.zeros_like(s)
        a = s <= r1
        b = (s > r1) & (s < r2)
        out[a] = f.fsecond(s[a])
        out[b] = sp2(s[b])
        return out

    def fv(x):
        return half_f(np.abs(x))

    def fpv(x):
        return np.sign(x) * half_fp(np.abs(x))

    def fppv(x):
        return half_fpp(np.abs(x))

    n = 2 * f.m

    def gv(x):
        s = np.abs(x)
        out = np.empty_like(s)
        a = s <= r1
        out[a] = f.g(x[a])
        xs = s[~a]
        out[~a] = half_f(xs) / xs**n
        return out

    def gpv(x):
        s = np.abs(x)
        out = np.empty_like(s)
        a = s <= r1
        out[a] = f.gprime(x[a])
        xs = s[~a]
        out[~a] = (xs * half_fp(xs) - n * half_f(xs)) / xs ** (n + 1) * np.sign(x[~a])
        return out

    return DefiningFunction(
        f.m,
        fv,
        fpv,
        fppv,
        gv,
        gpv,
        label=f"linear-tails({f.label},r={r:g})",
        full_theorem_class=False,
        tail_slopes=(slope, slope),
    )
