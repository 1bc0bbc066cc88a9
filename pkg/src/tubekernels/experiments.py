"""Boundary-approach experiments: exponent fits, coefficient limits,
localization comparisons, and the strictly-pseudoconvex distance limit.

Each experiment returns a plain dict report embedding the chart id, a hash
of the quadrature configuration, and per-point error estimates, so a run
is reproducible from its report alone.  Failing points are recorded with
their error text and excluded from fits rather than aborting the sweep.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .blowup import BlowupChart, PolarPoint, from_polar
from .domain_model import BoundaryRelativePoint, DefiningFunction, DomainError
from .quadrature import (
    KernelValue,
    QuadratureConfig,
    QuadratureError,
    direct_pair,
)

__all__ = [
    "ApproachPath",
    "FitResult",
    "default_rho_grid",
    "path_points",
    "evaluate_path",
    "fit_exponent",
    "limit_c0",
    "blowup_exponent",
    "hormander_series",
    "hormander_check",
    "localization_experiment",
    "admissible_coefficient_sweep",
]


def default_rho_grid(n: int = 15, start: float = 1.0, ratio: float = 0.5) -> np.ndarray:
    """Geometric rho grid, default 1, 1/2, ..., 2^-14."""
    return start * ratio ** np.arange(n)


@dataclass(frozen=True)
class ApproachPath:
    """A family of interior points approaching the boundary.

    mode "fixed_tau": blow-up angle constant, rho = y decreasing (parameters:
    tau, optional branch).  mode "fixed_x": x constant nonzero, y = f(x) + rho
    (a strictly pseudoconvex approach).  mode "normal_cone": x = aperture * rho,
    a non-tangential cone at the origin (parameters: aperture).
    """

    mode: str
    parameters: dict
    rho_grid: np.ndarray = field(default_factory=default_rho_grid)

    def __post_init__(self):
        if self.mode not in ("fixed_tau", "fixed_x", "normal_cone"):
            raise DomainError(f"unknown approach mode {self.mode!r}")
        rg = np.asarray(self.rho_grid, dtype=float)
        if rg.ndim != 1 or rg.size < 2 or np.any(rg <= 0) or np.any(np.diff(rg) >= 0):
            raise DomainError("rho_grid must be positive and strictly decreasing")
        object.__setattr__(self, "rho_grid", rg)


def path_points(
    f: DefiningFunction, path: ApproachPath, chart: BlowupChart | None = None
) -> list[BoundaryRelativePoint]:
    """Interior points realizing the path on the given domain."""
    pts = []
    if path.mode == "fixed_tau":
        tau = float(path.parameters["tau"])
        branch = int(path.parameters.get("branch", +1))
        if not (0.0 < tau <= 1.0):
            raise DomainError(f"fixed_tau needs tau in (0, 1], got {tau!r}")
        chart = chart or BlowupChart(f.m)
        for rho in path.rho_grid:
            if tau == 1.0:
                pts.append(BoundaryRelativePoint(0.0, float(rho)))
            else:
                pts.append(from_polar(f, chart, PolarPoint(tau, float(rho), branch)))
    elif path.mode == "fixed_x":
        x = float(path.parameters["x"])
        fx = float(f.f(x))
        for rho in path.rho_grid:
            pts.append(BoundaryRelativePoint(x, fx + float(rho)))
    else:
        c = float(path.parameters.get("aperture", 1.0))
        for rho in path.rho_grid:
            pts.append(BoundaryRelativePoint(c * float(rho), float(rho)))
    for p in pts:
        f.require_interior(p)
    return pts


def _config_hash(cfg: QuadratureConfig) -> str:
    text = f"{cfg.rel_tol}|{cfg.abs_tol}|{cfg.max_depth}|{cfg.truncation_drop}|{cfg.scaling}"
    return hashlib.sha256(text.encode()).hexdigest()[:12]


def evaluate_path(
    f: DefiningFunction,
    path: ApproachPath,
    cfg: QuadratureConfig | None = None,
    chart: BlowupChart | None = None,
) -> list[dict]:
    """Kernel pair along a path; one dict row per grid point.

    Rows carry x, y, rho, both kernels, error estimates, and a status field
    ("ok" or the failure text); failed points keep their place in the grid.
    """
    cfg = cfg or QuadratureConfig()
    pts = path_points(f, path, chart)
    rows = []
    for p, rho in zip(pts, path.rho_grid):
        row = {"x": p.x, "y": p.y, "rho": float(rho)}
        try:
            K, S = direct_pair(f, p, cfg)
            row.update(
                bergman=K, szego=S, err_estimate=max(K.err_estimate, S.err_estimate),
                status="ok",
            )
        except (QuadratureError, DomainError) as exc:
            row.update(bergman=None, szego=None, err_estimate=math.inf,
                       status=f"{type(exc).__name__}: {exc}")
        rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# fitting and extrapolation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    max_residual: float
    window: tuple[int, int]

    def as_dict(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "max_residual": self.max_residual,
            "window": list(self.window),
        }


def _resolve_window(n: int, window_policy) -> tuple[int, int]:
    if isinstance(window_policy, str):
        if window_policy == "all":
            k = n
        elif window_policy.startswith("trailing:"):
            k = int(window_policy.split(":", 1)[1])
        else:
            raise DomainError(f"unknown window policy {window_policy!r}")
    else:
        k = int(window_policy)
    if not (2 <= k <= n):
        raise DomainError(f"window of {k} points does not fit a grid of {n}")
    return n - k, n


def _log_values(values) -> np.ndarray:
    out = []
    for v in values:
        if isinstance(v, KernelValue):
            out.append(v.log_value)
        else:
            fv = float(v)
            out.append(math.log(fv) if fv > 0 else -math.inf)
    return np.array(out)


def fit_exponent(values, rho_grid, window_policy="trailing:6") -> FitResult:
    """Least-squares slope of log K against log rho on a trailing window.

    ``values`` are KernelValue objects (or positive reals); the slope
    estimates the blow-up exponent, e.g. -(2 + 1/m) on a fixed-tau Bergman
    path.
    """
    rho = np.asarray(rho_grid, dtype=float)
    lv = _log_values(values)
    if rho.size != lv.size:
        raise DomainError("values and rho_grid lengths differ")
    if rho.size < 6:
        raise DomainError("need at least 6 grid points to fit")
    if np.unique(rho).size != rho.size or np.any(rho <= 0):
        raise DomainError("degenerate rho grid")
    i0, i1 = _resolve_window(rho.size, window_policy)
    lr = np.log(rho[i0:i1])
    lw = lv[i0:i1]
    if not np.all(np.isfinite(lw)):
        raise DomainError("non-finite values inside the fit window")
    slope, intercept = np.polyfit(lr, lw, 1)
    resid = lw - (slope * lr + intercept)
    return FitResult(
        slope=float(slope),
        intercept=float(intercept),
        max_residual=float(np.max(np.abs(resid))),
        window=(i0, i1),
    )


def blowup_exponent(m: int, kind: str) -> Fraction:
    if kind == "bergman":
        return Fraction(2 * m + 1, m)
    if kind == "szego":
        return Fraction(m + 1, m)
    raise DomainError(f"kind must be 'bergman' or 'szego', got {kind!r}")


def limit_c0(values, rho_grid, m: int, kind: str) -> tuple[float, float]:
    """Richardson-extrapolated limit of K * rho^(2+1/m) (or S * rho^(1+1/m)).

    The leading correction on a fixed-tau path is O(rho^(1/m)), so each
    adjacent pair is extrapolated with theta = (rho_next/rho)^(1/m); the
    returned indicator is the relative gap between the last two extrapolants
    (a Cauchy tail: small means converged, order of the quadrature noise for
    an exactly homogeneous model).
    """
    rho = np.asarray(rho_grid, dtype=float)
    lv = _log_values(values)
    expo = float(blowup_exponent(m, kind))
    if rho.size < 3:
        raise DomainError("need at least 3 points to extrapolate")
    c = np.exp(lv + expo * np.log(rho))
    if not np.all(np.isfinite(c)):
        raise DomainError("non-finite scaled values")
    ext = []
    for k in range(rho.size - 1):
        theta = (rho[k + 1] / rho[k]) ** (1.0 / m)
        ext.append((c[k + 1] - theta * c[k]) / (1.0 - theta))
    est, prev = ext[-1], ext[-2]
    indicator = abs(est - prev) / max(abs(est), 1e-300)
    return float(est), float(indicator)


# ---------------------------------------------------------------------------
# strictly pseudoconvex distance limit
# ---------------------------------------------------------------------------


def _nearest_boundary_distance(f: DefiningFunction, px: float, py: float) -> float:
    """Euclidean distance from an interior point to the curve y = f(x)."""
    psi = lambda t: (t - px) + (float(f.f(t)) - py) * float(f.fprime(t))
    w = max(1e-3, 0.1 * (1.0 + abs(px)))
    a, b = px - w, px + w
    fa, fb = psi(a), psi(b)
    k = 0
    while fa > 0 and k < 60:
        w *= 2.0
        a -= w
        fa = psi(a)
        k += 1
    k = 0
    while fb < 0 and k < 60:
        w *= 2.0
        b += w
        fb = psi(b)
        k += 1
    if not (fa <= 0 <= fb):
        raise DomainError("nearest-point projection failed to bracket")
    for _ in range(200):
        mid = 0.5 * (a + b)
        if b - a < 1e-15 * (1.0 + abs(mid)):
            break
        if psi(mid) > 0:
            b = mid
        else:
            a = mid
    t = 0.5 * (a + b)
    return math.hypot(t - px, float(f.f(t)) - py)


def _levi_determinant_fd(f: DefiningFunction, x0: float) -> float:
    """Levi determinant of Im z2 - f(Im z1) on the complex tangent space,
    from f-values only (independent of the stored derivative callables).

    For a graph boundary in C^2 the normalized determinant reduces to
    f''(x0) / (4 (1 + f'(x0)^2)^(3/2)); both derivatives are taken by
    Richardson-refined central differences.
    """
    h = 1e-3 * (1.0 + abs(x0))

    def d1(hh):
        return (float(f.f(x0 + hh)) - float(f.f(x0 - hh))) / (2 * hh)

    def d2(hh):
        return (
            float(f.f(x0 + hh)) - 2.0 * float(f.f(x0)) + float(f.f(x0 - hh))
        ) / hh**2

    fp = (4.0 * d1(h / 2) - d1(h)) / 3.0
    fpp = (4.0 * d2(h / 2) - d2(h)) / 3.0
    return fpp / (4.0 * (1.0 + fp * fp) ** 1.5)


def hormander_series(
    f: DefiningFunction, x0: float, cfg: QuadratureConfig | None = None
) -> list[dict]:
    """Per-step data for the distance limit: K * d^3 along the inward normal.

    Steps eps = 0.1 * 2^-k, k = 0..9, from the boundary point (x0, f(x0));
    d is the exact nearest-point distance to the curve, not the vertical gap.
    """
    cfg = cfg or QuadratureConfig()
    x0 = float(x0)
    if x0 == 0.0:
        raise DomainError("x0 = 0 is the degenerate point; pick x0 != 0")
    fpp = float(f.fsecond(x0))
    if not (fpp > 0):
        raise DomainError(f"boundary not strictly pseudoconvex at x0={x0:g}")
    bx, by = x0, float(f.f(x0))
    fp = float(f.fprime(x0))
    nrm = math.hypot(fp, 1.0)
    nx, ny = -fp / nrm, 1.0 / nrm

    rows = []
    for e in 0.1 * 0.5 ** np.arange(10):
        p = BoundaryRelativePoint(float(bx + e * nx), float(by + e * ny))
        f.require_interior(p)
        K, _ = direct_pair(f, p, cfg)
        d = _nearest_boundary_distance(f, p.x, p.y)
        rows.append(
            {"eps": float(e), "x": p.x, "y": p.y, "distance": d,
             "bergman": K, "scaled": K.value * d**3}
        )
    return rows


def hormander_check(
    f: DefiningFunction, x0: float, cfg: QuadratureConfig | None = None
) -> tuple[float, float, float]:
    """Bergman distance limit at a strictly pseudoconvex boundary point.

    Richardson-extrapolates the last pair of the K * d^3 series against the
    prediction detLevi/(2 pi^2), where the Levi determinant comes from a
    finite-difference oracle that never touches the quadrature.  Returns
    (measured_limit, predicted_limit, ratio).
    """
    rows = hormander_series(f, x0, cfg)
    measured = 2.0 * rows[-1]["scaled"] - rows[-2]["scaled"]
    predicted = _levi_determinant_fd(f, float(x0)) / (2.0 * math.pi**2)
    return float(measured), float(predicted), float(measured / predicted)


# ---------------------------------------------------------------------------
# localization and coefficient sweeps
# ---------------------------------------------------------------------------


def _log_abs_diff(l1: float, l2: float) -> float:
    if l1 == l2:
        return -math.inf
    hi, lo = max(l1, l2), min(l1, l2)
    return hi + math.log1p(-math.exp(lo - hi))


def localization_experiment(
    f1: DefiningFunction,
    f2: DefiningFunction,
    path: ApproachPath,
    cfg: QuadratureConfig | None = None,
    *,
    chart: BlowupChart | None = None,
    agreement_radius: float = 0.5,
    slope_rel_tol: float = 0.01,
    bounded_slope_floor: float = -0.1,
    window_policy="trailing:6",
) -> dict:
    """Compare kernels of two domains that coincide on |x| < agreement_radius.

    Along a fixed-tau path both kernels blow up at the full rate while their
    difference stays bounded; the report asserts a trailing-window slope of
    log|K1 - K2| above ``bounded_slope_floor`` and each individual slope
    within ``slope_rel_tol`` of -(2 + 1/m).
    """
    cfg = cfg or QuadratureConfig()
    if path.mode != "fixed_tau":
        raise DomainError("localization runs on a fixed_tau path")
    if f1.m != f2.m:
        raise DomainError("domains must share the degeneracy order m")
    probe = np.linspace(-agreement_radius, agreement_radius, 257)
    gap = float(np.max(np.abs(f1.f(probe) - f2.f(probe))))
    if gap != 0.0:
        raise DomainError(
            f"domains differ by {gap:.3e} inside |x| < {agreement_radius:g}"
        )
    chart = chart or BlowupChart(f1.m)
    rows1 = evaluate_path(f1, path, cfg, chart)
    rows2 = evaluate_path(f2, path, cfg, chart)

    points = []
    ok = []
    for r1, r2 in zip(rows1, rows2):
        status = r1["status"] if r1["status"] != "ok" else r2["status"]
        rec = {
            "rho": r1["rho"], "x": r1["x"], "y": r1["y"], "status": status,
        }
        if status == "ok":
            k1, k2 = r1["bergman"], r2["bergman"]
            rec.update(
                log_k1=k1.log_value, log_k2=k2.log_value,
                k1=k1.value, k2=k2.value, diff=k1.value - k2.value,
                log_abs_diff=_log_abs_diff(k1.log_value, k2.log_value),
                err_estimate=max(k1.err_estimate, k2.err_estimate),
            )
            ok.append(rec)
        points.append(rec)

    report = {
        "experiment": "localization",
        "m": f1.m,
        "domains": [f1.label, f2.label],
        "agreement_radius": agreement_radius,
        "chart_id": chart.chart_id,
        "config_hash": _config_hash(cfg),
        "points": points,
        "excluded": [p["rho"] for p in points if p["status"] != "ok"],
    }
    w0, w1 = _resolve_window(len(path.rho_grid), window_policy)
    if len(ok) < max(w1 - w0, 6):
        report.update(passed=False, reason="too few converged points to fit")
        return report

    rho = np.array([p["rho"] for p in ok])
    expo = float(blowup_exponent(f1.m, "bergman"))
    fit1 = fit_exponent([p["k1"] for p in ok], rho, window_policy)
    fit2 = fit_exponent([p["k2"] for p in ok], rho, window_policy)
    report["fit_k1"] = fit1.as_dict()
    report["fit_k2"] = fit2.as_dict()

    # a difference at quadrature-noise level counts as identically zero
    i0, i1 = _resolve_window(rho.size, window_policy)
    noise = max(
        max(p["k1"], p["k2"]) * p["err_estimate"] * 10.0 for p in ok[i0:i1]
    )
    tail_diffs = [abs(p["diff"]) for p in ok[i0:i1]]
    if max(tail_diffs) <= noise:
        report.update(
            diff_below_noise=True, fit_diff=None, bounded=True,
            slopes_ok=(
                abs(fit1.slope + expo) <= slope_rel_tol * expo
                and abs(fit2.slope + expo) <= slope_rel_tol * expo
            ),
        )
    else:
        fitd = fit_exponent([abs(p["diff"]) for p in ok], rho, window_policy)
        report.update(
            diff_below_noise=False,
            fit_diff=fitd.as_dict(),
            bounded=fitd.slope >= bounded_slope_floor,
            slopes_ok=(
                abs(fit1.slope + expo) <= slope_rel_tol * expo
                and abs(fit2.slope + expo) <= slope_rel_tol * expo
            ),
        )
    report["passed"] = bool(report["bounded"] and report["slopes_ok"])
    return report


def admissible_coefficient_sweep(
    f: DefiningFunction,
    chart: BlowupChart,
    alpha: float,
    kind: str,
    cfg: QuadratureConfig | None = None,
    *,
    n_tau: int = 8,
    tau_margin: float = 0.05,
    rho_grid: np.ndarray | None = None,
) -> dict:
    """Leading-coefficient estimates across the admissible angles.

    Sweeps tau over [1/alpha + margin, 1], extrapolates c0(tau) on each
    fixed-tau path, and checks the scaled family c0(tau) * tau^3 (Bergman;
    tau^2 for Szego) stays bounded - the coefficient-boundedness property
    of the admissible region.
    """
    cfg = cfg or QuadratureConfig()
    if not (alpha > 1):
        raise DomainError(f"alpha must exceed 1, got {alpha!r}")
    expo = blowup_exponent(f.m, kind)  # validates kind
    power = 3 if kind == "bergman" else 2
    tau_lo = 1.0 / alpha + tau_margin
    if not (tau_lo < 1.0):
        raise DomainError("margin pushes the sweep past tau = 1")
    taus = np.linspace(tau_lo, 1.0, n_tau)
    if rho_grid is None:
        rho_grid = default_rho_grid(11)

    rows = []
    for tau in taus:
        path = ApproachPath("fixed_tau", {"tau": float(tau)}, rho_grid)
        evals = evaluate_path(f, path, cfg, chart)
        good = [r for r in evals if r["status"] == "ok"]
        rec = {"tau": float(tau), "n_points": len(good)}
        if len(good) < 3:
            rec.update(status="failed: too few converged points", c0=math.nan,
                       indicator=math.inf, scaled=math.nan, err_max=math.inf)
        else:
            vals = [r[kind] for r in good]
            rhos = np.array([r["rho"] for r in good])
            c0, ind = limit_c0(vals, rhos, f.m, kind)
            rec.update(
                status="ok", c0=c0, indicator=ind, scaled=c0 * tau**power,
                err_max=max(r["err_estimate"] for r in good),
            )
        rows.append(rec)

    scaled = [r["scaled"] for r in rows if r["status"] == "ok"]
    all_finite = len(scaled) == len(rows) and all(math.isfinite(s) for s in scaled)
    return {
        "experiment": "admissible_coefficient_sweep",
        "m": f.m,
        "domain": f.label,
        "kind": kind,
        "exponent": str(expo),
        "alpha": alpha,
        "scaled_power": power,
        "chart_id": chart.chart_id,
        "config_hash": _config_hash(cfg),
        "rows": rows,
        "sup_scaled": max(scaled) if scaled else math.inf,
        "passed": bool(all_finite),
    }
