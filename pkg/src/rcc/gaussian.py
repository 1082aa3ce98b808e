"""Closed-form Gaussian regions and secrecy capacities.

The channel is Y = X + S + xi1, Z = X + xi2 with noise variances N1, N2 and
correlation rho, and power limits P1 (sender) and P2 (relay). theta splits
the sender power between the private and the common part; eta splits the
common part between the cooperative and the relay-only direction.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import NegativeArgument, ValidationError
from .regions import SLACK_TOL, RateTriple

RD_TOL = 1e-12
REFINE_TOL = 1e-10


@dataclass(frozen=True)
class GaussianSpec:
    P1: float
    P2: float
    N1: float
    N2: float
    rho: float

    def __post_init__(self):
        for name in ("P1", "P2", "N1", "N2", "rho"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"{name} must be finite")
        if self.P1 < 0 or self.P2 < 0:
            raise ValidationError("powers must be >= 0")
        if self.N1 <= 0 or self.N2 <= 0:
            raise ValidationError("noise variances must be > 0")
        if not abs(self.rho) < 1:
            raise ValidationError("|rho| must be < 1")

    @property
    def n1_tilde(self) -> float:
        return n1_tilde(self.N1, self.N2, self.rho)

    @property
    def reversely_degraded(self) -> bool:
        return self.N1 <= self.N2 and abs(self.rho - math.sqrt(self.N1 / self.N2)) <= RD_TOL


class GaussianRegion(enum.Enum):
    GD_IN = "gd-in"
    GD_OUT = "gd-out"
    GS_IN = "gs-in"
    GS_OUT = "gs-out"
    GD1E_IN = "gd1e-in"
    GD1E_OUT = "gd1e-out"
    GS1E_IN = "gs1e-in"
    GS1E_OUT = "gs1e-out"
    GCSS_IN = "gcss-in"
    GCSS_OUT = "gcss-out"

    @classmethod
    def parse(cls, text):
        key = text.strip().lower().replace("_", "-")
        for r in cls:
            if r.value == key:
                return r
        raise ValidationError(f"unknown Gaussian region {text!r}; choose from {[r.value for r in cls]}")

    @property
    def outer(self):
        return self.value.endswith("-out")

    @property
    def uses_theta(self):
        return self not in (GaussianRegion.GS1E_IN, GaussianRegion.GS1E_OUT)

    @property
    def uses_eta(self):
        return self in (
            GaussianRegion.GD_IN, GaussianRegion.GD_OUT, GaussianRegion.GS_IN,
            GaussianRegion.GS_OUT, GaussianRegion.GCSS_IN, GaussianRegion.GCSS_OUT,
        )


def cap(x):
    """C(x) = 1/2 log2(1 + x) for x >= 0 (scalar or array)."""
    arr = np.asarray(x, dtype=np.float64)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise NegativeArgument(f"C(x) needs x >= 0, got {x}")
    out = 0.5 * np.log2(1.0 + arr)
    return float(out) if out.ndim == 0 else out


def _c(x):
    # unchecked variant for internal vectorised use; clips round-off below 0
    return 0.5 * np.log2(1.0 + np.maximum(x, 0.0))


def n1_tilde(N1, N2, rho):
    """(1 - rho^2) N1 N2 / (N1 + N2 - 2 rho sqrt(N1 N2))."""
    return (1 - rho**2) * N1 * N2 / (N1 + N2 - 2 * rho * math.sqrt(N1 * N2))


# ----------------------------------------------------------------------------
# building blocks


def common_terms(spec: GaussianSpec, theta, eta):
    """The two R0 terms min{A, B} at (theta, eta), broadcast over arrays."""
    theta = np.asarray(theta, dtype=np.float64)
    eta = np.asarray(eta, dtype=np.float64)
    tb, eb = 1 - theta, 1 - eta
    coop = 2 * np.sqrt(np.maximum(tb * eb * spec.P1 * spec.P2, 0.0))
    a = _c((tb * spec.P1 + spec.P2 + coop) / (theta * spec.P1 + spec.N1))
    b = _c(tb * eta * spec.P1 / (theta * spec.P1 + spec.N2))
    return a, b


def sum_term(spec: GaussianSpec, theta, eta):
    """C((P1 + P2 + 2 sqrt(theta' eta' P1 P2)) / N1), the outer sum-rate cap."""
    tb, eb = 1 - np.asarray(theta, dtype=np.float64), 1 - np.asarray(eta, dtype=np.float64)
    coop = 2 * np.sqrt(np.maximum(tb * eb * spec.P1 * spec.P2, 0.0))
    return _c((spec.P1 + spec.P2 + coop) / spec.N1)


def best_eta(spec: GaussianSpec, theta, iters=60):
    """argmax over eta of min{A, B} and the maximum, vectorised over theta.

    A falls and B rises with eta, so the maximiser is the crossing point (or
    an end of [0, 1]); it is located by bisection on A - B.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=np.float64))
    lo, hi = np.zeros_like(theta), np.ones_like(theta)
    a1, b1 = common_terms(spec, theta, hi)
    a0, b0 = common_terms(spec, theta, lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        a, b = common_terms(spec, theta, mid)
        up = a > b
        lo = np.where(up, mid, lo)
        hi = np.where(up, hi, mid)
    eta = 0.5 * (lo + hi)
    eta = np.where(a1 >= b1, 1.0, np.where(a0 <= b0, 0.0, eta))
    a, b = common_terms(spec, theta, eta)
    return eta, np.minimum(a, b)


def r0_inner(spec: GaussianSpec, theta):
    """max over eta of min{A, B} at each theta."""
    return best_eta(spec, theta)[1]


# ----------------------------------------------------------------------------
# constraint lists


def region_slacks(region: GaussianRegion, spec: GaussianSpec, theta, eta, t: RateTriple):
    """Slack of every inequality of ``region`` at (theta, eta); broadcasts.

    Regions whose R0 cap is a max over eta (the inner bounds and the secrecy
    capacity regions) take that max internally and ignore ``eta``. The two
    single-letter stochastic regions ignore ``theta`` too (theta = 1).
    """
    return rate_slacks(region, spec, theta, eta, t.R0, t.R1, t.Re)


def rate_slacks(region: GaussianRegion, spec: GaussianSpec, theta, eta, R0, R1, Re):
    """``region_slacks`` with the rates given as (broadcastable) arrays."""
    R0, R1, Re = (np.asarray(v, dtype=np.float64) for v in (R0, R1, Re))
    theta = np.asarray(theta, dtype=np.float64)
    eta = np.asarray(eta, dtype=np.float64)
    P1, N1, N2, Nt = spec.P1, spec.N1, spec.N2, spec.n1_tilde
    if not region.uses_theta:
        theta = np.ones_like(theta)
    r1_in = _c(theta * P1 / N1)
    r1_out = _c(theta * P1 / Nt)
    leak = _c(theta * P1 / N2)
    R = GaussianRegion
    if region in (R.GD_IN, R.GS_IN, R.GCSS_IN, R.GCSS_OUT):
        r0 = r0_inner(spec, theta.ravel()).reshape(theta.shape)
    elif region in (R.GD_OUT, R.GS_OUT):
        a, b = common_terms(spec, theta, eta)
        r0 = np.minimum(a, b)
        total = sum_term(spec, theta, eta)
    zero = np.zeros(np.broadcast(theta, eta, R0, R1, Re).shape)
    if region is R.GD_IN:
        return {
            "R0<=R0in": r0 - R0 + zero,
            "R1<=C(tP1/N1)": r1_in - R1 + zero,
            "Re<=[R1-C(tP1/N2)]+": np.maximum(R1 - leak, 0) - Re + zero,
        }
    if region is R.GD_OUT:
        return {
            "R0<=min{A,B}": r0 - R0 + zero,
            "R1<=C(tP1/Nt)": r1_out - R1 + zero,
            "R0+R1<=sum": total - R0 - R1 + zero,
            "Re<=[R1-C(tP1/N2)]+": np.maximum(R1 - leak, 0) - Re + zero,
        }
    if region is R.GS_IN:
        return {
            "R0<=R0in": r0 - R0 + zero,
            "Re<=R1": R1 - Re + zero,
            "R1<=C(tP1/N1)": r1_in - R1 + zero,
            "Re<=[C(tP1/N1)-C(tP1/N2)]+": np.maximum(r1_in - leak, 0) - Re + zero,
        }
    if region is R.GS_OUT:
        return {
            "R0<=min{A,B}": r0 - R0 + zero,
            "R0+R1<=sum": total - R0 - R1 + zero,
            "Re<=R1": R1 - Re + zero,
            "R1<=C(tP1/Nt)": r1_out - R1 + zero,
            "Re<=[C(tP1/Nt)-C(tP1/N2)]+": np.maximum(r1_out - leak, 0) - Re + zero,
        }
    if region in (R.GD1E_IN, R.GD1E_OUT):
        r1 = r1_in if region is R.GD1E_IN else r1_out
        return {
            "R0=0": -R0 + zero,
            "R1<=C(tP1/N)": r1 - R1 + zero,
            "Re<=[R1-C(tP1/N2)]+": np.maximum(R1 - leak, 0) - Re + zero,
        }
    if region in (R.GS1E_IN, R.GS1E_OUT):
        r1 = r1_in if region is R.GS1E_IN else r1_out
        return {
            "R0=0": -R0 + zero,
            "Re<=R1": R1 - Re + zero,
            "R1<=C(P1/N)": r1 - R1 + zero,
            "Re<=[C(P1/N)-C(P1/N2)]+": np.maximum(r1 - leak, 0) - Re + zero,
        }
    r1 = r1_in if region is R.GCSS_IN else r1_out
    return {
        "Re=R1": -abs(Re - R1) + zero,
        "R0<=R0in": r0 - R0 + zero,
        "R1<=[C(tP1/N)-C(tP1/N2)]+": np.maximum(r1 - leak, 0) - R1 + zero,
    }


def _min_slack(region, spec, theta, eta, t):
    return np.min(np.stack(list(region_slacks(region, spec, theta, eta, t).values())), axis=0)


# ----------------------------------------------------------------------------
# membership


@dataclass(frozen=True)
class GaussianMembership:
    member: bool
    theta: float
    eta: float | None
    slack: float
    slacks: dict


def _eta_search(region, spec, theta, t, eta0, width):
    """Best eta near ``eta0`` for fixed theta (bounded Brent)."""
    if not region.uses_eta or region in (GaussianRegion.GD_IN, GaussianRegion.GS_IN,
                                         GaussianRegion.GCSS_IN, GaussianRegion.GCSS_OUT):
        return eta0, float(_min_slack(region, spec, theta, eta0, t))
    lo, hi = max(0.0, eta0 - width), min(1.0, eta0 + width)
    res = minimize_scalar(
        lambda e: -float(_min_slack(region, spec, theta, e, t)),
        bounds=(lo, hi), method="bounded", options={"xatol": REFINE_TOL},
    )
    best = (eta0, float(_min_slack(region, spec, theta, eta0, t)))
    return (float(res.x), -res.fun) if -res.fun > best[1] else best


def gaussian_membership(
    region: GaussianRegion, spec: GaussianSpec, t: RateTriple, resolution: int = 1001
) -> GaussianMembership:
    """Is ``t`` in ``region`` for some (theta, eta)?

    A (theta, eta) grid is swept first; if no grid point works, the best cell
    is polished with bounded scalar searches down to a 1e-10 bracket.
    """
    if resolution < 2:
        raise ValidationError("resolution must be >= 2")
    thetas = np.linspace(0.0, 1.0, resolution) if region.uses_theta else np.array([1.0])
    needs_eta = region in (GaussianRegion.GD_OUT, GaussianRegion.GS_OUT)
    etas = np.linspace(0.0, 1.0, resolution) if needs_eta else np.array([0.0])
    grid = _min_slack(region, spec, thetas[:, None], etas[None, :], t)
    i, j = np.unravel_index(np.argmax(grid), grid.shape)
    theta, eta, best = float(thetas[i]), float(etas[j]), float(grid[i, j])
    if best < -SLACK_TOL and (len(thetas) > 1 or len(etas) > 1):
        width_t = 1.0 / (resolution - 1)
        width_e = width_t if needs_eta else 0.0

        def neg(th):
            return -_eta_search(region, spec, th, t, eta, 2 * width_e)[1]

        if len(thetas) > 1:
            res = minimize_scalar(
                neg, bounds=(max(0.0, theta - width_t), min(1.0, theta + width_t)),
                method="bounded", options={"xatol": REFINE_TOL},
            )
            th = float(res.x)
        else:
            th = theta
        e, val = _eta_search(region, spec, th, t, eta, 2 * width_e) if needs_eta else (eta, float(_min_slack(region, spec, th, eta, t)))
        if val > best:
            theta, eta, best = th, e, val
    slacks = {k: float(v) for k, v in region_slacks(region, spec, theta, eta, t).items()}
    if region.uses_eta and not needs_eta:
        eta = float(best_eta(spec, theta)[0][0])
    return GaussianMembership(
        member=best >= -SLACK_TOL,
        theta=theta,
        eta=eta if region.uses_eta else None,
        slack=best,
        slacks=slacks,
    )


# ----------------------------------------------------------------------------
# secrecy capacity and boundaries


@dataclass(frozen=True)
class GaussianSecrecy:
    lower: float
    upper: float


def gaussian_secrecy_capacity(spec: GaussianSpec) -> GaussianSecrecy:
    """[C(P1/N1) - C(P1/N2)]^+ and [C(P1/Nt) - C(P1/N2)]^+."""
    leak = cap(spec.P1 / spec.N2)
    lower = max(0.0, cap(spec.P1 / spec.N1) - leak)
    upper = max(0.0, cap(spec.P1 / spec.n1_tilde) - leak)
    if spec.reversely_degraded:
        # N1 tilde equals N1 here; use the identical expression so the two
        # bounds agree to the last bit
        upper = lower
    return GaussianSecrecy(lower, upper)


@dataclass(frozen=True)
class GaussianPoint:
    region: str
    theta: float
    eta: float | None
    R0: float
    R1: float
    Re: float


def gaussian_corners(region: GaussianRegion, spec: GaussianSpec, theta, eta=None):
    """Corner triples of ``region`` at each (theta, eta).

    Returns a list of ``(theta, eta, R0, R1, Re)`` rows: for regions with a
    common rate, the corner with the largest R0 followed by the R0 = 0 corner.
    """
    R = GaussianRegion
    theta = np.atleast_1d(np.asarray(theta, dtype=np.float64))
    if not region.uses_theta:
        theta = np.ones(1)
    P1, N1, N2, Nt = spec.P1, spec.N1, spec.N2, spec.n1_tilde
    r1_in, r1_out, leak = _c(theta * P1 / N1), _c(theta * P1 / Nt), _c(theta * P1 / N2)
    rows = []
    if region in (R.GD1E_IN, R.GD1E_OUT):
        r1 = r1_in if region is R.GD1E_IN else r1_out
        for k in range(len(theta)):
            rows.append((theta[k], None, 0.0, r1[k], max(0.0, r1[k] - leak[k])))
        return rows
    if region in (R.GS1E_IN, R.GS1E_OUT):
        r1 = float((r1_in if region is R.GS1E_IN else r1_out)[0])
        re = min(r1, max(0.0, r1 - float(leak[0])))
        return [(1.0, None, 0.0, r1, re)]
    if region in (R.GD_IN, R.GS_IN, R.GCSS_IN, R.GCSS_OUT):
        etas, r0 = best_eta(spec, theta)
        for k in range(len(theta)):
            if region is R.GD_IN:
                top = (r1_in[k], max(0.0, r1_in[k] - leak[k]))
            elif region is R.GS_IN:
                top = (r1_in[k], min(r1_in[k], max(0.0, r1_in[k] - leak[k])))
            else:
                r1 = r1_in[k] if region is R.GCSS_IN else r1_out[k]
                s = max(0.0, r1 - leak[k])
                top = (s, s)
            rows.append((theta[k], etas[k], r0[k], *top))
            rows.append((theta[k], etas[k], 0.0, *top))
        return rows
    # GD_OUT / GS_OUT: explicit eta grid
    etas = np.atleast_1d(np.asarray(eta, dtype=np.float64))
    for k in range(len(theta)):
        a, b = common_terms(spec, theta[k], etas)
        r0 = np.minimum(a, b)
        total = sum_term(spec, theta[k], etas)
        for m in range(len(etas)):
            for R0 in (float(r0[m]), 0.0):
                R1 = max(0.0, min(r1_out[k], total[m] - R0))
                if region is R.GD_OUT:
                    Re = max(0.0, R1 - leak[k])
                else:
                    Re = min(R1, max(0.0, r1_out[k] - leak[k]))
                rows.append((theta[k], etas[m], R0, R1, Re))
    return rows


def gaussian_boundary(
    region: GaussianRegion, spec: GaussianSpec, resolution: int = 1001, eta_resolution: int = 11
) -> list[GaussianPoint]:
    """Achievable corner triples over a theta grid (and an eta grid for the
    two outer regions whose R0 and sum-rate caps share eta)."""
    if resolution < 2 or eta_resolution < 2:
        raise ValidationError("resolution must be >= 2")
    thetas = np.linspace(0.0, 1.0, resolution)
    etas = np.linspace(0.0, 1.0, eta_resolution)
    return [
        GaussianPoint(region.value, float(th), None if e is None else float(e), float(r0), float(r1), float(re))
        for th, e, r0, r1, re in gaussian_corners(region, spec, thetas, etas)
    ]
