"""European payoff catalog and the admissibility checker.

Admissible payoffs are uniformly bounded, lower semi-continuous, and C2
outside a centered ball with Hessian at most (1 - alpha) times the
identity. The catalog ships puts, truncated calls, barrier payoffs,
affine adjustments of an admissible base, and gridded samples.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .core import Grid1D

__all__ = [
    "Put",
    "TruncatedCall",
    "Barrier",
    "LinearAdjusted",
    "Sampled",
    "PayoffSpec",
    "AssumptionReport",
    "payoff_dim",
    "eval_payoff",
    "validate_assumption",
    "find_admissibility_radius",
]

# slack added to the Hessian cap to absorb finite-difference noise on
# piecewise-smooth payoffs
HESSIAN_PROBE_TOL = 1e-6


@dataclass(frozen=True)
class Put:
    """(K - sum_i a_i |x_i|)^+ ; bounded in [0, K]."""

    strike: float
    weights: tuple

    def __post_init__(self):
        if self.strike < 0:
            raise ValueError("put strike must be nonnegative")
        if any(a < 0 for a in self.weights):
            raise ValueError("put weights must be nonnegative")


@dataclass(frozen=True)
class TruncatedCall:
    """min(cap, (sum_i a_i |x_i| - strike)^+) ; bounded in [0, cap]."""

    cap: float
    strike: float
    weights: tuple

    def __post_init__(self):
        if self.cap < 0 or self.strike < 0:
            raise ValueError("cap and strike must be nonnegative")
        if any(a < 0 for a in self.weights):
            raise ValueError("weights must be nonnegative")


@dataclass(frozen=True)
class Barrier:
    """inner(x) on the open ball |x| < radius, zero outside."""

    inner: "PayoffSpec"
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("barrier radius must be positive")


@dataclass(frozen=True)
class LinearAdjusted:
    """c0 + <c, x> + base(x); only the base must be admissible."""

    c0: float
    c: tuple
    base: "PayoffSpec"


@dataclass(frozen=True)
class Sampled:
    """Payoff given by grid samples, linearly interpolated, clamped outside.

    Boundedness cannot be verified from finitely many samples, so the
    caller must declare it explicitly for the checker to accept it.
    """

    grids: tuple
    values: tuple
    declared_bounded: bool = False

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if not np.all(np.isfinite(vals)):
            raise ValueError("sampled payoff values must be finite")
        shape = tuple(g.count for g in self.grids)
        if vals.shape != shape:
            raise ValueError(f"values shape {vals.shape} does not match grids {shape}")

    def values_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)


PayoffSpec = Union[Put, TruncatedCall, Barrier, LinearAdjusted, Sampled]


def payoff_dim(spec: PayoffSpec) -> int:
    if isinstance(spec, (Put, TruncatedCall)):
        return len(spec.weights)
    if isinstance(spec, Barrier):
        return payoff_dim(spec.inner)
    if isinstance(spec, LinearAdjusted):
        return payoff_dim(spec.base)
    if isinstance(spec, Sampled):
        return len(spec.grids)
    raise TypeError(f"not a payoff spec: {spec!r}")


def _as_points(x, d: int) -> np.ndarray:
    """Normalize input to shape (..., d). For d=1 any shape is elementwise."""
    x = np.asarray(x, dtype=float)
    if d == 1:
        return x.reshape(x.shape + (1,)) if (x.ndim == 0 or x.shape[-1] != 1) else x
    if x.ndim == 0 or x.shape[-1] != d:
        raise ValueError(f"payoff of dimension {d} evaluated at points of shape {x.shape}")
    return x


def _interp_sampled(spec: Sampled, pts: np.ndarray) -> np.ndarray:
    vals = spec.values_array()
    if len(spec.grids) == 1:
        g = spec.grids[0]
        return np.interp(pts[..., 0], g.nodes(), vals)
    gx, gy = spec.grids
    ix = np.clip((pts[..., 0] - gx.lo) / gx.step, 0.0, gx.count - 1.0)
    iy = np.clip((pts[..., 1] - gy.lo) / gy.step, 0.0, gy.count - 1.0)
    i0 = np.minimum(ix.astype(int), gx.count - 2)
    j0 = np.minimum(iy.astype(int), gy.count - 2)
    fx, fy = ix - i0, iy - j0
    return (
        vals[i0, j0] * (1 - fx) * (1 - fy)
        + vals[i0 + 1, j0] * fx * (1 - fy)
        + vals[i0, j0 + 1] * (1 - fx) * fy
        + vals[i0 + 1, j0 + 1] * fx * fy
    )


def eval_payoff(spec: PayoffSpec, x):
    """Evaluate a payoff at one point or an array of points.

    For d >= 2 the last axis of x holds the coordinates; for d = 1 the
    input is treated elementwise. Returns values with the leading shape
    of x (a float for a single point).
    """
    d = payoff_dim(spec)
    pts = _as_points(x, d)
    out = _eval(spec, pts)
    return float(out) if out.ndim == 0 else out


def _eval(spec: PayoffSpec, pts: np.ndarray) -> np.ndarray:
    if isinstance(spec, Put):
        s = np.abs(pts) @ np.asarray(spec.weights)
        return np.maximum(spec.strike - s, 0.0)
    if isinstance(spec, TruncatedCall):
        s = np.abs(pts) @ np.asarray(spec.weights)
        return np.minimum(spec.cap, np.maximum(s - spec.strike, 0.0))
    if isinstance(spec, Barrier):
        inside = np.sqrt(np.sum(pts**2, axis=-1)) < spec.radius
        return _eval(spec.inner, pts) * inside
    if isinstance(spec, LinearAdjusted):
        return spec.c0 + pts @ np.asarray(spec.c) + _eval(spec.base, pts)
    if isinstance(spec, Sampled):
        return np.asarray(_interp_sampled(spec, pts))
    raise TypeError(f"not a payoff spec: {spec!r}")


def kink_distance(spec: PayoffSpec, pts: np.ndarray) -> np.ndarray:
    """Distance from each point to the payoff's non-C2 set (inf if none).

    Used to guard finite-difference curvature probes: the catalog payoffs
    are piecewise smooth and their kinks must not be sampled by a centered
    stencil. Conservative (never overestimates by design of the bounds).
    """
    if isinstance(spec, (Put, TruncatedCall)):
        a = np.asarray(spec.weights)
        dist = np.full(pts.shape[:-1], np.inf)
        pos = a > 0
        if np.any(pos):
            dist = np.minimum(dist, np.min(np.abs(pts[..., pos]), axis=-1))
            s = np.abs(pts) @ a
            amax = float(np.max(a[pos]))
            if isinstance(spec, Put):
                levels = [spec.strike]
            else:
                levels = [spec.strike, spec.strike + spec.cap]
            for lv in levels:
                dist = np.minimum(dist, np.abs(s - lv) / amax)
        return dist
    if isinstance(spec, Barrier):
        r = np.sqrt(np.sum(pts**2, axis=-1))
        return np.minimum(np.abs(r - spec.radius), kink_distance(spec.inner, pts))
    if isinstance(spec, LinearAdjusted):
        return kink_distance(spec.base, pts)
    if isinstance(spec, Sampled):
        return np.full(pts.shape[:-1], np.inf)
    raise TypeError(f"not a payoff spec: {spec!r}")


@dataclass(frozen=True)
class AssumptionReport:
    """Outcome of probing boundedness, regularity and the Hessian cap."""

    M: float
    alpha: float
    bound_sup: float
    violations: tuple

    @property
    def passed(self) -> bool:
        return len(self.violations) == 0


def _probe_grids(probe, d: int):
    if isinstance(probe, Grid1D):
        grids = (probe,) * d
    else:
        grids = tuple(probe)
    if len(grids) != d:
        raise ValueError(f"expected {d} probe grids, got {len(grids)}")
    return grids


def validate_assumption(spec: PayoffSpec, M: float, alpha: float, probe) -> AssumptionReport:
    """Probe the admissibility conditions on a grid outside the ball B_M.

    At every probe node with |x| > M (away from catalog kinks by one grid
    step) the centered finite-difference Hessian must satisfy
    H <= (1 - alpha) I + tol and the gradient must be finite. Boundedness
    is recorded as bound_sup over the whole probe; Sampled payoffs without
    declared_bounded are flagged. Violations are data, not errors.
    """
    if M <= 0:
        raise ValueError("M must be positive")
    if not (0 < alpha <= 1):
        raise ValueError("alpha must lie in (0, 1]")
    # the affine part of a linear adjustment is exempt; check the base only
    target = spec
    while isinstance(target, LinearAdjusted):
        target = target.base
    d = payoff_dim(target)
    grids = _probe_grids(probe, d)
    for g in grids:
        if g.lo > -2 * M or g.hi < 2 * M:
            raise ValueError(f"probe grid [{g.lo}, {g.hi}] must cover [-2M, 2M] = [{-2*M}, {2*M}]")

    axes = [g.nodes() for g in grids]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack(mesh, axis=-1)
    f = _eval(target, pts)

    violations = []
    if not np.all(np.isfinite(f)):
        bad = np.argwhere(~np.isfinite(f))[0]
        violations.append((tuple(pts[tuple(bad)]), "non-finite value"))
    bound_sup = float(np.max(np.abs(f[np.isfinite(f)]))) if np.any(np.isfinite(f)) else np.inf
    if isinstance(target, Sampled) and not target.declared_bounded:
        violations.append((None, "boundedness not declared for sampled payoff"))

    steps = np.array([g.step for g in grids])
    radius = np.sqrt(np.sum(pts**2, axis=-1))
    outside = radius > M
    guard = kink_distance(target, pts) > (float(np.max(steps)) * (1.0 + 1e-9))
    interior = np.ones(f.shape, dtype=bool)
    for ax in range(d):
        idx = [slice(None)] * d
        idx[ax] = 0
        interior[tuple(idx)] = False
        idx[ax] = -1
        interior[tuple(idx)] = False
    probe_mask = outside & guard & interior

    hess_cap = (1.0 - alpha) + HESSIAN_PROBE_TOL
    if d == 1:
        h = steps[0]
        hess = (np.roll(f, -1) - 2 * f + np.roll(f, 1)) / h**2
        grad = (np.roll(f, -1) - np.roll(f, 1)) / (2 * h)
        top = hess
    else:
        hx, hy = steps
        fxx = (np.roll(f, -1, 0) - 2 * f + np.roll(f, 1, 0)) / hx**2
        fyy = (np.roll(f, -1, 1) - 2 * f + np.roll(f, 1, 1)) / hy**2
        fxy = (
            np.roll(np.roll(f, -1, 0), -1, 1)
            - np.roll(np.roll(f, -1, 0), 1, 1)
            - np.roll(np.roll(f, 1, 0), -1, 1)
            + np.roll(np.roll(f, 1, 0), 1, 1)
        ) / (4 * hx * hy)
        # top eigenvalue of the 2x2 symmetric Hessian
        mean = 0.5 * (fxx + fyy)
        top = mean + np.sqrt(np.maximum(0.25 * (fxx - fyy) ** 2 + fxy**2, 0.0))
        grad = np.sqrt(
            ((np.roll(f, -1, 0) - np.roll(f, 1, 0)) / (2 * hx)) ** 2
            + ((np.roll(f, -1, 1) - np.roll(f, 1, 1)) / (2 * hy)) ** 2
        )

    for idx in np.argwhere(probe_mask & (top > hess_cap)):
        violations.append((tuple(pts[tuple(idx)]), f"hessian {top[tuple(idx)]:.6g} > {hess_cap:.6g}"))
    for idx in np.argwhere(probe_mask & ~np.isfinite(grad)):
        violations.append((tuple(pts[tuple(idx)]), "non-finite gradient"))

    return AssumptionReport(M=M, alpha=alpha, bound_sup=bound_sup, violations=tuple(violations))


def _characteristic_scale(spec: PayoffSpec) -> float:
    if isinstance(spec, Put):
        pos = [a for a in spec.weights if a > 0]
        return spec.strike / min(pos) if pos else 1.0
    if isinstance(spec, TruncatedCall):
        pos = [a for a in spec.weights if a > 0]
        return (spec.strike + spec.cap) / min(pos) if pos else 1.0
    if isinstance(spec, Barrier):
        return max(spec.radius, _characteristic_scale(spec.inner))
    if isinstance(spec, LinearAdjusted):
        return _characteristic_scale(spec.base)
    if isinstance(spec, Sampled):
        return max(max(abs(g.lo), abs(g.hi)) for g in spec.grids) / 2.0
    raise TypeError(f"not a payoff spec: {spec!r}")


def find_admissibility_radius(spec: PayoffSpec, alpha: float, step: float = 1 / 16) -> AssumptionReport:
    """Search the ladder M in {K+1, 2K, 4K} and report the smallest passing M.

    K is the payoff's characteristic scale. If no ladder radius passes,
    the report for the largest one is returned (passed=False).
    """
    k = max(_characteristic_scale(spec), 1.0)
    d = payoff_dim(spec)
    report = None
    for m in (k + 1.0, 2.0 * k, 4.0 * k):
        count = int(round(4.0 * m / step)) + 1
        probe = Grid1D(-2.0 * m, 2.0 * m, count)
        report = validate_assumption(spec, m, alpha, (probe,) * d)
        if report.passed:
            return report
    return report
