"""Shared numerical primitives.

SPD matrices with a bit-reproducible Jacobi eigensolver, the Gaussian
entropy rate G, Gauss-Hermite quadrature normalized to the standard
normal law, uniform grids, stable log-mean-exp, counter-based RNG
streams, and a bracket-certified golden-section minimizer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "DomainError",
    "SpdMatrix",
    "Grid1D",
    "QuadRule",
    "RngStream",
    "entropy_rate",
    "entropy_rate_eigen",
    "spd_sqrt",
    "log_mean_exp",
    "gauss_hermite",
    "golden_min",
]

# Relative eigenvalue floor below which a matrix is treated as singular
# for log-det purposes; below double resolution of log det.
TOL_PD = 1e-12


class DomainError(ValueError):
    """A numerical-domain violation (non-PD matrix, lost ellipticity, ...)."""


def jacobi_eigh(a: np.ndarray, tol: float = 1e-14, max_sweeps: int = 64):
    """Eigendecomposition of a small symmetric matrix by cyclic Jacobi rotations.

    Returns (eigenvalues ascending, eigenvectors as columns). Intended for
    d <= 3; works for any modest dimension. Deterministic for fixed input.
    """
    a = np.array(a, dtype=float)
    d = a.shape[0]
    v = np.eye(d)
    if d == 1:
        return a.diagonal().copy(), v
    scale = np.max(np.abs(a)) or 1.0
    for _ in range(max_sweeps):
        off = math.sqrt(sum(a[p, q] ** 2 for p in range(d) for q in range(p + 1, d)))
        if off <= tol * scale:
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[p, q]
                if abs(apq) <= 0.25 * tol * scale:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rot = np.eye(d)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
                a[p, q] = a[q, p] = 0.0
                v = v @ rot
    lam = a.diagonal().copy()
    order = np.argsort(lam, kind="stable")
    return lam[order], v[:, order]


@dataclass(frozen=True)
class SpdMatrix:
    """Symmetric positive semi-definite matrix (a covariance / volatility)."""

    entries: tuple

    def __init__(self, entries):
        a = np.array(entries, dtype=float)
        if a.ndim == 0:
            a = a.reshape(1, 1)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {a.shape}")
        scale = max(np.max(np.abs(a)), 1.0)
        asym = np.max(np.abs(a - a.T))
        if asym > 1e-12 * scale:
            raise ValueError(f"matrix is not symmetric (max asymmetry {asym:.3e})")
        a = 0.5 * (a + a.T)
        lam, _ = jacobi_eigh(a)
        if lam[0] < -1e-10 * scale:
            raise ValueError(f"matrix is not positive semi-definite (eigenvalue {lam[0]:.3e})")
        object.__setattr__(self, "entries", tuple(map(tuple, a)))

    @property
    def dim(self) -> int:
        return len(self.entries)

    def as_array(self) -> np.ndarray:
        return np.array(self.entries, dtype=float)

    def eigenvalues(self) -> np.ndarray:
        lam, _ = jacobi_eigh(self.as_array())
        return lam

    @staticmethod
    def identity(d: int) -> "SpdMatrix":
        return SpdMatrix(np.eye(d))

    @staticmethod
    def diagonal(diag) -> "SpdMatrix":
        return SpdMatrix(np.diag(np.asarray(diag, dtype=float)))


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid on [lo, hi] with count >= 2 nodes."""

    lo: float
    hi: float
    count: int

    def __post_init__(self):
        if not (self.lo < self.hi):
            raise ValueError(f"grid needs lo < hi, got [{self.lo}, {self.hi}]")
        if self.count < 2:
            raise ValueError(f"grid needs count >= 2, got {self.count}")

    @property
    def step(self) -> float:
        return (self.hi - self.lo) / (self.count - 1)

    def nodes(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.count)


@dataclass(frozen=True)
class QuadRule:
    """Quadrature rule for expectations against the standard normal law."""

    order: int
    nodes: tuple
    weights: tuple

    def nodes_array(self) -> np.ndarray:
        return np.asarray(self.nodes)

    def weights_array(self) -> np.ndarray:
        return np.asarray(self.weights)

    def expect(self, fn) -> float:
        """E[fn(Z)] for Z ~ N(0, 1)."""
        z = self.nodes_array()
        return float(np.dot(self.weights_array(), fn(z)))


def gauss_hermite(m: int) -> QuadRule:
    """Gauss-Hermite rule normalized to weight exp(-x^2/2)/sqrt(2 pi).

    Golub-Welsch on the (probabilists') Hermite Jacobi matrix; nodes and
    weights symmetrized so odd moments vanish by pairwise cancellation.
    Exact for polynomials up to degree 2m - 1.
    """
    if not (2 <= m <= 256):
        raise ValueError(f"quadrature order must be in [2, 256], got {m}")
    off = np.sqrt(np.arange(1.0, m))
    jac = np.diag(off, 1) + np.diag(off, -1)
    lam, vec = np.linalg.eigh(jac)
    w = vec[0] ** 2
    # enforce exact +/- node pairing (eigh is symmetric only to rounding)
    z = 0.5 * (lam - lam[::-1])
    w = 0.5 * (w + w[::-1])
    w = w / w.sum()
    return QuadRule(order=m, nodes=tuple(z), weights=tuple(w))


_MASK64 = (1 << 64) - 1


def _mix64(z: int) -> int:
    # splitmix64 finalizer
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


@dataclass(frozen=True)
class RngStream:
    """Counter-based random stream keyed by (seed, stream_id).

    Backed by the Philox4x64 generator with key (seed, stream_id), so the
    sample sequence depends only on the key and the draw counter: identical
    keys reproduce identical sequences regardless of scheduling, and
    distinct stream_ids give statistically independent streams.
    """

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        key = np.array([self.seed & _MASK64, self.stream_id & _MASK64], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def derive(self, k: int) -> "RngStream":
        """Child stream for sub-task k (block index, bootstrap, ...)."""
        return RngStream(self.seed, _mix64((self.stream_id & _MASK64) ^ _mix64(k & _MASK64)))


def entropy_rate(sigma: SpdMatrix) -> float:
    """Entropy rate G(S) = (Tr S - d - log det S) / 2 of a covariance matrix.

    Nonnegative; zero exactly at the identity. Requires strict positive
    definiteness (eigenvalues above TOL_PD relative to the largest).
    """
    lam = sigma.eigenvalues()
    floor = TOL_PD * max(lam[-1], 0.0)
    if lam[0] <= floor:
        raise DomainError(
            f"entropy rate needs a positive definite matrix; eigenvalue {lam[0]:.6e} "
            f"is below the tolerance {floor:.6e}"
        )
    return entropy_rate_eigen(lam)


def entropy_rate_eigen(lam) -> float:
    """G via eigenvalues: sum of (l - log l - 1) / 2 over the spectrum."""
    lam = np.asarray(lam, dtype=float)
    if lam.size == 0 or np.any(lam <= 0.0):
        raise DomainError(f"eigenvalues must all be positive, got {lam}")
    terms = (lam - 1.0) - np.log1p(lam - 1.0)
    total = 0.5 * float(np.sum(terms))
    # the summands are nonnegative up to rounding; clamp stray -1e-17s
    return total if total > 0.0 else 0.0


def spd_sqrt(sigma: SpdMatrix) -> SpdMatrix:
    """Unique positive semi-definite square root."""
    lam, vec = jacobi_eigh(sigma.as_array())
    root = (vec * np.sqrt(np.maximum(lam, 0.0))) @ vec.T
    return SpdMatrix(0.5 * (root + root.T))


def log_mean_exp(values) -> float:
    """log of the mean of exp(values), computed with a max shift.

    Shift invariant (log_mean_exp(v + c) = log_mean_exp(v) + c) and safe at
    extreme magnitudes: never overflows for finite input.
    """
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValueError("log_mean_exp of an empty sequence")
    if not np.all(np.isfinite(v)):
        raise ValueError("log_mean_exp requires finite values")
    m = float(np.max(v))
    return m + math.log(float(np.mean(np.exp(v - m))))


def golden_min(fn, lo, hi, tol: float = 1e-10, max_doublings: int = 10):
    """Golden-section minimum of a convex function, vectorized over numpy arrays.

    The initial bracket [lo, hi] is expanded (doubling per side and round)
    until the minimum is interior; more than 2**max_doublings growth of the
    width raises, which for a convex objective with bounded data signals a
    bug rather than a reachable state. Then the bracket is contracted to
    width < tol and the midpoint returned as (argmin, fn(argmin)).

    fn must accept and return numpy arrays of the common broadcast shape.
    """
    lo = np.array(lo, dtype=float, copy=True)
    hi = np.array(hi, dtype=float, copy=True)
    lo, hi = np.broadcast_arrays(lo, hi)
    lo, hi = lo.copy(), hi.copy()
    width0 = float(np.max(hi - lo))
    if width0 <= 0.0:
        raise ValueError("golden_min needs lo < hi")

    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    invphi2 = (3.0 - math.sqrt(5.0)) / 2.0

    f_lo = np.asarray(fn(lo), dtype=float)
    f_hi = np.asarray(fn(hi), dtype=float)
    for round_ in range(max_doublings + 1):
        w = hi - lo
        probe_lo = lo + invphi2 * w
        probe_hi = hi - invphi2 * w
        f_plo = np.asarray(fn(probe_lo), dtype=float)
        f_phi = np.asarray(fn(probe_hi), dtype=float)
        need_left = f_lo < f_plo
        need_right = f_hi < f_phi
        if not (np.any(need_left) or np.any(need_right)):
            break
        if round_ == max_doublings:
            raise RuntimeError(
                "golden_min bracket expansion exceeded its cap; objective appears unbounded below"
            )
        lo = np.where(need_left, lo - w, lo)
        hi = np.where(need_right, hi + w, hi)
        f_lo = np.where(need_left, np.asarray(fn(lo), dtype=float), f_lo)
        f_hi = np.where(need_right, np.asarray(fn(hi), dtype=float), f_hi)

    width = float(np.max(hi - lo))
    n_iter = max(0, math.ceil(math.log(tol / width) / math.log(invphi))) if width > tol else 0
    x1 = hi - invphi * (hi - lo)
    x2 = lo + invphi * (hi - lo)
    f1 = np.asarray(fn(x1), dtype=float)
    f2 = np.asarray(fn(x2), dtype=float)
    for _ in range(n_iter):
        take_left = f1 < f2
        hi = np.where(take_left, x2, hi)
        lo = np.where(take_left, lo, x1)
        x1_new = hi - invphi * (hi - lo)
        x2_new = lo + invphi * (hi - lo)
        # one new evaluation per iteration; the other point is reused
        x_eval = np.where(take_left, x1_new, x2_new)
        f_eval = np.asarray(fn(x_eval), dtype=float)
        f1, f2 = np.where(take_left, f_eval, f2), np.where(take_left, f1, f_eval)
        x1, x2 = x1_new, x2_new

    xmin = 0.5 * (lo + hi)
    fmin = np.asarray(fn(xmin), dtype=float)
    if xmin.ndim == 0:
        return float(xmin), float(fmin)
    return xmin, fmin
