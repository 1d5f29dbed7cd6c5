"""Decreasing rearrangements and Lorentz quasi-norms over weighted samples.

Conventions (fixed; no gamma-factor normalization):

    ||f||_{p,nu} = ( integral_0^inf (t^{1/p} f*(t))^nu dt/t )^{1/nu}   nu < inf
    ||f||_{p,inf} = sup_t t^{1/p} f*(t)

with f* the right-continuous decreasing rearrangement.  On a step function
the finite-nu integral is evaluated in closed form piece by piece, and the
weak-type supremum uses the right endpoint of each constant piece.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class LorentzParams:
    """Exponent pair (p, nu); nu = math.inf gives the weak quasi-norm."""

    p: float
    nu: float

    def __post_init__(self):
        if not (self.p > 0 and math.isfinite(self.p)):
            raise DomainError(f"p must be a positive real, got {self.p}")
        if not (self.nu >= self.p):
            raise DomainError(f"nu must satisfy nu >= p, got nu={self.nu} < p={self.p}")

    @property
    def weak(self):
        return math.isinf(self.nu)


@dataclass
class WeightedSampleSet:
    """Finitely many |value| samples carrying positive measure weights."""

    values: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.values = np.abs(np.asarray(self.values, dtype=float))
        self.weights = np.asarray(self.weights, dtype=float)
        if self.values.ndim != 1 or self.values.shape != self.weights.shape:
            raise DomainError("values and weights must be 1-d arrays of equal length")
        if len(self.values) == 0:
            raise DomainError("sample set must be nonempty")
        if not np.all(np.isfinite(self.values)):
            raise DomainError("sample values must be finite")
        if not (np.all(self.weights > 0) and np.all(np.isfinite(self.weights))):
            raise DomainError("weights must be positive and finite")

    @property
    def total_measure(self):
        return float(self.weights.sum())

    def scaled(self, c):
        return WeightedSampleSet(c * self.values, self.weights.copy())


@dataclass
class RearrangedFunction:
    """Step function t -> level on [breakpoints[i], breakpoints[i+1])."""

    breakpoints: np.ndarray  # increasing, breakpoints[0] == 0
    levels: np.ndarray       # strictly decreasing

    def measure_above(self, lam):
        """Measure of {f* > lam}; equals the weighted measure of {|f| > lam}."""
        count = int(np.sum(self.levels > lam))
        return float(self.breakpoints[count])

    def __call__(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        idx = np.searchsorted(self.breakpoints, t, side="right") - 1
        out = np.zeros_like(t)
        inside = (idx >= 0) & (idx < len(self.levels))
        out[inside] = self.levels[idx[inside]]
        return out


def decreasing_rearrangement(samples):
    """Decreasing rearrangement of a weighted sample set.

    Equal values are merged into a single constant piece; this does not
    change any of the derived quasi-norms.
    """
    order = np.argsort(-samples.values, kind="stable")
    v = samples.values[order]
    w = samples.weights[order]
    keep = np.empty(len(v), dtype=bool)
    keep[0] = True
    keep[1:] = v[1:] != v[:-1]
    idx = np.cumsum(keep) - 1
    merged = np.zeros(int(keep.sum()))
    np.add.at(merged, idx, w)
    levels = v[keep]
    breakpoints = np.concatenate(([0.0], np.cumsum(merged)))
    return RearrangedFunction(breakpoints, levels)


def lorentz_quasinorm(samples, params):
    """Lorentz L^{p,nu} quasi-norm of a weighted sample set."""
    r = decreasing_rearrangement(samples)
    t = r.breakpoints
    lv = r.levels
    peak = lv[0]
    if peak == 0.0:
        return 0.0
    p = params.p
    if params.weak:
        return float(np.max(lv * t[1:] ** (1.0 / p)))
    nu = params.nu
    q = nu / p
    # scale by the top level so lv**nu cannot overflow
    contrib = (lv / peak) ** nu * (t[1:] ** q - t[:-1] ** q)
    total = (p / nu) * float(np.sum(contrib))
    return float(peak * total ** (1.0 / nu))


def weighted_lp_norm(samples, p):
    """Plain weighted l^p norm; equals lorentz_quasinorm at nu = p."""
    peak = samples.values.max()
    if peak == 0.0:
        return 0.0
    return float(peak * np.sum((samples.values / peak) ** p
                               * samples.weights) ** (1.0 / p))


def weighted_line_samples(f, weight_exponent, truncation, resolution):
    """Sample |f| on a symmetric midpoint grid of [-R, R] with power weights.

    Cell i centred at s_i carries weight cell_width * (1 + |s_i|)**weight_exponent,
    the discretization of the measure (1 + |s|)^a ds.
    """
    if not truncation > 0:
        raise DomainError(f"truncation must be positive, got {truncation}")
    if resolution < 2:
        raise DomainError(f"resolution must be at least 2, got {resolution}")
    h = 2.0 * truncation / resolution
    s = -truncation + (np.arange(resolution) + 0.5) * h
    vals = np.asarray(f(s), dtype=float)
    bad = ~np.isfinite(vals)
    if np.any(bad):
        raise DomainError(f"f is not finite at s = {s[bad][0]}")
    weights = h * (1.0 + np.abs(s)) ** weight_exponent
    return WeightedSampleSet(np.abs(vals), weights)


def weighted_samples_from_grid(s, values, weight_exponent, truncation=None):
    """Weighted samples from values already tabulated on a uniform grid."""
    s = np.asarray(s, dtype=float)
    values = np.abs(np.asarray(values))
    if len(s) < 2:
        raise DomainError("need at least two grid points")
    h = s[1] - s[0]
    if truncation is not None:
        keep = np.abs(s) <= truncation
        s, values = s[keep], values[keep]
        if len(s) == 0:
            raise DomainError("truncation removed every sample")
    weights = h * (1.0 + np.abs(s)) ** weight_exponent
    return WeightedSampleSet(values, weights)
