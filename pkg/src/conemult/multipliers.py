"""Multiplier fields on uniform box grids and their convolution operators.

The discrete model is periodic: an operator is the inverse DFT of
(symbol x forward DFT), i.e. circular convolution.  Frequency-representation
arrays are stored in FFT order; the dual grid of an axis with extent L and
resolution N is xi_m = 2 pi m / L for m = -N/2 .. N/2 - 1.
"""

import math
import struct
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, WraparoundWarning
from .util import CubicSpline1D

_MAGIC = b"CMF1"


@dataclass(frozen=True)
class Axis:
    extent: float
    resolution: int

    def __post_init__(self):
        if not self.extent > 0:
            raise DomainError(f"axis extent must be positive, got {self.extent}")
        n = self.resolution
        if n < 2 or (n & (n - 1)) != 0:
            raise DomainError(f"axis resolution must be a power of two, got {n}")

    @property
    def step(self):
        return self.extent / self.resolution

    def space_coords(self):
        return -0.5 * self.extent + self.step * np.arange(self.resolution)

    def freq_coords(self):
        return 2.0 * np.pi * np.fft.fftfreq(self.resolution, d=self.step)


@dataclass
class GridField:
    """Complex function on a uniform box grid, in space or frequency form."""

    axes: tuple
    values: np.ndarray
    rep: str = "space"

    def __post_init__(self):
        self.axes = tuple(self.axes)
        if not 1 <= len(self.axes) <= 4:
            raise DomainError("grids support 1 to 4 axes")
        if self.rep not in ("space", "frequency"):
            raise DomainError(f"unknown representation {self.rep!r}")
        shape = tuple(ax.resolution for ax in self.axes)
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != shape:
            raise DomainError(
                f"value array shape {self.values.shape} != grid shape {shape}")

    @property
    def ndim(self):
        return len(self.axes)

    def cell_volume(self):
        return float(np.prod([ax.step for ax in self.axes]))

    def same_grid(self, other):
        return all(a.extent == b.extent and a.resolution == b.resolution
                   for a, b in zip(self.axes, other.axes)) \
            and self.ndim == other.ndim

    def l2_norm(self):
        return float(np.linalg.norm(self.values.ravel())) * self.cell_volume() ** 0.5

    def l1_mass(self):
        return float(np.sum(np.abs(self.values))) * self.cell_volume()


def freq_magnitude(axes):
    """|xi| over the grid spanned by ``axes`` (FFT order per axis)."""
    coords = np.meshgrid(*[ax.freq_coords() for ax in axes],
                         indexing="ij", sparse=True)
    return np.sqrt(sum(c ** 2 for c in coords))


def space_magnitude(axes):
    coords = np.meshgrid(*[ax.space_coords() for ax in axes],
                         indexing="ij", sparse=True)
    return np.sqrt(sum(c ** 2 for c in coords))


class SampledProfile:
    """Cubic interpolant of a sampled 1-d profile, zero outside its support."""

    def __init__(self, points, values, support=None):
        self._spline = CubicSpline1D(points, values)
        self.support = support if support is not None else \
            (float(points[0]), float(points[-1]))

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        out = self._spline(u)
        lo, hi = self.support
        return np.where((u > lo) & (u < hi), out, 0.0)


def _check_profile_support(profile, radius, name):
    """Probe a profile outside (-radius, radius) and insist it vanishes."""
    probes = np.concatenate([-radius - np.linspace(0.0, 3.0 * radius, 40),
                             radius + np.linspace(0.0, 3.0 * radius, 40)])
    vals = np.asarray(profile(probes), dtype=complex)
    if np.any(np.abs(vals) > 1e-12):
        raise DomainError(f"{name} does not vanish outside (-{radius}, {radius})")


@dataclass
class GammaFamily:
    """Per-octave edge profiles gamma_k, each supported in (-1/4, 1/4)."""

    profiles: dict
    support_radius: float = 0.25

    def __post_init__(self):
        if not self.profiles:
            raise DomainError("family must contain at least one profile")
        for k, prof in self.profiles.items():
            _check_profile_support(prof, self.support_radius, f"gamma_{k}")

    @classmethod
    def constant(cls, profile, ks, support_radius=0.25):
        return cls({k: profile for k in ks}, support_radius)

    def octave_of(self, tau):
        if not tau > 0:
            raise DomainError(f"tau must be positive, got {tau}")
        k = int(math.floor(math.log2(tau)))
        # guard the pathological float case tau == 2**(k+1) - eps rounding
        if tau < 2.0 ** k:
            k -= 1
        elif tau >= 2.0 ** (k + 1):
            k += 1
        if k not in self.profiles:
            raise DomainError(f"tau = {tau} lies in octave {k}, outside the family")
        return k


@dataclass
class ModulatedFamily:
    """Compactly supported profiles with per-octave slopes |b_k| <= 2."""

    profiles: dict
    slopes: dict
    support_radius: float = 4.0

    def __post_init__(self):
        for k in self.profiles:
            if k not in self.slopes:
                raise DomainError(f"missing slope for octave {k}")
            if abs(self.slopes[k]) > 2.0:
                raise DomainError(f"|b_{k}| = {abs(self.slopes[k])} exceeds 2")
            _check_profile_support(self.profiles[k], self.support_radius,
                                   f"profile_{k}")


@dataclass
class ConeMultiplierField:
    """Frequency-side multiplier on an (xi, tau) grid plus provenance."""

    grid: GridField
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.grid.rep != "frequency":
            raise DomainError("multiplier fields live in frequency representation")
        if self.grid.ndim < 2:
            raise DomainError("cone multipliers need at least (xi, tau) axes")


def build_dyadic_cone_multiplier(family, axes):
    """Sum over octaves of gamma_k((|xi| - tau) / 2^k) on the slab tau in [2^k, 2^{k+1}).

    Exactly zero off the slabs; on each slab the support sits inside the
    annulus ||xi| - tau| < 2^(k-2) because gamma_k vanishes off (-1/4, 1/4).
    """
    axes = tuple(axes)
    xi_mag = freq_magnitude(axes[:-1])[..., None]
    tau = axes[-1].freq_coords()
    values = np.zeros(xi_mag.shape[:-1] + (len(tau),), dtype=complex)
    pos = tau > 0
    if np.any(pos):
        kmin = int(math.floor(math.log2(tau[pos].min())))
        kmax = int(math.floor(math.log2(tau[pos].max())))
        for k in range(kmin, kmax + 1):
            if k not in family.profiles:
                continue
            sel = (tau >= 2.0 ** k) & (tau < 2.0 ** (k + 1))
            if not np.any(sel):
                continue
            u = (xi_mag - tau[sel]) / 2.0 ** k
            values[..., sel] = np.asarray(family.profiles[k](u), dtype=complex)
    gridf = GridField(axes, values, rep="frequency")
    return ConeMultiplierField(gridf, {"kind": "dyadic_edge_profiles",
                                       "support_radius": family.support_radius})


def build_modulated_cone_multiplier(family, axes, radial_cutoff=None,
                                    slab_cutoff_fn=None):
    """Sum over octaves of chi1(2^-k |xi|) chi(2^-k tau) Gamma_k((|xi| - b_k tau)/2^k)."""
    from . import bumps
    chi1 = radial_cutoff or bumps.annulus_cutoff
    chi = slab_cutoff_fn or bumps.slab_cutoff
    axes = tuple(axes)
    xi_mag = freq_magnitude(axes[:-1])[..., None]
    tau = axes[-1].freq_coords()
    values = np.zeros(xi_mag.shape[:-1] + (len(tau),), dtype=complex)
    for k, prof in family.profiles.items():
        b = family.slopes[k]
        scale = 2.0 ** (-k)
        radial = chi1(scale * xi_mag)
        slab = chi(scale * tau)
        if not (np.any(radial) and np.any(slab)):
            continue
        u = scale * (xi_mag - b * tau)
        values += radial * slab * np.asarray(prof(u), dtype=complex)
    gridf = GridField(axes, values, rep="frequency")
    return ConeMultiplierField(gridf, {"kind": "modulated_profiles",
                                       "slopes": dict(family.slopes)})


def _symbol_values(f, m):
    if isinstance(m, ConeMultiplierField):
        if not f.same_grid(m.grid):
            raise DomainError("field and multiplier grids do not match")
        return m.grid.values
    if isinstance(m, GridField):
        if m.rep != "frequency":
            raise DomainError("multiplier GridField must be in frequency form")
        if not f.same_grid(m):
            raise DomainError("field and multiplier grids do not match")
        return m.values
    if callable(m):
        return np.asarray(m(freq_magnitude(f.axes)), dtype=complex)
    raise DomainError("multiplier must be a field or a radial symbol callable")


def apply_multiplier(f, m):
    """Apply a Fourier multiplier: inverse DFT of (symbol * forward DFT).

    Circular convolution semantics; the discrete energy bound
    ||Tf||_2 <= max|m| ||f||_2 holds exactly.
    """
    if f.rep != "space":
        raise DomainError("input field must be in space representation")
    sym = _symbol_values(f, m)
    out = np.fft.ifftn(sym * np.fft.fftn(f.values))
    return GridField(f.axes, out, rep="space")


def apply_shell_multiplier(f, tau, family):
    """Apply gamma_k((|xi| - tau)/2^k) for the octave k with tau in [2^k, 2^{k+1})."""
    k = family.octave_of(tau)
    prof = family.profiles[k]
    xi_mag = freq_magnitude(f.axes)
    sym = np.asarray(prof((xi_mag - tau) / 2.0 ** k), dtype=complex)
    return apply_multiplier(f, GridField(f.axes, sym, rep="frequency"))


def apply_shell_combination(f, taus, alphas, family):
    """Apply sum_k alpha_k T^{tau_k} as a single combined multiplier.

    taus and alphas map octave k -> tau_k (in [2^k, 2^{k+1})) and alpha_k.
    When the shell annuli are pairwise disjoint the discrete L2 norm of the
    output is the quadrature sum of the per-shell norms.
    """
    xi_mag = freq_magnitude(f.axes)
    sym = np.zeros(xi_mag.shape, dtype=complex)
    for k, tau in taus.items():
        if family.octave_of(tau) != k:
            raise DomainError(f"tau = {tau} is not in octave {k}")
        alpha = alphas.get(k, 0.0)
        if alpha == 0.0:
            continue
        sym += alpha * np.asarray(
            family.profiles[k]((xi_mag - tau) / 2.0 ** k), dtype=complex)
    return apply_multiplier(f, GridField(f.axes, sym, rep="frequency"))


def wraparound_fraction(f, shell=0.125):
    """Fraction of |f| mass in the outer ``shell`` of each axis extent."""
    masks = []
    for i, ax in enumerate(f.axes):
        x = np.abs(ax.space_coords())
        m = x >= (0.5 - shell) * ax.extent
        shape = [1] * f.ndim
        shape[i] = ax.resolution
        masks.append(m.reshape(shape))
    boundary = np.zeros(f.values.shape, dtype=bool)
    for m in masks:
        boundary |= m
    total = np.sum(np.abs(f.values))
    if total == 0:
        return 0.0
    return float(np.sum(np.abs(f.values)[boundary]) / total)


def check_wraparound(f, threshold=1e-6):
    frac = wraparound_fraction(f)
    if frac > threshold:
        warnings.warn(
            f"boundary shell carries {frac:.3e} of the field mass "
            f"(threshold {threshold:.1e}); enlarge the box extent",
            WraparoundWarning, stacklevel=2)
    return frac


def save_field(f, path):
    """Flat binary format: header (dims, extents, resolutions, rep) + complex64."""
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<IBBH", 1, 1 if f.rep == "frequency" else 0,
                             f.ndim, 0))
        for ax in f.axes:
            fh.write(struct.pack("<dQ", ax.extent, ax.resolution))
        fh.write(np.ascontiguousarray(f.values.astype("<c8")).tobytes())


def load_field(path):
    with open(path, "rb") as fh:
        if fh.read(4) != _MAGIC:
            raise DomainError(f"{path} is not a multiplier field file")
        version, rep, ndim, _ = struct.unpack("<IBBH", fh.read(8))
        if version != 1:
            raise DomainError(f"unsupported field format version {version}")
        axes = []
        for _ in range(ndim):
            extent, res = struct.unpack("<dQ", fh.read(16))
            axes.append(Axis(extent, int(res)))
        shape = tuple(ax.resolution for ax in axes)
        count = int(np.prod(shape))
        payload = np.frombuffer(fh.read(8 * count), dtype="<c8").reshape(shape)
    return GridField(tuple(axes), payload.astype(complex),
                     rep="frequency" if rep else "space")


def export_field_csv(f, path, max_cells=65536):
    """Plot-ready CSV (one row per cell) for small grids."""
    import csv as _csv
    if f.values.size > max_cells:
        raise DomainError(f"grid too large for CSV export ({f.values.size} cells)")
    coords = [ax.space_coords() if f.rep == "space" else ax.freq_coords()
              for ax in f.axes]
    with open(path, "w", newline="") as fh:
        w = _csv.writer(fh)
        w.writerow([f"x{i}" for i in range(f.ndim)] + ["re", "im"])
        for idx in np.ndindex(*f.values.shape):
            row = [repr(float(coords[i][j])) for i, j in enumerate(idx)]
            v = f.values[idx]
            w.writerow(row + [repr(float(v.real)), repr(float(v.imag))])
