import math
import warnings

import numpy as np
import pytest

from conemult.errors import DomainError, WraparoundWarning
from conemult.multipliers import (Axis, ConeMultiplierField, GammaFamily,
                                  GridField, ModulatedFamily, SampledProfile,
                                  apply_multiplier, apply_shell_combination,
                                  apply_shell_multiplier,
                                  build_dyadic_cone_multiplier,
                                  build_modulated_cone_multiplier,
                                  check_wraparound, export_field_csv,
                                  freq_magnitude, load_field, save_field,
                                  wraparound_fraction)


def tent(u):
    return np.clip(1.0 - 4.0 * np.abs(np.asarray(u, dtype=float)), 0.0, None)


def cone_axes(extent=16.0, res=32, ndim=3):
    return tuple(Axis(extent, res) for _ in range(ndim))


def dft_oracle(values):
    """Direct DFT sum, no FFT: V[m] = sum_j v[j] exp(-2 pi i <j, m>/N)."""
    out = values.astype(complex)
    for axis in range(values.ndim):
        n = values.shape[axis]
        w = np.exp(-2j * np.pi * np.outer(np.arange(n), np.arange(n)) / n)
        out = np.moveaxis(np.tensordot(w, np.moveaxis(out, axis, 0),
                                       axes=(1, 0)), 0, axis)
    return out


def idft_oracle(values):
    out = values.astype(complex)
    for axis in range(values.ndim):
        n = values.shape[axis]
        w = np.exp(2j * np.pi * np.outer(np.arange(n), np.arange(n)) / n) / n
        out = np.moveaxis(np.tensordot(w, np.moveaxis(out, axis, 0),
                                       axes=(1, 0)), 0, axis)
    return out


# -- dyadic cone builder ------------------------------------------------------


def test_dyadic_point_value():
    fam = GammaFamily.constant(tent, range(-4, 6))
    axes = cone_axes()
    cone = build_dyadic_cone_multiplier(fam, axes)
    tau = axes[-1].freq_coords()
    xi = freq_magnitude(axes[:-1])
    # pick a grid point in the k = 1 slab and check the formula directly
    kslab = np.where((tau >= 2.0) & (tau < 4.0))[0][0]
    t = tau[kslab]
    idx = np.unravel_index(np.argmin(np.abs(xi - 1.125 * t)), xi.shape)
    u = (xi[idx] - t) / 2.0
    assert cone.grid.values[idx + (kslab,)] == pytest.approx(tent(u))


def test_dyadic_zero_family_gives_zero_field():
    fam = GammaFamily.constant(lambda u: np.zeros_like(np.asarray(u, float)),
                               range(-4, 6))
    cone = build_dyadic_cone_multiplier(fam, cone_axes())
    assert np.max(np.abs(cone.grid.values)) == 0.0


def test_dyadic_sampled_profile_matches_pointwise_oracle():
    rng = np.random.default_rng(5)
    u_pts = np.linspace(-0.25, 0.25, 41)
    vals = np.sin(6 * u_pts) * tent(u_pts)
    prof = SampledProfile(u_pts, vals, support=(-0.25, 0.25))
    fam = GammaFamily.constant(prof, range(-4, 6))
    axes = cone_axes()
    cone = build_dyadic_cone_multiplier(fam, axes)
    tau = axes[-1].freq_coords()
    xi = freq_magnitude(axes[:-1])
    # random collection of grid points, reevaluated one by one
    for _ in range(400):
        i = tuple(rng.integers(0, 32, size=3))
        t = tau[i[-1]]
        got = cone.grid.values[i]
        if t <= 0:
            assert got == 0.0
            continue
        k = math.floor(math.log2(t))
        want = prof((xi[i[:-1]] - t) / 2.0 ** k) if k in fam.profiles else 0.0
        assert abs(got - want) <= 1e-9


def test_support_bookkeeping_every_nonzero_point():
    fam = GammaFamily.constant(tent, range(-4, 6))
    axes = cone_axes()
    cone = build_dyadic_cone_multiplier(fam, axes)
    tau = axes[-1].freq_coords()
    xi = freq_magnitude(axes[:-1])
    nz = np.argwhere(np.abs(cone.grid.values) > 0)
    assert len(nz) > 0
    for idx in nz:
        t = tau[idx[-1]]
        assert t > 0
        k = math.floor(math.log2(t))
        assert 2.0 ** k <= t < 2.0 ** (k + 1)
        assert abs(xi[tuple(idx[:-1])] - t) < 2.0 ** (k - 2)


def test_family_support_violation_rejected():
    wide = lambda u: np.clip(1.0 - np.abs(u), 0.0, None)  # supported (-1, 1)
    with pytest.raises(DomainError):
        GammaFamily.constant(wide, [0])


# -- modulated builder --------------------------------------------------------


def test_modulated_slope_bound_enforced():
    with pytest.raises(DomainError):
        ModulatedFamily({0: tent}, {0: 2.5})


def test_modulated_support_box():
    fam = ModulatedFamily({0: tent}, {0: 1.0}, support_radius=0.25)
    axes = cone_axes(extent=8.0, res=64)
    cone = build_modulated_cone_multiplier(fam, axes)
    tau = axes[-1].freq_coords()
    xi = freq_magnitude(axes[:-1])[..., None]
    nz = np.abs(cone.grid.values) > 0
    xi_b = np.broadcast_to(xi, cone.grid.values.shape)
    tau_b = np.broadcast_to(tau, cone.grid.values.shape)
    assert np.all(xi_b[nz] >= 5.0 / 8.0)
    assert np.all(xi_b[nz] <= 17.0 / 8.0)
    assert np.all(np.abs(tau_b[nz]) <= 4.0)


def test_modulated_constant_profile_drops_gamma_factor():
    from conemult import bumps
    # flat where the radial cutoff lives (|u| <= 17/8 < 3), zero slope
    flat = lambda u: bumps.smooth_window(np.asarray(u, dtype=float),
                                         -4.0, -3.0, 3.0, 4.0)
    fam = ModulatedFamily({0: flat, 1: flat}, {0: 0.0, 1: 0.0},
                          support_radius=4.0)
    axes = cone_axes(extent=8.0, res=64)
    cone = build_modulated_cone_multiplier(fam, axes)
    tau = axes[-1].freq_coords()
    xi = freq_magnitude(axes[:-1])[..., None]
    want = sum(bumps.annulus_cutoff(xi / 2.0 ** k) * bumps.slab_cutoff(
        tau / 2.0 ** k) for k in (0, 1))
    assert np.allclose(cone.grid.values, want, atol=1e-12)


# -- operators ----------------------------------------------------------------


def test_apply_identity_and_scalar():
    axes = cone_axes(ndim=2)
    rng = np.random.default_rng(0)
    f = GridField(axes, rng.standard_normal((32, 32))
                  + 1j * rng.standard_normal((32, 32)))
    ones = GridField(axes, np.ones((32, 32), complex), rep="frequency")
    assert np.allclose(apply_multiplier(f, ones).values, f.values,
                       atol=1e-13)
    half = GridField(axes, 0.5j * np.ones((32, 32), complex), rep="frequency")
    assert np.allclose(apply_multiplier(f, half).values, 0.5j * f.values,
                       atol=1e-13)


def test_apply_matches_direct_dft_sum_oracle_16_cubed():
    rng = np.random.default_rng(21)
    axes = cone_axes(res=16)
    f = rng.standard_normal((16,) * 3) + 1j * rng.standard_normal((16,) * 3)
    m = rng.standard_normal((16,) * 3) + 1j * rng.standard_normal((16,) * 3)
    out = apply_multiplier(GridField(axes, f),
                           GridField(axes, m, rep="frequency"))
    want = idft_oracle(m * dft_oracle(f))
    assert np.max(np.abs(out.values - want)) <= 1e-9


def test_grid_mismatch_rejected():
    f = GridField(cone_axes(ndim=2), np.zeros((32, 32)))
    m = GridField(cone_axes(extent=8.0, ndim=2), np.zeros((32, 32)),
                  rep="frequency")
    with pytest.raises(DomainError):
        apply_multiplier(f, m)


def test_energy_bound_and_constant_equality():
    rng = np.random.default_rng(2)
    axes = cone_axes(ndim=2)
    f = GridField(axes, rng.standard_normal((32, 32)) + 0j)
    m_vals = rng.uniform(0.2, 1.0, (32, 32)).astype(complex)
    out = apply_multiplier(f, GridField(axes, m_vals, rep="frequency"))
    assert out.l2_norm() <= np.abs(m_vals).max() * f.l2_norm() * (1 + 1e-12)
    const = GridField(axes, np.full((32, 32), 0.77, dtype=complex),
                      rep="frequency")
    out = apply_multiplier(f, const)
    assert math.isclose(out.l2_norm(), 0.77 * f.l2_norm(), rel_tol=1e-12)


def test_translation_covariance_circular():
    rng = np.random.default_rng(4)
    axes = cone_axes(ndim=2)
    f = rng.standard_normal((32, 32)) + 0j
    m = GridField(axes, (rng.standard_normal((32, 32))
                         + 1j * rng.standard_normal((32, 32))),
                  rep="frequency")
    out1 = apply_multiplier(GridField(axes, np.roll(f, (3, -5), (0, 1))), m)
    out2 = apply_multiplier(GridField(axes, f), m)
    assert np.allclose(out1.values, np.roll(out2.values, (3, -5), (0, 1)),
                       atol=1e-12)


def test_radial_symbol_on_radial_input_stays_radial():
    axes = (Axis(20.0, 64), Axis(20.0, 64))
    x = axes[0].space_coords()
    rsq = x[:, None] ** 2 + x[None, :] ** 2
    f = GridField(axes, np.exp(-0.5 * rsq).astype(complex))
    out = apply_multiplier(f, lambda r: np.exp(-0.25 * r ** 2))
    mag = np.abs(out.values)

    groups = {}
    for i in range(64):
        for j in range(64):
            key = round(float(rsq[i, j]), 9)
            groups.setdefault(key, []).append(mag[i, j])
    mean_scale = mag.max()
    worst = 0.0
    for key, vals in groups.items():
        if len(vals) > 1:
            worst = max(worst, float(np.ptp(vals)) / mean_scale)
    assert worst <= 1e-8


# -- shell operators ----------------------------------------------------------


def test_shell_zero_profile_gives_zero():
    fam = GammaFamily.constant(lambda u: np.zeros_like(np.asarray(u, float)),
                               [0])
    axes = cone_axes(extent=8.0, res=64, ndim=2)
    f = GridField(axes, np.random.default_rng(0).standard_normal((64, 64))
                  + 0j)
    out = apply_shell_multiplier(f, 1.5, fam)
    assert np.max(np.abs(out.values)) <= 1e-14


def test_shell_annihilates_disjoint_fourier_support():
    fam = GammaFamily.constant(tent, [0])
    axes = (Axis(8.0, 64), Axis(8.0, 64))
    # synthesize the input from modes with |xi| <= 0.8 only
    rng = np.random.default_rng(8)
    xi = freq_magnitude(axes)
    spectrum = np.where(xi <= 0.8,
                        rng.standard_normal(xi.shape)
                        + 1j * rng.standard_normal(xi.shape), 0.0)
    f = GridField(axes, np.fft.ifftn(spectrum))
    out = apply_shell_multiplier(f, 1.9, fam)
    # annulus ||xi| - 1.9| < 1/4 sees none of the input spectrum
    assert out.l2_norm() <= 1e-10 * f.l2_norm()


def test_shell_tent_matches_pointwise_oracle():
    fam = GammaFamily.constant(tent, [0])
    axes = (Axis(16.0, 64), Axis(16.0, 64))
    rng = np.random.default_rng(9)
    f = rng.standard_normal((64, 64)) + 1j * rng.standard_normal((64, 64))
    out = apply_shell_multiplier(GridField(axes, f), 1.5, fam)
    xi = freq_magnitude(axes)
    sym = tent(xi - 1.5)
    want = np.fft.ifftn(sym * np.fft.fftn(f))
    assert np.max(np.abs(out.values - want)) <= 1e-12


def test_shell_tau_outside_family_rejected():
    fam = GammaFamily.constant(tent, [0])
    axes = (Axis(8.0, 32), Axis(8.0, 32))
    f = GridField(axes, np.zeros((32, 32)))
    with pytest.raises(DomainError):
        apply_shell_multiplier(f, 4.5, fam)  # octave k = 2 not in family


def test_shell_combination_collapse_and_additivity():
    fam = GammaFamily.constant(tent, [0, 1])
    axes = (Axis(16.0, 64), Axis(16.0, 64))
    rng = np.random.default_rng(14)
    f = GridField(axes, rng.standard_normal((64, 64))
                  + 1j * rng.standard_normal((64, 64)))
    zero = apply_shell_combination(f, {0: 1.0, 1: 2.0}, {}, fam)
    assert np.max(np.abs(zero.values)) == 0.0
    single = apply_shell_combination(f, {0: 1.0}, {0: 1.0}, fam)
    direct = apply_shell_multiplier(f, 1.0, fam)
    assert np.allclose(single.values, direct.values, atol=1e-13)
    # mid-slab taus make the annuli pairwise disjoint
    taus = {0: 1.0, 1: 2.0}
    alphas = {0: 1.0, 1: -1.0}
    combo = apply_shell_combination(f, taus, alphas, fam)
    t0 = apply_shell_multiplier(f, 1.0, fam)
    t1 = apply_shell_multiplier(f, 2.0, fam)
    lhs = combo.l2_norm() ** 2
    rhs = t0.l2_norm() ** 2 + t1.l2_norm() ** 2
    assert abs(lhs - rhs) <= 1e-9 * rhs


def test_shell_combination_slab_validation():
    fam = GammaFamily.constant(tent, [0, 1])
    axes = (Axis(8.0, 32), Axis(8.0, 32))
    f = GridField(axes, np.zeros((32, 32)))
    with pytest.raises(DomainError):
        apply_shell_combination(f, {0: 2.5}, {0: 1.0}, fam)


# -- wraparound and serialization --------------------------------------------


def test_wraparound_warning_fires():
    axes = (Axis(4.0, 32), Axis(4.0, 32))
    x = axes[0].space_coords()
    f = GridField(axes, np.exp(-0.1 * (x[:, None] ** 2 + x[None, :] ** 2))
                  .astype(complex))
    with pytest.warns(WraparoundWarning):
        check_wraparound(f, threshold=1e-6)
    tight = GridField(axes, np.exp(-40.0 * (x[:, None] ** 2
                                            + x[None, :] ** 2))
                      .astype(complex))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        check_wraparound(tight, threshold=1e-6)


def test_single_axis_field_operator():
    ax = (Axis(8.0, 64),)
    rng = np.random.default_rng(6)
    f = GridField(ax, rng.standard_normal(64) + 1j * rng.standard_normal(64))
    out = apply_multiplier(f, lambda r: 1.0 / (1.0 + np.asarray(r) ** 2))
    sym = 1.0 / (1.0 + freq_magnitude(ax) ** 2)
    want = np.fft.ifft(sym * np.fft.fft(f.values))
    assert np.allclose(out.values, want, atol=1e-13)


def test_four_axis_cone_field():
    fam = GammaFamily.constant(tent, range(-3, 5))
    axes = tuple(Axis(8.0, 16) for _ in range(4))
    cone = build_dyadic_cone_multiplier(fam, axes)
    tau = axes[-1].freq_coords()
    xi = freq_magnitude(axes[:-1])
    nz = np.argwhere(np.abs(cone.grid.values) > 0)
    assert len(nz) > 0
    for idx in nz[:200]:
        t = tau[idx[-1]]
        k = math.floor(math.log2(t))
        assert abs(xi[tuple(idx[:-1])] - t) < 2.0 ** (k - 2)
    with pytest.raises(DomainError):
        GridField(tuple(Axis(4.0, 4) for _ in range(5)),
                  np.zeros((4,) * 5, complex))


def test_field_binary_roundtrip(tmp_path):
    rng = np.random.default_rng(33)
    axes = (Axis(8.0, 16), Axis(4.0, 32))
    f = GridField(axes, (rng.standard_normal((16, 32))
                         + 1j * rng.standard_normal((16, 32))).astype(
        np.complex64).astype(complex), rep="frequency")
    path = tmp_path / "field.cmf"
    save_field(f, path)
    g = load_field(path)
    assert g.rep == "frequency"
    assert g.axes[0].extent == 8.0 and g.axes[1].resolution == 32
    assert np.array_equal(g.values, f.values)


def test_field_csv_export(tmp_path):
    axes = (Axis(2.0, 4), Axis(2.0, 4))
    f = GridField(axes, np.arange(16, dtype=float).reshape(4, 4) + 0j)
    path = tmp_path / "f.csv"
    export_field_csv(f, path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "x0,x1,re,im"
    assert len(lines) == 17
