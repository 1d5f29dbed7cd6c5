import math

import numpy as np
import pytest

from conemult.bochner import (BRProfile, CriticalScanResult,
                              build_bochner_riesz_cone, cone_split_fields,
                              critical_exponent, critical_exponent_alt,
                              critical_scan, edge_decay_fit, edge_profile)
from conemult.characterize import fourier_side_quantity
from conemult.errors import DomainError
from conemult.lorentz import LorentzParams
from conemult.multipliers import Axis, ModulatedFamily, freq_magnitude, \
    build_modulated_cone_multiplier


def test_profile_point_values():
    gamma = BRProfile(1.0)
    assert gamma(np.array([0.125]))[0] == 0.0          # u > 0 branch
    assert gamma(np.array([-1.0 / 16.0]))[0] == pytest.approx(1.0 / 16.0)
    assert gamma(np.array([-0.25 - 1e-9]))[0] == 0.0   # outside the bump


def test_profile_support_invariant():
    gamma = BRProfile(0.7)
    u = np.concatenate([np.linspace(1e-12, 2, 100),
                        np.linspace(-5, -0.25, 100)])
    assert np.all(gamma(u) == 0.0)
    inside = gamma(np.linspace(-0.24, -0.01, 50))
    assert np.all(inside >= 0.0) and np.any(inside > 0)


def test_profile_continuity_at_zero():
    gamma = BRProfile(0.3)
    assert gamma(np.array([-1e-12]))[0] <= 1e-3


def test_invalid_order_rejected():
    with pytest.raises(DomainError):
        BRProfile(0.0)
    with pytest.raises(DomainError):
        edge_profile(-1.0)


def test_decay_fit_meets_analytic_rate():
    for lam in (0.5, 1.0, 1.5):
        fit = edge_decay_fit(lam)
        assert fit.exponent >= lam + 1.0 - 0.1
        assert not fit.zero_input


def test_decay_fit_zero_input_flagged():
    fit = edge_decay_fit(1.0, b=lambda u: np.zeros_like(np.asarray(u, float)))
    assert fit.zero_input


def test_decay_fit_range_validation():
    with pytest.raises(DomainError):
        edge_decay_fit(1.0, s_range=(1.0, 100.0))
    with pytest.raises(DomainError):
        edge_decay_fit(1.0, s_range=(10.0, 1e4), resolution=2 ** 10)


def test_weak_quantity_monotone_in_order():
    params = LorentzParams(8.0 / 7.0, math.inf)
    prev = None
    for lam in np.arange(0.5, 2.01, 0.25):
        q = fourier_side_quantity(BRProfile(float(lam)), 4, params,
                                  truncation=1024.0, spatial_truncation=4.0,
                                  resolution=2 ** 14)
        if prev is not None:
            assert q.value <= prev * (1 + 1e-6)
        prev = q.value


def test_cone_field_point_values():
    axes = (Axis(16.0, 32), Axis(16.0, 32), Axis(16.0, 32))
    cone = build_bochner_riesz_cone(1.0, axes)
    tau = axes[-1].freq_coords()
    xi = freq_magnitude(axes[:-1])
    pos = tau > 0
    vals = cone.grid.values
    # apex: xi = 0 gives 1 for every tau > 0
    assert np.allclose(vals[0, 0, pos], 1.0)
    # support: zero when |xi| >= tau and for tau <= 0
    xi_b = np.broadcast_to(xi[..., None], vals.shape)
    tau_b = np.broadcast_to(tau, vals.shape)
    assert np.all(vals[(xi_b >= tau_b) | (tau_b <= 0)] == 0.0)
    # direct formula at |xi| = tau/2
    i = np.argmin(np.abs(tau - 4.0))
    j = np.argmin(np.abs(axes[0].freq_coords() - 2.0))
    assert vals[j, 0, i] == pytest.approx(0.75)


def test_cone_split_exact_identity():
    axes = (Axis(16.0, 32), Axis(16.0, 32), Axis(16.0, 32))
    for lam in (0.5, 1.0, 1.7):
        full, main, rest = cone_split_fields(lam, axes)
        resid = np.abs(full - main - rest)
        assert resid.max() <= 1e-10


def test_main_term_matches_modulated_builder():
    # the edge profile family with slope 1 builds the same field as the
    # slab-decomposed main term evaluated pointwise
    from conemult import bumps
    lam = 1.0
    gamma = BRProfile(lam)
    axes = (Axis(16.0, 32), Axis(16.0, 32), Axis(16.0, 32))
    fam = ModulatedFamily({k: gamma for k in range(-3, 4)},
                          {k: 1.0 for k in range(-3, 4)},
                          support_radius=0.25)
    cone = build_modulated_cone_multiplier(fam, axes)
    xi = freq_magnitude(axes[:-1])[..., None]
    tau = axes[-1].freq_coords()
    want = np.zeros(cone.grid.values.shape)
    for k in range(-3, 4):
        want += bumps.annulus_cutoff(xi / 2.0 ** k) \
            * bumps.slab_cutoff(tau / 2.0 ** k) \
            * gamma((xi - tau) / 2.0 ** k)
    assert np.max(np.abs(cone.grid.values - want)) <= 1e-12


def test_threshold_formulas_agree():
    for d in (2, 3, 4, 7):
        for p in (1.01, 1.2, 8.0 / 7.0, 1.9):
            assert critical_exponent(d, p) == pytest.approx(
                critical_exponent_alt(d, p), abs=1e-14)


def test_scan_bracket_validation():
    with pytest.raises(DomainError):
        critical_scan(4, [8.0 / 7.0], [1.2, 1.3, 1.4])


def test_scan_small_case():
    res = critical_scan(3, [1.2], np.arange(0.2, 1.3, 0.2).round(2).tolist(),
                        truncation=8192.0, resolution=2 ** 16)
    (r,) = res
    assert isinstance(r, CriticalScanResult)
    assert r.identity_gap == 0.0
    assert abs(r.prediction - (3.0 / 1.2 - 2.0)) <= 1e-12
    assert abs(r.estimate - r.prediction) <= 0.2 + 1e-9
