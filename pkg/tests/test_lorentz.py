import math

import numpy as np
import pytest

from conemult.errors import DomainError
from conemult.lorentz import (LorentzParams, WeightedSampleSet,
                              decreasing_rearrangement, lorentz_quasinorm,
                              weighted_line_samples,
                              weighted_samples_from_grid, weighted_lp_norm)


def samples(values, weights):
    return WeightedSampleSet(np.asarray(values, float),
                             np.asarray(weights, float))


def test_rearrangement_single_atom():
    r = decreasing_rearrangement(samples([1.0], [3.0]))
    assert np.allclose(r.breakpoints, [0.0, 3.0])
    assert np.allclose(r.levels, [1.0])


def test_rearrangement_two_atoms_sorted():
    r = decreasing_rearrangement(samples([1.0, 2.0], [1.0, 1.0]))
    assert np.allclose(r.levels, [2.0, 1.0])
    assert np.allclose(r.breakpoints, [0.0, 1.0, 2.0])


def test_rearrangement_merges_equal_values():
    r = decreasing_rearrangement(samples([2.0, 1.0, 2.0], [1.0, 4.0, 2.5]))
    assert np.allclose(r.levels, [2.0, 1.0])
    assert np.allclose(r.breakpoints, [0.0, 3.5, 7.5])


def test_equimeasurability_against_distribution_function():
    rng = np.random.default_rng(42)
    s = samples(rng.uniform(0, 5, 100), rng.uniform(0.1, 2.0, 100))
    r = decreasing_rearrangement(s)
    # brute-force distribution function oracle
    for lam in np.concatenate(([0.0], np.sort(s.values), [5.5])):
        direct = float(np.sum(s.weights[s.values > lam]))
        assert math.isclose(r.measure_above(lam), direct, rel_tol=1e-12,
                            abs_tol=1e-12)


def test_total_measure_preserved():
    rng = np.random.default_rng(3)
    s = samples(rng.uniform(0, 1, 57), rng.uniform(0.5, 1.5, 57))
    r = decreasing_rearrangement(s)
    assert math.isclose(r.breakpoints[-1], s.total_measure, rel_tol=1e-13)


def test_empty_input_rejected():
    with pytest.raises(DomainError):
        WeightedSampleSet(np.array([]), np.array([]))


def test_indicator_weak_norm_closed_form():
    for p in (0.7, 1.0, 1.4, 2.0, 3.0):
        for m in (0.4, 1.0, 7.3):
            got = lorentz_quasinorm(samples([1.0], [m]),
                                    LorentzParams(p, math.inf))
            assert math.isclose(got, m ** (1.0 / p), rel_tol=1e-12)


def test_indicator_finite_nu_closed_form():
    for p in (0.8, 1.3, 2.0):
        for nu in (p, 2.0 * p, 5.0):
            for m in (0.5, 2.0):
                got = lorentz_quasinorm(samples([1.0], [m]),
                                        LorentzParams(p, nu))
                want = (p / nu) ** (1.0 / nu) * m ** (1.0 / p)
                assert math.isclose(got, want, rel_tol=1e-12)


def test_l2_identity():
    got = lorentz_quasinorm(samples([1.0, 2.0], [1.0, 1.0]),
                            LorentzParams(2.0, 2.0))
    assert math.isclose(got, math.sqrt(5.0), rel_tol=1e-13)


def test_p_eq_nu_matches_weighted_lp():
    rng = np.random.default_rng(7)
    for _ in range(200):
        n = int(rng.integers(1, 40))
        s = samples(rng.uniform(0, 3, n), rng.uniform(0.01, 2.0, n))
        p = float(rng.uniform(0.5, 4.0))
        a = lorentz_quasinorm(s, LorentzParams(p, p))
        b = weighted_lp_norm(s, p)
        assert abs(a - b) <= 1e-10 * max(b, 1e-30)


def test_homogeneity():
    rng = np.random.default_rng(11)
    s = samples(rng.uniform(0, 1, 30), rng.uniform(0.1, 1, 30))
    params = LorentzParams(1.3, 2.6)
    base = lorentz_quasinorm(s, params)
    for c in (0.25, 3.0, 17.5):
        assert math.isclose(lorentz_quasinorm(s.scaled(c), params), c * base,
                            rel_tol=1e-12)


def test_monotonicity_in_values():
    rng = np.random.default_rng(13)
    for params in (LorentzParams(1.2, 1.2), LorentzParams(1.2, math.inf),
                   LorentzParams(2.0, 3.0)):
        v1 = rng.uniform(0, 1, 50)
        v2 = v1 + rng.uniform(0, 0.5, 50)
        w = rng.uniform(0.1, 1, 50)
        assert lorentz_quasinorm(samples(v1, w), params) <= \
            lorentz_quasinorm(samples(v2, w), params) * (1 + 1e-12)


def test_joint_permutation_invariance():
    rng = np.random.default_rng(17)
    v = rng.uniform(0, 2, 41)
    w = rng.uniform(0.1, 1, 41)
    perm = rng.permutation(41)
    params = LorentzParams(1.7, math.inf)
    assert math.isclose(lorentz_quasinorm(samples(v, w), params),
                        lorentz_quasinorm(samples(v[perm], w[perm]), params),
                        rel_tol=1e-13)


def test_normalized_nu_monotone_on_indicators():
    # (nu/p)^(1/nu) * quasinorm is constant (= m^(1/p)) on indicator inputs
    p = 1.4
    prev = None
    for nu in (1.4, 2.0, 3.5, 8.0, 40.0):
        q = lorentz_quasinorm(samples([1.0], [2.7]), LorentzParams(p, nu))
        scaled = (nu / p) ** (1.0 / nu) * q
        if prev is not None:
            assert scaled <= prev * (1 + 1e-12)
        prev = scaled


def test_params_validation():
    with pytest.raises(DomainError):
        LorentzParams(0.0, 1.0)
    with pytest.raises(DomainError):
        LorentzParams(2.0, 1.0)  # nu < p
    LorentzParams(2.0, math.inf)


def test_line_samples_total_weight():
    s = weighted_line_samples(lambda x: np.ones_like(x), 0, 1.0, 64)
    assert math.isclose(s.total_measure, 2.0, abs_tol=1e-9)


def test_line_samples_nonfinite_rejected_with_location():
    def f(x):
        out = np.ones_like(x)
        out[x > 0.5] = np.nan
        return out
    with pytest.raises(DomainError, match="s ="):
        weighted_line_samples(f, 2, 1.0, 64)


def _analytic_weak_norm_power_law(a, d, p, R):
    """Weak quasi-norm of (1+|s|)^(-a) on [-R, R] under (1+|s|)^(d-1) ds.

    The distribution function is exact: mu{f > t} = (2/d)(t^(-d/a) - 1)
    for f(R) < t < 1, capped at the full measure; the sup over t is
    maximized on a dense t-grid of the closed-form expression.
    """
    full = 2.0 * ((1.0 + R) ** d - 1.0) / d
    ts = np.geomspace((1.0 + R) ** (-a), 1.0, 4000)
    mu = np.minimum(2.0 * (ts ** (-d / a) - 1.0) / d, full)
    return float(np.max(ts * mu ** (1.0 / p)))


def test_power_law_weak_norm_vs_analytic_oracle():
    d, p = 4, 1.25
    for a, r in ((3.5, 200.0), (4.0, 200.0)):
        s = weighted_line_samples(lambda x, a=a: (1 + np.abs(x)) ** (-a),
                                  d - 1, r, 2 ** 17)
        got = lorentz_quasinorm(s, LorentzParams(p, math.inf))
        want = _analytic_weak_norm_power_law(a, d, p, r)
        assert abs(got - want) <= 0.02 * want


def test_power_law_divergence_rate():
    # below the integrability threshold a = d/p the truncated weak norm grows
    # like R^(d/p - a); check the measured doubling exponent
    d, p = 4, 1.25
    a = 2.6  # d/p = 3.2
    vals = []
    for r in (200.0, 400.0, 800.0):
        s = weighted_line_samples(lambda x: (1 + np.abs(x)) ** (-a),
                                  d - 1, r, 2 ** 16)
        vals.append(lorentz_quasinorm(s, LorentzParams(p, math.inf)))
    rate = math.log2(vals[2] / vals[1])
    assert abs(rate - (d / p - a)) < 0.05


def test_ghat_weak_norm_stabilizes_at_critical_order():
    from conemult.bochner import BRProfile
    from conemult.radial import fourier_1d
    sigma, ghat = fourier_1d(BRProfile(1.0), 4.0, 2 ** 16)
    d, p = 4, 8.0 / 7.0
    vals = []
    for r in (1e2, 1e3, 1e4):
        s = weighted_samples_from_grid(
            sigma, np.abs(ghat) / (1 + np.abs(sigma)) ** ((d - 1) / 2),
            d - 1, truncation=r)
        vals.append(lorentz_quasinorm(s, LorentzParams(p, math.inf)))
    assert max(vals) / min(vals) <= 1.05


def test_grid_samples_truncation_empty():
    with pytest.raises(DomainError):
        weighted_samples_from_grid(np.linspace(-1, 1, 32), np.ones(32), 1,
                                   truncation=1e-9)
