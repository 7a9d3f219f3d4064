import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_table
from spinscape.models import EnergyModel
from spinscape.landscape import (
    ModificationParams,
    modified_energy,
    modified_energy_table,
    rem_preset_c,
    low_temperature_beta,
    tune_c,
    tuned_params,
    zero_params,
)
from spinscape.rng import stream


def quad_params(alpha, c, beta, h_star=0.0):
    return ModificationParams(f_kind="quadratic", alpha=alpha, c=c, beta=beta, h_star=h_star)


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------

def test_quadratic_closed_form_example():
    p = quad_params(2.0, 1.0, 2.0)
    assert math.isclose(modified_energy(None, p, value=2.0), 2.0 + math.atan(2.0), rel_tol=1e-15)


def test_zero_kind_reduces_to_scaled_energy():
    p = ModificationParams(f_kind="zero", alpha=0.0, c=1.0, beta=2.0, h_star=0.0)
    assert modified_energy(None, p, value=2.0) == 4.0


def test_ground_state_is_zero():
    for p in (quad_params(2.0, 1.0, 2.0), zero_params(3.0, 0.0)):
        assert modified_energy(None, p, value=0.0) == 0.0


def test_below_reference_is_domain_error():
    p = quad_params(1.0, 1.0, 1.0, h_star=0.5)
    with pytest.raises(ValueError, match="ground-level"):
        modified_energy(None, p, value=0.2)


@pytest.mark.parametrize("h", [0.3, 1.0, 2.5, 7.0])
@pytest.mark.parametrize("c", [0.5, 2.0])
@pytest.mark.parametrize("beta", [0.5, 2.0, 10.0])
@pytest.mark.parametrize("alpha", [0.7, None])
def test_quadratic_closed_form_vs_quadrature(h, c, beta, alpha):
    alpha = beta if alpha is None else alpha
    closed = modified_energy(None, quad_params(alpha, c, beta), value=h)
    via_quad = modified_energy(
        None,
        ModificationParams(f_kind="custom", alpha=alpha, c=c, beta=beta, h_star=0.0,
                           f=lambda x: x * x),
        value=h)
    assert abs(closed - via_quad) <= 1e-8


@pytest.mark.parametrize("h,c,beta", [(2.0, 0.5, 1.0), (5.0, 1.0, 3.0), (0.8, 1.0, 2.0)])
def test_linear_closed_form_vs_quadrature(h, c, beta):
    closed = modified_energy(
        None, ModificationParams(f_kind="linear", alpha=1.0, c=c, beta=beta, h_star=0.0),
        value=h)
    expected = beta * (min(h, c) - 0.0) + math.log1p(beta * max(h - c, 0.0))
    assert math.isclose(closed, expected, rel_tol=1e-15)
    via_quad = modified_energy(
        None, ModificationParams(f_kind="custom", alpha=1.0, c=c, beta=beta, h_star=0.0,
                                 f=lambda x: x),
        value=h)
    assert abs(closed - via_quad) <= 1e-8


def test_linear_general_alpha_goes_through_quadrature():
    p = ModificationParams(f_kind="linear", alpha=2.0, c=1.0, beta=1.0, h_star=0.0)
    # integral above c: (1/alpha) ln(1 + alpha beta (h-c))
    expected = 1.0 + 0.5 * math.log(1.0 + 2.0 * 1.0 * 1.0)
    assert abs(modified_energy(None, p, value=2.0) - expected) <= 1e-9


def test_sqrt_kind_quadrature_against_substitution():
    # integral of 1/(a sqrt(u-c) + 1/b) du over [c, h] = 2w/a - (2/(a^2 b)) ln(1 + a b w), w = sqrt(h-c)
    a, b, c, h = 1.5, 2.0, 1.0, 3.0
    w = math.sqrt(h - c)
    expected_above = 2 * w / a - 2.0 / (a * a * b) * math.log1p(a * b * w)
    p = ModificationParams(f_kind="sqrt", alpha=a, c=c, beta=b, h_star=0.0)
    assert abs(modified_energy(None, p, value=h) - (b * c + expected_above)) <= 1e-8


# ---------------------------------------------------------------------------
# tables
# ---------------------------------------------------------------------------

def test_table_identity_at_beta_one_zero_kind(table4):
    assert np.array_equal(modified_energy_table(table4, zero_params(1.0, 0.0)),
                          np.array([0.0, 2.0, 3.0, 1.0]))


def test_table_quadratic_example(table4):
    tab = modified_energy_table(table4, quad_params(2.0, 1.0, 2.0))
    expected = np.array([0.0, 2.0 + math.atan(2.0), 2.0 + math.atan(4.0), 2.0])
    assert np.array_equal(tab, expected)


def test_table_beta_doubling_scales_below_c_part(table4):
    # the pinned-at-c part beta*(c - h_star) doubles exactly with beta
    p1 = quad_params(2.0, 1.0, 2.0)
    p2 = quad_params(2.0, 1.0, 4.0)
    t1 = modified_energy_table(table4, p1)
    t2 = modified_energy_table(table4, p2)
    below = np.minimum(table4.energy_table(), 1.0)
    assert np.allclose(2.0 * (2.0 * below), 4.0 * below)
    # state 3 sits at H=1=c: purely linear part, doubles exactly
    assert t2[3] == 2.0 * t1[3]


def test_table_matches_per_state_calls_exactly(table4):
    for p in (quad_params(2.0, 1.0, 2.0), zero_params(2.5, 0.0),
              ModificationParams(f_kind="linear", alpha=1.0, c=1.0, beta=3.0, h_star=0.0)):
        tab = modified_energy_table(table4, p)
        for bits in range(4):
            assert tab[bits] == modified_energy(table4, p, bits)


def test_zero_table_reduction_elementwise():
    rng = stream(17)
    model = random_table(rng, 5)
    beta = 3.7
    h_star = model.statistics().h_star
    tab = modified_energy_table(model, zero_params(beta, h_star))
    assert np.array_equal(tab, beta * (model.energy_table() - h_star))


# ---------------------------------------------------------------------------
# structural properties
# ---------------------------------------------------------------------------

@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 8),
       st.sampled_from(["zero", "linear", "quadratic", "sqrt"]),
       st.floats(0.1, 5.0), st.floats(0.2, 8.0))
def test_monotone_and_order_preserving(seed, n, f_kind, alpha, beta):
    rng = stream(seed, replica=7)
    model = random_table(rng, n)
    stats = model.statistics()
    c = stats.h_star + 0.4 * (stats.h_max - stats.h_star) if stats.h_max > stats.h_star else stats.h_star
    alpha = 1.0 if f_kind == "linear" else alpha
    p = ModificationParams(f_kind=f_kind, alpha=alpha, c=c, beta=beta, h_star=stats.h_star)
    energies = model.energy_table()
    hf = modified_energy_table(model, p)
    order = np.argsort(energies, kind="stable")
    diffs = np.diff(hf[order])
    assert np.all(diffs >= -1e-12)  # H(a) <= H(b) implies Hmod(a) <= Hmod(b)
    # same minimizers and the same local-minima set
    assert set(np.flatnonzero(hf == hf.min())) == set(stats.global_minima)
    mod_model = EnergyModel.from_table(hf)
    assert mod_model.statistics().local_minima == stats.local_minima


def test_arctan_cap_above_threshold():
    # both energies above c, alpha=beta: difference reduces to an arctan difference
    beta = 4.0
    p = quad_params(beta, 1.0, beta)
    lo = modified_energy(None, p, value=1.5)
    hi = modified_energy(None, p, value=500.0)
    assert 0.0 < hi - lo < math.pi / 2.0


# ---------------------------------------------------------------------------
# parameter validation
# ---------------------------------------------------------------------------

def test_params_validation():
    with pytest.raises(ValueError):
        ModificationParams(f_kind="cubic", alpha=1.0, c=0.0, beta=1.0)
    with pytest.raises(ValueError):
        ModificationParams(f_kind="zero", alpha=-1.0, c=0.0, beta=1.0)
    with pytest.raises(ValueError):
        ModificationParams(f_kind="zero", alpha=0.0, c=0.0, beta=0.0)
    with pytest.raises(ValueError, match="f\\(0\\)"):
        ModificationParams(f_kind="custom", alpha=1.0, c=0.0, beta=1.0, f=lambda x: x + 1.0)
    with pytest.raises(ValueError, match="non-decreasing"):
        ModificationParams(f_kind="custom", alpha=1.0, c=0.0, beta=1.0, f=lambda x: -x)


def test_validate_against_model(table4):
    quad_params(1.0, 1.0, 1.0).validate_against(table4)
    with pytest.raises(ValueError, match="outside"):
        quad_params(1.0, 5.0, 1.0).validate_against(table4)


# ---------------------------------------------------------------------------
# threshold tuning
# ---------------------------------------------------------------------------

def test_tune_c_table_examples(table4):
    r = tune_c(table4, 0.5)
    assert r.c == 0.5 and r.valid and r.partial
    assert r.nonglobal_lm_gap == 1.0 and r.energy_gap == 1.0
    r2 = tune_c(table4, 1.5)
    assert not r2.valid  # exceeds the energy gap


def test_tune_c_with_m_conjunct(table4):
    r = tune_c(table4, 0.5, m=1.0)
    assert not r.valid and not r.partial and r.m_quarter == 0.25
    assert tune_c(table4, 0.2, m=1.0).valid


def test_tune_c_requires_positive_offset(table4):
    with pytest.raises(ValueError):
        tune_c(table4, 0.0)


def test_tune_c_without_nonglobal_minimum(two_state):
    r = tune_c(two_state, 0.5)
    assert r.nonglobal_lm_gap is None
    assert any("non-global" in w for w in r.warnings)
    assert r.valid  # governed by the energy gap alone


def test_tuned_params_defaults(k6):
    params, report = tuned_params(k6, beta=10.0, m=7.5)
    assert report.valid
    assert params.alpha == params.beta == 10.0
    # offset is half of min(lm gap 3, energy gap 3, m/4 = 1.875)
    assert math.isclose(report.delta, 0.9375)
    assert math.isclose(params.c, -9.0 + 0.9375)


def test_rem_preset_formula():
    n = 20
    expected = -n * math.sqrt(2 * math.log(2)) + n ** 0.25 / 4.0
    assert rem_preset_c(n) == expected


def test_low_temperature_beta_formula():
    val = low_temperature_beta(6, 0.1, 0.9375)
    assert math.isclose(val, (6 * math.log(2) + math.log(40.0)) / 0.9375, rel_tol=1e-15)
    with pytest.raises(ValueError):
        low_temperature_beta(6, 0.1, 0.0)
