"""
Tests for the closed-form pointwise bounds in fna_sensitivity.bounds.pointwise.

Worked values come from the two-point latent example (mu0 = 0.690,
mu1 = 0.842) and the (1/4, 1/2) example; properties are checked on random
grids of interior marginals.
"""
from __future__ import annotations

import math

import numpy as np
import pytest

from fna_sensitivity.bounds.pointwise import (
    CLAMP_TOL,
    feasible_interval,
    fh_bounds,
    fna_given_rho,
    fpa_bounds,
    general_bounds,
    lower_bound_decomposed,
    policy_harm_free,
    rho_feasible_range,
    rho_feasible_range_arrays,
    rho_star_from_odds_ratio,
    rho_star_threshold,
    sensitivity_bounds,
    upper_bound_caps,
    upper_bound_decomposed,
)
from fna_sensitivity.exceptions import (
    DegenerateMarginal,
    EmptyFeasibleSet,
    InfeasibleRho,
    InvalidInput,
    NotApplicable,
)
from fna_sensitivity.models import MarginalPair, RhoInterval

TOY = MarginalPair(0.690, 0.842)
QUARTER_HALF = MarginalPair(0.25, 0.5)


@pytest.fixture(scope="module")
def random_pairs():
    """Interior marginals with a feasible rho_u in [0, U]."""
    rng = np.random.default_rng(20240601)
    mu = rng.uniform(0.01, 0.99, size=(10_000, 2))
    out = []
    for mu0, mu1 in mu:
        m = MarginalPair(float(mu0), float(mu1))
        upper = rho_feasible_range(m).rho_u
        out.append((m, float(rng.uniform(0.0, upper))))
    return out


# ─────────────────────────────────────────────────────────────────────────────
# MarginalPair / RhoInterval invariants
# ─────────────────────────────────────────────────────────────────────────────


class TestDomainTypes:
    def test_marginal_outside_unit_interval_rejected(self):
        with pytest.raises(InvalidInput):
            MarginalPair(1.2, 0.5)

    def test_nan_marginal_rejected(self):
        with pytest.raises(InvalidInput):
            MarginalPair(float("nan"), 0.5)

    def test_sd_product_zero_iff_degenerate(self):
        assert MarginalPair(0.0, 0.3).sd_product == 0.0
        assert MarginalPair(0.4, 1.0).sd_product == 0.0
        assert MarginalPair(0.4, 0.3).sd_product > 0.0

    def test_rho_interval_order_enforced(self):
        with pytest.raises(InvalidInput):
            RhoInterval(0.5, 0.1)

    def test_rho_interval_range_enforced(self):
        with pytest.raises(InvalidInput):
            RhoInterval(-1.5, 0.0)


# ─────────────────────────────────────────────────────────────────────────────
# Frechet-Hoeffding bounds
# ─────────────────────────────────────────────────────────────────────────────


class TestFhBounds:
    @pytest.mark.parametrize("mu0, mu1, lower, upper", [
        (0.690, 0.842, 0.0, 0.158),
        (0.5, 0.5, 0.0, 0.5),
        (0.7, 0.4, 0.3, 0.6),
    ])
    def test_known_values(self, mu0, mu1, lower, upper):
        b = fh_bounds(MarginalPair(mu0, mu1))
        assert b.lower == pytest.approx(lower, abs=1e-12)
        assert b.upper == pytest.approx(upper, abs=1e-12)

    def test_degenerate_marginals_allowed(self):
        b = fh_bounds(MarginalPair(1.0, 0.0))
        assert (b.lower, b.upper) == (1.0, 1.0)


# ─────────────────────────────────────────────────────────────────────────────
# Feasible correlation range and clamping
# ─────────────────────────────────────────────────────────────────────────────


class TestRhoFeasibleRange:
    def test_symmetric_marginals_full_range(self):
        ri = rho_feasible_range(MarginalPair(0.5, 0.5))
        assert ri.rho_l == pytest.approx(-1.0, abs=1e-12)
        assert ri.rho_u == pytest.approx(1.0, abs=1e-12)

    def test_quarter_half_upper(self):
        assert rho_feasible_range(QUARTER_HALF).rho_u == pytest.approx(1 / math.sqrt(3), abs=1e-12)

    def test_toy_range(self):
        ri = rho_feasible_range(TOY)
        assert ri.rho_l == pytest.approx(-0.2904, abs=5e-4)
        assert ri.rho_u == pytest.approx(0.6463, abs=5e-4)

    def test_contains_zero(self, random_pairs):
        for m, _ in random_pairs[:500]:
            ri = rho_feasible_range(m)
            assert ri.rho_l <= 0.0 <= ri.rho_u

    @pytest.mark.parametrize("mu0, mu1", [(0.0, 0.5), (0.5, 1.0), (1.0, 0.0)])
    def test_degenerate_raises(self, mu0, mu1):
        with pytest.raises(DegenerateMarginal):
            rho_feasible_range(MarginalPair(mu0, mu1))

    def test_array_version_matches_scalar(self):
        mu0 = np.array([0.69, 0.25, 0.0, 0.5])
        mu1 = np.array([0.842, 0.5, 0.3, 0.5])
        lower, upper, valid = rho_feasible_range_arrays(mu0, mu1)
        assert valid.tolist() == [True, True, False, True]
        assert np.isnan(lower[2]) and np.isnan(upper[2])
        for i in (0, 1, 3):
            ri = rho_feasible_range(MarginalPair(mu0[i], mu1[i]))
            assert lower[i] == pytest.approx(ri.rho_l, abs=1e-12)
            assert upper[i] == pytest.approx(ri.rho_u, abs=1e-12)

    def test_feasible_interval_clamps(self):
        ri = feasible_interval(TOY, RhoInterval(-1.0, 1.0))
        assert ri == rho_feasible_range(TOY)

    def test_feasible_interval_empty(self):
        with pytest.raises(EmptyFeasibleSet):
            feasible_interval(TOY, RhoInterval(0.8, 0.9))


# ─────────────────────────────────────────────────────────────────────────────
# Sensitivity bounds
# ─────────────────────────────────────────────────────────────────────────────


class TestSensitivityBounds:
    def test_toy_line_coefficients(self):
        assert round(TOY.independent_fna, 3) == 0.109
        assert round(TOY.sd_product, 3) == 0.169

    def test_toy_endpoints_follow_line(self):
        ri = feasible_interval(TOY, RhoInterval(0.0, 1.0))
        b = sensitivity_bounds(TOY, ri)
        line = lambda r: max(TOY.independent_fna - r * TOY.sd_product, 0.0)  # noqa: E731
        assert b.lower == pytest.approx(line(ri.rho_u), abs=1e-12)
        assert b.upper == pytest.approx(line(0.0), abs=1e-12)

    def test_unclamped_interval_raises(self):
        with pytest.raises(InfeasibleRho):
            sensitivity_bounds(TOY, RhoInterval(0.0, 1.0))

    def test_tiny_overshoot_is_clamped(self):
        upper = rho_feasible_range(TOY).rho_u
        b = sensitivity_bounds(TOY, RhoInterval(0.0, min(upper + CLAMP_TOL / 10, 1.0)))
        assert b.lower == pytest.approx(0.0, abs=1e-12)

    def test_point_zero_is_independence(self):
        m = MarginalPair(0.4, 0.7)
        b = sensitivity_bounds(m, RhoInterval.point(0.0))
        assert b.lower == b.upper == pytest.approx(0.4 * 0.3, abs=1e-12)

    @pytest.mark.parametrize("rho_u", [0.0, 0.2, 0.5, 0.577])
    def test_quarter_half_lower(self, rho_u):
        b = sensitivity_bounds(QUARTER_HALF, RhoInterval(0.0, rho_u))
        assert b.lower == pytest.approx(max((1 - math.sqrt(3) * rho_u) / 8, 0.0), abs=1e-12)

    def test_degenerate_marginal_collapses(self):
        b = sensitivity_bounds(MarginalPair(1.0, 0.3), RhoInterval(-0.5, 0.5))
        assert b.lower == b.upper == pytest.approx(0.7, abs=1e-12)

    def test_nested_inside_fh(self, random_pairs):
        rng = np.random.default_rng(3)
        for m, rho_u in random_pairs[:2000]:
            feasible = rho_feasible_range(m)
            rho_l = float(rng.uniform(feasible.rho_l, rho_u))
            assert sensitivity_bounds(m, RhoInterval(rho_l, rho_u)).is_within(fh_bounds(m))

    def test_lower_nonincreasing_in_rho_u(self):
        m = MarginalPair(0.35, 0.55)
        upper = rho_feasible_range(m).rho_u
        lowers = [sensitivity_bounds(m, RhoInterval(0.0, r)).lower
                  for r in np.linspace(0.0, upper, 50)]
        assert all(b <= a + 1e-15 for a, b in zip(lowers, lowers[1:]))

    def test_upper_nonincreasing_in_rho_l(self):
        m = MarginalPair(0.35, 0.55)
        feasible = rho_feasible_range(m)
        uppers = [sensitivity_bounds(m, RhoInterval(r, feasible.rho_u)).upper
                  for r in np.linspace(feasible.rho_l, feasible.rho_u, 50)]
        assert all(b <= a + 1e-15 for a, b in zip(uppers, uppers[1:]))

    def test_collapse_when_rho_known(self, random_pairs):
        for m, rho in random_pairs[:1000]:
            b = sensitivity_bounds(m, RhoInterval.point(rho))
            assert b.lower == pytest.approx(b.upper, abs=1e-12)
            assert b.lower == pytest.approx(fna_given_rho(m, rho), abs=1e-12)

    def test_harm_criterion(self, random_pairs):
        for m, rho_u in random_pairs:
            threshold = (1.0 - rho_u ** 2) * (1.0 - m.mu0) * m.mu1
            if abs(m.tau - threshold) < 1e-9:
                continue
            lower = sensitivity_bounds(m, RhoInterval(0.0, rho_u)).lower
            assert (lower > 0.0) == (m.tau < threshold)


# ─────────────────────────────────────────────────────────────────────────────
# General-sign bounds
# ─────────────────────────────────────────────────────────────────────────────


class TestGeneralBounds:
    def test_full_feasible_range_is_fh(self, random_pairs):
        for m, _ in random_pairs[:2000]:
            b = general_bounds(m, rho_feasible_range(m))
            fh = fh_bounds(m)
            assert b.lower == pytest.approx(fh.lower, abs=1e-12)
            assert b.upper == pytest.approx(fh.upper, abs=1e-12)

    def test_toy_unrestricted(self):
        b = general_bounds(TOY, RhoInterval(-1.0, 1.0))
        assert b.lower == pytest.approx(0.0, abs=1e-12)
        assert b.upper == pytest.approx(0.158, abs=1e-12)

    def test_matches_sensitivity_inside_feasible(self):
        m = MarginalPair(0.4, 0.6)
        ri = RhoInterval(0.2, 0.5)
        a, b = general_bounds(m, ri), sensitivity_bounds(m, ri)
        assert a.lower == pytest.approx(b.lower, abs=1e-12)
        assert a.upper == pytest.approx(b.upper, abs=1e-12)

    def test_interval_below_feasible_range_is_empty(self):
        with pytest.raises(EmptyFeasibleSet):
            general_bounds(TOY, RhoInterval(-1.0, -0.5))


# ─────────────────────────────────────────────────────────────────────────────
# Thresholds, factored forms and caps
# ─────────────────────────────────────────────────────────────────────────────


class TestThresholds:
    @pytest.mark.parametrize("odds_ratio, expected", [(1.01, 0.995), (10_000, 0.01)])
    def test_from_odds_ratio(self, odds_ratio, expected):
        assert round(rho_star_from_odds_ratio(odds_ratio), 3) == expected

    def test_quarter_half(self):
        assert round(rho_star_threshold(QUARTER_HALF), 3) == 0.577

    def test_equals_feasible_upper_and_odds_form(self, random_pairs):
        for m, _ in random_pairs[:2000]:
            if m.tau <= 0.0:
                continue
            rho_star = rho_star_threshold(m)
            assert rho_star == pytest.approx(rho_feasible_range(m).rho_u, abs=1e-12)
            assert rho_star == pytest.approx(math.sqrt(1.0 / m.odds_ratio_ay), abs=1e-12)

    def test_non_positive_effect_not_applicable(self):
        with pytest.raises(NotApplicable):
            rho_star_threshold(MarginalPair(0.6, 0.3))
        with pytest.raises(NotApplicable):
            rho_star_from_odds_ratio(0.8)


class TestDecomposition:
    def test_quarter_half_example(self):
        d = lower_bound_decomposed(QUARTER_HALF, 0.5)
        assert d.value == pytest.approx((1 - math.sqrt(3) / 2) / 8, abs=1e-12)
        assert d.harmful_best_case is True

    def test_zero_at_threshold(self):
        m = MarginalPair(0.3, 0.7)
        d = lower_bound_decomposed(m, rho_star_threshold(m))
        assert d.value == pytest.approx(0.0, abs=1e-12)

    def test_negative_effect_positive_lower(self):
        m = MarginalPair(0.6, 0.3)
        d = lower_bound_decomposed(m, 0.2)
        assert d.value > 0.0
        assert d.value == pytest.approx(sensitivity_bounds(m, RhoInterval(0.0, 0.2)).lower, abs=1e-12)

    def test_factored_equals_direct(self, random_pairs):
        for m, rho_u in random_pairs:
            direct = sensitivity_bounds(m, RhoInterval(0.0, rho_u)).lower
            assert lower_bound_decomposed(m, rho_u).value == pytest.approx(direct, abs=1e-12)

    def test_upper_factored_equals_direct(self, random_pairs):
        for m, rho_l in random_pairs[:2000]:
            feasible = rho_feasible_range(m)
            direct = sensitivity_bounds(m, RhoInterval(rho_l, feasible.rho_u)).upper
            assert upper_bound_decomposed(m, rho_l) == pytest.approx(direct, abs=1e-12)

    def test_negative_rho_u_rejected(self):
        with pytest.raises(InfeasibleRho):
            lower_bound_decomposed(QUARTER_HALF, -0.1)

    def test_policy_criterion(self):
        m = QUARTER_HALF
        # (1 - 0.25) * 0.75 * 0.5 = 0.28125
        assert policy_harm_free(m, cost=0.3, rho_u=0.5)
        assert not policy_harm_free(m, cost=0.2, rho_u=0.5)


class TestCaps:
    @pytest.mark.parametrize("mu0, mu1, fh_cap, indep_cap", [
        (0.5, 0.5, 0.5, 0.25),
        (0.25, 0.5, 0.375, 0.140625),
    ])
    def test_known_values(self, mu0, mu1, fh_cap, indep_cap):
        caps = upper_bound_caps(MarginalPair(mu0, mu1))
        assert caps.fh_cap == pytest.approx(fh_cap, abs=1e-12)
        assert caps.indep_cap == pytest.approx(indep_cap, abs=1e-12)

    def test_toy_cap(self):
        caps = upper_bound_caps(TOY)
        assert caps.fh_cap == pytest.approx(0.424, abs=1e-12)
        assert caps.fh_cap >= fh_bounds(TOY).upper

    def test_inequalities_on_grid(self, random_pairs):
        for m, _ in random_pairs:
            caps = upper_bound_caps(m)
            assert caps.fh_cap >= fh_bounds(m).upper - 1e-12
            assert caps.indep_cap >= m.independent_fna - 1e-12


# ─────────────────────────────────────────────────────────────────────────────
# Known correlation and FPA
# ─────────────────────────────────────────────────────────────────────────────


class TestFnaGivenRho:
    def test_zero_is_independence(self):
        assert fna_given_rho(TOY, 0.0) == pytest.approx(TOY.independent_fna, abs=1e-15)

    def test_toy_value(self):
        assert fna_given_rho(TOY, 0.128) == pytest.approx(0.0874, abs=5e-4)

    def test_feasible_upper_gives_fh_lower(self):
        m = MarginalPair(0.3, 0.7)
        rho_u = rho_feasible_range(m).rho_u
        assert fna_given_rho(m, rho_u) == pytest.approx(fh_bounds(m).lower, abs=1e-12)

    def test_infeasible_raises(self):
        with pytest.raises(InfeasibleRho):
            fna_given_rho(TOY, 0.9)


class TestFpaBounds:
    def test_independence_point(self):
        b = fpa_bounds(MarginalPair(0.4, 0.6), RhoInterval.point(0.0))
        assert b.lower == b.upper == pytest.approx(0.36, abs=1e-12)

    def test_zero_effect_unchanged(self):
        m = MarginalPair(0.45, 0.45)
        ri = RhoInterval(-0.2, 0.3)
        a, b = fpa_bounds(m, ri), general_bounds(m, ri)
        assert (a.lower, a.upper) == pytest.approx((b.lower, b.upper), abs=1e-12)

    def test_toy_full_range(self):
        b = fpa_bounds(TOY, rho_feasible_range(TOY))
        assert b.lower == pytest.approx(0.152, abs=1e-12)
        assert b.upper == pytest.approx(0.310, abs=1e-12)
