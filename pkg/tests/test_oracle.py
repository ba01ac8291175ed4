"""
Tests for the joint-distribution oracle and its agreement with the closed-form bounds.
"""
from __future__ import annotations

import numpy as np
import pytest

from fna_sensitivity.bounds.oracle import (
    extremize_fna,
    fh_attainability,
    joint_from_rho,
    measures_of,
)
from fna_sensitivity.bounds.pointwise import (
    fna_given_rho,
    general_bounds,
    rho_feasible_range,
    sensitivity_bounds,
)
from fna_sensitivity.exceptions import EmptyFeasibleSet, InfeasibleRho, InvalidInput
from fna_sensitivity.models import JointTable, MarginalPair, RhoInterval

TOY = MarginalPair(0.690, 0.842)


# ─────────────────────────────────────────────────────────────────────────────
# JointTable construction
# ─────────────────────────────────────────────────────────────────────────────


class TestJointFromRho:
    def test_margins_reproduced(self):
        j = joint_from_rho(TOY, 0.2)
        assert j.mu0 == pytest.approx(TOY.mu0, abs=1e-12)
        assert j.mu1 == pytest.approx(TOY.mu1, abs=1e-12)

    def test_toy_harm_rate(self):
        j = joint_from_rho(TOY, 0.128)
        assert j.pi10 == pytest.approx(0.0874, abs=5e-4)
        assert j.pi10 == pytest.approx(fna_given_rho(TOY, 0.128), abs=1e-12)

    def test_infeasible_rho_raises(self):
        with pytest.raises(InfeasibleRho):
            joint_from_rho(TOY, 0.9)

    def test_table_must_sum_to_one(self):
        with pytest.raises(InvalidInput):
            JointTable(0.3, 0.3, 0.3, 0.3)

    def test_fna_given_rho_matches_cells(self):
        rng = np.random.default_rng(11)
        for _ in range(1000):
            m = MarginalPair(*rng.uniform(0.01, 0.99, size=2))
            feasible = rho_feasible_range(m)
            rho = float(rng.uniform(feasible.rho_l, feasible.rho_u))
            j = joint_from_rho(m, rho)
            assert fna_given_rho(m, rho) == pytest.approx(j.pi10, abs=1e-12)
            lo = float(rng.uniform(feasible.rho_l, rho))
            hi = float(rng.uniform(rho, feasible.rho_u))
            assert sensitivity_bounds(m, RhoInterval(lo, hi)).contains(j.pi10, tol=1e-12)


# ─────────────────────────────────────────────────────────────────────────────
# Association measures
# ─────────────────────────────────────────────────────────────────────────────


class TestMeasures:
    def test_independence_values(self):
        a = measures_of(joint_from_rho(MarginalPair(0.3, 0.6), 0.0))
        assert a.rho == pytest.approx(0.0, abs=1e-12)
        assert a.rd == pytest.approx(0.0, abs=1e-12)
        assert a.rr == pytest.approx(1.0, abs=1e-12)
        assert a.or_ == pytest.approx(1.0, abs=1e-12)

    def test_rho_recovered(self):
        assert measures_of(joint_from_rho(TOY, 0.3)).rho == pytest.approx(0.3, abs=1e-12)

    def test_signs_agree_with_positive_cells(self):
        rng = np.random.default_rng(5)
        for _ in range(500):
            m = MarginalPair(*rng.uniform(0.05, 0.95, size=2))
            feasible = rho_feasible_range(m)
            rho = float(rng.uniform(0.9 * feasible.rho_l, 0.9 * feasible.rho_u))
            a = measures_of(joint_from_rho(m, rho))
            assert np.sign(a.rd) == np.sign(a.rho)
            assert np.sign(a.rr - 1.0) == np.sign(a.rho)
            assert np.sign(a.or_ - 1.0) == np.sign(a.rho)

    def test_zero_cell_leaves_ratios_undefined(self):
        upper = rho_feasible_range(TOY).rho_u
        a = measures_of(joint_from_rho(TOY, upper))
        assert a.rr is None
        assert a.or_ is None
        assert a.rd is not None

    def test_degenerate_marginal_has_no_rho(self):
        a = measures_of(JointTable(0.5, 0.5, 0.0, 0.0))
        assert a.rho is None
        assert a.rd is None


# ─────────────────────────────────────────────────────────────────────────────
# Grid extremization
# ─────────────────────────────────────────────────────────────────────────────


class TestExtremize:
    def test_toy_interval(self):
        r = extremize_fna(TOY, RhoInterval(0.0, 0.3))
        assert r.min_fna == pytest.approx(TOY.independent_fna - 0.3 * TOY.sd_product, abs=1e-12)
        assert r.min_fna == pytest.approx(0.058, abs=1e-3)
        assert r.max_fna == pytest.approx(0.109, abs=1e-3)
        assert r.rho_low == pytest.approx(0.3)
        assert r.rho_high == pytest.approx(0.0)

    def test_witnesses_are_feasible(self):
        r = extremize_fna(MarginalPair(0.4, 0.6), RhoInterval(0.2, 0.5))
        for j in (r.witness_low, r.witness_high):
            assert min(j.pi00, j.pi01, j.pi10, j.pi11) >= -1e-12
        assert r.witness_low.fna == pytest.approx(r.min_fna, abs=1e-12)

    def test_matches_general_bounds(self):
        m = MarginalPair(0.4, 0.6)
        ri = RhoInterval(0.2, 0.5)
        r, b = extremize_fna(m, ri), general_bounds(m, ri)
        assert (r.min_fna, r.max_fna) == pytest.approx((b.lower, b.upper), abs=1e-10)

    def test_no_overlap_raises(self):
        with pytest.raises(EmptyFeasibleSet):
            extremize_fna(TOY, RhoInterval(0.8, 1.0))

    def test_random_agreement_with_formulas(self):
        rng = np.random.default_rng(42)
        checked = 0
        while checked < 2000:
            m = MarginalPair(*rng.uniform(0.01, 0.99, size=2))
            lo, hi = np.sort(rng.uniform(-1.0, 1.0, size=2))
            ri = RhoInterval(float(lo), float(hi))
            try:
                r = extremize_fna(m, ri, grid=1000)
            except EmptyFeasibleSet:
                continue
            b = general_bounds(m, ri)
            assert r.min_fna == pytest.approx(b.lower, abs=1e-10)
            assert r.max_fna == pytest.approx(b.upper, abs=1e-10)
            checked += 1

    def test_full_range_reaches_fh_bounds(self):
        m = MarginalPair(0.3, 0.45)
        r = extremize_fna(m, rho_feasible_range(m))
        assert fh_attainability(r.witness_low).lower_attained
        assert fh_attainability(r.witness_high).upper_attained

    def test_interior_table_attains_neither(self):
        att = fh_attainability(joint_from_rho(TOY, 0.0))
        assert not att.lower_attained
        assert not att.upper_attained
