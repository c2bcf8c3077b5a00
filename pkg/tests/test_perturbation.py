import math

import numpy as np
import pytest

from axiscone.errors import (
    AxisNotEigenvector,
    BudgetViolated,
    ContourHitsSpectrum,
    DegenerateBottom,
    DegenerateTop,
    GapCollapsed,
)
from axiscone.operators import SymmetricOperator, bottom_eigen
from axiscone.perturbation import (
    FixedPerturbation,
    PerturbationFamily,
    certified_improving_under_drift,
    drift_certificate_lhs,
    drifted_axis,
    end_to_end_semigroup_check,
    ergodic_drift_check,
    improvement_threshold,
    improving_radius,
    lemma_region,
    quartic_coefficient,
    quartic_margin,
    radius_from_alpha,
    riesz_projector,
    semigroup_threshold,
)
from axiscone.positivity import VerdictStatus
from axiscone.seeding import rng_for

E1 = np.array([1.0, 0.0])
SQRT2 = math.sqrt(2.0)


def rotated_axis(theta):
    return np.array([math.cos(theta), math.sin(theta)])


def swap_instance():
    """T = diag(0,1) with the swap perturbation: the hand-derived reference.

    Eigenvalues of T + kappa*S are (1 +/- sqrt(1 + 4 kappa^2))/2, so every
    gap is sqrt(1 + 4 kappa^2) >= 1 and delta = 1 on any grid containing 0.
    """
    t = SymmetricOperator(np.diag([0.0, 1.0]))
    s = FixedPerturbation(SymmetricOperator([[0.0, 1.0], [1.0, 0.0]]), a=0.0, b=1.0)
    return t, s


class TestScalars:
    def test_radius_at_half(self):
        expected = 0.75 / (4.0 * SQRT2 * 1.25)
        assert radius_from_alpha(0.5) == pytest.approx(expected, abs=1e-16)
        assert radius_from_alpha(0.5) == pytest.approx(0.1060660171779821, abs=1e-12)

    def test_radius_at_zero(self):
        assert radius_from_alpha(0.0) == pytest.approx(1.0 / (4.0 * SQRT2), abs=1e-16)

    @pytest.mark.parametrize("alpha", np.arange(0.0, 0.95, 0.1))
    def test_radius_consistent_with_quartic_coefficient(self, alpha):
        assert abs(radius_from_alpha(alpha) - 1.0 / (4.0 * quartic_coefficient(alpha))) <= 1e-14

    def test_quartic_margin_reference(self):
        c = 5.0 * SQRT2 / 3.0  # the alpha = 0.5 coefficient
        assert quartic_coefficient(0.5) == pytest.approx(c, abs=1e-15)
        value = quartic_margin(c, 0.05)
        expected = 0.05**4 - 2 * 0.05**2 + c * 0.05 - 0.25
        assert value == expected
        assert value == pytest.approx(-0.13714, abs=1e-5)

    def test_quartic_margin_at_zero(self):
        assert quartic_margin(1.0, 0.0) == -0.25

    def test_lemma_region_boundary_excluded(self):
        assert not lemma_region(1.0, 0.25)
        assert lemma_region(1.0, 0.2499999)

    @pytest.mark.parametrize("alpha", np.arange(0.1, 0.95, 0.1))
    def test_quartic_negative_on_region(self, alpha):
        c = quartic_coefficient(alpha)
        upper = min(c / 4.0, 1.0 / (4.0 * c))
        assert upper == pytest.approx(radius_from_alpha(alpha), abs=1e-15)
        xs = np.linspace(0.0, upper, 1000, endpoint=False)
        assert all(quartic_margin(c, x) < 0 for x in xs)

    def test_monotonicity(self):
        alphas = np.linspace(0.0, 0.95, 60)
        radii = [radius_from_alpha(a) for a in alphas]
        assert all(r1 > r2 for r1, r2 in zip(radii, radii[1:]))
        rs = np.linspace(1e-4, 0.2, 60)
        thresholds = [improvement_threshold(r) for r in rs]
        assert all(f1 < f2 for f1, f2 in zip(thresholds, thresholds[1:]))


class TestImprovingRadius:
    def test_diag_two_one(self):
        alpha, r = improving_radius(SymmetricOperator(np.diag([2.0, 1.0])), E1)
        assert alpha == pytest.approx(0.5, abs=1e-14)
        assert r == pytest.approx(0.1060660171779821, abs=1e-12)

    def test_rank_one(self):
        alpha, r = improving_radius(SymmetricOperator(np.diag([1.0, 0.0])), E1)
        assert alpha == pytest.approx(0.0, abs=1e-14)
        assert r == pytest.approx(1.0 / (4.0 * SQRT2), abs=1e-12)

    def test_scale_invariance(self):
        base = SymmetricOperator(np.diag([2.0, 1.0]))
        alpha_1, r_1 = improving_radius(base, E1)
        alpha_3, r_3 = improving_radius(3.0 * base, E1)
        assert alpha_3 == pytest.approx(alpha_1, abs=1e-15)
        assert r_3 == pytest.approx(r_1, abs=1e-15)

    def test_degenerate_raises(self):
        with pytest.raises(DegenerateTop):
            improving_radius(SymmetricOperator(np.diag([2.0, 2.0])), E1)

    def test_wrong_axis_raises(self):
        with pytest.raises(AxisNotEigenvector):
            improving_radius(SymmetricOperator(np.diag([2.0, 1.0])), np.array([0.0, 1.0]))


class TestErgodicDrift:
    def test_moderate_drift(self):
        a = SymmetricOperator(np.diag([2.0, 1.0]))
        u1 = rotated_axis(0.6)
        drift = np.linalg.norm(u1 - E1)
        assert drift == pytest.approx(math.sqrt(2.0 - 2.0 * math.cos(0.6)))
        assert drift < 1.0 / SQRT2
        verdict = ergodic_drift_check(a, E1, u1, sample_pairs=40, seed=3)
        assert verdict.status is VerdictStatus.SAMPLED_TRUE
        assert verdict.margin > 0

    def test_no_drift_reduces_to_base_case(self):
        a = SymmetricOperator(np.diag([2.0, 1.0]))
        verdict = ergodic_drift_check(a, E1, E1, sample_pairs=20, seed=4)
        assert verdict.status is VerdictStatus.SAMPLED_TRUE

    def test_large_drift_inapplicable(self):
        a = SymmetricOperator(np.diag([2.0, 1.0]))
        u1 = rotated_axis(1.2)
        # chord length 2 sin(0.6) >= 1/sqrt(2)
        assert np.linalg.norm(u1 - E1) == pytest.approx(2.0 * math.sin(0.6), abs=1e-12)
        assert np.linalg.norm(u1 - E1) == pytest.approx(1.1292849468, abs=1e-9)
        verdict = ergodic_drift_check(a, E1, u1)
        assert verdict.status is VerdictStatus.INAPPLICABLE

    def test_wrong_axis(self):
        with pytest.raises(AxisNotEigenvector):
            ergodic_drift_check(SymmetricOperator(np.diag([2.0, 1.0])),
                                np.array([0.0, 1.0]), E1)


class TestDriftCertificate:
    def test_small_drift_certified(self):
        a = SymmetricOperator(np.diag([2.0, 1.0]))  # alpha = 0.5
        d = 0.05
        u1 = rotated_axis(2.0 * math.asin(d / 2.0))  # exact chord length d
        assert np.linalg.norm(u1 - E1) == pytest.approx(d, abs=1e-15)
        verdict = certified_improving_under_drift(a, E1, u1)
        assert verdict.status is VerdictStatus.CERTIFIED_TRUE
        assert verdict.detail.startswith("drift certificate")
        # cross-check: d < r so the quartic margin is negative
        assert quartic_margin(quartic_coefficient(0.5), d) < 0
        assert drift_certificate_lhs(0.5, d) > 1.0 / SQRT2

    def test_zero_drift(self):
        # at d = 0 the instantiated t is sqrt(2), so the left side is
        # 1/sqrt(1 + alpha^2) > 1/sqrt(2) for every alpha < 1
        assert drift_certificate_lhs(0.5, 0.0) == pytest.approx(1.0 / math.sqrt(1.25))
        assert drift_certificate_lhs(0.0, 0.0) == pytest.approx(1.0)
        assert drift_certificate_lhs(0.5, 0.0) > 1.0 / SQRT2
        verdict = certified_improving_under_drift(
            SymmetricOperator(np.diag([2.0, 1.0])), E1, E1
        )
        assert verdict.status is VerdictStatus.CERTIFIED_TRUE

    def test_gapless_limit_falls_back(self):
        # alpha -> 1: the certificate cannot fire; the dim-2 sweep decides
        a = SymmetricOperator(np.diag([2.0, 2.0 - 1e-5]))
        d = 0.05
        u1 = rotated_axis(2.0 * math.asin(d / 2.0))
        alpha, _ = improving_radius(a, E1)
        assert drift_certificate_lhs(alpha, d) < 1.0 / SQRT2
        verdict = certified_improving_under_drift(a, E1, u1)
        assert verdict.detail.startswith("fallback")
        assert verdict.status is VerdictStatus.CERTIFIED_TRUE

    def test_explicit_t_parameter(self):
        assert drift_certificate_lhs(0.5, 0.0, t=SQRT2) == pytest.approx(
            1.0 / math.sqrt(1.0 + 0.25), abs=1e-15
        )
        with pytest.raises(ValueError):
            drift_certificate_lhs(0.5, 0.0, t=0.5)


class TestRieszProjector:
    def test_diagonal(self):
        t = SymmetricOperator(np.diag([0.0, 1.0]))
        proj = riesz_projector(t, center=0.0, radius=0.5, nodes=64)
        np.testing.assert_allclose(proj.matrix, np.diag([1.0, 0.0]), atol=1e-10)

    def test_two_by_two_against_eigen_oracle(self):
        t = SymmetricOperator([[0.0, 0.3], [0.3, 1.0]])
        lam_minus = (1.0 - math.sqrt(1.36)) / 2.0
        assert lam_minus == pytest.approx(-0.08309518948453007, abs=1e-12)
        dec = t.decomposition
        vec = dec.eigenvectors[:, 0]
        oracle = np.outer(vec, vec)
        proj = riesz_projector(t, center=0.0, radius=0.5, nodes=64)
        np.testing.assert_allclose(proj.matrix, oracle, atol=1e-8)
        assert proj.idempotency_defect <= 1e-8

    def test_contour_hits_spectrum(self):
        t = SymmetricOperator(np.diag([0.0, 1.0]))
        with pytest.raises(ContourHitsSpectrum):
            riesz_projector(t, center=0.0, radius=1.0)

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_node_doubling(self, seed):
        rng = rng_for(seed, 40)
        dim = 6
        q = np.linalg.qr(rng.standard_normal((dim, dim)))[0]
        eigs = np.concatenate([[0.0], np.sort(rng.uniform(1.0, 3.0, size=dim - 1))])
        t = SymmetricOperator((q * eigs) @ q.T)
        coarse = riesz_projector(t, center=0.0, radius=0.5, nodes=64)
        fine = riesz_projector(t, center=0.0, radius=0.5, nodes=128)
        assert np.linalg.norm(coarse.matrix - fine.matrix) <= 1e-10


class TestSemigroupThreshold:
    def test_hand_derived_reference(self):
        t, s = swap_instance()
        grid = np.linspace(-0.45, 0.45, 41)
        budget = semigroup_threshold(t, s, s0=math.log(2.0), kappa0=0.5, kappa_grid=grid)
        assert budget.delta == pytest.approx(1.0, abs=1e-12)
        assert budget.epsilon == pytest.approx(0.5, abs=1e-12)
        assert budget.alpha == pytest.approx(0.5, abs=1e-12)
        assert budget.r == pytest.approx(0.1060660171779821, abs=1e-12)
        # threshold and admissible bound, independently by hand
        x = budget.r * math.sqrt(1.0 - budget.r**2 / 4.0)
        assert budget.c_threshold == pytest.approx(x / (1.0 + x), abs=1e-15)
        assert budget.c_threshold == pytest.approx(0.09577287, abs=1e-7)
        assert budget.kappa_threshold == pytest.approx(budget.c_threshold / 2.0, abs=1e-15)
        assert budget.kappa_threshold == pytest.approx(0.04788645, abs=1e-7)
        np.testing.assert_allclose(budget.c_values, 2.0 * np.abs(grid), atol=1e-14)
        assert budget.is_admissible(0.04)
        assert not budget.is_admissible(0.05)

    def test_zero_perturbation_all_admissible(self):
        t = SymmetricOperator(np.diag([0.0, 1.0]))
        s = FixedPerturbation(SymmetricOperator(np.zeros((2, 2))), a=0.0, b=0.0)
        budget = semigroup_threshold(t, s, s0=1.0, kappa0=1.0,
                                     kappa_grid=np.linspace(-0.9, 0.9, 7))
        assert np.all(budget.admissible)
        assert np.all(budget.c_values == 0.0)
        assert budget.kappa_threshold == 1.0

    def test_small_gap_shrinks_threshold(self):
        s_spec = FixedPerturbation(SymmetricOperator([[0.0, 1.0], [1.0, 0.0]]),
                                   a=0.0, b=1.0)
        wide = semigroup_threshold(SymmetricOperator(np.diag([0.0, 1.0])), s_spec,
                                   s0=2.0, kappa0=0.01, kappa_grid=[0.0])
        narrow = semigroup_threshold(SymmetricOperator(np.diag([0.0, 0.01])), s_spec,
                                     s0=2.0, kappa0=0.01, kappa_grid=[0.0])
        assert narrow.delta < wide.delta
        # a smaller gap inflates c(kappa) through epsilon = delta/2, so the
        # admissible kappa range shrinks even though f(r) itself grows
        assert narrow.kappa_threshold < wide.kappa_threshold

    def test_degenerate_bottom(self):
        t = SymmetricOperator(np.diag([0.0, 0.0, 1.0]))
        s = FixedPerturbation(SymmetricOperator(np.zeros((3, 3))))
        with pytest.raises(DegenerateBottom):
            semigroup_threshold(t, s, s0=1.0, kappa0=0.1, kappa_grid=[0.0])

    def test_gap_collapse(self):
        t = SymmetricOperator(np.diag([0.0, 1.0]))
        # kappa = 0 is fine, but the grid endpoint closes the gap exactly
        fam = PerturbationFamily(
            build=lambda kappa: SymmetricOperator(np.diag([0.0, -kappa])),
            b_fn=lambda kappa: abs(kappa),
        )
        with pytest.raises(GapCollapsed):
            semigroup_threshold(t, fam, s0=1.0, kappa0=2.0, kappa_grid=[0.0, 1.0])

    def test_family_mode_tabulates(self):
        t, _ = swap_instance()
        fam = PerturbationFamily(
            build=lambda kappa: SymmetricOperator(kappa * np.array([[0.0, 1.0], [1.0, 0.0]])),
        )
        grid = np.linspace(-0.04, 0.04, 9)
        budget = semigroup_threshold(t, fam, s0=math.log(2.0), kappa0=0.5, kappa_grid=grid)
        np.testing.assert_allclose(budget.b_values, np.abs(grid), atol=1e-12)
        assert budget.c_slope is None
        assert budget.kappa_threshold == pytest.approx(0.04, abs=1e-12)


class TestDriftedAxis:
    def budget(self):
        t, s = swap_instance()
        return t, s, semigroup_threshold(t, s, s0=math.log(2.0), kappa0=0.5,
                                         kappa_grid=np.linspace(-0.45, 0.45, 41))

    def test_zero_kappa(self):
        t, _, budget = self.budget()
        v, bound, actual = drifted_axis(t, E1, budget, kappa=0.0)
        np.testing.assert_allclose(v, E1, atol=1e-12)
        assert actual <= 1e-12
        assert bound == 0.0

    def test_admissible_kappa_chain(self):
        t, s, budget = self.budget()
        kappa = 0.04
        t_kappa = t + s.operator_at(kappa)
        v, bound, actual = drifted_axis(t_kappa, E1, budget, kappa=kappa)
        # hand oracle: ground eigenvector of [[0, k], [k, 1]]
        lam = (1.0 - math.sqrt(1.0 + 4.0 * kappa**2)) / 2.0
        oracle = np.array([kappa, lam])
        oracle /= np.linalg.norm(oracle)
        if oracle[0] < 0:
            oracle = -oracle
        np.testing.assert_allclose(v, oracle, atol=1e-9)
        c = 2.0 * kappa
        expected_bound = math.sqrt(2.0 * (1.0 - math.sqrt(1.0 - (c / (1.0 - c)) ** 2)))
        assert bound == pytest.approx(expected_bound, abs=1e-15)
        assert bound == pytest.approx(0.0871, abs=2e-4)
        assert actual == pytest.approx(np.linalg.norm(oracle - E1), abs=1e-9)
        assert actual <= bound + 1e-8
        assert actual < budget.r

    def test_budget_violated(self):
        t, s, budget = self.budget()
        with pytest.raises(BudgetViolated):
            drifted_axis(t + s.operator_at(0.3), E1, budget, kappa=0.3)


class TestEndToEnd:
    def test_reference_sweep_all_true(self):
        t, s = swap_instance()
        s0 = math.log(2.0)
        budget = semigroup_threshold(t, s, s0=s0, kappa0=0.5,
                                     kappa_grid=np.linspace(-0.45, 0.45, 41))
        report = end_to_end_semigroup_check(
            t, s, budget, s_samples=[s0 / 4, s0 / 2, s0], seed=0, kappas=[0.04]
        )
        assert report.all_true
        assert all(row.verdict.is_true for row in report.rows)
        assert {row.s for row in report.rows} == {s0 / 4, s0 / 2, s0}

    def test_base_case_certified_per_s(self):
        t, s = swap_instance()
        s0 = math.log(2.0)
        budget = semigroup_threshold(t, s, s0=s0, kappa0=0.5, kappa_grid=[0.0])
        report = end_to_end_semigroup_check(
            t, s, budget, s_samples=[s0 / 3, s0], kappas=[0.0]
        )
        assert all(
            row.verdict.status is VerdictStatus.CERTIFIED_TRUE for row in report.rows
        )

    def test_zero_time_rejected(self):
        t, s = swap_instance()
        budget = semigroup_threshold(t, s, s0=1.0, kappa0=0.5, kappa_grid=[0.0])
        with pytest.raises(ValueError, match="identity"):
            end_to_end_semigroup_check(t, s, budget, s_samples=[0.0], kappas=[0.0])

    def test_beyond_s0_rejected(self):
        t, s = swap_instance()
        budget = semigroup_threshold(t, s, s0=1.0, kappa0=0.5, kappa_grid=[0.0])
        with pytest.raises(ValueError, match="outside theorem scope"):
            end_to_end_semigroup_check(t, s, budget, s_samples=[1.5], kappas=[0.0])

    def test_inadmissible_kappa_rejected(self):
        t, s = swap_instance()
        budget = semigroup_threshold(t, s, s0=math.log(2.0), kappa0=0.5,
                                     kappa_grid=np.linspace(-0.45, 0.45, 41))
        with pytest.raises(ValueError, match="admissible"):
            end_to_end_semigroup_check(t, s, budget, s_samples=[0.1], kappas=[0.3])


class TestBoundChainSeeded:
    @pytest.mark.parametrize("seed", range(5))
    def test_drift_chain_on_random_instances(self, seed):
        rng = rng_for(seed, 77)
        dim = int(rng.integers(3, 9))
        q = np.linalg.qr(rng.standard_normal((dim, dim)))[0]
        eigs = np.concatenate([[0.0], np.sort(rng.uniform(1.0, 2.0, size=dim - 1))])
        t = SymmetricOperator((q * eigs) @ q.T)
        g = rng.standard_normal((dim, dim))
        s_mat = SymmetricOperator((g + g.T) / 2.0)
        s_spec = FixedPerturbation((0.05 / s_mat.norm) * s_mat)
        budget = semigroup_threshold(t, s_spec, s0=1.0, kappa0=1.0,
                                     kappa_grid=np.linspace(-0.9, 0.9, 13))
        _, u0, _ = bottom_eigen(t, require_simple=True)
        for kappa in budget.kappas[budget.admissible]:
            t_kappa = t + s_spec.operator_at(kappa)
            _, bound, actual = drifted_axis(t_kappa, u0, budget, kappa=float(kappa))
            assert actual <= bound + 1e-8
            assert actual < budget.r
