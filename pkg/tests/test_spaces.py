import numpy as np
import pytest

from frachs import (
    FracOrder,
    SampledSignal,
    compute_embedding_constants,
    embedding_bounds,
    estimate_sobolev_constant,
    h_alpha_norm,
    lambda_norm,
    measure_sublevel,
    random_band_limited,
    rotated_well_potential,
    seminorm_alpha,
    signal_from_function,
    sobolev_multiplier_quadrature,
    vanishing_well_potential,
    verify_potential,
    x_alpha_norm,
)
from frachs.spaces import AdmissibilityError, EmbeddingConstants, PotentialMatrix

from conftest import DT, N_DEFAULT, T_MIN

A75 = FracOrder(0.75)
TIMES = T_MIN + DT * np.arange(N_DEFAULT)


class TestVerifyPotential:
    def test_default_passes(self):
        report = verify_potential(vanishing_well_potential(), TIMES)
        assert report.passed, report.failed_names()

    def test_rotated_preset_passes(self):
        report = verify_potential(rotated_well_potential(), TIMES)
        assert report.passed, report.failed_names()

    def test_degenerate_whole_line_well_rejected(self):
        # a well spanning the whole grid cannot be a finite interval
        with pytest.raises(ValueError, match="finite"):
            PotentialMatrix(
                1,
                lambda t: np.zeros((len(t), 1, 1)),
                lambda t: np.zeros_like(t),
                0.9,
                (-np.inf, np.inf),
                (0.0, 0.5),
            )

    def test_insufficient_margin_rejected(self):
        wide = vanishing_well_potential(well=(-12.0, 12.0), core=(0.0, 0.5))
        with pytest.raises(ValueError, match="margin"):
            verify_potential(wide, TIMES)

    def test_antisymmetric_perturbation_fails_symmetry(self):
        base = rotated_well_potential()

        def skewed(t):
            m = base.matrix_at(t)
            skew = np.zeros_like(m)
            skew[:, 0, 1] = 1e-3
            skew[:, 1, 0] = -1e-3
            return m + skew

        bad = PotentialMatrix(2, skewed, base.envelope, base.threshold, base.well, base.core)
        report = verify_potential(bad, TIMES)
        assert "L1-symmetry" in report.failed_names()

    def test_envelope_violation_detected(self):
        # 0.01 * wall dips below the envelope where l has saturated to 1
        base = vanishing_well_potential()
        bad = PotentialMatrix(
            1,
            lambda t: 0.01 * base.matrix_at(t),
            lambda t: base.envelope_at(t),
            base.threshold,
            base.well,
            base.core,
        )
        report = verify_potential(bad, TIMES)
        assert "L1-envelope" in report.failed_names()

    def test_nonvanishing_core_detected(self):
        base = vanishing_well_potential()
        bad = PotentialMatrix(
            1,
            lambda t: base.matrix_at(t) + 1e-6,
            base.envelope,
            base.threshold,
            base.well,
            base.core,
        )
        report = verify_potential(bad, TIMES)
        assert "L3-vanishing" in report.failed_names()


class TestMeasureSublevel:
    def test_matches_closed_form(self):
        # {l < k} = well widened by sqrt(k * steepness) on each side
        pot = vanishing_well_potential()
        m = measure_sublevel(pot, TIMES, DT)
        exact = 1.0 + 2.0 * np.sqrt(0.9 * 0.0025)
        assert abs(m - exact) <= 2 * DT

    def test_threshold_below_envelope_floor_gives_zero(self):
        pot = PotentialMatrix(
            1,
            lambda t: np.ones((len(t), 1, 1)),
            lambda t: np.ones_like(t),
            0.9,
            (-0.25, 0.75),
            (0.0, 0.5),
        )
        assert measure_sublevel(pot, TIMES, DT) == 0.0

    def test_refinement_stability(self):
        pot = vanishing_well_potential()
        m1 = measure_sublevel(pot, TIMES, DT)
        times2 = (T_MIN - DT / 4) + (DT / 2) * np.arange(2 * N_DEFAULT)
        m2 = measure_sublevel(pot, times2, DT / 2)
        assert abs(m1 - m2) <= 2 * DT

    def test_boundary_touching_rejected(self):
        flat = vanishing_well_potential(envelope_steepness=400.0)
        with pytest.raises(ValueError, match="boundary"):
            measure_sublevel(flat, TIMES, DT)


class TestSobolevConstant:
    def test_quadrature_matches_closed_form(self):
        # oracle: int_0^inf dw/(1+w^s) = (pi/s)/sin(pi/s)
        for alpha in (0.55, 0.75, 0.95):
            s = 2 * alpha
            closed = np.sqrt((np.pi / s) / np.sin(np.pi / s) / np.pi)
            assert sobolev_multiplier_quadrature(FracOrder(alpha)) == pytest.approx(
                closed, rel=1e-8
            )

    def test_estimate_in_expected_window(self):
        c = estimate_sobolev_constant(A75, N_DEFAULT, T_MIN, DT, trials=50, seed=1)
        assert 0.8 <= c <= 1.0

    def test_doubling_trials_never_decreases(self):
        c1 = estimate_sobolev_constant(A75, N_DEFAULT, T_MIN, DT, trials=25, seed=7)
        c2 = estimate_sobolev_constant(A75, N_DEFAULT, T_MIN, DT, trials=50, seed=7)
        assert c2 >= c1

    def test_zero_trials_rejected(self):
        with pytest.raises(ValueError):
            estimate_sobolev_constant(A75, N_DEFAULT, T_MIN, DT, trials=0)

    def test_pure_tone_ratio_below_estimate(self):
        w1 = 2 * np.pi * 37 / (N_DEFAULT * DT)
        u = signal_from_function(lambda t: np.cos(w1 * t), N_DEFAULT, T_MIN, DT)
        # Parseval on the tone: ||u||_a^2 = (T/2)(1 + w1^(2a)); the grid sup
        # sits a fraction of a cell off the crest, so the ratio uses it as-is
        denom = np.sqrt(N_DEFAULT * DT / 2 * (1 + w1**1.5))
        assert h_alpha_norm(u, A75) == pytest.approx(denom, rel=1e-12)
        ratio = u.sup_norm() / denom
        c = estimate_sobolev_constant(A75, N_DEFAULT, T_MIN, DT, trials=10, seed=0)
        assert ratio <= c

    def test_discrete_extremal_ratio_below_estimate(self):
        # the grid-achievable supremum of sup/||.||_a: coefficients proportional
        # to 1/(1 + |w|^(2a)), peaked on a sample point
        freqs = 2 * np.pi * np.fft.fftfreq(N_DEFAULT, d=DT)
        profile = 1.0 / (1.0 + np.abs(freqs) ** 1.5)
        t_peak = TIMES[N_DEFAULT // 2]
        coeffs = profile * np.exp(-1j * freqs * (T_MIN - t_peak))
        vals = np.fft.ifft(coeffs).real
        u = SampledSignal(T_MIN, DT, vals)
        extremal = np.sqrt(np.sum(profile) / (N_DEFAULT * DT))
        ratio = u.sup_norm() / h_alpha_norm(u, A75)
        assert ratio == pytest.approx(extremal, rel=1e-10)
        c = estimate_sobolev_constant(A75, N_DEFAULT, T_MIN, DT, trials=10, seed=0)
        assert ratio < c

    def test_sup_bound_holds_on_random_ensemble(self, rng):
        c = estimate_sobolev_constant(A75, N_DEFAULT, T_MIN, DT, trials=20, seed=3)
        for _ in range(100):
            u = random_band_limited(
                rng, N_DEFAULT, T_MIN, DT, band_fraction=rng.uniform(0.02, 0.9)
            )
            assert u.sup_norm() <= c * h_alpha_norm(u, A75)


class TestEmbeddingConstants:
    def test_identities_exact(self, prob):
        c = prob.constants
        q = c.c_alpha**2 * c.sublevel_measure
        assert abs(c.theta0 - (1 - q) / q) <= 1e-15 * c.theta0
        assert abs(c.lambda_threshold - 1 / (c.threshold * q)) <= 1e-15 * c.lambda_threshold

    def test_admissibility_failure_raises(self):
        with pytest.raises(AdmissibilityError, match="L1"):
            EmbeddingConstants.from_data(c_alpha=1.0, sublevel_measure=1.2, threshold=0.9)

    def test_flattened_envelope_is_inadmissible(self):
        flat = vanishing_well_potential(envelope_steepness=1.0)
        with pytest.raises(AdmissibilityError):
            compute_embedding_constants(flat, A75, N_DEFAULT, T_MIN, DT, trials=10, seed=0)


class TestWeightedNorms:
    def test_zero_signal(self, prob):
        u = prob.zero_signal()
        assert lambda_norm(u, prob.potential, 5.0, A75) == 0.0

    def test_core_supported_signal_sees_no_weight(self, prob):
        from frachs import smooth_bump

        vals = smooth_bump(TIMES, (0.0, 0.5))
        u = SampledSignal(T_MIN, DT, vals)
        semi = seminorm_alpha(u, A75)
        for lam in (1.0, 7.0, 1000.0):
            assert lambda_norm(u, prob.potential, lam, A75) == pytest.approx(semi, rel=1e-14)

    def test_weight_difference_identity(self, prob, rng):
        # ||u||_4^2 - ||u||_1^2 = 3 int (L u, u) dt, by direct quadrature
        u = random_band_limited(rng, N_DEFAULT, T_MIN, DT)
        lhs = (
            lambda_norm(u, prob.potential, 4.0, A75) ** 2
            - lambda_norm(u, prob.potential, 1.0, A75) ** 2
        )
        L = prob.potential.matrix_at(TIMES)
        direct = DT * np.einsum("ni,nij,nj->", u.values, L, u.values)
        assert abs(lhs - 3.0 * direct) <= 1e-10 * max(abs(lhs), 1.0)

    def test_monotone_in_weight(self, prob, rng):
        u = random_band_limited(rng, N_DEFAULT, T_MIN, DT)
        norms = [lambda_norm(u, prob.potential, lam, A75) for lam in (1.0, 2.0, 8.0, 64.0)]
        assert all(b >= a for a, b in zip(norms, norms[1:]))

    def test_x_norm_is_unit_weight(self, prob, rng):
        u = random_band_limited(rng, N_DEFAULT, T_MIN, DT)
        assert x_alpha_norm(u, prob.potential, A75) == lambda_norm(u, prob.potential, 1.0, A75)

    def test_x_norm_below_lambda_norm(self, prob, rng):
        for _ in range(10):
            u = random_band_limited(rng, N_DEFAULT, T_MIN, DT)
            x = x_alpha_norm(u, prob.potential, A75)
            assert x <= lambda_norm(u, prob.potential, 3.0, A75) + 1e-12 * x

    def test_h_alpha_controlled_by_x_norm(self, prob, rng):
        # ||u||_a^2 <= (1 + max(q, 1/k)/(1 - q)) ||u||_X^2 with q = C^2 m
        c = prob.constants
        q = c.admissibility_product
        factor = 1.0 + max(q, 1.0 / c.threshold) / (1.0 - q)
        for _ in range(20):
            u = random_band_limited(
                rng, N_DEFAULT, T_MIN, DT, band_fraction=rng.uniform(0.02, 0.5)
            )
            h2 = h_alpha_norm(u, A75) ** 2
            x2 = x_alpha_norm(u, prob.potential, A75) ** 2
            assert h2 <= factor * x2 * (1 + 1e-12)


class TestEmbeddingBounds:
    def test_zero_signal_zero_margins(self, prob):
        report = embedding_bounds(
            prob.zero_signal(), prob.constants, prob.potential,
            prob.constants.lambda_threshold, A75,
        )
        assert report.passed
        assert all(r.worst_margin == 0.0 for r in report.rows)

    def test_random_ensemble_no_violations(self, prob, rng):
        thr = prob.constants.lambda_threshold
        for lam in (thr, 10 * thr):
            for _ in range(50):
                u = random_band_limited(
                    rng, N_DEFAULT, T_MIN, DT, band_fraction=rng.uniform(0.02, 0.5)
                )
                report = embedding_bounds(u, prob.constants, prob.potential, lam, A75)
                assert report.passed, [(r.name, r.worst_margin) for r in report.rows]

    def test_margins_nondecreasing_in_weight(self, prob, rng):
        u = random_band_limited(rng, N_DEFAULT, T_MIN, DT)
        thr = prob.constants.lambda_threshold
        r1 = embedding_bounds(u, prob.constants, prob.potential, thr, A75)
        r2 = embedding_bounds(u, prob.constants, prob.potential, 10 * thr, A75)
        for a, b in zip(r1.rows, r2.rows):
            assert b.worst_margin >= a.worst_margin

    def test_below_threshold_rejected(self, prob, rng):
        u = random_band_limited(rng, N_DEFAULT, T_MIN, DT)
        with pytest.raises(ValueError, match="lam"):
            embedding_bounds(
                u, prob.constants, prob.potential,
                0.5 * prob.constants.lambda_threshold, A75,
            )
