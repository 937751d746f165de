import numpy as np
import pytest

from frachs import (
    FracOrder,
    SampledSignal,
    grunwald_weights,
    l2_norm,
    left_derivative,
    left_integral,
    midpoint_grid,
    quadrature_left_derivative,
    random_band_limited,
    reflect,
    riesz_composition,
    right_derivative,
    seminorm_alpha,
    signal_from_function,
)

from conftest import DT, N_DEFAULT, T_MIN

A75 = FracOrder(0.75)
M_TONE = 37
W1 = 2 * np.pi * M_TONE / (N_DEFAULT * DT)


def tone(fn=np.cos, w=W1):
    return signal_from_function(lambda t: fn(w * t), N_DEFAULT, T_MIN, DT)


def gaussian(n=N_DEFAULT, domain=32.0):
    t_min, dt = midpoint_grid(n, domain)
    return signal_from_function(lambda t: np.exp(-(t**2)), n, t_min, dt)


def zero():
    return SampledSignal(T_MIN, DT, np.zeros(N_DEFAULT))


class TestDerivatives:
    def test_zero_maps_to_zero(self):
        for op in (left_derivative, right_derivative, riesz_composition):
            assert np.all(op(zero(), A75).values == 0)

    def test_left_tone_closed_form(self):
        # apply the symbol to the two-bin spectrum by hand:
        # cos(w t) -> w^a cos(w t + a pi/2)
        out = left_derivative(tone(), A75)
        expect = W1**0.75 * np.cos(W1 * out.times + 0.75 * np.pi / 2)
        assert np.max(np.abs(out.values[:, 0] - expect)) <= 1e-8 * W1**0.75

    def test_right_tone_closed_form(self):
        out = right_derivative(tone(), A75)
        expect = W1**0.75 * np.cos(W1 * out.times - 0.75 * np.pi / 2)
        assert np.max(np.abs(out.values[:, 0] - expect)) <= 1e-8 * W1**0.75

    def test_reflection_duality(self, rng):
        u = random_band_limited(rng, N_DEFAULT, T_MIN, DT)
        lhs = right_derivative(u, A75)
        rhs = reflect(left_derivative(reflect(u), A75))
        assert np.max(np.abs(lhs.values - rhs.values)) <= 1e-10 * np.max(np.abs(lhs.values))

    def test_linearity(self, rng):
        u = random_band_limited(rng, N_DEFAULT, T_MIN, DT)
        v = random_band_limited(rng, N_DEFAULT, T_MIN, DT)
        combo = u.with_values(2.0 * u.values - 0.5 * v.values)
        out = left_derivative(combo, A75)
        ref = 2.0 * left_derivative(u, A75).values - 0.5 * left_derivative(v, A75).values
        assert np.max(np.abs(out.values - ref)) <= 1e-12 * np.max(np.abs(ref))

    def test_aliasing_raises_imaginary_residue(self):
        # a pure alternating signal lives on the self-conjugate top bin, where a
        # complex one-sided symbol cannot produce a real output
        vals = (-1.0) ** np.arange(N_DEFAULT)
        u = SampledSignal(T_MIN, DT, vals)
        with pytest.raises(ValueError, match="imaginary residue"):
            left_derivative(u, A75)


class TestIntegral:
    def test_zero(self):
        assert np.all(left_integral(zero(), A75).values == 0)

    def test_sine_tone_closed_form(self):
        out = left_integral(tone(np.sin), A75)
        expect = W1 ** (-0.75) * np.sin(W1 * out.times - 0.75 * np.pi / 2)
        assert np.max(np.abs(out.values[:, 0] - expect)) <= 1e-8 * W1 ** (-0.75)

    def test_inverse_law_on_tone(self):
        u = tone(np.sin)
        back = left_derivative(left_integral(u, A75), A75)
        assert np.max(np.abs(back.values - u.values)) <= 1e-8

    def test_inverse_law_random_zero_mean(self, rng):
        u = random_band_limited(rng, N_DEFAULT, T_MIN, DT)
        vals = u.values - np.mean(u.values, axis=0)
        u = u.with_values(vals)
        back = left_derivative(left_integral(u, A75), A75)
        assert np.max(np.abs(back.values - u.values)) <= 1e-8 * np.max(np.abs(u.values))

    def test_nonzero_mean_rejected(self):
        u = SampledSignal(T_MIN, DT, np.ones(N_DEFAULT))
        with pytest.raises(ValueError, match="zero-frequency"):
            left_integral(u, A75)


class TestRieszComposition:
    def test_tone_eigenfunction(self):
        out = riesz_composition(tone(), A75)
        expect = W1**1.5 * np.cos(W1 * out.times)
        assert np.max(np.abs(out.values[:, 0] - expect)) <= 1e-10 * W1**1.5

    def test_matches_two_operator_path_on_gaussian(self):
        g = gaussian()
        one = riesz_composition(g, A75)
        two = right_derivative(left_derivative(g, A75), A75)
        assert np.max(np.abs(one.values - two.values)) <= 1e-10 * np.max(np.abs(one.values))

    def test_matches_two_operator_path_random(self, rng):
        u = random_band_limited(rng, N_DEFAULT, T_MIN, DT)
        one = riesz_composition(u, A75)
        two = right_derivative(left_derivative(u, A75), A75)
        assert np.max(np.abs(one.values - two.values)) <= 1e-10 * np.max(np.abs(one.values))


class TestQuadratureOracle:
    def test_zero(self):
        assert np.all(quadrature_left_derivative(zero(), A75).values == 0)

    def test_weights_match_alternating_binomial(self):
        w = grunwald_weights(0.6, 6)
        # (-1)^j C(a, j): 1, -a, a(a-1)/2, ...
        assert w[0] == 1.0
        assert w[1] == pytest.approx(-0.6, abs=1e-15)
        assert w[2] == pytest.approx(-0.6 * (1 - 0.6) / 2, abs=1e-15)
        assert w[3] == pytest.approx(w[2] * (2 - 0.6) / 3, abs=1e-15)

    def test_scaling_by_two_is_exact(self):
        g = gaussian()
        doubled = g.with_values(2.0 * g.values)
        assert np.array_equal(
            quadrature_left_derivative(doubled, A75).values,
            2.0 * quadrature_left_derivative(g, A75).values,
        )

    def test_general_scaling(self):
        g = gaussian()
        scaled = g.with_values(1.7 * g.values)
        out = quadrature_left_derivative(scaled, A75).values
        ref = 1.7 * quadrature_left_derivative(g, A75).values
        assert np.max(np.abs(out - ref)) <= 1e-13 * np.max(np.abs(ref))

    def test_non_decaying_rejected(self):
        u = SampledSignal(T_MIN, DT, np.ones(N_DEFAULT))
        with pytest.raises(ValueError, match="decay"):
            quadrature_left_derivative(u, A75)

    def test_agreement_half_order_at_dt_hundredth(self):
        # self-convergence: dt = 1e-2, then dt and the truncation both refined
        a = FracOrder(0.5)
        errs = []
        for n, dt in ((32768, 1e-2), (131072, 5e-3)):
            g = signal_from_function(
                lambda t: np.exp(-(t**2)), n, -n * dt / 2 + dt / 2, dt
            )
            spec = left_derivative(g, a)
            quad = quadrature_left_derivative(g, a)
            mid = np.abs(g.times) <= n * dt / 4
            ref = np.max(np.abs(spec.values[mid, 0]))
            errs.append(np.max(np.abs(spec.values[mid, 0] - quad.values[mid, 0])) / ref)
        assert errs[0] <= 1e-3
        assert errs[1] < errs[0]

    def test_agreement_three_quarters_order_tight(self):
        # frozen from the oracle study: 8.0e-5 at dt = 7.8e-3 on a 256-long domain
        g = gaussian(n=32768, domain=256.0)
        spec = left_derivative(g, A75)
        quad = quadrature_left_derivative(g, A75)
        mid = np.abs(g.times) <= 64.0
        ref = np.max(np.abs(spec.values[mid, 0]))
        err = np.max(np.abs(spec.values[mid, 0] - quad.values[mid, 0])) / ref
        assert err <= 1e-4


class TestSeminorm:
    def test_zero(self):
        assert seminorm_alpha(zero(), A75) == 0.0

    def test_tone_hand_computation(self):
        # Parseval on a pure tone: |u|_a = w^a * ||u||_L2 with ||u||_L2^2 = T/2
        u = tone()
        mass = N_DEFAULT * DT / 2
        expect = W1**0.75 * np.sqrt(mass)
        assert seminorm_alpha(u, A75) == pytest.approx(expect, rel=1e-12)

    def test_matches_derivative_l2(self, rng):
        u = random_band_limited(rng, N_DEFAULT, T_MIN, DT, n_components=2)
        sn = seminorm_alpha(u, A75)
        assert abs(sn - l2_norm(left_derivative(u, A75))) <= 1e-10 * sn
