"""The weighted energy functional, its gradient and the Lemma-style bounds.

For a problem instance with weight lam the functional is

    I(u) = 1/2 ||u||_lam^2 - int W(t, u(t)) dt,

whose critical points are the weak solutions of the underlying system.  The
module provides its evaluation, the directional derivative, the L2-Riesz
gradient representer (the descent field used by the solver), the closed-form
coercivity lower bound, and the construction of a small-amplitude bump with
strictly negative energy (the start point that keeps descent away from the
trivial critical point u = 0).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fracops import riesz_composition, seminorm_alpha
from .grid import FracOrder, SampledSignal, l2_norm
from .nonlinearity import Nonlinearity, power_nonlinearity
from .spaces import (
    EmbeddingConstants,
    PotentialMatrix,
    compute_embedding_constants,
    vanishing_well_potential,
)

__all__ = [
    "Problem",
    "EnergyReport",
    "energy_report",
    "default_problem",
    "evaluate_energy",
    "directional_derivative",
    "gradient",
    "lower_bound",
    "lower_bound_minimum",
    "smooth_bump",
    "negative_energy_witness",
    "WitnessError",
]


class WitnessError(RuntimeError):
    """No scaling of the core bump has negative energy (W2 violated numerically)."""


@dataclass(frozen=True)
class Problem:
    """Discretized problem instance: order, grid, weights and nonlinearity.

    Grid arrays (times, matrix values, xi values) are evaluated once at
    construction and shared read-only by all evaluations.
    """

    order: FracOrder
    n_samples: int
    t_min: float
    dt: float
    potential: PotentialMatrix
    nonlinearity: Nonlinearity
    lam: float
    constants: EmbeddingConstants
    times: np.ndarray = field(init=False, repr=False)
    matrix_values: np.ndarray = field(init=False, repr=False)
    xi_values: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError("weight lam must be positive")
        times = self.t_min + self.dt * np.arange(self.n_samples)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "matrix_values", self.potential.matrix_at(times))
        object.__setattr__(self, "xi_values", self.nonlinearity.xi_at(times))
        for name in ("times", "matrix_values", "xi_values"):
            getattr(self, name).setflags(write=False)

    @property
    def n_components(self) -> int:
        return self.potential.n_components

    def with_lam(self, lam: float) -> "Problem":
        return Problem(
            self.order, self.n_samples, self.t_min, self.dt,
            self.potential, self.nonlinearity, lam, self.constants,
        )

    def check_signal(self, u: SampledSignal):
        if u.n_samples != self.n_samples or u.t_min != self.t_min or u.dt != self.dt:
            raise ValueError("signal grid does not match the problem grid")
        if u.n_components != self.n_components:
            raise ValueError(
                f"signal has {u.n_components} components, problem has {self.n_components}"
            )

    def zero_signal(self) -> SampledSignal:
        return SampledSignal(
            self.t_min, self.dt, np.zeros((self.n_samples, self.n_components))
        )

    def weighted_quadratic(self, u: SampledSignal) -> float:
        """int (L(t) u, u) dt on the grid."""
        return float(
            u.dt * np.einsum("ni,nij,nj->", u.values, self.matrix_values, u.values)
        )

    def lambda_norm_sq(self, u: SampledSignal) -> float:
        return seminorm_alpha(u, self.order) ** 2 + self.lam * self.weighted_quadratic(u)


def default_problem(
    lam: float | None = None,
    alpha: float = 0.75,
    n_samples: int = 4096,
    domain: float = 32.0,
    sobolev_trials: int = 200,
    seed: int = 0,
    potential: PotentialMatrix | None = None,
    nonlinearity: Nonlinearity | None = None,
) -> Problem:
    """Assemble the default desk-scale scenario.

    Grid: one period of length ``domain`` sampled at midpoints (the first
    sample sits half a cell above -domain/2), so that the core endpoints fall
    between samples and the degenerate set of the matrix coincides with the
    interior of the core at grid resolution.  ``lam`` defaults to 10x the
    embedding threshold.
    """
    from .grid import midpoint_grid

    t_min, dt = midpoint_grid(n_samples, domain)
    order = FracOrder(alpha)
    pot = potential if potential is not None else vanishing_well_potential()
    nl = nonlinearity if nonlinearity is not None else power_nonlinearity(core=pot.core)
    constants = compute_embedding_constants(
        pot, order, n_samples, t_min, dt, trials=sobolev_trials, seed=seed
    )
    if lam is None:
        lam = 10.0 * constants.lambda_threshold
    return Problem(order, n_samples, t_min, dt, pot, nl, lam, constants)


@dataclass(frozen=True)
class EnergyReport:
    energy: float
    grad_norm: float
    lower_bound: float
    witness_scale: float | None = None


def energy_report(u: SampledSignal, prob: Problem, witness_scale: float | None = None) -> EnergyReport:
    """Bundle the energy, gradient norm and coercivity bound at one point."""
    g = gradient(u, prob)
    return EnergyReport(
        energy=evaluate_energy(u, prob),
        grad_norm=l2_norm(g),
        lower_bound=lower_bound(u, prob),
        witness_scale=witness_scale,
    )


def _density_values(prob: Problem, u: SampledSignal) -> np.ndarray:
    w = prob.nonlinearity.density(prob.times, u.values)
    if not np.all(np.isfinite(w)):
        j = int(np.argmax(~np.isfinite(w)))
        raise ValueError(f"nonlinear density is not finite at t = {prob.times[j]:.6g}")
    return w


def evaluate_energy(u: SampledSignal, prob: Problem) -> float:
    """I(u) = 1/2 ||u||_lam^2 - int W(t, u) dt."""
    prob.check_signal(u)
    return 0.5 * prob.lambda_norm_sq(u) - float(u.dt * np.sum(_density_values(prob, u)))


def directional_derivative(u: SampledSignal, phi: SampledSignal, prob: Problem) -> float:
    """First variation of the energy at u in direction phi.

    The derivative-pairing term is evaluated spectrally via Parseval,
    ``(dt/N) sum_k |w_k|^(2a) Re(u_hat_k conj(phi_hat_k))``, which equals the
    time-domain pairing of the one-sided derivatives exactly on the grid.
    """
    prob.check_signal(u)
    if not u.same_grid(phi):
        raise ValueError("u and phi live on different grids")
    freqs = 2.0 * np.pi * np.fft.fftfreq(u.n_samples, d=u.dt)
    weight = np.abs(freqs) ** prob.order.doubled
    pairing = np.fft.fft(u.values, axis=0) * np.conj(np.fft.fft(phi.values, axis=0))
    quad = float(u.dt / u.n_samples * np.sum(weight[:, None] * pairing.real))
    weighted = float(
        u.dt * np.einsum("ni,nij,nj->", u.values, prob.matrix_values, phi.values)
    )
    grad_w = prob.nonlinearity.gradient(prob.times, u.values)
    return quad + prob.lam * weighted - float(u.dt * np.sum(grad_w * phi.values))


def gradient(u: SampledSignal, prob: Problem) -> SampledSignal:
    """L2-Riesz representer of the first variation.

    g = (left-right composition of the derivative) u + lam L(t) u - grad W, so
    that the directional derivative equals int (g, phi) dt for every phi.
    """
    prob.check_signal(u)
    principal = riesz_composition(u, prob.order).values
    weighted = np.einsum("nij,nj->ni", prob.matrix_values, u.values)
    grad_w = prob.nonlinearity.gradient(prob.times, u.values)
    if not np.all(np.isfinite(grad_w)):
        j = int(np.argmax(~np.isfinite(np.sum(grad_w, axis=1))))
        raise ValueError(f"nonlinear gradient is not finite at t = {prob.times[j]:.6g}")
    return u.with_values(principal + prob.lam * weighted - grad_w)


def lower_bound(u: SampledSignal, prob: Problem) -> float:
    """Coercivity bound: I(u) >= r^2/2 - A r^p with r = ||u||_lam.

    A = ||xi||_{L^{2/(2-p)}} / (p theta0^{p/2}); valid for lam at or above the
    embedding threshold (the chain runs through the L2 embedding bound).
    """
    if prob.lam < prob.constants.lambda_threshold:
        raise ValueError(
            f"the bound needs lam >= {prob.constants.lambda_threshold:.6g}, "
            f"got {prob.lam:.6g}"
        )
    prob.check_signal(u)
    p = prob.nonlinearity.p
    xi_norm = prob.nonlinearity.xi_dual_norm(prob.times, prob.dt)
    coeff = xi_norm / (p * prob.constants.theta0 ** (p / 2.0))
    r = np.sqrt(prob.lambda_norm_sq(u))
    return float(0.5 * r**2 - coeff * r**p)


def lower_bound_minimum(prob: Problem) -> tuple[float, float]:
    """Global minimum of the scalar bound r^2/2 - A r^p over r >= 0.

    Returns (r_star, value) with r_star = (p A)^(1/(2-p)) and
    value = (1/2 - 1/p) r_star^2 < 0.
    """
    p = prob.nonlinearity.p
    xi_norm = prob.nonlinearity.xi_dual_norm(prob.times, prob.dt)
    coeff = xi_norm / (p * prob.constants.theta0 ** (p / 2.0))
    if coeff == 0.0:
        return 0.0, 0.0
    r_star = (p * coeff) ** (1.0 / (2.0 - p))
    return float(r_star), float((0.5 - 1.0 / p) * r_star**2)


def smooth_bump(times: np.ndarray, interval: tuple[float, float]) -> np.ndarray:
    """Canonical C-infinity bump on an interval, normalized to unit grid peak."""
    lo, hi = interval
    center, radius = 0.5 * (lo + hi), 0.5 * (hi - lo)
    s = (times - center) / radius
    out = np.zeros_like(times)
    inside = np.abs(s) < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
    peak = np.max(out)
    if peak > 0:
        out /= peak
    return out


def negative_energy_witness(prob: Problem) -> tuple[SampledSignal, float]:
    """Bump supported in the core and a scale s with I(s * bump) < 0.

    The bump has unit sup norm, vanishes outside the open core (so its
    weighted term is zero and the witness energy is independent of lam), and
    s starts from the closed-form estimate

        s <= (2 eta int |u0|^nu dt / ||u0||_lam^2)^(1/(2-nu)),

    halving until the evaluated energy is negative.  Failure down to 1e-8
    signals that the W2 lower bound does not hold numerically.
    """
    nl = prob.nonlinearity
    values = np.zeros((prob.n_samples, prob.n_components))
    values[:, 0] = smooth_bump(prob.times, prob.potential.core)
    u0 = SampledSignal(prob.t_min, prob.dt, values)
    norm_sq = prob.lambda_norm_sq(u0)
    mass_nu = float(prob.dt * np.sum(u0.magnitude() ** nl.nu))
    s_est = (2.0 * nl.eta * mass_nu / norm_sq) ** (1.0 / (2.0 - nl.nu))
    s = min(0.5 * nl.delta, 0.5 * s_est)
    while s >= 1e-8:
        scaled = u0.with_values(s * u0.values)
        if evaluate_energy(scaled, prob) < 0.0:
            return u0, float(s)
        s *= 0.5
    raise WitnessError(
        "no scale below delta makes the bump energy negative "
        "(hypothesis W2 violated numerically)"
    )
