"""Sub-quadratic nonlinear terms and their growth-hypothesis checks.

A :class:`Nonlinearity` bundles the scalar density W(t, u), its gradient in u
and the growth data: an exponent p in (1, 2) with a weight xi(t) bounding the
gradient (hypothesis W1), and constants (eta, delta, nu) giving a lower bound
|W| >= eta |u|^nu on the core interval for small |u| (hypothesis W2).

The default family W(t, u) = xi(t) |u|^p / p saturates W1 with equality; an
optional epsilon-regularization rounds off the gradient's non-Lipschitz corner
at u = 0 for line-search robustness.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .spaces import CheckResult

__all__ = [
    "Nonlinearity",
    "GrowthReport",
    "power_nonlinearity",
    "zero_nonlinearity",
    "verify_growth",
]


@dataclass(frozen=True)
class Nonlinearity:
    """W(t, u), grad_u W(t, u) and the growth data of the sub-quadratic class.

    ``density(t, u)`` maps (N,) times and (N, n) values to (N,) energies;
    ``gradient(t, u)`` to (N, n).  ``hessian_action(t, u, v)``, if provided,
    applies the u-Hessian of the density to a direction (used by the solver's
    second-order polish; a finite-difference fallback is used when absent).
    """

    density: Callable[[np.ndarray, np.ndarray], np.ndarray] = field(repr=False)
    gradient: Callable[[np.ndarray, np.ndarray], np.ndarray] = field(repr=False)
    p: float
    xi: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    eta: float
    delta: float
    nu: float
    hessian_action: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray] | None = field(
        default=None, repr=False
    )

    def __post_init__(self):
        if not (1.0 < self.p < 2.0):
            raise ValueError(f"growth exponent p must lie in (1, 2), got {self.p}")
        if not (1.0 < self.nu < 2.0):
            raise ValueError(f"lower-bound exponent nu must lie in (1, 2), got {self.nu}")
        if self.eta <= 0 or self.delta <= 0:
            raise ValueError("eta and delta must be positive")

    def xi_at(self, t: np.ndarray) -> np.ndarray:
        return np.asarray(self.xi(np.asarray(t, dtype=float)), dtype=float)

    def xi_dual_norm(self, times: np.ndarray, dt: float) -> float:
        """||xi||_{L^{2/(2-p)}} on the truncated grid (trapezoid quadrature)."""
        q = 2.0 / (2.0 - self.p)
        return float((dt * np.sum(self.xi_at(times) ** q)) ** (1.0 / q))


def power_nonlinearity(
    p: float = 1.5,
    nu: float | None = None,
    xi_scale: float = 1.0,
    xi_width: float = 10.0,
    delta: float = 1.0,
    core: tuple[float, float] = (0.0, 0.5),
    eps: float = 0.0,
) -> Nonlinearity:
    """The saturating family W(t, u) = xi(t) |u|^p / p with a Gaussian weight.

    xi(t) = xi_scale * exp(-t^2 / xi_width) has finite L^{2/(2-p)} norm; the
    lower-bound constants are eta = min over the closed core of xi / p and any
    nu in [p, 2) (the bound needs delta <= 1 when nu > p; nu defaults to p).
    With eps > 0 the density is ((|u|^2 + eps^2)^(p/2) - eps^p) / p whose
    gradient (|u|^2 + eps^2)^((p-2)/2) u is Lipschitz at u = 0.
    """
    if nu is None:
        nu = p
    if nu < p:
        raise ValueError(f"the power family satisfies the lower bound only for nu >= p, got nu={nu} < p={p}")
    if nu > p and delta > 1.0:
        raise ValueError("for nu > p the lower bound needs delta <= 1")

    def xi(t):
        return xi_scale * np.exp(-(t**2) / xi_width)

    def density(t, u):
        mag2 = np.sum(u**2, axis=1)
        if eps == 0.0:
            return xi(t) * mag2 ** (p / 2.0) / p
        return xi(t) * ((mag2 + eps**2) ** (p / 2.0) - eps**p) / p

    def gradient(t, u):
        mag2 = np.sum(u**2, axis=1)
        if eps == 0.0:
            with np.errstate(divide="ignore"):
                factor = np.where(mag2 > 0.0, mag2 ** ((p - 2.0) / 2.0), 0.0)
        else:
            factor = (mag2 + eps**2) ** ((p - 2.0) / 2.0)
        return (xi(t) * factor)[:, None] * u

    def hessian_action(t, u, v):
        # below ~1e-100 the (p-4)/2 power overflows; the true action vanishes there
        mag2 = np.sum(u**2, axis=1) + eps**2
        safe = mag2 > 1e-100
        with np.errstate(divide="ignore", over="ignore"):
            f = np.where(safe, mag2 ** ((p - 2.0) / 2.0), 0.0)
            g = np.where(safe, (p - 2.0) * np.where(safe, mag2, 1.0) ** ((p - 4.0) / 2.0), 0.0)
        uv = np.sum(u * v, axis=1)
        return (xi(t) * f)[:, None] * v + (xi(t) * g * uv)[:, None] * u

    # the closed core's xi-minimum sits at the endpoint farthest from 0
    far = max(abs(core[0]), abs(core[1]))
    eta = xi_scale * np.exp(-(far**2) / xi_width) / p

    return Nonlinearity(density, gradient, p, xi, float(eta), delta, float(nu), hessian_action)


def zero_nonlinearity(p: float = 1.5, delta: float = 1.0) -> Nonlinearity:
    """W identically zero: satisfies the gradient growth bound (with xi = 0)
    but not the lower bound on the core, whose declared constants are
    therefore vacuous claims that the growth checker flags."""

    def density(t, u):
        return np.zeros(len(t))

    def gradient(t, u):
        return np.zeros_like(u)

    def hessian_action(t, u, v):
        return np.zeros_like(v)

    def xi(t):
        return np.zeros_like(t)

    return Nonlinearity(density, gradient, p, xi, 1.0, delta, p, hessian_action)


@dataclass(frozen=True)
class GrowthReport:
    passed: bool
    checks: tuple[CheckResult, ...]

    def failed_names(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]


def verify_growth(
    nl: Nonlinearity,
    times: np.ndarray,
    core: tuple[float, float],
    n_components: int = 1,
    seed: int = 0,
    n_directions: int = 4,
    n_amplitudes: int = 24,
    max_amplitude: float = 2.0,
) -> GrowthReport:
    """Sample the growth hypotheses on a (t, u) mesh; failures are data.

    W1: |grad W(t, u)| <= xi(t) |u|^(p-1) over the grid times random
    directions with |u| up to ``max_amplitude``.  W2: |W(t, u)| >= eta |u|^nu
    for t in the closed core and |u| <= delta.  Also cross-checks the declared
    gradient against centered differences of the density away from u = 0.
    """
    times = np.asarray(times, dtype=float)
    rng = np.random.default_rng(seed)
    dirs = rng.standard_normal((n_directions, n_components))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    amps = np.linspace(0.0, max_amplitude, n_amplitudes + 1)[1:]
    xi_vals = nl.xi_at(times)
    checks = []

    worst_w1, loc_w1 = np.inf, (np.nan, np.nan)
    for d in dirs:
        for s in amps:
            u = np.broadcast_to(s * d, (len(times), n_components))
            gmag = np.sqrt(np.sum(nl.gradient(times, u) ** 2, axis=1))
            slack = xi_vals * s ** (nl.p - 1.0) - gmag
            j = int(np.argmin(slack))
            if slack[j] < worst_w1:
                worst_w1, loc_w1 = float(slack[j]), (float(times[j]), float(s))
    checks.append(
        CheckResult(
            "W1-growth",
            worst_w1 >= -1e-12,
            worst_w1,
            loc_w1[0],
            f"|grad W| <= xi(t)|u|^(p-1); worst at |u| = {loc_w1[1]:.3g}",
        )
    )

    on_core = (times >= core[0]) & (times <= core[1])
    t_core = times[on_core]
    worst_w2, loc_w2 = np.inf, (np.nan, np.nan)
    small = amps[amps <= nl.delta]
    if small.size == 0:
        small = np.array([nl.delta / 2.0])
    for d in dirs:
        for s in small:
            u = np.broadcast_to(s * d, (len(t_core), n_components))
            w = np.abs(nl.density(t_core, u))
            slack = w - nl.eta * s**nl.nu
            j = int(np.argmin(slack))
            if slack[j] < worst_w2:
                worst_w2, loc_w2 = float(slack[j]), (float(t_core[j]), float(s))
    checks.append(
        CheckResult(
            "W2-lower-bound",
            worst_w2 >= -1e-12,
            worst_w2,
            loc_w2[0],
            f"|W| >= eta |u|^nu on the core; worst at |u| = {loc_w2[1]:.3g}",
        )
    )

    h = 1e-5
    worst_fd, loc_fd = 0.0, np.nan
    for d in dirs:
        for s in amps[amps >= 0.25]:
            u = np.broadcast_to(s * d, (len(times), n_components)).copy()
            g = nl.gradient(times, u)
            gscale = max(float(np.max(np.sqrt(np.sum(g**2, axis=1)))), 1e-300)
            fd = np.empty_like(g)
            for c in range(n_components):
                up, dn = u.copy(), u.copy()
                up[:, c] += h
                dn[:, c] -= h
                fd[:, c] = (nl.density(times, up) - nl.density(times, dn)) / (2.0 * h)
            err = np.sqrt(np.sum((fd - g) ** 2, axis=1))
            den = np.maximum(np.sqrt(np.sum(g**2, axis=1)), 1e-4 * gscale)
            rel = err / den
            j = int(np.argmax(rel))
            if rel[j] > worst_fd:
                worst_fd, loc_fd = float(rel[j]), float(times[j])
    checks.append(
        CheckResult(
            "gradient-consistency",
            worst_fd <= 1e-5,
            1e-5 - worst_fd,
            loc_fd,
            "declared gradient vs centered differences of W away from u = 0",
        )
    )

    return GrowthReport(all(c.passed for c in checks), tuple(checks))
