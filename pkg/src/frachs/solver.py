"""Monotone descent to the nontrivial minimizer, the restricted Dirichlet
problem, and the weight-sweep harness that exhibits concentration.

The minimizer runs limited-memory quasi-Newton descent with Armijo
backtracking in the L2(dt) inner product, preconditioned by the inverse of
the diagonal spectral surrogate ``1 + |w|^(2a)``; when the gradient is small
it switches to a truncated-Newton polish (conjugate gradients on the true
Hessian action with the same line search).  Every accepted step strictly
decreases the energy, and every iterate is checked against the closed-form
coercivity floor; dropping below it signals a gradient bug and raises.

Descent starts from the negative-energy bump, never from 0: the energy is
negative from the first iterate on, so the trivial critical point u = 0 is
unreachable.
"""

from __future__ import annotations

import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .energy import (
    Problem,
    WitnessError,
    evaluate_energy,
    lower_bound_minimum,
    negative_energy_witness,
)
from .grid import SampledSignal
from .spaces import h_alpha_norm, lambda_norm

__all__ = [
    "SolverConfig",
    "SolveResult",
    "SweepRow",
    "SweepReport",
    "DivergenceError",
    "minimize",
    "solve_bvp",
    "concentration_sweep",
    "uniform_bound_constant",
]


class DivergenceError(RuntimeError):
    """An iterate fell below the coercivity floor: the gradient is inconsistent."""


@dataclass(frozen=True)
class SolverConfig:
    max_iters: int = 5000
    grad_tol: float = 1e-8
    armijo: float = 1e-4
    shrink: float = 0.5
    memory: int = 10
    seed: int = 0
    newton_switch_tol: float = 1e-5
    max_cg: int = 250

    def __post_init__(self):
        if self.max_iters <= 0 or self.grad_tol <= 0 or self.memory <= 0:
            raise ValueError("max_iters, grad_tol and memory must be positive")
        if not (0 < self.armijo < 1 and 0 < self.shrink < 1):
            raise ValueError("line-search parameters must lie in (0, 1)")


@dataclass(frozen=True)
class SolveResult:
    u: SampledSignal
    energy: float
    grad_norm: float
    grad_norm_weighted: float
    iterations: int
    converged: bool
    history: tuple[tuple[float, float], ...] = field(repr=False)


class _Objective:
    """Raw-array energy/gradient/Hessian bound to one problem instance.

    An optional boolean mask restricts the search to a subspace (values
    outside the mask pinned to zero), realizing the Dirichlet constraint by
    zero extension.
    """

    def __init__(self, prob: Problem, mask: np.ndarray | None = None):
        self.prob = prob
        self.mask = None if mask is None else np.asarray(mask, bool)[:, None]
        n, dt = prob.n_samples, prob.dt
        freqs = 2.0 * np.pi * np.fft.fftfreq(n, d=dt)
        self.riesz_mult = np.abs(freqs) ** prob.order.doubled
        self.precond_mult = 1.0 / (1.0 + self.riesz_mult)
        self.dt = dt
        self.n = n
        self.floor = lower_bound_minimum(prob)[1]
        self.n_energy = 0
        self.n_grad = 0

    def project(self, vals: np.ndarray) -> np.ndarray:
        if self.mask is None:
            return vals
        return np.where(self.mask, vals, 0.0)

    def inner(self, x: np.ndarray, y: np.ndarray) -> float:
        return float(self.dt * np.sum(x * y))

    def norm(self, x: np.ndarray) -> float:
        return float(np.sqrt(self.dt * np.sum(x**2)))

    def seminorm_sq(self, vals: np.ndarray) -> float:
        spec = np.fft.fft(vals, axis=0)
        return float(self.dt / self.n * np.sum(self.riesz_mult[:, None] * np.abs(spec) ** 2))

    def energy(self, vals: np.ndarray) -> float:
        self.n_energy += 1
        prob = self.prob
        quad = float(self.dt * np.einsum("ni,nij,nj->", vals, prob.matrix_values, vals))
        w = prob.nonlinearity.density(prob.times, vals)
        return 0.5 * (self.seminorm_sq(vals) + prob.lam * quad) - float(self.dt * np.sum(w))

    def grad(self, vals: np.ndarray) -> np.ndarray:
        self.n_grad += 1
        prob = self.prob
        principal = np.fft.ifft(self.riesz_mult[:, None] * np.fft.fft(vals, axis=0), axis=0).real
        weighted = np.einsum("nij,nj->ni", prob.matrix_values, vals)
        grad_w = prob.nonlinearity.gradient(prob.times, vals)
        return self.project(principal + prob.lam * weighted - grad_w)

    def hess_action(self, vals: np.ndarray, v: np.ndarray) -> np.ndarray:
        prob = self.prob
        principal = np.fft.ifft(self.riesz_mult[:, None] * np.fft.fft(v, axis=0), axis=0).real
        weighted = np.einsum("nij,nj->ni", prob.matrix_values, v)
        nl = prob.nonlinearity
        if nl.hessian_action is not None:
            hw = nl.hessian_action(prob.times, vals, v)
        else:
            h = 1e-6 * max(1.0, float(np.max(np.abs(vals))))
            hw = (
                nl.gradient(prob.times, vals + h * v) - nl.gradient(prob.times, vals - h * v)
            ) / (2.0 * h)
        return self.project(principal + prob.lam * weighted - hw)

    def precondition(self, x: np.ndarray) -> np.ndarray:
        return self.project(
            np.fft.ifft(self.precond_mult[:, None] * np.fft.fft(x, axis=0), axis=0).real
        )

    def check_floor(self, energy: float):
        tol = 1e-9 * (1.0 + abs(self.floor))
        if energy < self.floor - tol:
            raise DivergenceError(
                f"iterate energy {energy:.6e} fell below the coercivity floor "
                f"{self.floor:.6e}; the gradient is inconsistent with the energy"
            )


def _backtrack(obj, vals, f, g, d, cfg):
    """Armijo backtracking from unit step; returns (new_vals, new_f) or None."""
    slope = obj.inner(g, d)
    if slope >= 0.0:
        return None
    tau = 1.0
    while tau > 1e-20:
        cand = vals + tau * d
        f_new = obj.energy(cand)
        if f_new <= f + cfg.armijo * tau * slope:
            return cand, f_new
        tau *= cfg.shrink
    return None


def _lbfgs_phase(obj, vals, f, g, cfg, tol, budget, history):
    """Quasi-Newton descent until the gradient norm reaches tol or progress stalls.

    Returns (vals, f, g, steps, reached) where reached means the tol was met.
    """
    s_list, y_list, rho_list = [], [], []
    gamma = 1.0
    steps = 0
    while steps < budget:
        g_norm = obj.norm(g)
        if g_norm <= tol:
            return vals, f, g, steps, True
        q = g.copy()
        alphas = []
        for s, y, rho in zip(reversed(s_list), reversed(y_list), reversed(rho_list)):
            a = rho * obj.inner(s, q)
            q -= a * y
            alphas.append(a)
        q = gamma * obj.precondition(q)
        for (s, y, rho), a in zip(zip(s_list, y_list, rho_list), reversed(alphas)):
            b = rho * obj.inner(y, q)
            q += (a - b) * s
        d = -q
        if obj.inner(g, d) >= 0.0:
            d = -obj.precondition(g)
        step = _backtrack(obj, vals, f, g, d, cfg)
        if step is None:
            # quasi-Newton direction unusable at rounding level; drop the memory
            step = _backtrack(obj, vals, f, g, -obj.precondition(g), cfg)
            if step is None:
                return vals, f, g, steps, g_norm <= tol
            s_list, y_list, rho_list = [], [], []
        new_vals, new_f = step
        new_g = obj.grad(new_vals)
        s_vec, y_vec = new_vals - vals, new_g - g
        sy = obj.inner(s_vec, y_vec)
        if sy > 1e-12 * obj.norm(s_vec) * obj.norm(y_vec):
            s_list.append(s_vec)
            y_list.append(y_vec)
            rho_list.append(1.0 / sy)
            if len(s_list) > cfg.memory:
                s_list.pop(0)
                y_list.pop(0)
                rho_list.pop(0)
            gamma = sy / obj.inner(y_vec, y_vec)
        vals, f, g = new_vals, new_f, new_g
        obj.check_floor(f)
        steps += 1
        history.append((f, obj.norm(g)))
    return vals, f, g, steps, obj.norm(g) <= tol


def _truncated_cg(obj, vals, g, rel_tol, max_cg):
    """Approximately solve H d = -g, exiting on negative curvature."""
    d = np.zeros_like(g)
    r = -g
    z = obj.precondition(r)
    p = z.copy()
    rz = obj.inner(r, z)
    r0 = obj.norm(r)
    for i in range(max_cg):
        hp = obj.hess_action(vals, p)
        php = obj.inner(p, hp)
        if php <= 1e-16 * obj.inner(p, p):
            return (z if i == 0 else d)
        a = rz / php
        d = d + a * p
        r = r - a * hp
        if obj.norm(r) <= rel_tol * r0:
            return d
        z = obj.precondition(r)
        rz_new = obj.inner(r, z)
        p = z + (rz_new / rz) * p
        rz = rz_new
    return d


def _newton_phase(obj, vals, f, g, cfg, tol, budget, history):
    """Truncated-Newton steps with the same Armijo line search."""
    steps = 0
    while steps < budget:
        g_norm = obj.norm(g)
        if g_norm <= tol:
            return vals, f, g, steps, True
        rel_tol = min(0.5, np.sqrt(g_norm))
        d = _truncated_cg(obj, vals, g, rel_tol, cfg.max_cg)
        if obj.inner(g, d) >= 0.0:
            d = -obj.precondition(g)
        step = _backtrack(obj, vals, f, g, d, cfg)
        if step is None:
            return vals, f, g, steps, g_norm <= tol
        vals, f = step
        g = obj.grad(vals)
        obj.check_floor(f)
        steps += 1
        history.append((f, obj.norm(g)))
    return vals, f, g, steps, obj.norm(g) <= tol


def _descend(prob, cfg, start_vals, mask=None) -> SolveResult:
    obj = _Objective(prob, mask)
    vals = obj.project(np.array(start_vals, dtype=float))
    f = obj.energy(vals)
    g = obj.grad(vals)
    obj.check_floor(f)
    history = [(f, obj.norm(g))]
    total = 0
    reached = obj.norm(g) <= cfg.grad_tol
    while total < cfg.max_iters and not reached:
        switch = max(cfg.grad_tol, cfg.newton_switch_tol)
        vals, f, g, steps, _ = _lbfgs_phase(
            obj, vals, f, g, cfg, switch, cfg.max_iters - total, history
        )
        total += steps
        reached = obj.norm(g) <= cfg.grad_tol
        if reached or total >= cfg.max_iters:
            break
        vals, f, g, steps, reached = _newton_phase(
            obj, vals, f, g, cfg, cfg.grad_tol, cfg.max_iters - total, history
        )
        total += steps
        if not reached and steps == 0:
            break  # both phases stalled at rounding level
    u = SampledSignal(prob.t_min, prob.dt, vals)
    energy = evaluate_energy(u, prob)
    g_sig = u.with_values(g)
    return SolveResult(
        u=u,
        energy=energy,
        grad_norm=obj.norm(g),
        grad_norm_weighted=lambda_norm(g_sig, prob.potential, prob.lam, prob.order),
        iterations=total,
        converged=obj.norm(g) <= cfg.grad_tol,
        history=tuple(history),
    )


def _witness_start(prob: Problem) -> np.ndarray:
    try:
        u0, s = negative_energy_witness(prob)
        return s * u0.values
    except WitnessError:
        # degenerate nonlinearity: no negative scaling exists; start from the
        # half-delta bump and let descent find the trivial minimum
        from .energy import smooth_bump

        vals = np.zeros((prob.n_samples, prob.n_components))
        vals[:, 0] = smooth_bump(prob.times, prob.potential.core)
        return 0.5 * min(prob.nonlinearity.delta, 1.0) * vals


def minimize(prob: Problem, cfg: SolverConfig, start: SampledSignal | None = None) -> SolveResult:
    """Descend the energy from the negative-energy bump (or a given start).

    Requires the weight to be at or above the embedding threshold so the
    coercivity floor applies.  The returned history is strictly decreasing in
    energy; ``converged`` means the L2 gradient norm reached ``grad_tol``.
    """
    if prob.lam < prob.constants.lambda_threshold:
        raise ValueError(
            f"minimize requires lam >= {prob.constants.lambda_threshold:.6g}, "
            f"got {prob.lam:.6g}"
        )
    if start is None:
        start_vals = _witness_start(prob)
    else:
        prob.check_signal(start)
        start_vals = start.values
    return _descend(prob, cfg, start_vals)


def _core_mask(prob: Problem) -> np.ndarray:
    lo, hi = prob.potential.core
    return (prob.times > lo) & (prob.times < hi)


def solve_bvp(
    prob: Problem, cfg: SolverConfig, extra_starts: tuple[SampledSignal, ...] = ()
) -> SolveResult:
    """Minimize the functional restricted to signals vanishing outside the core.

    The core must be normalized to start at 0 (an interval (0, T)).  Dirichlet
    values outside the open core are pinned to exact zeros by construction
    (zero-extension representation on the full grid).  Several deterministic
    bump amplitudes are tried (the landscape of the sub-quadratic problem can
    hold several critical points) and the deepest converged result wins.
    """
    lo, hi = prob.potential.core
    if lo != 0.0:
        raise ValueError(f"the restricted problem expects a core (0, T), got ({lo}, {hi})")
    mask = _core_mask(prob)
    try:
        u0, s = negative_energy_witness(prob)
        base = u0.values
    except WitnessError:
        from .energy import smooth_bump

        base = np.zeros((prob.n_samples, prob.n_components))
        base[:, 0] = smooth_bump(prob.times, prob.potential.core)
        s = 0.5 * min(prob.nonlinearity.delta, 1.0)
    scales = [s]
    for factor in (4.0, 16.0):
        cand = factor * s
        if cand < prob.nonlinearity.delta:
            scales.append(cand)
    best = None
    for scale in scales:
        result = _descend(prob, cfg, scale * base, mask)
        if best is None or result.energy < best.energy:
            best = result
    for sig in extra_starts:
        prob.check_signal(sig)
        result = _descend(prob, cfg, sig.values, mask)
        if result.energy < best.energy:
            best = result
    return best


def uniform_bound_constant(prob: Problem) -> float:
    """Norm bound holding on the whole negative-energy sublevel set.

    The positive root of r^2/2 = A r^p (A the coercivity coefficient) bounds
    ||u||_lam for every u with nonpositive energy; returned with a 1.05
    safety factor.  Degenerates to 0 when the gradient weight vanishes.
    """
    p = prob.nonlinearity.p
    xi_norm = prob.nonlinearity.xi_dual_norm(prob.times, prob.dt)
    if xi_norm == 0.0:
        warnings.warn("gradient weight xi is identically zero; the bound degenerates to 0")
        return 0.0
    coeff = xi_norm / (p * prob.constants.theta0 ** (p / 2.0))
    root = (2.0 * coeff) ** (1.0 / (2.0 - p))
    return float(1.05 * root)


@dataclass(frozen=True)
class SweepRow:
    lam: float
    c_lambda: float
    tail_mass: float
    weighted_mass: float
    dist_alpha: float
    norm_lambda: float
    converged: bool
    ordering_ok: bool
    bound_ok: bool

    @property
    def flagged(self) -> bool:
        return not (self.converged and self.ordering_ok and self.bound_ok)


@dataclass(frozen=True)
class SweepReport:
    rows: tuple[SweepRow, ...]
    c_tilde: float
    norm_bound: float
    bvp: SolveResult = field(repr=False)
    solutions: tuple[SampledSignal, ...] = field(repr=False)

    @property
    def flagged(self) -> bool:
        return any(r.flagged for r in self.rows)


def _sweep_row(prob, result, u_tilde, c_tilde, bound) -> SweepRow:
    u = result.u
    a_lo, a_hi = prob.potential.well
    outside = (prob.times <= a_lo) | (prob.times >= a_hi)
    mag_sq = np.sum(u.values**2, axis=1)
    total = float(prob.dt * np.sum(mag_sq))
    tail = float(prob.dt * np.sum(mag_sq[outside])) / total if total > 0 else 0.0
    envelope = prob.potential.envelope_at(prob.times)
    weighted = float(prob.dt * np.sum(envelope * mag_sq))
    diff = u.with_values(u.values - u_tilde.values)
    norm_lam = lambda_norm(u, prob.potential, prob.lam, prob.order)
    return SweepRow(
        lam=prob.lam,
        c_lambda=result.energy,
        tail_mass=tail,
        weighted_mass=weighted,
        dist_alpha=h_alpha_norm(diff, prob.order),
        norm_lambda=norm_lam,
        converged=result.converged,
        ordering_ok=result.energy <= c_tilde + 1e-12 * (1.0 + abs(c_tilde)),
        bound_ok=norm_lam <= bound,
    )


def concentration_sweep(
    prob: Problem,
    lambdas,
    cfg: SolverConfig,
    warm_start: bool = True,
    parallel: bool = False,
) -> SweepReport:
    """Minimize along an ascending weight ladder and report concentration.

    Warm starting seeds each weight with the previous solution (stabilizing
    the branch the descent tracks); with ``parallel=True`` warm starting is
    disabled and rows run concurrently, capped by the FRACHS_THREADS
    environment variable.  Rows whose energy misses the restricted level are
    retried from the restricted solution, which restores the ordering
    c_lambda <= c_tilde whenever the descent landed on a shallower branch.
    """
    lambdas = [float(x) for x in lambdas]
    if len(lambdas) < 3:
        raise ValueError("the sweep needs at least 3 weights")
    if any(b < a for a, b in zip(lambdas, lambdas[1:])):
        raise ValueError("weights must be ascending")
    threshold = prob.constants.lambda_threshold
    if lambdas[0] < threshold:
        raise ValueError(f"all weights must be >= the threshold {threshold:.6g}")

    bvp = solve_bvp(prob.with_lam(lambdas[0]), cfg)
    c_tilde = bvp.energy
    bound = uniform_bound_constant(prob)

    def solve_one(lam: float, start_vals) -> SolveResult:
        p = prob.with_lam(lam)
        result = _descend(p, cfg, start_vals)
        if result.energy > c_tilde:
            retry = _descend(p, cfg, bvp.u.values)
            if retry.energy < result.energy:
                result = retry
        return result

    results: dict[float, SolveResult] = {}
    if warm_start and not parallel:
        start = _witness_start(prob.with_lam(lambdas[0]))
        for lam in lambdas:
            result = solve_one(lam, start)
            results[lam] = result
            start = result.u.values
    else:
        witness = _witness_start(prob.with_lam(lambdas[0]))
        max_threads = max(1, int(os.environ.get("FRACHS_THREADS", "1") or "1"))
        if parallel and max_threads > 1:
            with ThreadPoolExecutor(max_workers=min(max_threads, len(lambdas))) as pool:
                futures = {lam: pool.submit(solve_one, lam, witness) for lam in lambdas}
                results = {lam: fut.result() for lam, fut in futures.items()}
        else:
            results = {lam: solve_one(lam, witness) for lam in lambdas}

    rows = []
    solutions = []
    for lam in lambdas:
        result = results[lam]
        rows.append(_sweep_row(prob.with_lam(lam), result, bvp.u, c_tilde, bound))
        solutions.append(result.u)
    return SweepReport(tuple(rows), c_tilde, bound, bvp, tuple(solutions))
