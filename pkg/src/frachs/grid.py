"""Uniform periodic grids, sampled signals and their discrete Fourier transforms.

A :class:`SampledSignal` is the universal value carrier of the library: a
function R -> R^n truncated to one period [t_min, t_min + N*dt) of a uniform
grid with N a power of two.  All integrals are evaluated with the trapezoid
rule on the periodic grid (endpoint identified), i.e. ``dt * sum``, which is
exact for trigonometric polynomials and makes the discrete Parseval identity
hold to rounding error.

The Fourier transform convention is ``u_hat(w) = int e^{-i t w} u(t) dt`` with
angular frequencies ``w_k = 2 pi k / (N dt)`` in standard FFT ordering
(negative half mapped).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "FracOrder",
    "SampledSignal",
    "Spectrum",
    "fft_forward",
    "fft_inverse",
    "signal_from_function",
    "zeros_like",
    "midpoint_grid",
    "reflect",
    "integrate",
    "l2_inner",
    "l2_norm",
    "random_band_limited",
]


@dataclass(frozen=True)
class FracOrder:
    """Fractional order in (0, 1).

    ``variational_ok`` flags orders above 1/2, the range on which the
    sup-norm embedding (and hence the whole energy framework) is valid.
    """

    alpha: float

    def __post_init__(self):
        if not (0.0 < self.alpha < 1.0):
            raise ValueError(f"fractional order must lie in (0, 1), got {self.alpha}")

    @property
    def variational_ok(self) -> bool:
        return self.alpha > 0.5

    @property
    def doubled(self) -> float:
        """Order 2*alpha of the left-right composition."""
        return 2.0 * self.alpha

    @property
    def complement(self) -> float:
        """Order 1 - alpha."""
        return 1.0 - self.alpha


def _as_values(values) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ValueError(f"values must have shape (N,) or (N, n), got {arr.shape}")
    return arr


@dataclass(frozen=True)
class SampledSignal:
    """A function R -> R^n sampled on one period of a uniform grid.

    values has shape (N, n): N samples of n real components.  N must be a
    power of two with N >= 8, dt > 0 and every sample finite.
    """

    t_min: float
    dt: float
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "values", _as_values(self.values))
        n_samples = self.values.shape[0]
        if n_samples < 8 or (n_samples & (n_samples - 1)) != 0:
            raise ValueError(f"sample count must be a power of two >= 8, got {n_samples}")
        if not self.dt > 0:
            raise ValueError(f"grid spacing must be positive, got {self.dt}")
        if not np.all(np.isfinite(self.values)):
            bad = np.argwhere(~np.isfinite(self.values))[0]
            raise ValueError(
                f"non-finite sample at t={self.t_min + bad[0] * self.dt:.6g} "
                f"(index {bad[0]}, component {bad[1]})"
            )
        self.values.setflags(write=False)

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def n_components(self) -> int:
        return self.values.shape[1]

    @property
    def period(self) -> float:
        return self.n_samples * self.dt

    @property
    def times(self) -> np.ndarray:
        return self.t_min + self.dt * np.arange(self.n_samples)

    def with_values(self, values) -> "SampledSignal":
        """Same grid, new samples."""
        return SampledSignal(self.t_min, self.dt, values)

    def magnitude(self) -> np.ndarray:
        """Pointwise euclidean norm |u(t_j)|, shape (N,)."""
        return np.sqrt(np.sum(self.values**2, axis=1))

    def sup_norm(self) -> float:
        return float(np.max(self.magnitude(), initial=0.0))

    def same_grid(self, other: "SampledSignal") -> bool:
        return (
            self.n_samples == other.n_samples
            and self.t_min == other.t_min
            and self.dt == other.dt
        )


@dataclass(frozen=True)
class Spectrum:
    """Discrete Fourier data: frequencies w_k (FFT order) and complex coeffs (N, n)."""

    t_min: float
    dt: float
    frequencies: np.ndarray = field(repr=False)
    coeffs: np.ndarray = field(repr=False)


def signal_from_function(fn, n_samples: int, t_min: float, dt: float) -> SampledSignal:
    """Sample ``fn`` (vectorized, t-array -> (N,) or (N, n)) on the grid."""
    t = t_min + dt * np.arange(n_samples)
    return SampledSignal(t_min, dt, np.asarray(fn(t), dtype=float))


def zeros_like(u: SampledSignal) -> SampledSignal:
    return u.with_values(np.zeros_like(u.values))


def midpoint_grid(n_samples: int, domain: float) -> tuple[float, float]:
    """(t_min, dt) for a period of length ``domain`` sampled at cell midpoints.

    The first sample sits half a cell above -domain/2, so that 0 and any other
    cell boundary fall between samples and the grid is reflection-symmetric
    by pure index reversal.
    """
    dt = domain / n_samples
    return -0.5 * domain + 0.5 * dt, dt


def reflect(u: SampledSignal) -> SampledSignal:
    """Time reversal t -> -t, exact on reflection-symmetric periodic grids.

    Sample j maps to sample (k0 - j) mod N where k0 = -2 t_min / dt must be an
    integer (mod N); this covers both boundary-aligned grids (t_min = -T/2)
    and midpoint grids (t_min = -T/2 + dt/2).
    """
    n = u.n_samples
    k0_real = -2.0 * u.t_min / u.dt
    k0 = int(np.rint(k0_real))
    if abs(k0_real - k0) > 1e-9:
        raise ValueError("grid is not reflection-symmetric (t_min is not a half-multiple of dt)")
    idx = (k0 - np.arange(n)) % n
    return u.with_values(u.values[idx])


def fft_forward(u: SampledSignal) -> Spectrum:
    """Discrete approximation of ``u_hat(w) = int e^{-i t w} u(t) dt``.

    Exact (to rounding) for band-limited periodic signals; for decaying
    signals the error is the tail truncated outside one period.
    """
    if not np.all(np.isfinite(u.values)):
        raise ValueError("cannot transform a signal with non-finite samples")
    freqs = 2.0 * np.pi * np.fft.fftfreq(u.n_samples, d=u.dt)
    phase = np.exp(-1j * u.t_min * freqs)
    coeffs = u.dt * phase[:, None] * np.fft.fft(u.values, axis=0)
    return Spectrum(u.t_min, u.dt, freqs, coeffs)


def fft_inverse(spec: Spectrum) -> SampledSignal:
    """Exact discrete inverse of :func:`fft_forward`."""
    n_samples = spec.coeffs.shape[0]
    phase = np.exp(-1j * spec.t_min * spec.frequencies)
    raw = spec.coeffs / (spec.dt * phase[:, None])
    values = np.fft.ifft(raw, axis=0)
    scale = np.max(np.abs(values), initial=0.0)
    residue = np.max(np.abs(values.imag), initial=0.0)
    if scale > 0 and residue > 1e-10 * scale:
        raise ValueError(
            f"inverse transform is not real: imaginary residue {residue / scale:.3e} "
            "relative (conjugate symmetry violated)"
        )
    return SampledSignal(spec.t_min, spec.dt, values.real)


def integrate(u: SampledSignal) -> np.ndarray:
    """Componentwise integral over the period (periodic trapezoid = dt * sum)."""
    return u.dt * np.sum(u.values, axis=0)


def l2_inner(u: SampledSignal, v: SampledSignal) -> float:
    if not u.same_grid(v):
        raise ValueError("signals live on different grids")
    return float(u.dt * np.sum(u.values * v.values))


def l2_norm(u: SampledSignal) -> float:
    return float(np.sqrt(u.dt * np.sum(u.values**2)))


def random_band_limited(
    rng: np.random.Generator,
    n_samples: int,
    t_min: float,
    dt: float,
    n_components: int = 1,
    band_fraction: float = 0.25,
    envelope: bool = False,
) -> SampledSignal:
    """Random real signal with spectral content below ``band_fraction`` of Nyquist.

    With ``envelope=True`` the signal is multiplied by a wide Gaussian so that
    it decays at the grid ends (needed by quadrature-based oracles).
    """
    freqs = 2.0 * np.pi * np.fft.fftfreq(n_samples, d=dt)
    w_max = band_fraction * np.pi / dt
    raw = np.zeros((n_samples, n_components), dtype=complex)
    band = np.abs(freqs) <= w_max
    n_band = int(np.sum(band))
    raw[band] = rng.standard_normal((n_band, n_components)) + 1j * rng.standard_normal(
        (n_band, n_components)
    )
    values = np.fft.ifft(raw, axis=0).real
    if envelope:
        t = t_min + dt * np.arange(n_samples)
        t_mid = t_min + 0.5 * n_samples * dt
        half = 0.5 * n_samples * dt
        values = values * np.exp(-((t - t_mid) / (0.25 * half)) ** 2)[:, None]
    peak = np.max(np.abs(values))
    if peak > 0:
        values = values / peak
    return SampledSignal(t_min, dt, values)
