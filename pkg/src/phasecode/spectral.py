"""Signal and noise power spectral densities of windowed disc read-out.

Conventions: double-sided spectra over sideband frequency ``nu`` (Hz),
photon flux ``N`` in photons/s, window length ``T`` and gap ``T'`` in s.

Single window::

    S1(nu) = N^2 T sinc^2(pi T nu),   N1 = N / T

Difference of two windows separated by ``T'``: the phase-averaged
transfer function

    eta2(nu) = kappa < (int_0^T - int_{T+T'}^{2T+T'} sin(2 pi nu t + Theta) dt)^2 >_Theta
             = kappa * 2 sin^2(pi nu T) sin^2(pi nu (T+T')) / (pi nu)^2

is applied to the same N-driven signal as the single window.  With
``kappa = 2/T`` the single-window analogue of eta2 reproduces S1 exactly,
which gives ``S2(nu) = 4 S1(nu) sin^2(pi nu (T+T'))``.  The difference of
two independent shot-noise-limited windows has white noise ``2N/T``.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import constants
from scipy.integrate import trapezoid

from .errors import PhaseCodeError, ValidationError


class Scheme(str, enum.Enum):
    SINGLE = "single"
    CONSECUTIVE = "consecutive_difference"


@dataclass(frozen=True)
class MeasurementWindow:
    T: float
    N: float
    T_prime: float = 0.0
    scheme: Scheme = Scheme.SINGLE

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        if not self.T > 0:
            raise ValidationError(f"window length T must be positive, got {self.T}")
        if self.N < 0:
            raise ValidationError(f"photon flux N must be >= 0, got {self.N}")
        if self.T_prime < 0:
            raise ValidationError(f"gap T' must be >= 0, got {self.T_prime}")

    def default_nu(self, n_points: int = 4096, span: float = 4.0) -> np.ndarray:
        return np.linspace(0.0, span / self.T, n_points)


@dataclass(frozen=True)
class PSDCurve:
    nu: np.ndarray
    signal: np.ndarray
    noise: np.ndarray
    window: MeasurementWindow
    convention: str = "double-sided"

    def normalized(self, scale: float | None = None) -> "PSDCurve":
        """Divide signal and noise by ``scale`` (default: the signal maximum)."""
        s = float(np.max(self.signal)) if scale is None else scale
        return PSDCurve(self.nu, self.signal / s, self.noise / s, self.window, self.convention)

    def to_csv(self, path, scale: float | None = None) -> None:
        curve = self.normalized(scale)
        with open(Path(path), "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["nu_times_T", "signal_normalized", "noise_normalized"])
            for row in zip(curve.nu * self.window.T, curve.signal, curve.noise):
                writer.writerow([repr(float(v)) for v in row])


def _nu(window: MeasurementWindow, nu):
    return window.default_nu() if nu is None else np.asarray(nu, dtype=float)


def psd_single(window: MeasurementWindow, nu=None) -> PSDCurve:
    if window.scheme is not Scheme.SINGLE:
        raise ValidationError("psd_single needs a single-window scheme")
    nu = _nu(window, nu)
    signal = window.N**2 * window.T * np.sinc(window.T * nu) ** 2
    noise = np.full_like(nu, window.N / window.T)
    return PSDCurve(nu, signal, noise, window)


def eta2_closed_form(nu, T: float, T_prime: float = 0.0, kappa: float = 1.0):
    """Phase-averaged squared difference of two window integrals."""
    nu = np.asarray(nu, dtype=float)
    # 2 sin^2(pi nu T) sin^2(pi nu (T+T')) / (pi nu)^2, written via sinc for nu -> 0
    return kappa * 2.0 * T**2 * np.sinc(T * nu) ** 2 * np.sin(np.pi * nu * (T + T_prime)) ** 2


def eta2_phase_average(nu, T: float, T_prime: float = 0.0, kappa: float = 1.0, n_phases: int = 256, n_nodes: int = 64):
    """Same quantity by direct quadrature: Gauss-Legendre in t, uniform grid in Theta.

    Each window integral is split into panels so the quadrature stays exact
    to rounding for the frequencies of interest (nu*T up to a few tens).
    """
    nu = np.atleast_1d(np.asarray(nu, dtype=float))
    thetas = 2.0 * np.pi * np.arange(n_phases) / n_phases
    nodes, weights = np.polynomial.legendre.leggauss(n_nodes)
    panels = max(1, int(np.ceil(np.max(np.abs(nu)) * T)) if nu.size else 1)

    def window_integral(start):
        total = np.zeros((nu.size, n_phases))
        h = T / panels
        for p in range(panels):
            a = start + p * h
            t = a + 0.5 * h * (nodes + 1.0)
            arg = 2.0 * np.pi * nu[:, None, None] * t[None, None, :] + thetas[None, :, None]
            total += 0.5 * h * np.sum(weights * np.sin(arg), axis=-1)
        return total

    diff = window_integral(0.0) - window_integral(T + T_prime)
    return kappa * np.mean(diff**2, axis=-1)


def psd_consecutive(window: MeasurementWindow, nu=None) -> PSDCurve:
    if window.scheme is not Scheme.CONSECUTIVE:
        raise ValidationError("psd_consecutive needs the consecutive_difference scheme")
    nu = _nu(window, nu)
    signal = window.N**2 * eta2_closed_form(nu, window.T, window.T_prime, kappa=2.0 / window.T)
    noise = np.full_like(nu, 2.0 * window.N / window.T)
    return PSDCurve(nu, signal, noise, window)


def psd(window: MeasurementWindow, nu=None) -> PSDCurve:
    if window.scheme is Scheme.SINGLE:
        return psd_single(window, nu)
    return psd_consecutive(window, nu)


# Half the noise power: the usual meaning of "3 dB" squeezing.
THREE_DB = 10.0 * math.log10(2.0)


def band_snr(curve: PSDCurve, nu_center: float, bandwidth: float, squeezing_db: float = 0.0) -> float:
    """Integrated signal over integrated noise inside a band.

    ``squeezing_db`` scales the noise floor by 10**(dB/10): 0 is the shot-noise
    floor, negative values a squeezed read-out beam (``-THREE_DB`` halves it).
    A zero ``bandwidth`` returns the pointwise PSD ratio at ``nu_center``.
    """
    if bandwidth < 0:
        raise ValidationError(f"bandwidth must be >= 0, got {bandwidth}")
    factor = 10.0 ** (squeezing_db / 10.0)
    lo, hi = nu_center - 0.5 * bandwidth, nu_center + 0.5 * bandwidth
    nu = curve.nu
    if lo < nu[0] - 1e-12 * max(1.0, abs(nu[-1])) or hi > nu[-1] * (1 + 1e-12):
        raise ValidationError(f"band [{lo}, {hi}] outside the curve's range [{nu[0]}, {nu[-1]}]")
    if bandwidth == 0:
        s = np.interp(nu_center, nu, curve.signal)
        n = np.interp(nu_center, nu, curve.noise) * factor
        return float(s / n)
    inside = (nu > lo) & (nu < hi)
    grid = np.concatenate([[lo], nu[inside], [hi]])
    s = np.interp(grid, nu, curve.signal)
    n = np.interp(grid, nu, curve.noise) * factor
    sig, noi = trapezoid(s, grid), trapezoid(n, grid)
    if noi <= 0:
        raise ValidationError("empty band: no noise power to compare against")
    return float(sig / noi)


@dataclass(frozen=True)
class Peak:
    nu_peak: float
    value: float
    fwhm: float


def _crossing(nu, y, i, j, level):
    # linear interpolation of y == level between samples i and j
    return nu[i] + (level - y[i]) * (nu[j] - nu[i]) / (y[j] - y[i])


def peak_and_bandwidth(curve: PSDCurve) -> Peak:
    """Parabolic-refined maximum and full width at half maximum of the signal.

    A maximum on the DC sample is accepted (the spectrum is even, so DC is
    an interior point of the two-sided curve); its FWHM spans both sides.
    """
    nu, y = curve.nu, curve.signal
    i = int(np.argmax(y))
    at_dc = i == 0 and abs(nu[0]) <= 1e-15 * max(1.0, nu[-1])
    if i == len(y) - 1 or (i == 0 and not at_dc):
        raise PhaseCodeError("no interior peak: signal is monotone over the sampled range")
    if at_dc:
        nu_peak, value = 0.0, float(y[0])
    else:
        y0, y1, y2 = y[i - 1], y[i], y[i + 1]
        denom = y0 - 2.0 * y1 + y2
        delta = 0.5 * (y0 - y2) / denom if denom < 0 else 0.0
        h = nu[i + 1] - nu[i]
        nu_peak = nu[i] + delta * h
        value = float(y1 - 0.25 * (y0 - y2) * delta)
    half = 0.5 * value
    right = i
    while right < len(y) - 1 and y[right] > half:
        right += 1
    if y[right] > half:
        raise PhaseCodeError("half maximum not reached above the peak")
    hi = _crossing(nu, y, right - 1, right, half)
    if at_dc:
        return Peak(nu_peak, value, 2.0 * hi)
    left = i
    while left > 0 and y[left] > half:
        left -= 1
    if y[left] > half:
        raise PhaseCodeError("half maximum not reached below the peak")
    lo = _crossing(nu, y, left, left + 1, half)
    return Peak(float(nu_peak), value, float(hi - lo))


def photon_rate(power: float, wavelength: float) -> float:
    """Photons per second P*lambda/(h*c)."""
    if power < 0 or wavelength <= 0:
        raise ValidationError("power must be >= 0 and wavelength > 0")
    return power * wavelength / (constants.h * constants.c)


def single_window_main_lobe(window: MeasurementWindow) -> float:
    """First zero of S1 above DC; the signal support edge 1/T."""
    return 1.0 / window.T
