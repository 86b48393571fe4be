"""Signal-to-noise ratio, minimum detectable phase and level counts."""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import constants

from .detection import BeamState, measurement_angle
from .errors import UnresolvableError, ValidationError


class Regime(str, enum.Enum):
    COHERENT = "coherent"
    ONE_SQUEEZED = "one_squeezed"
    TWO_SQUEEZED = "two_squeezed"
    HOMODYNE_LIMIT = "homodyne_limit"


@dataclass(frozen=True)
class SnrReport:
    snr: float
    delta_theta_min: float
    l_max: float
    regime: Regime

    @property
    def log2_l_max(self) -> float:
        return math.log2(self.l_max)


def classify(beam3: BeamState, beam2: BeamState | None) -> Regime:
    if beam2 is None:
        return Regime.HOMODYNE_LIMIT
    squeezed = sum(b.var_plus < 1.0 or b.var_minus < 1.0 for b in (beam3, beam2))
    return (Regime.COHERENT, Regime.ONE_SQUEEZED, Regime.TWO_SQUEEZED)[squeezed]


def snr(beam3: BeamState, beam2: BeamState, phi_minus_theta: float) -> float:
    """Squared mean of the active combination over its variance.

    Variances are taken at the measured quadrature psi = (phi - theta) + pi/2.
    """
    psi = measurement_angle(phi_minus_theta, 0.0)
    a2, b2 = beam3.amplitude**2, beam2.amplitude**2
    noise = a2 * beam2.quadrature_variance(psi) + b2 * beam3.quadrature_variance(psi)
    if noise <= 0:
        raise ValidationError("zero noise variance: both amplitudes vanish")
    return float(4.0 * a2 * b2 * math.sin(phi_minus_theta) ** 2 / noise)


def snr_homodyne(beam3: BeamState, phi_minus_theta: float) -> float:
    """Strong-reference limit beta >> alpha of :func:`snr`."""
    psi = measurement_angle(phi_minus_theta, 0.0)
    return float(4.0 * beam3.amplitude**2 * math.sin(phi_minus_theta) ** 2 / beam3.quadrature_variance(psi))


def _asin_argument(beam3: BeamState, beam2: BeamState | None) -> float:
    # optimum phi - theta = pi/2 puts psi = pi: the amplitude (V+) quadrature
    a2 = beam3.amplitude**2
    if a2 == 0:
        return math.inf
    if beam2 is None:
        return beam3.var_plus / (4.0 * a2)
    b2 = beam2.amplitude**2
    if b2 == 0:
        return math.inf
    return (a2 * beam2.var_plus + beam3.var_plus * b2) / (4.0 * a2 * b2)


def delta_theta_min(beam3: BeamState, beam2: BeamState | None = None) -> float:
    """Smallest phase step read at SNR = 1; ``beam2=None`` is the homodyne limit.

    Raises UnresolvableError when even a quarter-wave step stays below SNR 1.
    """
    arg = _asin_argument(beam3, beam2)
    if arg > 1.0:
        raise UnresolvableError(f"SNR never reaches 1 (asin argument {arg:.4g} > 1)")
    return math.asin(math.sqrt(arg))


def l_max(beam3: BeamState, beam2: BeamState | None = None) -> float:
    return levels_from_delta(delta_theta_min(beam3, beam2))


def levels_from_delta(dtheta: float) -> float:
    # four transverse profiles times pi/dtheta longitudinal levels
    return 4.0 * math.pi / dtheta


def report(beam3: BeamState, beam2: BeamState | None = None) -> SnrReport:
    dtheta = delta_theta_min(beam3, beam2)
    value = snr_homodyne(beam3, 0.5 * math.pi) if beam2 is None else snr(beam3, beam2, 0.5 * math.pi)
    return SnrReport(value, dtheta, levels_from_delta(dtheta), classify(beam3, beam2))


def photons_per_window(power: float, wavelength: float, window: float) -> float:
    """Photon count P*T*lambda/(h*c) for an optical power over a window."""
    if power < 0 or wavelength <= 0 or window <= 0:
        raise ValidationError("power must be >= 0 and wavelength, window > 0")
    return power * window * wavelength / (constants.h * constants.c)


def homodyne_levels(power: float, wavelength: float, window: float, var_plus: float = 1.0) -> SnrReport:
    """Level count for a read-out beam of given power against a strong reference."""
    n = photons_per_window(power, wavelength, window)
    return report(BeamState(math.sqrt(n), 0.0, var_plus, 1.0 / var_plus if var_plus < 1 else 1.0))


SWEEP_COLUMNS = (
    "alpha",
    "beta",
    "V_a_plus",
    "V_a_minus",
    "V_b_plus",
    "V_b_minus",
    "snr",
    "delta_theta_min",
    "log2_l_max",
)


def sweep_rows(alphas, betas, beam3_vars=(1.0, 1.0), beam2_vars=(1.0, 1.0)):
    """Rows over an (alpha, beta) grid at the optimal phase offset.

    Unresolvable points report NaN for delta_theta_min and log2_l_max.
    """
    rows = []
    for a in np.atleast_1d(alphas):
        for b in np.atleast_1d(betas):
            b3 = BeamState(float(a), 0.0, *beam3_vars)
            b2 = BeamState(float(b), 0.0, *beam2_vars)
            try:
                value = snr(b3, b2, 0.5 * math.pi)
            except ValidationError:
                value = math.nan
            try:
                dtheta = delta_theta_min(b3, b2)
                log2l = math.log2(levels_from_delta(dtheta))
            except UnresolvableError:
                dtheta = log2l = math.nan
            rows.append((float(a), float(b), *beam3_vars, *beam2_vars, value, dtheta, log2l))
    return rows


def write_sweep_csv(rows, path) -> None:
    with open(Path(path), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SWEEP_COLUMNS)
        for row in rows:
            writer.writerow([repr(float(v)) for v in row])
