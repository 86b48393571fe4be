"""End-to-end pit channel: encode, read out with a phi-scan, decode.

Each pit is read with ``phi_steps`` reference phases spread uniformly over
[0, pi); every scan point is one full measurement window carrying
independent Gaussian C/D noise with the tabulated variance.  The decoder
fits a sinusoid to the scan, so the phase estimate has a standard
deviation of roughly ``sqrt(2 / (phi_steps * R))`` for peak per-window
SNR ``R``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc
from scipy.stats import binomtest

from .detection import BeamState, decode, phi_grid
from .encoding import PhaseSymbol, Track, symbols_to_bits
from .errors import ValidationError
from .noise import snr


@dataclass(frozen=True)
class ChannelReport:
    pits: int
    decided: int
    undecidable: int
    symbol_errors: int
    bit_errors: int
    bits_compared: int
    ser: float
    ser_ci: tuple[float, float]
    ber: float
    ber_ci: tuple[float, float]
    per_symbol_snr: float
    predicted_ser: float
    phi_steps: int
    seed: int | None
    decoded: tuple = ()

    def summary(self) -> dict:
        out = {k: v for k, v in self.__dict__.items() if k != "decoded"}
        out["ser_ci"] = list(self.ser_ci)
        out["ber_ci"] = list(self.ber_ci)
        return out


def level_spacing_snr(beam3: BeamState, beam2: BeamState, levels_per_theta: int) -> float:
    """Single-window SNR of a one-level phase step read on the signal's slope."""
    return snr(beam3, beam2, math.pi / levels_per_theta)


def beams_for_spacing_snr(levels_per_theta: int, target: float = 1.0, ratio: float = 1.0):
    """Coherent beams (beta = ratio * alpha) whose level-spacing SNR equals ``target``."""
    s2 = math.sin(math.pi / levels_per_theta) ** 2
    # 4 a^2 b^2 s2 / (a^2 + b^2) = target with b = ratio * a
    alpha2 = target * (1.0 + ratio**2) / (4.0 * ratio**2 * s2)
    alpha = math.sqrt(alpha2)
    return BeamState(alpha), BeamState(ratio * alpha)


def predicted_ser(beam3: BeamState, beam2: BeamState, levels_per_theta: int, phi_steps: int) -> float:
    """Gaussian-error estimate: two neighbours at half a level spacing each."""
    if beam3.amplitude == 0 or beam2.amplitude == 0:
        return math.nan
    phis = phi_grid(phi_steps)
    theta = 0.5 * math.pi / levels_per_theta
    psi = phis - theta + 0.5 * math.pi
    var = beam2.amplitude**2 * beam3.quadrature_variance(psi) + beam3.amplitude**2 * beam2.quadrature_variance(psi)
    amp = 2.0 * beam3.amplitude * beam2.amplitude
    fisher = float(np.sum(amp**2 * np.cos(phis - theta) ** 2 / var))
    z = 0.5 * (math.pi / levels_per_theta) * math.sqrt(fisher)
    # 2 Q(z) = erfc(z / sqrt 2)
    return float(erfc(z / math.sqrt(2.0)))


def _scan(symbols: list[PhaseSymbol], beam3: BeamState, beam2: BeamState, phis: np.ndarray):
    theta = np.array([s.theta for s in symbols])[:, None]
    sign = np.array([s.transform.sign for s in symbols], dtype=float)[:, None]
    flipped = np.array([s.transform.flipped for s in symbols])[:, None]
    signal = sign * 2.0 * beam3.amplitude * beam2.amplitude * np.sin(phis[None, :] - theta)
    psi = phis[None, :] - theta + 0.5 * math.pi
    var = beam2.amplitude**2 * beam3.quadrature_variance(psi) + beam3.amplitude**2 * beam2.quadrature_variance(psi)
    c = np.where(flipped, signal, 0.0)
    d = np.where(flipped, 0.0, signal)
    return c, d, var


def _interval(k: int, n: int) -> tuple[float, float]:
    if n == 0:
        return (math.nan, math.nan)
    ci = binomtest(k, n).proportion_ci(confidence_level=0.95, method="wilson")
    return (float(ci.low), float(ci.high))


def channel_sim(
    track: Track,
    beam3: BeamState,
    beam2: BeamState,
    seed: int | None,
    phi_steps: int | None = None,
    min_confidence: float = 6.0,
    noiseless: bool = False,
) -> ChannelReport:
    """Symbol and bit error rates for reading ``track`` through noisy scans.

    Undecidable pits are excluded from both error rates and counted
    separately.  ``seed`` drives ``numpy.random.default_rng``; noise is
    drawn as one (pits, phi_steps, 2) block, C before D on the last axis.
    """
    if len(track) == 0:
        raise ValidationError("track is empty")
    levels = track.levels_per_theta
    if phi_steps is None:
        phi_steps = max(8, 2 * levels)
    if phi_steps < 8 or phi_steps <= levels:
        raise ValidationError(
            f"phi_steps={phi_steps} must be >= 8 and exceed levels_per_theta={levels}"
        )
    if not noiseless and seed is None:
        raise ValidationError("a seed is required for noisy channel simulation")

    symbols = track.symbols()
    phis = phi_grid(phi_steps)
    c, d, var = _scan(symbols, beam3, beam2, phis)
    if not noiseless:
        rng = np.random.default_rng(seed)
        noise = rng.standard_normal((len(symbols), phi_steps, 2)) * np.sqrt(var)[..., None]
        c = c + noise[..., 0]
        d = d + noise[..., 1]

    decoded = []
    code = track.code
    errors = undecidable = 0
    sent_bits, got_bits = [], []
    for k, sym in enumerate(symbols):
        rows = np.column_stack([c[k], d[k], var[k], var[k]])
        res = decode(rows, phi_steps, refine="fit", min_confidence=min_confidence)
        if res.undecidable:
            undecidable += 1
            decoded.append(None)
            continue
        decoded.append(res.symbol)
        want, got = code.value(sym), code.value(res.symbol)
        errors += want != got
        sent_bits.extend(symbols_to_bits([sym], levels))
        got_bits.extend(symbols_to_bits([res.symbol], levels))

    decided = len(symbols) - undecidable
    bit_errors = int(np.sum(np.array(sent_bits) != np.array(got_bits))) if sent_bits else 0
    nbits = len(sent_bits)
    try:
        spacing = level_spacing_snr(beam3, beam2, levels)
    except ValidationError:
        spacing = 0.0
    return ChannelReport(
        pits=len(symbols),
        decided=decided,
        undecidable=undecidable,
        symbol_errors=int(errors),
        bit_errors=bit_errors,
        bits_compared=nbits,
        ser=errors / decided if decided else math.nan,
        ser_ci=_interval(int(errors), decided),
        ber=bit_errors / nbits if nbits else math.nan,
        ber_ci=_interval(bit_errors, nbits),
        per_symbol_snr=spacing,
        predicted_ser=predicted_ser(beam3, beam2, levels, phi_steps),
        phi_steps=phi_steps,
        seed=seed,
        decoded=tuple(decoded),
    )


def decoded_bits(report: ChannelReport, track: Track) -> list[int] | None:
    """Bitstream recovered from a fully decided report, trimmed of padding."""
    if report.undecidable:
        return None
    bits = symbols_to_bits(list(report.decoded), track.levels_per_theta)
    return bits[: track.bit_count]

