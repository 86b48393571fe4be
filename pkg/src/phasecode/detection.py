"""Interferometric split-detector read-out.

Beam 3 (the phase-coded signal, amplitude alpha) and beam 2 (the
reference, amplitude beta, phase phi) meet on a 50:50 beam-splitter.
Each output falls on a split detector: D1/D2 are the x > 0 / x < 0
segments behind the output ``(E2 + i E3)/sqrt2``, D3/D4 the same
segments behind ``(E3 + i E2)/sqrt2``.  Everything is in photons per
measurement window; the common field prefactor is divided out.

Noise is the linearized quadrature-fluctuation model: the C and D
combinations carry variance ``beta^2 V_a(psi) + alpha^2 V_b(psi)`` with
``psi = phi - theta + pi/2`` and
``V(psi) = V+ cos^2(psi) + V- sin^2(psi)``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .encoding import PhaseSymbol, Transform, apply_transform
from .errors import ValidationError
from .modes import DEFAULT_GRID, SpatialGrid, make_tem00

COMBINATIONS = ("A", "B", "C", "D")


@dataclass(frozen=True)
class BeamState:
    """Coherent amplitude, phase and quadrature variances of one input beam.

    ``var_plus``/``var_minus`` are the amplitude/phase quadrature variances
    normalized to shot noise (1 for a coherent state).
    """

    amplitude: float
    phase: float = 0.0
    var_plus: float = 1.0
    var_minus: float = 1.0

    def __post_init__(self):
        if self.amplitude < 0:
            raise ValidationError(f"amplitude must be >= 0, got {self.amplitude}")
        if self.var_plus <= 0 or self.var_minus <= 0:
            raise ValidationError("quadrature variances must be positive")
        if self.var_plus * self.var_minus < 1.0 - 1e-9:
            raise ValidationError(
                f"V+ * V- = {self.var_plus * self.var_minus:.6g} violates the uncertainty bound"
            )

    @classmethod
    def squeezed(cls, amplitude: float, squeezing_db: float, phase: float = 0.0) -> "BeamState":
        """Minimum-uncertainty state with V+ = 10**(dB/10); negative dB squeezes amplitude."""
        v = 10.0 ** (squeezing_db / 10.0)
        return cls(amplitude, phase, v, 1.0 / v)

    def quadrature_variance(self, psi):
        return self.var_plus * np.cos(psi) ** 2 + self.var_minus * np.sin(psi) ** 2

    @property
    def is_pure(self) -> bool:
        return math.isclose(self.var_plus * self.var_minus, 1.0, rel_tol=1e-9)


@dataclass(frozen=True)
class DetectionResult:
    d1: float
    d2: float
    d3: float
    d4: float
    noise_var_c: float
    noise_var_d: float
    phi: float = 0.0

    @property
    def combo_a(self) -> float:
        return (self.d1 - self.d2) + (self.d3 - self.d4)

    @property
    def combo_b(self) -> float:
        return (self.d1 + self.d2) + (self.d3 + self.d4)

    @property
    def combo_c(self) -> float:
        return (self.d1 - self.d2) - (self.d3 - self.d4)

    @property
    def combo_d(self) -> float:
        return (self.d1 + self.d2) - (self.d3 + self.d4)

    def combos(self) -> dict[str, float]:
        return {"A": self.combo_a, "B": self.combo_b, "C": self.combo_c, "D": self.combo_d}


def measurement_angle(phi: float, theta: float) -> float:
    return phi - theta + 0.5 * math.pi


def noise_variance(symbol: PhaseSymbol, beam3: BeamState, beam2: BeamState, combination="D") -> float:
    """Variance of combination C or D (identical forms for either)."""
    if combination not in ("C", "D"):
        raise ValidationError(f"noise is tabulated for C and D only, got {combination!r}")
    psi = measurement_angle(beam2.phase, symbol.theta)
    return float(
        beam2.amplitude**2 * beam3.quadrature_variance(psi)
        + beam3.amplitude**2 * beam2.quadrature_variance(psi)
    )


def signal_terms(symbol: PhaseSymbol, alpha: float, beta: float, phi: float) -> dict[str, float]:
    """Closed-form signal terms for the four combinations."""
    s = symbol.transform.sign * 2.0 * alpha * beta * math.sin(phi - symbol.theta)
    flipped = symbol.transform.flipped
    return {
        "A": 0.0,
        "B": alpha**2 + beta**2,
        "C": s if flipped else 0.0,
        "D": 0.0 if flipped else s,
    }


def segment_counts(symbol: PhaseSymbol, beam3: BeamState, beam2: BeamState, grid: SpatialGrid = DEFAULT_GRID):
    """Numerically integrate the interfered fields over the four segments."""
    u0 = make_tem00(grid)
    e3 = 1j * beam3.amplitude * apply_transform(u0, symbol)
    e2 = 1j * beam2.amplitude * np.exp(1j * beam2.phase) * u0.amplitude
    out1 = (e2 + 1j * e3) / math.sqrt(2.0)
    out2 = (e3 + 1j * e2) / math.sqrt(2.0)
    i1 = np.abs(out1) ** 2
    i2 = np.abs(out2) ** 2
    return (
        float(grid.integrate(i1, "x>0")),
        float(grid.integrate(i1, "x<0")),
        float(grid.integrate(i2, "x>0")),
        float(grid.integrate(i2, "x<0")),
    )


def _analytic_segments(symbol, alpha, beta, phi):
    # each output carries half the total power, split evenly between segments
    # for u0 and evenly for uf0; the cross term is odd (uf0) or even (u0) in x
    half = 0.25 * (alpha**2 + beta**2)
    cross = 0.5 * symbol.transform.sign * alpha * beta * math.sin(phi - symbol.theta)
    if symbol.transform.flipped:
        return half + cross, half - cross, half - cross, half + cross
    return half + cross, half + cross, half - cross, half - cross


def simulate_detection(
    symbol: PhaseSymbol,
    beam3: BeamState,
    beam2: BeamState,
    grid: SpatialGrid | None = None,
) -> DetectionResult:
    """Mean segment counts and C/D noise variances for one read-out.

    With ``grid=None`` the segment counts come from the closed-form signal
    terms; passing a grid integrates the interfered fields numerically.
    """
    if grid is None:
        d = _analytic_segments(symbol, beam3.amplitude, beam2.amplitude, beam2.phase)
    else:
        d = segment_counts(symbol, beam3, beam2, grid)
    var = noise_variance(symbol, beam3, beam2, "D")
    return DetectionResult(*d, noise_var_c=var, noise_var_d=var, phi=beam2.phase)


@dataclass(frozen=True)
class NoiseSample:
    mean: dict[str, float]
    variance: dict[str, float]
    trials: int
    seed: int


def draw_combinations(result: DetectionResult, rng: np.random.Generator, size) -> dict[str, np.ndarray]:
    """Gaussian draws of C and D around their means with the tabulated variances."""
    c = result.combo_c + math.sqrt(result.noise_var_c) * rng.standard_normal(size)
    d = result.combo_d + math.sqrt(result.noise_var_d) * rng.standard_normal(size)
    return {"C": c, "D": d}


def sample_shot_noise(result: DetectionResult, rng_seed: int, trials: int) -> NoiseSample:
    """Empirical mean and variance of C and D over ``trials`` noisy windows.

    Uses ``numpy.random.default_rng(rng_seed)`` (PCG64); C is drawn before D.
    """
    if trials < 1:
        raise ValidationError(f"trials must be >= 1, got {trials}")
    rng = np.random.default_rng(rng_seed)
    draws = draw_combinations(result, rng, trials)
    ddof = 1 if trials > 1 else 0
    return NoiseSample(
        mean={k: float(v.mean()) for k, v in draws.items()},
        variance={k: float(v.var(ddof=ddof)) for k, v in draws.items()},
        trials=trials,
        seed=rng_seed,
    )


@dataclass(frozen=True)
class DecodeResult:
    symbol: PhaseSymbol | None
    theta: float | None
    confidence: float
    phi_opt: float | None
    combination: str | None
    undecidable: bool = False
    candidates: tuple = field(default=())


def phi_grid(phi_steps: int) -> np.ndarray:
    return np.arange(phi_steps) * (math.pi / phi_steps)


def _canonical(phi_opt: float, peak_sign: float, flipped: bool) -> PhaseSymbol:
    # readout = s * A * sin(phi - theta); at the extremum phi_opt - theta = pi/2
    theta0 = phi_opt - 0.5 * math.pi
    k = math.floor(theta0 / math.pi)
    theta = theta0 - k * math.pi
    if theta >= math.pi:
        theta -= math.pi
        k += 1
    sign = int(np.sign(peak_sign)) * (-1) ** k
    return PhaseSymbol(Transform.from_parts(flipped, sign), theta)


def _parabolic_peak(values: np.ndarray, phi_steps: int):
    # |readout| has period pi in phi, so neighbours wrap around
    mag = np.abs(values)
    i = int(np.argmax(mag))
    y0, y1, y2 = mag[i - 1], mag[i], mag[(i + 1) % phi_steps]
    denom = y0 - 2.0 * y1 + y2
    delta = 0.5 * (y0 - y2) / denom if denom < 0 else 0.0
    h = math.pi / phi_steps
    peak = y1 - 0.25 * (y0 - y2) * delta
    return i * h + delta * h, float(np.sign(values[i])), float(peak)


def _fit_peak(values: np.ndarray, phis: np.ndarray, weights: np.ndarray):
    # weighted least squares for values ~ a sin(phi) + b cos(phi)
    design = np.column_stack([np.sin(phis), np.cos(phis)])
    sw = np.sqrt(weights)
    coef, *_ = np.linalg.lstsq(design * sw[:, None], values * sw, rcond=None)
    a, b = coef
    # a sin(phi) + b cos(phi) = R sin(phi + atan2(b, a)); maximal at phi = pi/2 - atan2(b, a)
    amp = math.hypot(a, b)
    return 0.5 * math.pi - math.atan2(b, a), 1.0, amp, design, sw


def decode(
    readout: Callable[[float], DetectionResult] | list,
    phi_steps: int = 64,
    refine: str = "parabolic",
    min_confidence: float = 1.0,
) -> DecodeResult:
    """Recover the stored symbol from a phi-scan of the C and D combinations.

    ``readout`` is either a callable ``phi -> DetectionResult`` evaluated on a
    uniform grid over [0, pi), or a precomputed sequence of ``(C, D, var_C,
    var_D)`` rows for that grid (used for noisy scans).

    ``refine="parabolic"`` locates the extremum of |combination| on the grid
    and refines it with a three-point parabola; confidence is the peak
    value over the single-window noise standard deviation there.
    ``refine="fit"`` fits a sinusoid to the whole scan by weighted least
    squares; confidence is the fitted amplitude over its standard error.
    Results with confidence below ``min_confidence`` for both C and D are
    reported as undecidable, carrying both candidate symbols.
    """
    if phi_steps < 8:
        raise ValidationError(f"phi_steps must be >= 8, got {phi_steps}")
    phis = phi_grid(phi_steps)
    if callable(readout):
        rows = []
        for p in phis:
            r = readout(float(p))
            rows.append((r.combo_c, r.combo_d, r.noise_var_c, r.noise_var_d))
        rows = np.asarray(rows, dtype=float)
    else:
        rows = np.asarray(readout, dtype=float)
        if rows.shape != (phi_steps, 4):
            raise ValidationError(f"scan must have shape ({phi_steps}, 4), got {rows.shape}")

    found = {}
    for name, col, vcol, flipped in (("C", 0, 2, True), ("D", 1, 3, False)):
        values, var = rows[:, col], rows[:, vcol]
        if refine == "parabolic":
            phi_opt, sign, peak = _parabolic_peak(values, phi_steps)
            i = int(np.argmax(np.abs(values)))
            sigma = math.sqrt(var[i])
            conf = peak / sigma if sigma > 0 else (math.inf if peak > 0 else 0.0)
        elif refine == "fit":
            if np.any(var <= 0):
                w = np.ones_like(var)
                phi_opt, sign, peak, design, sw = _fit_peak(values, phis, w)
                conf = math.inf if peak > 0 else 0.0
            else:
                w = 1.0 / var
                phi_opt, sign, peak, design, sw = _fit_peak(values, phis, w)
                cov = np.linalg.inv((design * w[:, None]).T @ design)
                # standard error of the amplitude along the fitted direction
                direction = np.array([math.cos(phi_opt - 0.5 * math.pi), math.sin(0.5 * math.pi - phi_opt)])
                se = math.sqrt(float(direction @ cov @ direction))
                conf = peak / se
        else:
            raise ValidationError(f"unknown refine method {refine!r}")
        found[name] = (conf, phi_opt, sign, flipped)

    best = max(found, key=lambda k: found[k][0])
    conf, phi_opt, sign, flipped = found[best]
    candidates = tuple(_canonical(found[k][1], found[k][2], found[k][3]) for k in ("C", "D"))
    if conf < min_confidence:
        return DecodeResult(None, None, conf, None, None, True, candidates)
    symbol = _canonical(phi_opt, sign, flipped)
    return DecodeResult(symbol, symbol.theta, conf, phi_opt, best, False, candidates)


def scan_rows(symbol: PhaseSymbol, beam3: BeamState, beam2: BeamState, phi_steps: int) -> np.ndarray:
    """Noiseless (C, D, var_C, var_D) rows over the decode phi grid."""
    rows = []
    for p in phi_grid(phi_steps):
        ref = BeamState(beam2.amplitude, float(p), beam2.var_plus, beam2.var_minus)
        r = simulate_detection(symbol, beam3, ref)
        rows.append((r.combo_c, r.combo_d, r.noise_var_c, r.noise_var_d))
    return np.asarray(rows)


def write_scan_csv(symbol: PhaseSymbol, beam3: BeamState, beam2: BeamState, phis, path) -> None:
    with open(Path(path), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["phi_rad", "combo_a", "combo_b", "combo_c", "combo_d", "noise_var_c", "noise_var_d"])
        for p in phis:
            ref = BeamState(beam2.amplitude, float(p), beam2.var_plus, beam2.var_minus)
            r = simulate_detection(symbol, beam3, ref)
            writer.writerow(
                [repr(float(p))]
                + [repr(float(v)) for v in (r.combo_a, r.combo_b, r.combo_c, r.combo_d)]
                + [repr(r.noise_var_c), repr(r.noise_var_d)]
            )
