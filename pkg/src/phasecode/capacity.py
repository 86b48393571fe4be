"""Photon-budget allocation between signal amplitude and squeezing.

Both beams are measured in their amplitude quadrature at the optimal
phase offset, so each beam enters the minimum detectable phase only via
``V+/amplitude^2``.  A squeezed beam is a pure state (V- = 1/V+).

Budget conventions
------------------
``photons_of_state`` is the mean photon number per bandwidth-time
``(alpha^2 + V+ + V- - 2) / 4``.  Two readings of a budget are supported:

``"quadrature"`` (default)
    ``n_bar_total`` counts ``alpha^2 + V+ + V- - 2`` summed over both
    beams, i.e. ``4 * sum(photons_of_state)``: the budget in shot-noise
    quadrature units.
``"photon"``
    ``n_bar_total == sum(photons_of_state)``.

Internally both reduce to a quadrature budget ``q`` shared as
``q = q_a + q_b`` with ``q_i = alpha_i^2 + V_i + 1/V_i - 2``.
For a squeezed beam with share ``x`` the best variance is ``V = 2/(x+2)``
which leaves ``alpha^2 = x(x+4)/(2(x+2))`` and ``V/alpha^2 = 4/(x(x+4))``.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import BelowThresholdError, ValidationError
from .noise import levels_from_delta

PHI_RATIO = 2.0 / (1.0 + math.sqrt(5.0))


class BudgetRegime(str, enum.Enum):
    BOTH_COHERENT = "both_coherent"
    ONE_SQUEEZED = "one_squeezed"
    BOTH_SQUEEZED = "both_squeezed"

    @property
    def squeezed(self) -> tuple[bool, bool]:
        return {
            BudgetRegime.BOTH_COHERENT: (False, False),
            BudgetRegime.ONE_SQUEEZED: (True, False),
            BudgetRegime.BOTH_SQUEEZED: (True, True),
        }[self]


# multiplier taking n_bar_total to the quadrature budget
CONVENTIONS = {"quadrature": 1.0, "photon": 4.0}


@dataclass(frozen=True)
class PhotonBudget:
    n_bar_total: float
    regime: BudgetRegime = BudgetRegime.BOTH_COHERENT
    convention: str = "quadrature"

    def __post_init__(self):
        object.__setattr__(self, "regime", BudgetRegime(self.regime))
        if not self.n_bar_total > 0:
            raise ValidationError(f"n_bar_total must be positive, got {self.n_bar_total}")
        if self.convention not in CONVENTIONS:
            raise ValidationError(f"unknown budget convention {self.convention!r}")

    @property
    def quadrature_budget(self) -> float:
        return CONVENTIONS[self.convention] * self.n_bar_total


@dataclass(frozen=True)
class SearchConfig:
    tol: float = 1e-12
    max_iter: int = 200
    split_bounds: tuple[float, float] = (1e-9, 1.0 - 1e-9)


@dataclass(frozen=True)
class BeamAllocation:
    alpha: float
    var_plus: float

    @property
    def var_minus(self) -> float:
        return 1.0 / self.var_plus

    @property
    def squeezing_db(self) -> float:
        return 10.0 * math.log10(self.var_plus)


@dataclass(frozen=True)
class CapacityResult:
    budget: PhotonBudget
    best_log2_levels: float
    delta_theta_min: float
    beam3: BeamAllocation
    beam2: BeamAllocation
    split: float
    coherent_log2_levels: float
    converged: bool = True
    extras: dict = field(default_factory=dict, compare=False)

    @property
    def improvement_vs_coherent(self) -> float:
        return self.best_log2_levels / self.coherent_log2_levels - 1.0

    @property
    def allocation(self) -> dict[str, float]:
        return {
            "alpha": self.beam3.alpha,
            "beta": self.beam2.alpha,
            "V_a_plus": self.beam3.var_plus,
            "V_a_minus": self.beam3.var_minus,
            "V_b_plus": self.beam2.var_plus,
            "V_b_minus": self.beam2.var_minus,
        }


def photons_of_state(alpha: float, v_plus: float, v_minus: float) -> float:
    if v_plus <= 0 or v_minus <= 0:
        raise ValidationError("quadrature variances must be positive")
    return 0.25 * (alpha**2 + v_plus + v_minus - 2.0)


def best_squeezing(share: float) -> float:
    """Amplitude-quadrature variance minimizing V/alpha^2 for a quadrature share."""
    return 2.0 / (share + 2.0)


def beam_allocation(share: float, squeezed: bool) -> BeamAllocation:
    if not squeezed:
        return BeamAllocation(math.sqrt(share), 1.0)
    v = best_squeezing(share)
    alpha2 = share - (v + 1.0 / v - 2.0)
    return BeamAllocation(math.sqrt(max(alpha2, 0.0)), v)


def noise_to_signal(share: float, squeezed: bool) -> float:
    if share <= 0:
        return math.inf
    return 4.0 / (share * (share + 4.0)) if squeezed else 1.0 / share


def asin_argument(split: float, q: float, regime: BudgetRegime) -> float:
    sa, sb = regime.squeezed
    return 0.25 * (noise_to_signal(split * q, sa) + noise_to_signal((1.0 - split) * q, sb))


def golden_section_min(f, lo: float, hi: float, tol: float = 1e-12, max_iter: int = 200):
    """Minimize a unimodal ``f`` on [lo, hi]; returns (x, f(x), converged)."""
    x1 = hi - PHI_RATIO * (hi - lo)
    x2 = lo + PHI_RATIO * (hi - lo)
    f1, f2 = f(x1), f(x2)
    it = 0
    while it < max_iter and hi - lo > tol:
        if f2 > f1:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - PHI_RATIO * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + PHI_RATIO * (hi - lo)
            f2 = f(x2)
        it += 1
    x = 0.5 * (lo + hi)
    return x, f(x), hi - lo <= tol


def _log2_levels(arg: float) -> float:
    return math.log2(levels_from_delta(math.asin(math.sqrt(arg))))


def _optimize_split(q: float, regime: BudgetRegime, cfg: SearchConfig):
    # the objective is a sum of convex decreasing terms in each share, so unimodal
    lo, hi = cfg.split_bounds
    return golden_section_min(lambda s: asin_argument(s, q, regime), lo, hi, cfg.tol, cfg.max_iter)


def optimize_capacity(budget: PhotonBudget, search_cfg: SearchConfig | None = None) -> CapacityResult:
    """Maximize log2 L_max over the photon split and per-beam squeezing.

    Raises BelowThresholdError when no allocation reaches SNR 1.
    """
    cfg = search_cfg or SearchConfig()
    if not 0.1 <= budget.n_bar_total <= 1e4:
        raise ValidationError(f"n_bar_total={budget.n_bar_total} outside [0.1, 1e4]")
    q = budget.quadrature_budget
    split, arg, converged = _optimize_split(q, budget.regime, cfg)
    if arg > 1.0:
        raise BelowThresholdError(
            f"budget n_bar={budget.n_bar_total} ({budget.regime.value}) cannot resolve one level"
        )
    sa, sb = budget.regime.squeezed
    coh_split, coh_arg, _ = _optimize_split(q, BudgetRegime.BOTH_COHERENT, cfg)
    coherent = _log2_levels(coh_arg) if coh_arg <= 1.0 else math.nan
    return CapacityResult(
        budget=budget,
        best_log2_levels=_log2_levels(arg),
        delta_theta_min=math.asin(math.sqrt(arg)),
        beam3=beam_allocation(split * q, sa),
        beam2=beam_allocation((1.0 - split) * q, sb),
        split=split,
        coherent_log2_levels=coherent,
        converged=converged,
    )


def budget_spent(result: CapacityResult) -> float:
    """Budget consumed by the allocation, in the budget's own convention."""
    total = sum(
        photons_of_state(b.alpha, b.var_plus, b.var_minus) for b in (result.beam3, result.beam2)
    )
    return total * 4.0 / CONVENTIONS[result.budget.convention]


def required_squeezing(budget: PhotonBudget, search_cfg: SearchConfig | None = None) -> tuple[float, float]:
    """Optimal amplitude-quadrature squeezing in dB for (beam 1, beam 2)."""
    res = optimize_capacity(budget, search_cfg)
    return res.beam3.squeezing_db, res.beam2.squeezing_db


def brute_force_capacity(budget: PhotonBudget, resolution: int = 200, db_range=(-40.0, 0.0)):
    """Exhaustive grid over (split, V+ of beam 1, V+ of beam 2).

    Coherent beams keep V+ = 1, so their axis collapses.  Returns
    ``(best_log2_levels, (split, dB_a, dB_b))``; ``-inf`` if nothing resolves.
    """
    q = budget.quadrature_budget
    sa, sb = budget.regime.squeezed
    # interior points k/resolution include the symmetric split 1/2
    splits = np.arange(1, resolution) / resolution
    dbs = np.linspace(db_range[0], db_range[1], resolution)
    va = 10.0 ** (dbs / 10.0) if sa else np.array([1.0])
    vb = 10.0 ** (dbs / 10.0) if sb else np.array([1.0])
    cost_a = va + 1.0 / va - 2.0
    cost_b = vb + 1.0 / vb - 2.0
    best, where = -math.inf, None
    for s in splits:
        a2 = s * q - cost_a[:, None]
        b2 = (1.0 - s) * q - cost_b[None, :]
        ok = (a2 > 0) & (b2 > 0)
        with np.errstate(divide="ignore", invalid="ignore"):
            arg = 0.25 * (va[:, None] / a2 + vb[None, :] / b2)
        arg = np.where(ok, arg, np.inf)
        i, j = np.unravel_index(np.argmin(arg), arg.shape)
        if arg[i, j] <= 1.0:
            value = _log2_levels(float(arg[i, j]))
            if value > best:
                best = value
                where = (float(s), 10 * math.log10(va[i]), 10 * math.log10(vb[j]))
    return best, where


SWEEP_COLUMNS = ("n_bar", "regime", "log2_lmax", "alpha", "beta", "squeezing_dB_beam1", "squeezing_dB_beam2")


def sweep(n_bars, regimes=tuple(BudgetRegime), convention: str = "quadrature", search_cfg=None):
    rows = []
    for n in n_bars:
        for regime in regimes:
            try:
                r = optimize_capacity(PhotonBudget(float(n), regime, convention), search_cfg)
            except BelowThresholdError:
                rows.append((float(n), BudgetRegime(regime).value, math.nan, math.nan, math.nan, math.nan, math.nan))
                continue
            rows.append(
                (
                    float(n),
                    r.budget.regime.value,
                    r.best_log2_levels,
                    r.beam3.alpha,
                    r.beam2.alpha,
                    r.beam3.squeezing_db,
                    r.beam2.squeezing_db,
                )
            )
    return rows


def write_sweep_csv(rows, path) -> None:
    with open(Path(path), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SWEEP_COLUMNS)
        for row in rows:
            writer.writerow([row[0] if isinstance(row[0], str) else repr(row[0]), row[1]] + [repr(float(v)) for v in row[2:]])
