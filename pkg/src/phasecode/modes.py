"""One-dimensional transverse mode basis for split-detector read-out.

Amplitudes are real, sampled on a symmetric uniform grid in waist units.
The grid always has an even number of points so no sample lies on the
split-detector boundary at x = 0; half-line integrals then use the same
quadrature weights as the full-line integral, restricted by a mask.
On a half line this is the midpoint rule: spectrally accurate for
integrands smooth at x = 0, second order for those with a kink there
(products of one flipped and one unflipped mode of opposite parity).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import eval_hermite

from .errors import ValidationError

REGIONS = ("full", "x<0", "x>0")


@dataclass(frozen=True)
class SpatialGrid:
    """Symmetric uniform grid on [-x_max, x_max] with composite trapezoid weights."""

    x_max: float = 8.0
    n_points: int = 4096

    def __post_init__(self):
        if self.x_max <= 0:
            raise ValidationError(f"x_max must be positive, got {self.x_max}")
        if self.n_points < 4 or self.n_points % 2:
            raise ValidationError(
                f"n_points must be an even integer >= 4 (no sample at x=0), got {self.n_points}"
            )

    @property
    def x_min(self) -> float:
        return -self.x_max

    @property
    def spacing(self) -> float:
        return 2.0 * self.x_max / (self.n_points - 1)

    @property
    def x(self) -> np.ndarray:
        # built from offsets about the centre so x[::-1] == -x exactly
        return (np.arange(self.n_points) - 0.5 * (self.n_points - 1)) * self.spacing

    @property
    def weights(self) -> np.ndarray:
        w = np.full(self.n_points, self.spacing)
        w[0] = w[-1] = 0.5 * self.spacing
        return w

    def mask(self, region: str) -> np.ndarray:
        x = self.x
        if region == "full":
            return np.ones_like(x, dtype=bool)
        if region == "x<0":
            return x < 0
        if region == "x>0":
            return x > 0
        raise ValidationError(f"unknown region {region!r}; expected one of {REGIONS}")

    def integrate(self, values: np.ndarray, region: str = "full"):
        """Quadrature of sampled ``values`` over ``region`` (real or complex)."""
        values = np.asarray(values)
        w = np.where(self.mask(region), self.weights, 0.0)
        return np.sum(w * values, axis=-1)

    def refined(self) -> "SpatialGrid":
        """Same extent with twice the points (kept even)."""
        return SpatialGrid(self.x_max, 2 * self.n_points)


DEFAULT_GRID = SpatialGrid()


@dataclass(frozen=True)
class TransverseMode:
    order: int
    flipped: bool
    grid: SpatialGrid
    waist: float
    amplitude: np.ndarray = field(repr=False, compare=False)

    def __post_init__(self):
        self.amplitude.setflags(write=False)

    @property
    def label(self) -> str:
        return f"u_f{self.order}" if self.flipped else f"u_{self.order}"

    def norm(self) -> float:
        return float(self.grid.integrate(self.amplitude**2))

    def to_csv(self, path) -> None:
        with open(Path(path), "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["x_waists", "amplitude_per_sqrt_waist"])
            for xv, av in zip(self.grid.x, self.amplitude):
                writer.writerow([repr(float(xv)), repr(float(av))])


def _check_extent(grid: SpatialGrid, waist: float) -> None:
    if waist <= 0:
        raise ValidationError(f"waist must be positive, got {waist}")
    if grid.x_max < 5.0 * waist:
        raise ValidationError(
            f"grid half-width {grid.x_max} spans fewer than 5 waists (waist={waist})"
        )


def make_hermite_gauss(grid: SpatialGrid, waist: float, order: int) -> TransverseMode:
    """Normalized 1-D Hermite-Gauss amplitude u_n(x) sampled on ``grid``.

    Raises ValidationError if the sampled norm deviates from one by more
    than 1e-6 before renormalization (grid too narrow or too coarse).
    """
    if order < 0:
        raise ValidationError(f"mode order must be nonnegative, got {order}")
    _check_extent(grid, waist)
    x = grid.x
    norm = (2.0 / math.pi) ** 0.25 / math.sqrt(2.0**order * math.factorial(order) * waist)
    u = norm * eval_hermite(order, math.sqrt(2.0) * x / waist) * np.exp(-(x**2) / waist**2)
    defect = abs(grid.integrate(u**2) - 1.0)
    if defect > 1e-6:
        raise ValidationError(
            f"sampled u_{order} has normalization defect {defect:.3e} > 1e-6; "
            "widen or refine the grid"
        )
    u = u / math.sqrt(grid.integrate(u**2))
    return TransverseMode(order, False, grid, waist, u)


def make_tem00(grid: SpatialGrid = DEFAULT_GRID, waist: float = 1.0) -> TransverseMode:
    return make_hermite_gauss(grid, waist, 0)


def make_flipped(mode: TransverseMode) -> TransverseMode:
    """Apply a pi phase flip to the x < 0 half of ``mode``."""
    if mode.flipped:
        raise ValidationError(f"{mode.label} is already flipped")
    sign = np.where(mode.grid.x < 0, -1.0, 1.0)
    return TransverseMode(mode.order, True, mode.grid, mode.waist, sign * mode.amplitude)


def overlap(a: TransverseMode, b: TransverseMode, region: str = "full") -> float:
    if a.grid != b.grid:
        raise ValidationError("modes are sampled on different grids")
    return float(a.grid.integrate(a.amplitude * b.amplitude, region))
