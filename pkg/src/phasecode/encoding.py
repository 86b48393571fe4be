"""Phase symbols, optical-disc pits and the bit <-> track codec.

A stored symbol is one of four transverse profiles (+u0, -u0, +uf0, -uf0)
times a longitudinal phase factor exp(i*theta), theta in [0, pi).

Pit model
---------
The read-out beam picks up a round-trip phase ``4*pi*depth/wavelength``
from a pit of the given depth (depth in [0, wavelength/2], so the
round-trip phase spans [0, 2*pi]).  Reducing that phase modulo pi moves
a factor of -1 into the transverse sign.  The pit's shape and orientation
select the transverse profile:

    ========= =========== ==============
    shape     orientation profile
    ========= =========== ==============
    flat      +1          +u0
    flat      -1          -u0
    half-step +1          +uf0
    half-step -1          -uf0
    ========= =========== ==============

for depths below wavelength/4; deeper pits flip the sign once more.
A half-step pit has its x < 0 half a quarter-wave deeper than the x > 0
half (orientation +1) or the reverse (orientation -1).

Track file format
-----------------
Line-oriented UTF-8 text::

    # phasecode track v1
    wavelength <float>
    levels_per_theta <int>
    pit_count <int>
    bit_count <int>
    pad_bits <int>
    depth shape orientation
    <depth> <flat|half-step> <+1|-1>
    ...

Floats are written with ``repr`` so a read/write cycle is bit-exact.
Bits are packed big-endian, one pit at a time: the top two bits of each
pit's value select the transverse profile (index into ``Transform``),
the remaining bits the theta level.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ValidationError
from .modes import TransverseMode, make_flipped


class Transform(enum.IntEnum):
    PLUS_U0 = 0
    MINUS_U0 = 1
    PLUS_UF0 = 2
    MINUS_UF0 = 3

    @property
    def sign(self) -> int:
        return -1 if self in (Transform.MINUS_U0, Transform.MINUS_UF0) else 1

    @property
    def flipped(self) -> bool:
        return self in (Transform.PLUS_UF0, Transform.MINUS_UF0)

    @classmethod
    def from_parts(cls, flipped: bool, sign: int) -> "Transform":
        if flipped:
            return cls.PLUS_UF0 if sign > 0 else cls.MINUS_UF0
        return cls.PLUS_U0 if sign > 0 else cls.MINUS_U0


@dataclass(frozen=True)
class PhaseSymbol:
    transform: Transform
    theta: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.theta < math.pi:
            raise ValidationError(f"theta must lie in [0, pi), got {self.theta}")
        object.__setattr__(self, "transform", Transform(self.transform))


class PitShape(str, enum.Enum):
    FLAT = "flat"
    HALF_STEP = "half-step"


@dataclass(frozen=True)
class PitSpec:
    depth: float
    shape: PitShape = PitShape.FLAT
    orientation: int = 1
    wavelength: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "shape", PitShape(self.shape))
        if self.wavelength <= 0:
            raise ValidationError(f"wavelength must be positive, got {self.wavelength}")
        if not 0.0 <= self.depth <= 0.5 * self.wavelength:
            raise ValidationError(
                f"pit depth {self.depth} outside [0, wavelength/2] (wavelength={self.wavelength})"
            )
        if self.orientation not in (1, -1):
            raise ValidationError(f"orientation must be +1 or -1, got {self.orientation}")


@dataclass(frozen=True)
class LevelCode:
    levels_per_theta: int

    def __post_init__(self):
        if self.levels_per_theta < 1:
            raise ValidationError(f"levels_per_theta must be >= 1, got {self.levels_per_theta}")

    @property
    def total_levels(self) -> int:
        return 4 * self.levels_per_theta

    @property
    def bits_per_pit(self) -> int:
        n = self.levels_per_theta
        if n & (n - 1):
            raise ValidationError(f"levels_per_theta={n} is not a power of two")
        return 2 + n.bit_length() - 1

    def level_theta(self, index: int) -> float:
        """Centre of quantization cell ``index``."""
        return (index + 0.5) * math.pi / self.levels_per_theta

    def symbol(self, value: int) -> PhaseSymbol:
        transform, level = divmod(value, self.levels_per_theta)
        return PhaseSymbol(Transform(transform), self.level_theta(level))

    def value(self, symbol: PhaseSymbol) -> int:
        level = quantize_theta(symbol.theta, self.levels_per_theta)
        return int(symbol.transform) * self.levels_per_theta + level


def apply_transform(mode: TransverseMode, symbol: PhaseSymbol) -> np.ndarray:
    """Complex amplitude exp(i*theta) * (+-u0 or +-uf0) on the mode's grid."""
    if mode.flipped:
        raise ValidationError("apply_transform expects the unflipped read-out profile")
    profile = make_flipped(mode).amplitude if symbol.transform.flipped else mode.amplitude
    return symbol.transform.sign * np.exp(1j * symbol.theta) * profile


def round_trip_phase(depth: float, wavelength: float) -> float:
    return 4.0 * math.pi * depth / wavelength


def pit_to_symbol(pit: PitSpec) -> PhaseSymbol:
    phase = round_trip_phase(pit.depth, pit.wavelength)
    wraps = math.floor(phase / math.pi)
    theta = phase - wraps * math.pi
    if theta >= math.pi:  # rounding at the cell edge
        theta, wraps = 0.0, wraps + 1
    sign = pit.orientation * (-1) ** wraps
    return PhaseSymbol(Transform.from_parts(pit.shape is PitShape.HALF_STEP, sign), theta)


def symbol_to_pit(symbol: PhaseSymbol, wavelength: float = 1.0) -> PitSpec:
    """Shallowest pit (depth < wavelength/4) that reads back as ``symbol``."""
    depth = symbol.theta * wavelength / (4.0 * math.pi)
    shape = PitShape.HALF_STEP if symbol.transform.flipped else PitShape.FLAT
    return PitSpec(depth, shape, symbol.transform.sign, wavelength)


def quantize_theta(theta: float, levels_per_theta: int) -> int:
    if levels_per_theta < 1:
        raise ValidationError(f"levels_per_theta must be >= 1, got {levels_per_theta}")
    index = math.floor(theta * levels_per_theta / math.pi)
    return min(max(index, 0), levels_per_theta - 1)


@dataclass(frozen=True)
class Track:
    pits: tuple[PitSpec, ...]
    levels_per_theta: int
    wavelength: float
    bit_count: int
    pad_bits: int

    def __len__(self):
        return len(self.pits)

    @property
    def code(self) -> LevelCode:
        return LevelCode(self.levels_per_theta)

    def symbols(self) -> list[PhaseSymbol]:
        return [pit_to_symbol(p) for p in self.pits]


def _as_bits(bitstream: Iterable[int] | str | bytes) -> list[int]:
    if isinstance(bitstream, str):
        bits = [int(c) for c in bitstream if not c.isspace()]
    else:
        bits = [int(b) for b in bitstream]
    if any(b not in (0, 1) for b in bits):
        raise ValidationError("bitstream must contain only 0/1 values")
    return bits


def bits_to_track(bitstream, levels_per_theta: int, wavelength: float = 1.0) -> Track:
    """Pack bits into pits, zero-padding the final pit if needed."""
    code = LevelCode(levels_per_theta)
    width = code.bits_per_pit
    bits = _as_bits(bitstream)
    pad = (-len(bits)) % width
    padded = bits + [0] * pad
    pits = []
    for start in range(0, len(padded), width):
        value = 0
        for b in padded[start : start + width]:
            value = (value << 1) | b
        pits.append(symbol_to_pit(code.symbol(value), wavelength))
    return Track(tuple(pits), levels_per_theta, wavelength, len(bits), pad)


def symbols_to_bits(symbols: Sequence[PhaseSymbol], levels_per_theta: int) -> list[int]:
    code = LevelCode(levels_per_theta)
    width = code.bits_per_pit
    bits: list[int] = []
    for s in symbols:
        value = code.value(s)
        bits.extend((value >> k) & 1 for k in range(width - 1, -1, -1))
    return bits


def track_to_bits(track: Track) -> list[int]:
    bits = symbols_to_bits(track.symbols(), track.levels_per_theta)
    return bits[: track.bit_count]


_HEADER = "# phasecode track v1"


def write_track(track: Track, path) -> None:
    lines = [
        _HEADER,
        f"wavelength {track.wavelength!r}",
        f"levels_per_theta {track.levels_per_theta}",
        f"pit_count {len(track.pits)}",
        f"bit_count {track.bit_count}",
        f"pad_bits {track.pad_bits}",
        "depth shape orientation",
    ]
    lines += [f"{p.depth!r} {p.shape.value} {p.orientation:+d}" for p in track.pits]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_track(path) -> Track:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].strip() != _HEADER:
        raise ValidationError(f"{path}: missing track header {_HEADER!r}")
    header = {}
    for line in lines[1:6]:
        key, _, value = line.partition(" ")
        header[key] = value.strip()
    try:
        wavelength = float(header["wavelength"])
        levels = int(header["levels_per_theta"])
        count = int(header["pit_count"])
        bit_count = int(header["bit_count"])
        pad = int(header["pad_bits"])
    except (KeyError, ValueError) as exc:
        raise ValidationError(f"{path}: malformed track header ({exc})") from None
    records = [ln for ln in lines[7:] if ln.strip()]
    if len(records) != count:
        raise ValidationError(f"{path}: header says {count} pits, found {len(records)}")
    pits = []
    for ln in records:
        depth, shape, orientation = ln.split()
        pits.append(PitSpec(float(depth), PitShape(shape), int(orientation), wavelength))
    return Track(tuple(pits), levels, wavelength, bit_count, pad)
