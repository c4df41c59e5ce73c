"""Two's-complement fixed-point arithmetic with round-to-nearest-even.

Every amplitude component and every angle in the emulator lives in one of
these formats. Scalar values are :class:`Fx`; the emulator's datapath uses
the ``*_raw`` helpers, which accept either Python ints or numpy integer
arrays and perform the same bit-level operations.

Overflow saturates to the nearest bound and raises a flag instead of
wrapping.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class FxFormatError(ValueError):
    """Operands disagree on format, or a format is malformed."""


@dataclass(frozen=True)
class FxFormat:
    int_bits: int = 2
    frac_bits: int = 18

    def __post_init__(self):
        if self.int_bits < 1 or self.frac_bits < 0:
            raise FxFormatError(f"invalid format Q{self.int_bits}.{self.frac_bits}")
        if self.int_bits + self.frac_bits > 32:
            raise FxFormatError(
                f"Q{self.int_bits}.{self.frac_bits} is wider than 32 bits")

    @property
    def width(self) -> int:
        return self.int_bits + self.frac_bits

    @property
    def one(self) -> int:
        """Raw word of 1.0 (may itself be out of range for Q1.x)."""
        return 1 << self.frac_bits

    @property
    def raw_min(self) -> int:
        return -(1 << (self.width - 1))

    @property
    def raw_max(self) -> int:
        return (1 << (self.width - 1)) - 1

    @property
    def lsb(self) -> float:
        return 2.0 ** -self.frac_bits

    @property
    def min_value(self) -> float:
        return self.raw_min * self.lsb

    @property
    def max_value(self) -> float:
        return self.raw_max * self.lsb

    def __str__(self):
        return f"Q{self.int_bits}.{self.frac_bits}"


Q2_18 = FxFormat(2, 18)


def rne_shift(x, shift: int):
    """Arithmetic right shift of ``x`` by ``shift`` bits, rounding ties to even.

    Works on Python ints and numpy integer arrays alike.
    """
    if shift <= 0:
        return x << -shift
    q = x >> shift
    rem = x & ((1 << shift) - 1)
    half = 1 << (shift - 1)
    up = (rem > half) | ((rem == half) & ((q & 1) == 1))
    if isinstance(up, np.ndarray):
        return q + up.astype(q.dtype)
    return q + int(up)


def rne_real(x) -> int | np.ndarray:
    """Round a real (or array of reals) to the nearest integer, ties to even."""
    if isinstance(x, np.ndarray):
        return np.rint(x).astype(np.int64)
    return round(x)


def saturate_raw(raw, fmt: FxFormat):
    """Clamp raw words into ``fmt``. Returns ``(raw, saturated)``.

    For arrays ``saturated`` is a boolean mask.
    """
    if isinstance(raw, np.ndarray):
        clipped = np.clip(raw, fmt.raw_min, fmt.raw_max)
        return clipped, clipped != raw
    if raw > fmt.raw_max:
        return fmt.raw_max, True
    if raw < fmt.raw_min:
        return fmt.raw_min, True
    return raw, False


def encode_raw(x, fmt: FxFormat):
    """Quantize real value(s) to raw words. Returns ``(raw, saturated)``."""
    if isinstance(x, np.ndarray):
        scaled = np.ldexp(x.astype(np.float64), fmt.frac_bits)
        # clip first so values far out of range never overflow int64
        bound = float(1 << (fmt.width + 1))
        scaled = np.clip(scaled, -bound, bound)
        return saturate_raw(rne_real(scaled), fmt)
    x = float(x)
    if x != x:
        raise FxFormatError("cannot encode NaN")
    scaled = x * fmt.one
    if scaled > fmt.raw_max:
        return fmt.raw_max, True
    if scaled < fmt.raw_min:
        return fmt.raw_min, True
    return saturate_raw(rne_real(scaled), fmt)


def mul_raw(a, b, fmt: FxFormat):
    """Full double-width product, one RNE rounding, then saturation."""
    return saturate_raw(rne_shift(a * b, fmt.frac_bits), fmt)


def add_raw(a, b, fmt: FxFormat):
    return saturate_raw(a + b, fmt)


def sub_raw(a, b, fmt: FxFormat):
    return saturate_raw(a - b, fmt)


def neg_raw(a, fmt: FxFormat):
    return saturate_raw(-a, fmt)


@dataclass(frozen=True)
class Fx:
    """A fixed-point word.

    ``saturated`` is sticky: it is set on any value whose computation
    clipped somewhere along the way.
    """

    raw: int
    fmt: FxFormat = Q2_18
    saturated: bool = False

    def __post_init__(self):
        if not self.fmt.raw_min <= self.raw <= self.fmt.raw_max:
            raise FxFormatError(f"raw {self.raw} does not fit {self.fmt}")

    @property
    def value(self) -> float:
        return self.raw * self.fmt.lsb

    def __float__(self):
        return self.value

    def _check(self, other: Fx) -> None:
        if not isinstance(other, Fx):
            raise TypeError(f"expected Fx, got {type(other).__name__}")
        if other.fmt != self.fmt:
            raise FxFormatError(f"format mismatch: {self.fmt} vs {other.fmt}")

    def _make(self, raw_sat, *operands: Fx) -> Fx:
        raw, sat = raw_sat
        sticky = bool(sat) or any(op.saturated for op in operands)
        return Fx(int(raw), self.fmt, sticky)

    def __add__(self, other: Fx) -> Fx:
        self._check(other)
        return self._make(add_raw(self.raw, other.raw, self.fmt), self, other)

    def __sub__(self, other: Fx) -> Fx:
        self._check(other)
        return self._make(sub_raw(self.raw, other.raw, self.fmt), self, other)

    def __mul__(self, other: Fx) -> Fx:
        self._check(other)
        return self._make(mul_raw(self.raw, other.raw, self.fmt), self, other)

    def __neg__(self) -> Fx:
        return self._make(neg_raw(self.raw, self.fmt), self)


def encode(x: float, fmt: FxFormat = Q2_18) -> Fx:
    raw, sat = encode_raw(x, fmt)
    return Fx(int(raw), fmt, bool(sat))


def decode(a: Fx) -> float:
    return a.value


def mul_rne(a: Fx, b: Fx) -> Fx:
    return a * b


def add(a: Fx, b: Fx) -> Fx:
    return a + b


def sub(a: Fx, b: Fx) -> Fx:
    return a - b


def neg(a: Fx) -> Fx:
    return -a
