"""Fixed-point sine/cosine unit: quarter-wave table plus Taylor correction.

The input is an angle immediate ``a`` (two's complement, ``frac_bits``
fractional bits) meaning ``a * pi``. Reading the same bits as an unsigned
phase, the top two bits select the quadrant and the remaining
``frac_bits - 1`` bits locate the point inside it. The high
``lut_addr_bits`` of that offset address a table of ``sin`` over the first
quadrant; the low bits form the residual ``h`` used in the expansion::

    sin(x0 + h) = sum_n sin^(n)(x0) * h^n / n!

The derivatives of sin at a node are the table entries for sin and cos of
that node (cos read from the mirrored address), so only one table is needed.
Cosine is sine of the reflected offset. Internal terms carry ``guard_bits``
extra fraction bits and are rounded once at the end.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath
import numpy as np

from .fxp import rne_shift

_STEP_EXTRA = 20


@dataclass(frozen=True)
class TrigConfig:
    frac_bits: int = 18
    lut_addr_bits: int = 8
    taylor_order: int = 2
    guard_bits: int = 8

    def __post_init__(self):
        if not 2 <= self.frac_bits <= 24:
            raise ValueError("trig unit supports 2..24 fractional bits")
        if not 0 <= self.lut_addr_bits <= self.frac_bits - 1:
            raise ValueError("lut_addr_bits must not exceed the in-quadrant offset width")
        if self.taylor_order < 0:
            raise ValueError("taylor_order must be >= 0")

    @property
    def offset_bits(self) -> int:
        return self.frac_bits - 1


def build_lut(addr_bits: int, frac_bits: int) -> np.ndarray:
    """``sin(pi/2 * k / 2**addr_bits)`` rounded RNE to ``frac_bits`` bits."""
    n = 1 << addr_bits
    out = np.empty(n, dtype=np.int64)
    with mpmath.workdps(50):
        for k in range(n):
            v = mpmath.sin(mpmath.pi / 2 * k / n) * (1 << frac_bits)
            fl = int(mpmath.floor(v))
            rem = v - fl
            if rem > 0.5 or (rem == 0.5 and fl & 1):
                fl += 1
            out[k] = fl
    return out


@dataclass(frozen=True)
class TrigUnit:
    config: TrigConfig = field(default_factory=TrigConfig)

    def __post_init__(self):
        cfg = self.config
        object.__setattr__(self, "lut", build_lut(cfg.lut_addr_bits, cfg.frac_bits))
        work = cfg.frac_bits + cfg.guard_bits
        # radians per residual LSB, scaled by 2**(work + _STEP_EXTRA)
        step = round(math.ldexp(math.pi / 2, work + _STEP_EXTRA - cfg.offset_bits))
        object.__setattr__(self, "_step", step)
        object.__setattr__(self, "_work", work)

    @property
    def one(self) -> int:
        return 1 << self.config.frac_bits

    def _quarter_sin(self, r):
        """sin(pi/2 * r / 2**offset_bits) for r in [0, 2**offset_bits], raw words."""
        cfg = self.config
        res_bits = cfg.offset_bits - cfg.lut_addr_bits
        n = 1 << cfg.lut_addr_bits
        r = np.asarray(r, dtype=np.int64)
        k = r >> res_bits
        d = r & ((1 << res_bits) - 1)
        top = k >= n
        kc = np.minimum(k, n - 1)
        s0 = self.lut[kc]
        # cos(x0) = sin(pi/2 - x0); the mirror of node 0 is the constant one
        mirror = n - kc
        c0 = np.where(mirror >= n, self.one, self.lut[np.minimum(mirror, n - 1)])
        derivs = (s0, c0, -s0, -c0)

        work = self._work
        h = rne_shift(d * self._step, _STEP_EXTRA)
        acc = s0 << work
        term = np.full_like(h, 1 << work)
        for order in range(1, cfg.taylor_order + 1):
            den = order << work
            term = (2 * term * h + den) // (2 * den)
            acc = acc + derivs[order % 4] * term
        out = rne_shift(acc, work)
        out = np.clip(out, 0, self.one)
        return np.where(top, self.one, out)

    def sincos_raw(self, a):
        """Raw (sin, cos) words for angle immediate(s) ``a``.

        Accepts a Python int or an integer array; returns the same shape.
        """
        cfg = self.config
        scalar = np.ndim(a) == 0
        a = np.asarray(a, dtype=np.int64)
        phase = a & ((1 << (cfg.frac_bits + 1)) - 1)
        quadrant = phase >> cfg.offset_bits
        r = phase & ((1 << cfg.offset_bits) - 1)
        full = 1 << cfg.offset_bits
        s = self._quarter_sin(r)
        c = self._quarter_sin(full - r)
        sin = np.select([quadrant == 0, quadrant == 1, quadrant == 2], [s, c, -s], -c)
        cos = np.select([quadrant == 0, quadrant == 1, quadrant == 2], [c, -s, -c], s)
        if scalar:
            return int(sin), int(cos)
        return sin, cos

    def sweep_errors(self) -> dict:
        """Exhaustive comparison against double-precision sin/cos over all immediates."""
        cfg = self.config
        a = np.arange(-(1 << cfg.frac_bits), 1 << cfg.frac_bits, dtype=np.int64)
        sin, cos = self.sincos_raw(a)
        theta = np.pi * np.ldexp(a.astype(np.float64), -cfg.frac_bits)
        lsb = 2.0 ** -cfg.frac_bits
        es = np.abs(sin * lsb - np.sin(theta))
        ec = np.abs(cos * lsb - np.cos(theta))
        norm = (sin * lsb) ** 2 + (cos * lsb) ** 2
        return {
            "count": int(a.size),
            "max_sin_error": float(es.max()),
            "max_cos_error": float(ec.max()),
            "mean_sin_error": float(es.mean()),
            "mean_cos_error": float(ec.mean()),
            "max_norm_deviation": float(np.abs(norm - 1.0).max()),
            "worst_sin_imm": int(a[es.argmax()]),
            "worst_cos_imm": int(a[ec.argmax()]),
        }


_DEFAULT_UNITS: dict[TrigConfig, TrigUnit] = {}


def trig_unit(config: TrigConfig | None = None) -> TrigUnit:
    """Shared read-only unit per configuration (tables are built once)."""
    config = config or TrigConfig()
    unit = _DEFAULT_UNITS.get(config)
    if unit is None:
        unit = _DEFAULT_UNITS[config] = TrigUnit(config)
    return unit
