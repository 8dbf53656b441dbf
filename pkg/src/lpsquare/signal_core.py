"""Periodic torus model: grids, signals, spectra and L^p norms.

A grid of ``N`` samples covers the torus ``[0, L)``; sample ``j`` sits at
``x_j = j L / N`` and Fourier mode ``m`` has frequency ``m / L`` for
``m`` in ``[-N/2, N/2)``.  The transform pair is

    c_m  = (1/N) sum_j f(x_j) exp(-2 pi i m x_j / L)
    f(x_j) = sum_m c_m exp(+2 pi i m x_j / L)

so a pure mode has a unit coefficient.  Spectra are stored in centred
order: array position ``m + N/2`` holds ``c_m``.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

import numpy as np

Number = Union[int, float, Fraction, str]


@dataclass(frozen=True)
class Grid:
    samples: int = 4096
    period: int = 16

    def __post_init__(self):
        if self.samples <= 0 or self.samples % 2:
            raise ValueError(f"samples must be a positive even integer, got {self.samples}")
        if self.period < 1:
            raise ValueError(f"period must be a positive integer, got {self.period}")
        if self.samples < 2 * self.period:
            raise ValueError("grid needs N/(2L) >= 1 (at least a unit Nyquist band)")

    @property
    def spacing(self) -> float:
        return self.period / self.samples

    @property
    def nyquist(self) -> float:
        return self.samples / (2 * self.period)

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.samples) * self.spacing

    @property
    def modes(self) -> np.ndarray:
        """Integer mode numbers m in centred order."""
        return np.arange(-self.samples // 2, self.samples // 2)

    @property
    def frequencies(self) -> np.ndarray:
        return self.modes / self.period

    def position(self, m) -> np.ndarray:
        """Array position of mode(s) m in a centred spectrum."""
        return np.asarray(m) + self.samples // 2


@dataclass(frozen=True, eq=False)
class Signal:
    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=complex)
        if v.shape != (self.grid.samples,):
            raise ValueError(f"expected {self.grid.samples} samples, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("signal values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __add__(self, other: "Signal") -> "Signal":
        _same_grid(self, other)
        return Signal(self.grid, self.values + other.values)

    def __sub__(self, other: "Signal") -> "Signal":
        _same_grid(self, other)
        return Signal(self.grid, self.values - other.values)

    def __mul__(self, other):
        if isinstance(other, Signal):
            _same_grid(self, other)
            return Signal(self.grid, self.values * other.values)
        return Signal(self.grid, self.values * other)

    __rmul__ = __mul__

    def conj(self) -> "Signal":
        return Signal(self.grid, self.values.conj())

    def shift(self, k: int) -> "Signal":
        """Translate by k samples: result(x) = f(x - k*spacing)."""
        return Signal(self.grid, np.roll(self.values, k))

    @classmethod
    def zeros(cls, grid: Grid) -> "Signal":
        return cls(grid, np.zeros(grid.samples, dtype=complex))


@dataclass(frozen=True, eq=False)
class Spectrum:
    grid: Grid
    coefficients: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.ascontiguousarray(self.coefficients, dtype=complex)
        if c.shape != (self.grid.samples,):
            raise ValueError(f"expected {self.grid.samples} coefficients, got shape {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    def at(self, m) -> np.ndarray:
        return self.coefficients[self.grid.position(m)]

    def support(self) -> np.ndarray:
        """Modes with a nonzero coefficient."""
        return self.grid.modes[self.coefficients != 0]


def _same_grid(a, b):
    if a.grid != b.grid:
        raise ValueError(f"signals live on different grids: {a.grid} vs {b.grid}")


def forward_transform(f: Signal) -> Spectrum:
    # a signal synthesised from a spectrum keeps it, so projections compose bit-exactly
    known = getattr(f, "_spectrum", None)
    if known is not None:
        return known
    n = f.grid.samples
    return Spectrum(f.grid, np.fft.fftshift(np.fft.fft(f.values)) / n)


def inverse_transform(s: Spectrum) -> Signal:
    n = s.grid.samples
    out = Signal(s.grid, np.fft.ifft(np.fft.ifftshift(s.coefficients)) * n)
    object.__setattr__(out, "_spectrum", s)
    return out


def from_coefficients(grid: Grid, modes, coefficients) -> Signal:
    """Signal whose only nonzero Fourier coefficients sit at ``modes``."""
    c = np.zeros(grid.samples, dtype=complex)
    modes = np.asarray(modes, dtype=int)
    if modes.size and (modes.min() < -grid.samples // 2 or modes.max() >= grid.samples // 2):
        raise ValueError("mode outside the grid's band")
    c[grid.position(modes)] = coefficients
    return inverse_transform(Spectrum(grid, c))


def inner(f: Signal, g: Signal) -> complex:
    """L^2 inner product on the torus, conjugate-linear in g."""
    _same_grid(f, g)
    return complex(np.vdot(g.values, f.values) * f.grid.spacing)


def lp_norm(f: Signal, p: float) -> float:
    if not p > 0:
        raise ValueError(f"p must be positive, got {p}")
    a = np.abs(f.values)
    if np.isinf(p):
        return float(a.max())
    return float((f.grid.spacing * np.sum(a ** p)) ** (1.0 / p))


def lp_norm_seq(fs, p: float) -> float:
    """Mixed norm || (sum_n |f_n|^2)^{1/2} ||_p of a sequence of signals."""
    fs = list(fs)
    if not fs:
        raise ValueError("empty sequence")
    sq = np.sqrt(sum(np.abs(f.values) ** 2 for f in fs))
    return lp_norm(Signal(fs[0].grid, sq), p)


@dataclass(frozen=True)
class FreqInterval:
    """Half-open frequency interval [lower, upper) with rational endpoints."""

    lower: Fraction
    upper: Fraction

    def __post_init__(self):
        lo, hi = Fraction(self.lower), Fraction(self.upper)
        if not lo < hi:
            raise ValueError(f"empty interval [{lo}, {hi})")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def of(cls, lower: Number, upper: Number) -> "FreqInterval":
        return cls(Fraction(lower), Fraction(upper))

    def mode_range(self, grid_or_period) -> tuple[int, int]:
        """Half-open integer range [lo, hi) of modes m with m/L in the interval."""
        period = grid_or_period.period if isinstance(grid_or_period, Grid) else int(grid_or_period)
        lo, hi = self.lower * period, self.upper * period
        if lo.denominator != 1 or hi.denominator != 1:
            raise ValueError(f"interval [{self.lower}, {self.upper}) is not on the 1/{period} lattice")
        return int(lo), int(hi)

    def indicator(self, grid: Grid) -> np.ndarray:
        lo, hi = self.mode_range(grid)
        m = grid.modes
        return (m >= lo) & (m < hi)

    def intersects(self, other: "FreqInterval") -> bool:
        return self.lower < other.upper and other.lower < self.upper

    def __contains__(self, xi) -> bool:
        return self.lower <= xi < self.upper

    @property
    def length(self) -> Fraction:
        return self.upper - self.lower


def dirichlet_pair(grid: Grid, P: int) -> tuple[Signal, Signal]:
    """Pair (f, g) with unit spectra on [0, 2P) and [0, 1/2)."""
    if P < 1:
        raise ValueError("P must be a positive integer")
    if not 2 * P < grid.nyquist:
        raise ValueError(f"2P = {2 * P} must stay below N/(2L) = {grid.nyquist}")
    L = grid.period
    f = from_coefficients(grid, np.arange(0, 2 * P * L), 1.0)
    g = from_coefficients(grid, np.arange(0, L // 2 if L % 2 == 0 else (L + 1) // 2), 1.0)
    return f, g


def random_bandlimited(grid: Grid, rng: np.random.Generator, band: float | None = None) -> Signal:
    """Complex Gaussian spectrum on modes |m| < band*L (default: half-Nyquist)."""
    limit = grid.samples // 4 if band is None else int(round(band * grid.period))
    m = np.arange(-limit, limit)
    coef = (rng.standard_normal(m.size) + 1j * rng.standard_normal(m.size)) / np.sqrt(2 * m.size)
    return from_coefficients(grid, m, coef)


# serialization: JSON {"N", "L", "samples": [re0, im0, re1, im1, ...]}
# binary: b"LPSG" + uint32 N + uint32 L + float64 interleaved samples (little endian)

_MAGIC = b"LPSG"


def signal_to_json(f: Signal) -> str:
    inter = np.empty(2 * f.grid.samples)
    inter[0::2] = f.values.real
    inter[1::2] = f.values.imag
    return json.dumps({"N": f.grid.samples, "L": f.grid.period, "samples": inter.tolist()})


def signal_from_json(text: str) -> Signal:
    d = json.loads(text)
    inter = np.asarray(d["samples"], dtype=float)
    grid = Grid(int(d["N"]), int(d["L"]))
    if inter.size != 2 * grid.samples:
        raise ValueError("sample count does not match N")
    return Signal(grid, inter[0::2] + 1j * inter[1::2])


def signal_to_bytes(f: Signal) -> bytes:
    inter = np.empty(2 * f.grid.samples, dtype="<f8")
    inter[0::2] = f.values.real
    inter[1::2] = f.values.imag
    return _MAGIC + struct.pack("<II", f.grid.samples, f.grid.period) + inter.tobytes()


def signal_from_bytes(blob: bytes) -> Signal:
    if blob[:4] != _MAGIC:
        raise ValueError("not a signal container")
    n, period = struct.unpack("<II", blob[4:12])
    inter = np.frombuffer(blob[12:], dtype="<f8")
    if inter.size != 2 * n:
        raise ValueError("truncated signal container")
    return Signal(Grid(n, period), inter[0::2] + 1j * inter[1::2])
