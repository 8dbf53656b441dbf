"""Linear Fourier projections and linear Littlewood-Paley square functions."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy import integrate

from .signal_core import (
    FreqInterval,
    Grid,
    Signal,
    Spectrum,
    forward_transform,
    inverse_transform,
)

LEAK_TOL = 1e-10


@dataclass(frozen=True)
class SmoothBump:
    """Reproducible bump profile described by its Fourier transform.

    ``profile`` is one of

    * ``"gaussian"``: exp(-(xi - center)^2 / (2 width^2)); with
      ``vanishing`` the profile is multiplied by 1 - exp(-(xi/width)^2)
      so that it is exactly zero at the origin.
    * ``"cosine"``: flat top on [center - width/2, center + width/2]
      with raised-cosine edges of total length ``taper`` centred on the
      two endpoints.  ``taper -> 0`` tends to the indicator of the band,
      ``taper = width`` gives a cos^2 bump with compact support.
    * ``"smooth"``: exp(1 - 1/(1 - t^2)) with t = 2 (xi - center) / width,
      a C-infinity bump supported on [center - width/2, center + width/2].

    The bump is normalised to unit L^2 norm on the line.
    """

    profile: str = "cosine"
    center: float = 0.5
    width: float = 1.0
    taper: float = 1.0
    vanishing: bool = False

    def __post_init__(self):
        if self.profile not in ("gaussian", "cosine", "smooth"):
            raise ValueError(f"unknown bump profile {self.profile!r}")
        if self.width <= 0:
            raise ValueError("bump width must be positive")
        if self.profile == "cosine" and not 0 < self.taper <= self.width:
            raise ValueError("cosine taper must lie in (0, width]")
        if self.profile != "gaussian" and self.vanishing and self.support()[0] < 0:
            raise ValueError("vanishing compact bump must be supported in (0, inf)")
        object.__setattr__(self, "_scale", 1.0)
        norm2 = self._raw_l2_squared()
        object.__setattr__(self, "_scale", 1.0 / np.sqrt(norm2))

    def _raw(self, xi):
        xi = np.asarray(xi, dtype=float)
        if self.profile == "gaussian":
            out = np.exp(-((xi - self.center) ** 2) / (2 * self.width**2))
            if self.vanishing:
                out = out * -np.expm1(-((xi / self.width) ** 2))
            return out
        if self.profile == "smooth":
            t = 2 * (xi - self.center) / self.width
            inside = np.abs(t) < 1
            safe = np.where(inside, t, 0.0)
            return np.where(inside, np.exp(1 - 1 / (1 - safe**2)), 0.0)
        half, tau = self.width / 2, self.taper
        d = np.abs(xi - self.center) - half
        # d in [-tau/2, tau/2] is the cosine ramp; below is the flat top
        ramp = 0.5 * (1 - np.sin(np.pi * np.clip(d, -tau / 2, tau / 2) / tau))
        return np.where(d >= tau / 2, 0.0, ramp)

    def _raw_l2_squared(self) -> float:
        if self.profile == "cosine":
            lo = self.center - (self.width + self.taper) / 2
            hi = self.center + (self.width + self.taper) / 2
            pts = [self.center - (self.width - self.taper) / 2, self.center + (self.width - self.taper) / 2]
            val, _ = integrate.quad(lambda t: self._raw(t) ** 2, lo, hi, points=pts, limit=200, epsabs=1e-14, epsrel=1e-13)
            return val
        if self.profile == "smooth":
            lo, hi = self.support()
            val, _ = integrate.quad(lambda t: self._raw(t) ** 2, lo, hi, limit=200, epsabs=1e-14, epsrel=1e-13)
            return val
        span = 12 * self.width
        val, _ = integrate.quad(lambda t: self._raw(t) ** 2, self.center - span, self.center + span,
                                limit=400, epsabs=1e-14, epsrel=1e-13)
        return val

    def hat(self, xi) -> np.ndarray:
        """Fourier transform of the normalised bump at frequencies xi."""
        return self._scale * self._raw(xi)

    def support(self) -> tuple[float, float]:
        """Frequency interval outside which the bump is negligible (exactly zero for cosine)."""
        if self.profile == "cosine":
            r = (self.width + self.taper) / 2
        elif self.profile == "smooth":
            r = self.width / 2
        else:
            r = self.width * np.sqrt(2 * np.log(1e16))
        return self.center - r, self.center + r

    def on_grid(self, grid: Grid) -> Signal:
        """Periodisation of the bump onto the torus."""
        return inverse_transform(Spectrum(grid, self.hat(grid.frequencies) / grid.period))


def symbol_leakage(symbol, grid: Grid, oversample: int = 16) -> float:
    """Fraction of the symbol's L^2 mass sitting at or beyond the Nyquist frequency."""
    L = grid.period
    m = np.arange(-oversample * grid.samples // 2, oversample * grid.samples // 2)
    vals = np.abs(symbol(m / L)) ** 2
    total = vals.sum()
    if total == 0:
        return 0.0
    outside = (m < -grid.samples // 2) | (m >= grid.samples // 2)
    return float(vals[outside].sum() / total)


@dataclass
class IntervalFamily:
    intervals: list[FreqInterval]
    declared_disjoint: bool = False
    kappa: int = field(init=False, default=0)

    def __post_init__(self):
        if not self.intervals:
            raise ValueError("empty interval family")
        self.kappa = covering_constant(self.intervals)
        if self.declared_disjoint and self.kappa > 1:
            raise ValueError("family declared disjoint but intervals overlap")

    @classmethod
    def unit(cls, start: int, stop: int) -> "IntervalFamily":
        """Unit intervals [n, n+1) for start <= n < stop."""
        return cls([FreqInterval.of(n, n + 1) for n in range(start, stop)], declared_disjoint=True)

    def __len__(self):
        return len(self.intervals)

    def __iter__(self):
        return iter(self.intervals)


def covering_constant(intervals: Sequence[FreqInterval]) -> int:
    """Maximal pointwise overlap of the indicators of half-open intervals."""
    events = []
    for iv in intervals:
        events.append((iv.lower, 1))
        events.append((iv.upper, -1))
    # closing before opening at equal points: half-open intervals touch, never overlap
    events.sort(key=lambda e: (e[0], e[1]))
    depth = best = 0
    for _, step in events:
        depth += step
        best = max(best, depth)
    return best


def _check_lattice(I: FreqInterval, grid: Grid):
    I.mode_range(grid)


def project(f: Signal, I: FreqInterval) -> Signal:
    _check_lattice(I, f.grid)
    s = forward_transform(f)
    return inverse_transform(Spectrum(f.grid, np.where(I.indicator(f.grid), s.coefficients, 0)))


def project_many(f: Signal, intervals: Sequence[FreqInterval]) -> np.ndarray:
    """Rows are project(f, I) for each interval, computed with one batched inverse FFT."""
    grid = f.grid
    c = forward_transform(f).coefficients
    masks = np.stack([I.indicator(grid) for I in intervals])
    return _inverse_rows(masks * c, grid)


def _inverse_rows(coefs: np.ndarray, grid: Grid) -> np.ndarray:
    return np.fft.ifft(np.fft.ifftshift(coefs, axes=-1), axis=-1) * grid.samples


def dyadic_symbol(bump: SmoothBump, n: int):
    """Symbol of y -> 2^-n Psi(2^-n y) convolution: xi -> Psi^(2^n xi)."""
    return lambda xi: bump.hat(np.asarray(xi) * 2.0**n)


def modulation_symbol(bump: SmoothBump, n: int):
    """Symbol of y -> e^{2 pi i n y} Psi(y) convolution: xi -> Psi^(xi - n)."""
    return lambda xi: bump.hat(np.asarray(xi) - n)


def admissible_scales(bump: SmoothBump, grid: Grid, scales: Sequence[int]) -> tuple[list[int], list[int]]:
    """Split dyadic scales into (kept, skipped).

    A scale n is kept when 2^n is at least the grid spacing and the dilated
    symbol leaks at most ``LEAK_TOL`` of its mass past Nyquist.
    """
    kept, skipped = [], []
    for n in scales:
        ok = 2.0**n >= grid.spacing and symbol_leakage(dyadic_symbol(bump, n), grid) <= LEAK_TOL
        (kept if ok else skipped).append(n)
    return kept, skipped


def _pieces(f: Signal, family: dict) -> np.ndarray:
    grid = f.grid
    kind = family.get("type")
    if kind == "unit_intervals":
        fam = IntervalFamily.unit(int(family["from"]), int(family["to"]))
        return project_many(f, fam.intervals)
    if kind == "arbitrary":
        fam = family["family"]
        if not isinstance(fam, IntervalFamily):
            fam = IntervalFamily([FreqInterval.of(a, b) for a, b in fam])
        return project_many(f, fam.intervals)
    if kind in ("smooth_dilation", "smooth_modulation"):
        bump = family["bump"]
        indices = list(family["scales"] if kind == "smooth_dilation" else family["modulations"])
        if not indices:
            raise ValueError("empty family")
        make = dyadic_symbol if kind == "smooth_dilation" else modulation_symbol
        symbols = []
        for n in indices:
            sym = make(bump, n)
            leak = symbol_leakage(sym, grid)
            if leak > LEAK_TOL:
                raise ValueError(f"{kind} index {n} leaks {leak:.3g} of its mass past Nyquist")
            symbols.append(sym(grid.frequencies))
        c = forward_transform(f).coefficients
        return _inverse_rows(np.stack(symbols) * c, grid)
    raise ValueError(f"unknown family type {kind!r}")


def linear_square(f: Signal, family: dict) -> Signal:
    """Pointwise square function (sum_n |piece_n f|^2)^{1/2}.

    ``family`` is a descriptor dict, e.g. ``{"type": "unit_intervals",
    "from": -8, "to": 8}``, ``{"type": "arbitrary", "family": [(a, b), ...]}``,
    ``{"type": "smooth_dilation", "bump": SmoothBump(...), "scales": [...]}`` or
    ``{"type": "smooth_modulation", "bump": ..., "modulations": [...]}``.
    """
    pieces = _pieces(f, family)
    if pieces.shape[0] == 0:
        raise ValueError("empty family")
    return Signal(f.grid, np.sqrt(np.sum(np.abs(pieces) ** 2, axis=0)))


def full_band_units(grid: Grid) -> dict:
    """Unit-interval descriptor partitioning the whole band [-N/(2L), N/(2L))."""
    ny = grid.samples // (2 * grid.period)
    if Fraction(grid.samples, 2 * grid.period) != ny:
        raise ValueError("Nyquist frequency is not an integer; unit intervals cannot tile the band")
    return {"type": "unit_intervals", "from": -ny, "to": ny}
