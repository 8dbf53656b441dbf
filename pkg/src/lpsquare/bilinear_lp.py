"""Bilinear frequency-restriction multipliers and bilinear square functions.

Orientation.  ``bilinear_project(f, g, I)`` keeps the frequency pairs
(xi1, xi2) with ``xi1 - xi2`` in I.  In physical space this is

    pi_I(f, g)(x) = int f(x - t) g(x + t) phi_I(t) dt,   phi_I^ = 1_I,

which is the reading under which the counterexample pair (spectra on
[0, 2P) and [0, 1/2)) activates every unit strip [n, n+1), n = 0..P.

Normalisation.  Output Fourier coefficients are the restricted discrete
convolution ``sum c_f(m1) c_g(m2)``, so a symbol equal to one returns f*g
exactly.  Reading unit input coefficients as continuum spectral
densities, the continuum density of the output is that sum times 1/L
(one lattice step), see :func:`continuum_density`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Sequence

import numpy as np

from .linear_lp import LEAK_TOL, SmoothBump, dyadic_symbol, modulation_symbol, symbol_leakage
from .signal_core import FreqInterval, Grid, Signal, Spectrum, forward_transform

ROW_BLOCK = 256


class AliasingError(ValueError):
    """Input spectra too wide: sums or differences of modes would wrap around."""


@dataclass(frozen=True)
class StripFamily:
    """Equispaced strips [a_n, b_n) with a_n = a0 + n*(width + gap)."""

    a0: Fraction
    width: Fraction
    gap: Fraction
    n_min: int
    n_max: int

    def __post_init__(self):
        for name in ("a0", "width", "gap"):
            object.__setattr__(self, name, Fraction(getattr(self, name)))
        if self.width <= 0:
            raise ValueError("strip width must be positive")
        if self.gap < 0:
            raise ValueError("strip gap must be non-negative")
        if self.n_max < self.n_min:
            raise ValueError("empty strip index range")

    @classmethod
    def unit(cls, n_min: int, n_max: int) -> "StripFamily":
        return cls(Fraction(0), Fraction(1), Fraction(0), n_min, n_max)

    @classmethod
    def from_intervals(cls, intervals: Sequence[tuple], n_min: int = 0) -> "StripFamily":
        """Build from explicit [a_n, b_n) pairs; rejects non-equispaced ladders."""
        iv = [FreqInterval.of(a, b) for a, b in intervals]
        if not iv:
            raise ValueError("empty strip family")
        width = iv[0].length
        gaps = {iv[k + 1].lower - iv[k].upper for k in range(len(iv) - 1)}
        if any(i.length != width for i in iv) or len(gaps) > 1:
            raise ValueError("strips are not equispaced")
        gap = gaps.pop() if gaps else Fraction(0)
        a0 = iv[0].lower - n_min * (width + gap)
        return cls(a0, width, gap, n_min, n_min + len(iv) - 1)

    @property
    def period(self) -> Fraction:
        return self.width + self.gap

    @property
    def kappa(self) -> Fraction:
        """Largest dilation factor keeping the dilated strips pairwise disjoint."""
        return self.period / self.width

    @property
    def indices(self) -> range:
        return range(self.n_min, self.n_max + 1)

    def __len__(self):
        return self.n_max - self.n_min + 1

    def interval(self, n: int) -> FreqInterval:
        a = self.a0 + n * self.period
        return FreqInterval(a, a + self.width)

    def intervals(self) -> list[FreqInterval]:
        return [self.interval(n) for n in self.indices]

    def to_dict(self) -> dict:
        return {"a0": str(self.a0), "width": str(self.width), "gap": str(self.gap),
                "n_min": self.n_min, "n_max": self.n_max}

    @classmethod
    def from_dict(cls, d: dict) -> "StripFamily":
        return cls(Fraction(d["a0"]), Fraction(d["width"]), Fraction(d.get("gap", 0)),
                   int(d["n_min"]), int(d["n_max"]))


def covering_strips(grid: Grid, width=1, gap=0, a0=0) -> StripFamily:
    """Smallest equispaced family whose strips cover every attainable difference xi1 - xi2."""
    width, gap, a0 = Fraction(width), Fraction(gap), Fraction(a0)
    period = width + gap
    half = Fraction(grid.samples, 2 * grid.period)
    n_min = int(np.floor((-half - a0) / period))
    n_max = int(np.ceil((half - a0) / period))
    return StripFamily(a0, width, gap, n_min, n_max)


# ---------------------------------------------------------------------------
# shared plumbing


def _supports(f: Signal, g: Signal):
    if f.grid != g.grid:
        raise ValueError(f"signals live on different grids: {f.grid} vs {g.grid}")
    grid = f.grid
    cf = forward_transform(f).coefficients
    cg = forward_transform(g).coefficients
    tol_f = 1e-13 * max(np.abs(cf).max(), 1e-300)
    tol_g = 1e-13 * max(np.abs(cg).max(), 1e-300)
    kf = np.abs(cf) > tol_f
    kg = np.abs(cg) > tol_g
    mf, mg = grid.modes[kf], grid.modes[kg]
    if mf.size and mg.size:
        half = grid.samples // 2
        lo_s, hi_s = mf.min() + mg.min(), mf.max() + mg.max()
        lo_d, hi_d = mf.min() - mg.max(), mf.max() - mg.min()
        if lo_s < -half or hi_s >= half or lo_d <= -half or hi_d > half:
            raise AliasingError(
                f"product band exceeds Nyquist: mode sums span [{lo_s}, {hi_s}], "
                f"differences [{lo_d}, {hi_d}], grid allows [{-half}, {half})")
    return grid, mf, cf[kf], mg, cg[kg]


def _pair_blocks(mf, cf, mg, cg, block=512):
    for start in range(0, mf.size, block):
        m1 = mf[start:start + block, None]
        yield m1 + mg[None, :], m1 - mg[None, :], cf[start:start + block, None] * cg[None, :]


def _accumulate(grid: Grid, sums, weights, out):
    pos = (sums + grid.samples // 2).ravel()
    w = weights.ravel()
    out += np.bincount(pos, weights=w.real, minlength=grid.samples)
    out += 1j * np.bincount(pos, weights=w.imag, minlength=grid.samples)


def _to_signal(grid: Grid, coef: np.ndarray) -> Signal:
    from .signal_core import inverse_transform

    return inverse_transform(Spectrum(grid, coef))


def _rows_to_signals(grid: Grid, coefs: np.ndarray) -> np.ndarray:
    return np.fft.ifft(np.fft.ifftshift(coefs, axes=-1), axis=-1) * grid.samples


def continuum_density(s: Spectrum) -> np.ndarray:
    """Output coefficients scaled by the lattice step 1/L."""
    return s.coefficients / s.grid.period


# ---------------------------------------------------------------------------
# slow oracles: direct double sums over frequency pairs


def _oracle_spectra(f: Signal, g: Signal, intervals: Sequence[FreqInterval], dense: bool = True) -> np.ndarray:
    """Output spectra by summing c_f(m1) c_g(m2) over lattice pairs.

    ``dense`` visits all N^2 pairs for every interval (the literal definition);
    otherwise only pairs of nonzero coefficients are visited.
    """
    grid, mf, cf, mg, cg = _supports(f, g)
    if dense:
        mf = mg = grid.modes
        cf = forward_transform(f).coefficients
        cg = forward_transform(g).coefficients
    n = grid.samples
    out = np.zeros((len(intervals), n), dtype=complex)
    ranges = [I.mode_range(grid) for I in intervals]
    for sums, diffs, w in _pair_blocks(mf, cf, mg, cg):
        # sums outside the band only carry zero weight once aliasing is excluded
        sums = (sums + n // 2) % n - n // 2
        for row, (lo, hi) in enumerate(ranges):
            if dense:
                _accumulate(grid, sums, w * ((diffs >= lo) & (diffs < hi)), out[row])
                continue
            sel = (diffs >= lo) & (diffs < hi)
            if sel.any():
                _accumulate(grid, sums[sel], w[sel], out[row])
    return out


# ---------------------------------------------------------------------------
# fast path: one FFT per sample of t -> f(x - t) g(x + t)


def _fast_rows(f: Signal, g: Signal):
    """Yield (row slice, W) with W[j, u + N/2] the t-Fourier coefficient u of f(x_j - t) g(x_j + t)."""
    n = f.grid.samples
    # row j of f(x_j - t_k) is a window of the reversed, doubled samples; likewise g(x_j + t_k)
    f_rev = np.concatenate([f.values[::-1], f.values[::-1]])
    g_dbl = np.concatenate([g.values, g.values])
    fw = np.lib.stride_tricks.sliding_window_view(f_rev, n)
    gw = np.lib.stride_tricks.sliding_window_view(g_dbl, n)
    for start in range(0, n, ROW_BLOCK):
        stop = min(start + ROW_BLOCK, n)
        j = np.arange(start, stop)
        # f_rev[n - 1 - j + k] = f[(j - k) mod n]
        w = fw[n - 1 - j] * gw[start:stop]
        yield slice(start, stop), np.fft.fftshift(np.fft.fft(w, axis=1), axes=1) / n


def _fast_values(f: Signal, g: Signal, intervals: Sequence[FreqInterval]) -> np.ndarray:
    grid, *_ = _supports(f, g)
    n = grid.samples
    half = n // 2
    # d = xi1 - xi2 = -u in modes; d in [lo, hi) <=> u in [1 - hi, 1 - lo)
    lo_pos, hi_pos = [], []
    for I in intervals:
        lo, hi = I.mode_range(grid)
        lo_pos.append(np.clip(1 - hi + half, 0, n))
        hi_pos.append(np.clip(1 - lo + half, 0, n))
    lo_pos, hi_pos = np.array(lo_pos), np.array(hi_pos)
    out = np.empty((len(intervals), n), dtype=complex)
    for rows, W in _fast_rows(f, g):
        cs = np.zeros((W.shape[0], n + 1), dtype=complex)
        np.cumsum(W, axis=1, out=cs[:, 1:])
        out[:, rows] = (cs[:, hi_pos] - cs[:, lo_pos]).T
    return out


# ---------------------------------------------------------------------------
# public operations


def bilinear_project(f: Signal, g: Signal, I: FreqInterval, mode: str = "oracle") -> Signal:
    """pi_I(f, g); ``mode`` is "oracle" (dense double sum), "sparse" (double sum
    over nonzero coefficients) or "fast" (row transforms)."""
    if mode in ("oracle", "sparse"):
        return _to_signal(f.grid, _oracle_spectra(f, g, [I], dense=mode == "oracle")[0])
    if mode == "fast":
        return Signal(f.grid, _fast_values(f, g, [I])[0])
    raise ValueError(f"unknown mode {mode!r}")


def strip_apply(f: Signal, g: Signal, strips: StripFamily, mode: str = "fast") -> list[Signal]:
    intervals = strips.intervals()
    if mode in ("oracle", "sparse"):
        vals = _rows_to_signals(f.grid, _oracle_spectra(f, g, intervals, dense=mode == "oracle"))
    elif mode == "fast":
        vals = _fast_values(f, g, intervals)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return [Signal(f.grid, v) for v in vals]


def _square(grid: Grid, rows: np.ndarray) -> Signal:
    acc = np.zeros(grid.samples)
    for r in rows:  # fixed-order reduction
        acc += np.abs(r) ** 2
    return Signal(grid, np.sqrt(acc))


def bilinear_square(f: Signal, g: Signal, strips: StripFamily, mode: str = "fast") -> Signal:
    return _square(f.grid, np.stack([s.values for s in strip_apply(f, g, strips, mode)]))


def bilinear_square_seq(f_seq: Sequence[Signal], g, strips: StripFamily, mode: str = "oracle") -> Signal:
    """(sum_n |pi_{I_n}(f_n, g_n)|^2)^{1/2}; ``g`` is one signal or a sequence."""
    f_seq = list(f_seq)
    g_seq = [g] * len(f_seq) if isinstance(g, Signal) else list(g)
    if len(f_seq) != len(strips) or len(g_seq) != len(strips):
        raise ValueError(f"sequence lengths {len(f_seq)}, {len(g_seq)} do not match {len(strips)} strips")
    grid = f_seq[0].grid
    rows = np.zeros((len(strips), grid.samples), dtype=complex)
    for k, (fn, gn, I) in enumerate(zip(f_seq, g_seq, strips.intervals())):
        if not np.any(fn.values) or not np.any(gn.values):
            continue
        rows[k] = bilinear_project(fn, gn, I, mode).values
    return _square(grid, rows)


def _smooth_symbols(family: dict, grid: Grid):
    bump: SmoothBump = family["bump"]
    kind = family.get("type")
    if kind == "modulation":
        idx, make = list(family["modulations"]), modulation_symbol
    elif kind == "dilation":
        idx, make = list(family["scales"]), dyadic_symbol
    else:
        raise ValueError(f"unknown smooth family {kind!r}")
    if not idx:
        raise ValueError("empty family")
    syms = []
    for n in idx:
        sym = make(bump, n)
        leak = symbol_leakage(sym, grid)
        if leak > LEAK_TOL:
            raise ValueError(f"{kind} index {n} leaks {leak:.3g} of its mass past Nyquist")
        syms.append(sym)
    return syms


def smooth_bilinear_pieces(f: Signal, g: Signal, family: dict, form: str = "physical") -> np.ndarray:
    """Rows int f(x - y) g(x + y) kernel_n(y) dy for each member of the family.

    ``form="physical"`` integrates against the periodised kernels on the grid;
    ``form="frequency"`` sums the symbol over frequency pairs directly.
    """
    grid = f.grid
    syms = _smooth_symbols(family, grid)
    if form == "frequency":
        _, mf, cf, mg, cg = _supports(f, g)
        out = np.zeros((len(syms), grid.samples), dtype=complex)
        for sums, diffs, w in _pair_blocks(mf, cf, mg, cg):
            for row, sym in enumerate(syms):
                _accumulate(grid, sums, w * sym(diffs / grid.period), out[row])
        return _rows_to_signals(grid, out)
    if form == "physical":
        _supports(f, g)
        # kernel_n has Fourier coefficients sym_n(m/L)/L on the torus
        kern = _rows_to_signals(grid, np.stack([s(grid.frequencies) for s in syms]) / grid.period)
        out = np.empty((len(syms), grid.samples), dtype=complex)
        n = grid.samples
        k = np.arange(n)
        for start in range(0, n, ROW_BLOCK):
            j = np.arange(start, min(start + ROW_BLOCK, n))[:, None]
            w = f.values[(j - k) % n] * g.values[(j + k) % n]
            out[:, start:start + j.shape[0]] = (w @ kern.T).T * grid.spacing
        return out
    raise ValueError(f"unknown form {form!r}")


def smooth_bilinear_square(f: Signal, g: Signal, family: dict, form: str = "physical") -> Signal:
    return _square(f.grid, smooth_bilinear_pieces(f, g, family, form))


# ---------------------------------------------------------------------------
# parallelograms


@dataclass(frozen=True)
class Ladder:
    """Equispaced intervals [start + n*period, start + n*period + width), n_min <= n <= n_max."""

    start: Fraction
    width: Fraction
    period: Fraction
    n_min: int
    n_max: int

    def __post_init__(self):
        for name in ("start", "width", "period"):
            object.__setattr__(self, name, Fraction(getattr(self, name)))
        if not 0 < self.width <= self.period:
            raise ValueError("ladder needs 0 < width <= period")
        if self.n_max < self.n_min:
            raise ValueError("empty ladder")

    def to_dict(self) -> dict:
        return {"start": str(self.start), "width": str(self.width), "period": str(self.period),
                "n_min": self.n_min, "n_max": self.n_max}


@dataclass(frozen=True)
class ParallelogramFamily:
    """Cells C_{n,p}: a_n <= xi2 - tan1*xi1 < b_n and c_p <= xi2 - tan2*xi1 < d_p.

    Slopes are exact rationals so lattice membership never flickers.
    """

    tan1: Fraction
    tan2: Fraction
    first: Ladder
    second: Ladder

    def __post_init__(self):
        t1, t2 = Fraction(self.tan1), Fraction(self.tan2)
        object.__setattr__(self, "tan1", t1)
        object.__setattr__(self, "tan2", t2)
        for t in (t1, t2):
            if t == 0 or t == -1:
                raise ValueError(f"degenerate angle: tan(theta) = {t} (theta = 0 or -pi/4)")
        if t1 == t2:
            raise ValueError("the two angles must differ")

    @property
    def angles(self) -> tuple[float, float]:
        return float(np.arctan(float(self.tan1))), float(np.arctan(float(self.tan2)))

    def cells(self) -> list[tuple[int, int]]:
        return [(n, p) for n in range(self.first.n_min, self.first.n_max + 1)
                for p in range(self.second.n_min, self.second.n_max + 1)]

    def membership(self, m1: np.ndarray, m2: np.ndarray, period: int):
        """Cell indices (n, p) of lattice pairs, or -1 where a pair lies in no cell."""
        n = _ladder_index(m1, m2, self.tan1, self.first, period)
        p = _ladder_index(m1, m2, self.tan2, self.second, period)
        ok = (n >= 0) & (p >= 0)
        return np.where(ok, n, -1), np.where(ok, p, -1)


def _ladder_index(m1, m2, tan: Fraction, ladder: Ladder, period: int) -> np.ndarray:
    # u = xi2 - tan*xi1 = (q m2 - p m1) / (q L) with tan = p/q, all exact in integers
    p, q = tan.numerator, tan.denominator
    U = q * m2.astype(np.int64) - p * m1.astype(np.int64)
    scale = q * period
    start, width, per = ladder.start * scale, ladder.width * scale, ladder.period * scale
    den = lcm(start.denominator, width.denominator, per.denominator)
    X = U * den - int(start * den)
    P = int(per * den)
    n = np.floor_divide(X, P)
    r = X - n * P
    inside = (r < int(width * den)) & (n >= ladder.n_min) & (n <= ladder.n_max)
    return np.where(inside, n - ladder.n_min, -1)


def parallelogram_pieces(f: Signal, g: Signal, fam: ParallelogramFamily) -> tuple[list[tuple[int, int]], np.ndarray]:
    """Outputs pi_{C_{n,p}}(f, g) for every cell hit by the inputs' spectra (direct double sum)."""
    grid, mf, cf, mg, cg = _supports(f, g)
    n_cols = fam.second.n_max - fam.second.n_min + 1
    acc: dict[int, np.ndarray] = {}
    for start in range(0, mf.size, 512):
        m1 = np.broadcast_to(mf[start:start + 512, None], (min(512, mf.size - start), mg.size))
        m2 = np.broadcast_to(mg[None, :], m1.shape)
        n, p = fam.membership(m1, m2, grid.period)
        w = cf[start:start + 512, None] * cg[None, :]
        sums = m1 + m2
        ok = n >= 0
        key = (n * n_cols + p)[ok]
        for cell in np.unique(key):
            sel = key == cell
            row = acc.setdefault(int(cell), np.zeros(grid.samples, dtype=complex))
            _accumulate(grid, sums[ok][sel], w[ok][sel], row)
    keys = sorted(acc)
    cells = [(k // n_cols + fam.first.n_min, k % n_cols + fam.second.n_min) for k in keys]
    if not keys:
        return cells, np.zeros((0, grid.samples), dtype=complex)
    return cells, _rows_to_signals(grid, np.stack([acc[k] for k in keys]))


def parallelogram_square(f: Signal, g: Signal, fam: ParallelogramFamily) -> Signal:
    _, rows = parallelogram_pieces(f, g, fam)
    if rows.shape[0] == 0:
        return Signal.zeros(f.grid)
    return _square(f.grid, rows)
