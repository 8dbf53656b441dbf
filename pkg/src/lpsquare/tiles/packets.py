"""Wave packets on tiles and their inner products with data.

A packet on the tile I x omega is built in frequency: its coefficients are
a bump supported in the central 9/10 of omega, modulated so that the
packet is centred on c(I), and scaled to unit L^2 norm on the torus.
"""

from __future__ import annotations

from typing import Mapping

import numpy as np

from ..linear_lp import SmoothBump
from ..signal_core import Grid, Signal, Spectrum, forward_transform, from_coefficients, inverse_transform
from .geometry import Collection, Tile

CORE = 0.9
DEFAULT_BUMP = SmoothBump("smooth", center=0.0, width=CORE)
DECAY_ORDER = 4
# largest decay_ratio of the default bump over widths 4..256 modes on L = 8 is 46.3 (width 32)
DECAY_CONSTANT = 50.0


def _check_bump(bump: SmoothBump):
    lo, hi = bump.support()
    if bump.profile == "gaussian" or lo < -CORE / 2 - 1e-12 or hi > CORE / 2 + 1e-12:
        raise ValueError("packet bump must be compactly supported in [-0.45, 0.45]")


def _coefficients(period: int, w: np.ndarray, pos: np.ndarray, lo: np.ndarray, bump: SmoothBump):
    """Mode matrix and unit-norm packet coefficients for tiles sharing one width."""
    width = int(w[0])
    modes = lo[:, None] + np.arange(width)[None, :]
    u = (modes - (lo[:, None] + width / 2)) / width
    amp = bump.hat(u)
    norm = np.sqrt(period * np.sum(amp**2, axis=1))
    if np.any(norm == 0):
        raise ValueError(f"tiles of width {width} modes are finer than the lattice: no mode in their core")
    centre = (pos[:, None] + 0.5) * period / width
    coef = amp / norm[:, None] * np.exp(-2j * np.pi * modes / period * centre)
    return modes, coef


def wave_packet(tile: Tile, grid: Grid, bump: SmoothBump = DEFAULT_BUMP) -> Signal:
    """Unit-norm packet with spectrum inside the central 9/10 of omega, centred on c(I)."""
    _check_bump(bump)
    if tile.period != grid.period:
        raise ValueError("tile and grid disagree on the torus period")
    if tile.width < 2:
        raise ValueError("tile is finer than the frequency lattice")
    if tile.lo < -grid.samples // 2 or tile.hi > grid.samples // 2:
        raise ValueError("tile frequencies exceed the grid band")
    modes, coef = _coefficients(grid.period, np.array([tile.width]), np.array([tile.pos]), np.array([tile.lo]), bump)
    c = np.zeros(grid.samples, dtype=complex)
    c[grid.position(modes[0])] = coef[0]
    return inverse_transform(Spectrum(grid, c))


def decay_ratio(packet: Signal, tile: Tile, M: int = DECAY_ORDER) -> float:
    """max_x |packet(x)| |I|^(1/2) (1 + d(x, c(I)) / |I|)^M with d the torus distance."""
    L = packet.grid.period
    length = float(tile.length)
    d = np.abs(packet.grid.x - tile.center())
    d = np.minimum(d, L - d)
    env = length**-0.5 * (1 + d / length) ** (-M)
    return float(np.max(np.abs(packet.values) / env))


def _data_coefficients(coll: Collection, data) -> tuple[np.ndarray, np.ndarray | None]:
    """Centred spectra of the data: one row, or one row per strip of the collection."""
    grid = coll.grid
    if isinstance(data, Signal):
        if data.grid != grid:
            raise ValueError("data lives on a different grid")
        return forward_transform(data).coefficients[None, :], None
    if isinstance(data, Mapping):
        items = dict(data)
    else:
        seq = list(data)
        strips = coll.strip_indices
        if len(seq) != len(strips):
            raise ValueError(f"sequence of {len(seq)} functions for {len(strips)} strips")
        items = dict(zip(strips, seq))
    rows = {}
    for n, f in items.items():
        if f.grid != grid:
            raise ValueError("data lives on a different grid")
        rows[int(n)] = forward_transform(f).coefficients
    strips = coll.strip_indices
    missing = [n for n in strips if n not in rows]
    if missing:
        raise ValueError(f"no function given for strips {missing}")
    return np.stack([rows[n] for n in strips]), np.array(strips)


def products(coll: Collection, data, j: int, bump: SmoothBump = DEFAULT_BUMP) -> np.ndarray:
    """<data_{n(s)}, Phi_{s_j}> for every tri-tile s of the underlying geometry.

    ``data`` is a Signal (used in every strip) or a sequence/mapping of
    Signals indexed by strip.  Values are cached per (data, j).
    """
    if j not in (1, 2, 3):
        raise ValueError("component index must be 1, 2 or 3")
    base = coll.base
    key = ("products", id(data), j, bump)
    hit = base.cache.get(key)
    if hit is not None and hit[0] is data:
        return hit[1]
    _check_bump(bump)
    spectra, strips = _data_coefficients(coll, data)
    grid = base.grid
    out = np.empty(base.size, dtype=complex)
    row = np.zeros(base.size, dtype=int) if strips is None else base.strip - strips[0]
    for w in np.unique(base.w):
        idx = np.flatnonzero(base.w == w)
        modes, coef = _coefficients(grid.period, base.w[idx], base.pos[idx], base.lo[idx, j - 1], bump)
        cf = spectra[row[idx][:, None], grid.position(modes)]
        out[idx] = grid.period * np.sum(cf * coef.conj(), axis=1)
    base.cache[key] = (data, out)
    return out


def packet_superposition(coll: Collection, coefficients: Mapping[int, complex], j: int,
                         bump: SmoothBump = DEFAULT_BUMP) -> Signal:
    """sum_s c_s Phi_{s_j} over the tri-tiles (indices into the geometry) carrying a coefficient."""
    base = coll.base
    grid = base.grid
    c = np.zeros(grid.samples, dtype=complex)
    if not coefficients:
        return inverse_transform(Spectrum(grid, c))
    idx = np.array(list(coefficients.keys()), dtype=int)
    vals = np.array([coefficients[k] for k in coefficients], dtype=complex)
    bad = idx[~np.isin(idx, coll.members)]
    if bad.size:
        raise ValueError(f"coefficients given on non-members {bad[:5].tolist()}")
    for w in np.unique(base.w[idx]):
        sel = base.w[idx] == w
        b = idx[sel]
        modes, coef = _coefficients(grid.period, base.w[b], base.pos[b], base.lo[b, j - 1], bump)
        np.add.at(c, grid.position(modes).ravel(), (vals[sel][:, None] * coef).ravel())
    return inverse_transform(Spectrum(grid, c))


def zero_sequence(coll: Collection) -> list[Signal]:
    return [Signal.zeros(coll.grid) for _ in coll.strip_indices]


def matched_sequence(coll: Collection, b: int, bump: SmoothBump = DEFAULT_BUMP) -> list[Signal]:
    """Sequence equal to the packet of s_3 in the strip of s and zero elsewhere."""
    base = coll.base
    seq = zero_sequence(coll)
    seq[coll.strip_indices.index(int(base.strip[b]))] = wave_packet(base.tile(b, 2), coll.grid, bump)
    return seq


def _random_band(coll: Collection, rng: np.random.Generator, scale: float) -> Signal:
    base = coll.base
    m = np.arange(int(base.lo.min()), int((base.lo + base.w[:, None]).max()))
    c = (rng.standard_normal(m.size) + 1j * rng.standard_normal(m.size)) * scale / np.sqrt(2 * m.size)
    return from_coefficients(coll.grid, m, c)


def random_signal(coll: Collection, rng: np.random.Generator, scale: float = 1.0) -> Signal:
    """Complex Gaussian spectrum over the frequency band touched by the collection."""
    return _random_band(coll, rng, scale)


def random_sequence(coll: Collection, rng: np.random.Generator, scale: float = 1.0) -> list[Signal]:
    """One independent random signal per strip of the collection."""
    return [_random_band(coll, rng, scale) for _ in coll.strip_indices]
