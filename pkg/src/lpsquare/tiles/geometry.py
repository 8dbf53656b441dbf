"""Tiles, tri-tiles over a strip geometry, collections and trees.

Everything lives on the torus [0, L) of a :class:`Grid`.  Frequencies are
stored as integer mode numbers (frequency = mode / L).  A tile of width
``w`` modes has frequency interval [lo, lo + w) and spatial interval of
length L / w, so its area is exactly one.  Spatial intervals are dyadic:
tile ``pos`` at width ``w`` covers [pos L / w, (pos + 1) L / w).

A tri-tile of the reference square is labelled by ``sigma``; its
translate by (i, j) moves the three frequency intervals by
(i P, j P, -(i + j) P), P being the strip period in modes, and lands in
strip ``n = j - i``.  A built collection is the full product
{(sigma, i, j) : |i|, |j| <= extent}.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import numpy as np

from ..bilinear_lp import StripFamily
from ..signal_core import FreqInterval, Grid

WHITNEY_BOUNDS = (0.25, 4.0)
TILE_CAP = 10_000


@dataclass(frozen=True)
class Tile:
    """Integer lattice tile: torus period, width in modes, spatial index, lowest mode."""

    period: int
    width: int
    pos: int
    lo: int

    def __post_init__(self):
        if self.width < 1 or self.period % 1 or not 0 <= self.pos < self.width:
            raise ValueError(f"invalid tile {self}")

    @property
    def hi(self) -> int:
        return self.lo + self.width

    @property
    def length(self) -> Fraction:
        return Fraction(self.period, self.width)

    @property
    def interval(self) -> tuple[Fraction, Fraction]:
        a = self.pos * self.length
        return a, a + self.length

    @property
    def omega(self) -> FreqInterval:
        return FreqInterval(Fraction(self.lo, self.period), Fraction(self.hi, self.period))

    @property
    def area(self) -> Fraction:
        return self.length * self.omega.length

    def center(self) -> float:
        a, b = self.interval
        return float(a + b) / 2

    def freq_center(self) -> float:
        return (self.lo + self.hi) / (2 * self.period)

    def quadruple(self) -> list[int]:
        return [self.width, self.pos, self.lo, self.hi]


def tile_leq(a: Tile, b: Tile) -> bool:
    """a <= b: equal, or I_a strictly inside I_b with 3 omega_b inside 3 omega_a."""
    if a == b:
        return True
    return bool(_leq(a.width, a.pos, a.lo, b.width, b.pos, b.lo))


def _leq(w_a, p_a, lo_a, w_b, p_b, lo_b):
    """Vectorised strict order a < b on (width, pos, lo) triples."""
    w_a, w_b = np.asarray(w_a), np.asarray(w_b)
    finer = w_a > w_b
    ratio = np.where(finer, w_a // np.maximum(w_b, 1), 1)
    inside = finer & (np.asarray(p_a) // ratio == p_b)
    # 3 omega = [lo - w, lo + 2w)
    dil = (lo_b - w_b >= lo_a - w_a) & (lo_b + 2 * w_b <= lo_a + 2 * w_a)
    return inside & dil


@dataclass(frozen=True)
class TriTile:
    tiles: tuple[Tile, Tile, Tile]
    strip: int
    label: tuple[int, int, int]

    @property
    def length(self) -> Fraction:
        return self.tiles[0].length


@dataclass
class _Base:
    grid: Grid
    strips: StripFamily
    extent: int
    widths: tuple[int, ...]
    window: int
    period_modes: int
    a_modes: int
    b_modes: int
    w: np.ndarray
    pos: np.ndarray
    lo: np.ndarray  # shape (n, 3)
    strip: np.ndarray
    sigma: np.ndarray
    ti: np.ndarray
    tj: np.ndarray
    classes: np.ndarray = field(init=False)  # shape (n, 3): id of the j-th component tile
    cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.classes = np.empty_like(self.lo)
        for j in range(3):
            keys = np.stack([self.w, self.pos, self.lo[:, j]], axis=1)
            _, inv = np.unique(keys, axis=0, return_inverse=True)
            self.classes[:, j] = inv.ravel()

    @property
    def size(self) -> int:
        return self.w.size

    def tile(self, b: int, j: int) -> Tile:
        return Tile(self.grid.period, int(self.w[b]), int(self.pos[b]), int(self.lo[b, j]))

    def tritile(self, b: int) -> TriTile:
        return TriTile(tuple(self.tile(b, j) for j in range(3)), int(self.strip[b]),
                       (int(self.sigma[b]), int(self.ti[b]), int(self.tj[b])))

    def lengths(self, idx) -> np.ndarray:
        return self.grid.period / self.w[idx].astype(float)


class Collection:
    """A set of tri-tiles drawn from one built geometry.

    Sub-collections share the geometry and differ only in ``members``
    (sorted indices into it), so quantities computed for data on one
    collection can be reused on any part of it.
    """

    def __init__(self, base: _Base, members=None):
        self.base = base
        m = np.arange(base.size) if members is None else np.unique(np.asarray(members, dtype=int))
        self.members = m

    def __len__(self):
        return self.members.size

    def __iter__(self):
        return (self.base.tritile(b) for b in self.members)

    def __contains__(self, b) -> bool:
        i = np.searchsorted(self.members, b)
        return bool(i < self.members.size and self.members[i] == b)

    def subset(self, idx) -> "Collection":
        idx = np.asarray(idx, dtype=int)
        if idx.size and not np.isin(idx, self.members).all():
            raise ValueError("subset contains tri-tiles outside the collection")
        return Collection(self.base, idx)

    def without(self, idx) -> "Collection":
        return Collection(self.base, np.setdiff1d(self.members, idx))

    @property
    def grid(self) -> Grid:
        return self.base.grid

    @property
    def strip_indices(self) -> list[int]:
        return list(range(-2 * self.base.extent, 2 * self.base.extent + 1))

    def reference(self) -> np.ndarray:
        """Members of the reference square (untranslated tri-tiles, strip 0)."""
        b = self.base
        m = self.members
        return m[(b.ti[m] == 0) & (b.tj[m] == 0)]

    def strip_members(self, n: int) -> np.ndarray:
        m = self.members
        return m[self.base.strip[m] == n]

    def is_translation_closed(self) -> bool:
        """Every in-extent translate of a member is a member."""
        b = self.base
        sig = np.unique(b.sigma[self.members])
        full = np.flatnonzero(np.isin(b.sigma, sig))
        return np.array_equal(full, self.members)

    def to_json(self) -> str:
        b = self.base
        return json.dumps({
            "grid": {"N": b.grid.samples, "L": b.grid.period},
            "strips": b.strips.to_dict(),
            "extent": b.extent,
            "widths": list(b.widths),
            "window": b.window,
            "tritiles": [
                {"tiles": [self.base.tile(i, j).quadruple() for j in range(3)],
                 "strip": int(b.strip[i]), "label": [int(b.sigma[i]), int(b.ti[i]), int(b.tj[i])]}
                for i in self.members
            ],
        })


def collection_from_json(text: str) -> Collection:
    d = json.loads(text)
    grid = Grid(int(d["grid"]["N"]), int(d["grid"]["L"]))
    widths = [int(w) for w in d["widths"]]
    base_width = widths[0]
    full = build_collection(StripFamily.from_dict(d["strips"]), len(widths), int(d["extent"]),
                            grid=grid, base_width=base_width, window=int(d["window"]))
    b = full.base
    lookup = {(int(b.sigma[i]), int(b.ti[i]), int(b.tj[i])): i for i in range(b.size)}
    idx = []
    for t in d["tritiles"]:
        i = lookup.get(tuple(t["label"]))
        if i is None or [b.tile(i, j).quadruple() for j in range(3)] != t["tiles"] or b.strip[i] != t["strip"]:
            raise ValueError(f"tri-tile {t} does not belong to the declared geometry")
        idx.append(i)
    return Collection(b, idx)


def _modes(x: Fraction, period: int, what: str) -> int:
    v = Fraction(x) * period
    if v.denominator != 1:
        raise ValueError(f"{what} {x} is not on the 1/{period} frequency lattice")
    return int(v)


def build_collection(strips, spatial_depth: int, freq_extent: int, grid: Grid | None = None,
                     base_width: int = 4, window: int | None = None) -> Collection:
    """Whitney tri-tiles along the lower edge of every strip, closed under translation.

    ``strips`` is a :class:`StripFamily` (or a list of (a, b) pairs, which must
    be equispaced).  Widths are ``base_width * 2**k`` modes for
    ``k < spatial_depth``; the reference square has omega_1 inside
    [0, window) modes, ``window`` defaulting to half the strip period.
    """
    if not isinstance(strips, StripFamily):
        strips = StripFamily.from_intervals(strips)
    grid = grid or Grid(1024, 8)
    if spatial_depth < 1 or freq_extent < 0:
        raise ValueError("spatial_depth must be >= 1 and freq_extent >= 0")
    L = grid.period
    needed = range(-2 * freq_extent, 2 * freq_extent + 1)
    if needed[0] < strips.n_min or needed[-1] > strips.n_max:
        raise ValueError(f"strip family {strips.n_min}..{strips.n_max} does not cover strips "
                         f"{needed[0]}..{needed[-1]} reached by the translations")
    a = _modes(strips.interval(0).lower, L, "strip edge")
    width_m = _modes(strips.width, L, "strip width")
    period = _modes(strips.period, L, "strip period")
    widths = tuple(base_width * 2**k for k in range(spatial_depth))
    if base_width < 2:
        raise ValueError("base_width must be at least 2 modes")
    w_max = widths[-1]
    # omega_1 - omega_2 sits at distance w from the lower edge; the upper edge must stay Whitney too
    if width_m - 3 * w_max < WHITNEY_BOUNDS[0] * w_max:
        raise ValueError(f"strip width of {width_m} modes cannot hold Whitney tiles of width {w_max}")
    window = period // 2 if window is None else int(window)
    if window < w_max or window % w_max:
        raise ValueError("window must be a positive multiple of the largest tile width")
    if window + 3 * w_max > period:
        raise ValueError("window too wide: translates of the reference square would touch")

    ws, ps, l1 = [], [], []
    for w in widths:
        for p1 in range(window // w):
            for pos in range(w):
                ws.append(w)
                ps.append(pos)
                l1.append(p1 * w)
    ws, ps, l1 = np.array(ws), np.array(ps), np.array(l1)
    l2 = l1 + a + 2 * ws
    l3 = -l1 - l2 - ws
    n_sigma = ws.size
    count = n_sigma * (2 * freq_extent + 1) ** 2
    if count > TILE_CAP:
        raise ValueError(f"{count} tri-tiles exceeds the enumeration cap of {TILE_CAP}")

    shifts = np.arange(-freq_extent, freq_extent + 1)
    sig, ii, jj = np.meshgrid(np.arange(n_sigma), shifts, shifts, indexing="ij")
    sig, ii, jj = sig.ravel(), ii.ravel(), jj.ravel()
    lo = np.stack([l1[sig] + ii * period, l2[sig] + jj * period, l3[sig] - (ii + jj) * period], axis=1)
    if lo.min() < -grid.samples // 2 or (lo + ws[sig, None]).max() > grid.samples // 2:
        raise ValueError("tile frequencies exceed the grid band; use more samples")
    base = _Base(grid, strips, freq_extent, widths, window, period, a, a + width_m,
                 ws[sig], ps[sig], lo, jj - ii, sig, ii, jj)
    return Collection(base)


# ---------------------------------------------------------------------------
# trees


@dataclass(frozen=True)
class Tree:
    members: np.ndarray
    top: int
    kind: int
    strip: int

    def __post_init__(self):
        object.__setattr__(self, "members", np.unique(np.asarray(self.members, dtype=int)))

    def __len__(self):
        return self.members.size

    def top_length(self, base: _Base) -> float:
        return float(base.lengths(self.top))


def below(base: _Base, cand: np.ndarray, top: int, j: int) -> np.ndarray:
    """Boolean mask of candidates s with s_j <= top_j (same strip not imposed)."""
    k = j - 1
    strict = _leq(base.w[cand], base.pos[cand], base.lo[cand, k], base.w[top], base.pos[top], base.lo[top, k])
    eq = (base.classes[cand, k] == base.classes[top, k])
    return strict | eq


def order_matrix(base: _Base, rows: np.ndarray, cols: np.ndarray, j: int) -> np.ndarray:
    """M[r, c] = (cols[c])_j <= (rows[r])_j and both in the same strip."""
    k = j - 1
    R, C = rows[:, None], cols[None, :]
    strict = _leq(base.w[C], base.pos[C], base.lo[C, k], base.w[R], base.pos[R], base.lo[R, k])
    eq = base.classes[C, k] == base.classes[R, k]
    return (strict | eq) & (base.strip[C] == base.strip[R])


def maximal_tree(coll: Collection, top: int, j: int, pool: np.ndarray | None = None) -> Tree:
    """All members of ``pool`` (default: the collection) in the top's strip lying below it."""
    base = coll.base
    pool = coll.members if pool is None else pool
    pool = pool[base.strip[pool] == base.strip[top]]
    return Tree(pool[below(base, pool, top, j)], int(top), j, int(base.strip[top]))


def is_tree(base: _Base, tree: Tree) -> bool:
    m = tree.members
    if m.size == 0:
        return True
    return bool((base.strip[m] == tree.strip).all() and below(base, m, tree.top, tree.kind).all())


def vectorize(coll: Collection, idx: np.ndarray, k: int) -> np.ndarray:
    """Members of ``coll`` sharing their k-th tile with some tri-tile of ``idx``."""
    base = coll.base
    hit = np.isin(base.classes[coll.members, k - 1], base.classes[np.asarray(idx, dtype=int), k - 1])
    return coll.members[hit]


def vectorize12(coll: Collection, idx: np.ndarray) -> np.ndarray:
    return vectorize(coll, vectorize(coll, idx, 1), 2)


def translate(base: _Base, b: int, di: int, dj: int) -> int | None:
    """Index of the (di, dj) translate of tri-tile b, or None outside the extent."""
    i, j = base.ti[b] + di, base.tj[b] + dj
    N = base.extent
    if abs(i) > N or abs(j) > N:
        return None
    side = 2 * N + 1
    return int(base.sigma[b] * side * side + (i + N) * side + (j + N))


def projection(coll: Collection, tree: Tree) -> Tree:
    """The tree of the reference square whose (1,2)-vectorisation equals the tree's."""
    base = coll.base
    m = tree.members
    proj = np.array([translate(base, b, -base.ti[b], -base.tj[b]) for b in m], dtype=int)
    top = translate(base, tree.top, -base.ti[tree.top], -base.tj[tree.top])
    return Tree(proj, top, tree.kind, 0)


# ---------------------------------------------------------------------------
# structural diagnostics


def _max_overlap(intervals: Iterable[tuple]) -> int:
    events = []
    for lo, hi in intervals:
        events.append((lo, 1))
        events.append((hi, -1))
    events.sort(key=lambda e: (e[0], e[1]))
    depth = best = 0
    for _, s in events:
        depth += s
        best = max(best, depth)
    return best


def grid_constants(coll: Collection) -> dict:
    """Worst pointwise overlap of distinct intervals whose lengths lie in [2^(k-1), 2^(k+1)]."""
    base = coll.base
    m = coll.members
    L = base.grid.period
    spatial = {(Fraction(L, int(w)) * int(p), Fraction(L, int(w)) * (int(p) + 1))
               for w, p in zip(base.w[m], base.pos[m])}
    freq = {(Fraction(int(lo), L), Fraction(int(lo) + int(w), L))
            for j in range(3) for w, lo in zip(base.w[m], base.lo[m, j])}

    def worst(ivs):
        out = 0
        lengths = sorted({b - a for a, b in ivs})
        for ell in lengths:
            group = [iv for iv in ivs if ell / 2 <= iv[1] - iv[0] <= 2 * ell]
            out = max(out, _max_overlap(group))
        return out

    return {"spatial": worst(spatial), "frequency": worst(freq)}


def whitney_ratios(coll: Collection) -> tuple[float, float]:
    """Range of (distance of the omega_1 x omega_2 difference band to the strip edges) * |I|."""
    base = coll.base
    m = coll.members
    w = base.w[m]
    diff_lo = base.lo[m, 1] - base.lo[m, 0] - w
    diff_hi = base.lo[m, 1] - base.lo[m, 0] + w
    a = base.a_modes + base.strip[m] * base.period_modes
    b = base.b_modes + base.strip[m] * base.period_modes
    r = np.minimum(diff_lo - a, b - diff_hi) / w
    return float(r.min()), float(r.max())


def strip_membership(coll: Collection) -> bool:
    """Each tri-tile's difference band lies strictly inside exactly one strip, the recorded one."""
    base = coll.base
    fam = base.strips
    L = base.grid.period
    for b in coll.members:
        lo_d = Fraction(int(base.lo[b, 1] - base.lo[b, 0] - base.w[b]), L)
        hi_d = Fraction(int(base.lo[b, 1] - base.lo[b, 0] + base.w[b]), L)
        hits = [n for n in fam.indices if fam.interval(n).lower <= lo_d and hi_d <= fam.interval(n).upper]
        if hits != [int(base.strip[b])]:
            return False
    return True


def rank_one(coll: Collection, members: np.ndarray | None = None) -> bool:
    """Distinct tri-tiles in one strip never share a component tile."""
    base = coll.base
    m = coll.members if members is None else members
    for n in np.unique(base.strip[m]):
        sub = m[base.strip[m] == n]
        for j in range(3):
            if np.unique(base.classes[sub, j]).size != sub.size:
                return False
    return True


def rank_one_covering(coll: Collection, dilation: float = 1e7) -> int:
    """Largest overlap of the spatial intervals of {s' : dilation*omega_{s'_j} contains omega_{s_j}}.

    Computed within the reference square, maximised over s and j.
    """
    base = coll.base
    ref = coll.reference()
    L = base.grid.period
    worst = 0
    for j in range(3):
        lo = base.lo[ref, j].astype(float)
        w = base.w[ref].astype(float)
        c = lo + w / 2
        half = dilation * w / 2
        for s in ref:
            sl, sh = base.lo[s, j], base.lo[s, j] + base.w[s]
            ok = (c - half <= sl) & (sh <= c + half)
            ivs = [(Fraction(L, int(ww)) * int(p), Fraction(L, int(ww)) * (int(p) + 1))
                   for ww, p in zip(base.w[ref[ok]], base.pos[ref[ok]])]
            worst = max(worst, _max_overlap(ivs))
    return worst


def order_is_partial(coll: Collection, j: int) -> bool:
    """Reflexive, antisymmetric and transitive on the distinct j-tiles of the collection."""
    base = coll.base
    k = j - 1
    _, first = np.unique(base.classes[coll.members, k], return_index=True)
    reps = coll.members[first]
    R, C = reps[:, None], reps[None, :]
    rel = _leq(base.w[R], base.pos[R], base.lo[R, k], base.w[C], base.pos[C], base.lo[C, k])
    rel = rel | np.eye(reps.size, dtype=bool)
    antisym = not (rel & rel.T & ~np.eye(reps.size, dtype=bool)).any()
    two = (rel.astype(np.int64) @ rel.astype(np.int64)) > 0
    return bool(antisym and not (two & ~rel).any())


def nesting_violations(coll: Collection) -> int:
    """Count of (s, i, varpi) with omega_{s_i} strictly inside varpi but some omega_{s_j} not inside."""
    base = coll.base
    m = coll.members
    J = {(int(lo), int(lo + w)) for j in range(3) for w, lo in zip(base.w[m], base.lo[m, j])}
    J = np.array(sorted(J))
    bad = 0
    for b in m:
        comps = [(int(base.lo[b, j]), int(base.lo[b, j] + base.w[b])) for j in range(3)]
        for lo, hi in comps:
            strict = (J[:, 0] <= lo) & (hi <= J[:, 1]) & ((J[:, 0] < lo) | (hi < J[:, 1]))
            for v in J[strict]:
                if any(not (v[0] <= l2 and h2 <= v[1]) for l2, h2 in comps):
                    bad += 1
    return bad


def describe(coll: Collection) -> dict:
    """Structural audit of a collection; every entry is recomputed from scratch."""
    ref = coll.reference()
    return {
        "tritiles": len(coll),
        "reference": int(ref.size),
        "grid_constants": grid_constants(coll),
        "whitney": whitney_ratios(coll),
        "whitney_bounds": WHITNEY_BOUNDS,
        "strip_membership": strip_membership(coll),
        "rank_one_reference": rank_one(coll, ref),
        "rank_one_strips": rank_one(coll),
        "translation_closed": coll.is_translation_closed(),
        "partial_order": all(order_is_partial(coll, j) for j in (1, 2, 3)),
        "nesting_violations": nesting_violations(coll),
    }


def default_strips(extent: int, width=8, gap=8) -> StripFamily:
    """Equispaced strips [n (width + gap), n (width + gap) + width) reached by the translations."""
    return StripFamily(Fraction(0), Fraction(width), Fraction(gap), -2 * extent, 2 * extent)
