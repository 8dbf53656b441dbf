"""The twelve acceptance criteria at their stated tolerances.

Run with ``pytest tests/test_acceptance.py -v``; the terminal summary
prints one PASS/FAIL line per criterion.
"""

import time
from fractions import Fraction

import numpy as np
import pytest

from lpsquare.bilinear_lp import (Ladder, ParallelogramFamily, StripFamily, bilinear_project, continuum_density,
                                  covering_strips, parallelogram_pieces, strip_apply)
from lpsquare.lab.config import ExperimentConfig
from lpsquare.lab.experiments import BOUNDED_SLOPE, run
from lpsquare.linear_lp import full_band_units, linear_square, project_many
from lpsquare.signal_core import FreqInterval, Grid, dirichlet_pair, forward_transform, lp_norm, random_bandlimited
from lpsquare.tiles.algorithms import MASS_CONSTANT, abstract_bound_report, energy_decompose
from lpsquare.tiles.geometry import Tile, maximal_tree
from lpsquare.tiles.packets import (DECAY_CONSTANT, decay_ratio, random_sequence, random_signal, wave_packet)
from lpsquare.tiles.quantities import (ENERGY_CONSTANT, ORTHOGONALITY_CONSTANT, admissible_coefficients, data_norm,
                                       energy, energy_exhaustive, orthogonality_report, size, tree_estimate_report)
from tile_fixtures import default_collection, small_collection

P = 32
G_TRI = Grid(4096, 16)


def profile(grid, centre):
    xi = grid.frequencies.astype(float)
    return np.where(np.abs(xi - centre) <= 1, (1 - np.abs(xi - centre)) / 2, 0.0)


def deviation(piece, centre):
    d = continuum_density(forward_transform(piece))
    return float(np.abs(d - profile(piece.grid, centre)).max())


# 1


@pytest.mark.criterion(1)
def test_triangular_spectrum():
    start = time.perf_counter()
    f, g = dirichlet_pair(G_TRI, P)
    oracle = bilinear_project(f, g, FreqInterval.of(1, 2), "oracle")
    c0 = min((0, 1), key=lambda c: deviation(oracle, 1 + c))
    worst = 0.0
    for n in range(1, P):
        worst = max(worst, deviation(bilinear_project(f, g, FreqInterval.of(n, n + 1), "fast"), n + c0))
    elapsed = time.perf_counter() - start
    print(f"c0 = {c0}, max deviation {worst:.4g} (bound {2 / G_TRI.period}), {elapsed:.1f} s")
    assert worst <= 2 / G_TRI.period
    assert elapsed < 30


# 2


@pytest.mark.criterion(2)
def test_modulation_identity():
    f, g = dirichlet_pair(G_TRI, P)
    rows = strip_apply(f, g, StripFamily.unit(0, P), "fast")
    base = np.abs(rows[0].values)
    worst = max(np.abs(np.abs(r.values) - base).max() for r in rows)
    assert worst <= 1e-9 * base.max()


# 3


def counterexample(exponents):
    cfg = ExperimentConfig.from_dict({"kind": "counterexample", "samples": 4096, "period": 16,
                                      "P_values": [8, 16, 32, 64], "exponents": exponents})
    return run(cfg)


@pytest.fixture(scope="module")
def scaling():
    start = time.perf_counter()
    rep = counterexample([[1.25, 4], [1.5, 4], [2, 4], [4, 4, 2]])
    return rep, time.perf_counter() - start


@pytest.mark.criterion(3)
@pytest.mark.parametrize("p,target", [(1.25, 0.3), (1.5, 1 / 6), (2.0, 0.0)])
def test_counterexample_slopes(scaling, p, target):
    rep, elapsed = scaling
    s = rep.summary[f"({p:g}, 4, {1 / (1 / p + 0.25):g})"]
    print(f"p = {p}: slope {s['slope']:.4f}, target {target:.4f}")
    assert s["slope"] == pytest.approx(target, abs=0.1)
    assert elapsed < 300


@pytest.mark.criterion(3)
def test_counterexample_stays_bounded_at_4_4_2(scaling):
    slope = scaling[0].summary["(4, 4, 2)"]["slope"]
    assert slope <= BOUNDED_SLOPE


@pytest.mark.criterion(3)
@pytest.mark.xfail(strict=True, reason="the (4, 4, 2) ratio decays like P^(-1/4), outside +-0.1 of zero")
def test_counterexample_slope_within_tenth_at_4_4_2(scaling):
    slope = scaling[0].summary["(4, 4, 2)"]["slope"]
    print(f"(4, 4, 2): slope {slope:.4f}")
    assert abs(slope) <= 0.1


# 4


@pytest.mark.criterion(4)
def test_plancherel():
    G = Grid(1024, 8)
    fam = full_band_units(G)
    rng = np.random.default_rng(4)
    for _ in range(20):
        f = random_bandlimited(G, rng)
        assert lp_norm(linear_square(f, fam), 2) == pytest.approx(lp_norm(f, 2), rel=1e-10)


# 5


@pytest.mark.criterion(5)
def test_partition_reconstruction():
    G = Grid(512, 8)
    rng = np.random.default_rng(5)
    for _ in range(5):
        f, g = random_bandlimited(G, rng, 12), random_bandlimited(G, rng, 12)
        cuts = np.sort(rng.choice(np.arange(-255, 256), 8, replace=False))
        edges = [-256] + cuts.tolist() + [256]
        parts = [FreqInterval(Fraction(a, 8), Fraction(b, 8)) for a, b in zip(edges[:-1], edges[1:])]
        lin = project_many(f, parts).sum(axis=0)
        assert np.abs(lin - f.values).max() <= 1e-10 * np.abs(f.values).max()
        prod = f.values * g.values
        for S in (covering_strips(G, 1, 0), covering_strips(G, Fraction(3, 2), 0, a0=Fraction(1, 4))):
            total = sum(r.values for r in strip_apply(f, g, S, "fast"))
            assert np.abs(total - prod).max() <= 1e-10 * np.abs(prod).max()
        fam = ParallelogramFamily(Fraction(1), Fraction(-3), Ladder(0, 1, 1, -40, 40), Ladder(0, 2, 2, -40, 40))
        _, rows = parallelogram_pieces(f, g, fam)
        assert np.abs(rows.sum(axis=0) - prod).max() <= 1e-10 * np.abs(prod).max()


# 6


@pytest.mark.criterion(6)
def test_fast_matches_oracle():
    G = Grid(1024, 16)
    S = StripFamily(Fraction(-8), Fraction(1), Fraction(0), 0, 15)
    rng = np.random.default_rng(6)
    for _ in range(10):
        f, g = random_bandlimited(G, rng), random_bandlimited(G, rng)
        fast, slow = strip_apply(f, g, S, "fast"), strip_apply(f, g, S, "oracle")
        scale = max(np.abs(s.values).max() for s in slow)
        assert max(np.abs(a.values - b.values).max() for a, b in zip(fast, slow)) <= 1e-8 * scale


@pytest.mark.criterion(6)
def test_fast_path_speedup():
    G = Grid(4096, 16)
    S = StripFamily(Fraction(-8), Fraction(1), Fraction(0), 0, 15)
    rng = np.random.default_rng(66)
    f, g = random_bandlimited(G, rng), random_bandlimited(G, rng)
    t0 = time.perf_counter()
    fast = strip_apply(f, g, S, "fast")
    t1 = time.perf_counter()
    slow = strip_apply(f, g, S, "oracle")
    t2 = time.perf_counter()
    print(f"fast {t1 - t0:.3f} s, oracle {t2 - t1:.3f} s")
    scale = max(np.abs(s.values).max() for s in slow)
    assert max(np.abs(a.values - b.values).max() for a, b in zip(fast, slow)) <= 1e-8 * scale
    assert t2 - t1 >= 5 * (t1 - t0)


# 7


@pytest.mark.criterion(7)
def test_linear_regression_constant():
    G = Grid(1024, 8)
    fam = {"type": "unit_intervals", "from": -32, "to": 32}
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(50):
        f = random_bandlimited(G, rng)
        sq = linear_square(f, fam)
        worst = max(worst, max(lp_norm(sq, p) / lp_norm(f, p) for p in (2, 4)))
    assert worst <= 10


@pytest.mark.criterion(7)
def test_linear_counterexample_slope():
    cfg = ExperimentConfig.from_dict({"kind": "counterexample", "mode": "linear", "samples": 2048, "period": 8,
                                      "P_values": [8, 16, 32, 64], "exponents": [[1.5, None]]})
    slope = run(cfg).summary["(1.5, inf, 1.5)"]["slope"]
    print(f"linear counterexample slope {slope:.4f}")
    assert slope == pytest.approx(0.5 - 1 / 3, abs=0.1)


# 8-11 on the default collection


@pytest.fixture(scope="module")
def coll():
    return default_collection()


@pytest.mark.criterion(8)
def test_tree_estimate(coll):
    ref = coll.reference()
    worst = 0.0
    for seed in range(100):
        rng = np.random.default_rng(8000 + seed)
        f, g, h = random_signal(coll, rng), random_signal(coll, rng), random_sequence(coll, rng)
        T = maximal_tree(coll, int(rng.choice(ref)), 3)
        worst = max(worst, tree_estimate_report(coll, T, f, g, h).ratio)
    print(f"worst tree ratio {worst:.4g}")
    assert worst <= 1 + 1e-9


@pytest.mark.criterion(9)
def test_decomposition_postconditions(coll):
    worst = 0.0
    for seed in range(20):
        rng = np.random.default_rng(9000 + seed)
        j = 1 + seed % 3
        data = random_sequence(coll, rng) if j == 3 else random_signal(coll, rng)
        E = energy(coll, data, j, exhaustive=False).value
        n = int(np.floor(np.log2(E / size(coll, data, j).value)))
        d = energy_decompose(coll, data, j, n, energy_value=E)
        flat = np.concatenate([d.P1.members] + d.P2)
        assert np.array_equal(np.sort(flat), coll.members)
        assert size(d.P1, data, j).value <= 2.0 ** (-n - 1) * E * (1 + 1e-12)
        mass = sum(T.top_length(coll.base) for T, _ in d.pairs)
        assert mass <= MASS_CONSTANT * 4.0**n
        worst = max(worst, mass / 4.0**n)
    print(f"largest sum |I_T| / 4^n: {worst:.4g} (C = {MASS_CONSTANT})")


@pytest.mark.criterion(9)
def test_iterated_partition(coll):
    for seed in range(5):
        rng = np.random.default_rng(9100 + seed)
        rep = abstract_bound_report(coll, random_signal(coll, rng), random_signal(coll, rng), random_sequence(coll, rng))
        assert rep.checks["terminated"] and rep.checks["partition"]
        for lv in rep.levels:
            assert max(lv["mass_ratios"]) <= MASS_CONSTANT


@pytest.mark.criterion(10)
def test_energy_bounds(coll):
    ratios = []
    for seed in range(20):
        rng = np.random.default_rng(10_000 + seed)
        j = 1 + seed % 3
        data = random_sequence(coll, rng) if j == 3 else random_signal(coll, rng)
        ratios.append(energy(coll, data, j, exhaustive=False).value / data_norm(data))
    ratios = np.array(ratios)
    med = np.median(ratios)
    print(f"energy / norm: max {ratios.max():.3g}, median {med:.3g}, min {ratios.min():.3g}")
    assert ratios.max() <= ENERGY_CONSTANT
    assert ratios.max() <= 10 * med and ratios.min() >= med / 10


@pytest.mark.criterion(10)
def test_greedy_energy_against_exhaustive():
    c = small_collection()
    assert len(c) <= 12
    for seed in range(10):
        rng = np.random.default_rng(10_100 + seed)
        f, h = random_signal(c, rng), random_sequence(c, rng)
        for data, j in ((f, 1), (f, 2), (h, 3)):
            exact = energy_exhaustive(c, data, j)
            assert exact / 4 <= energy(c, data, j, exhaustive=False).value <= exact * (1 + 1e-12)


@pytest.mark.criterion(11)
def test_orthogonality(coll):
    worst = 0.0
    for seed in range(20):
        rng = np.random.default_rng(11_000 + seed)
        j, l = ((1, 2), (2, 1))[seed % 2]
        trees = energy(coll, random_signal(coll, rng), j, l, exhaustive=False).witness
        rep = orthogonality_report(coll, trees, admissible_coefficients(coll, trees, l, rng), j, l)
        worst = max(worst, rep.ratio)
    print(f"largest ||sum||^2 / (A sum |I_T|): {worst:.4g}")
    assert worst <= ORTHOGONALITY_CONSTANT <= 8


# 12


@pytest.mark.criterion(12)
@pytest.mark.parametrize("width", [4, 8, 16, 32, 64, 128, 256])
def test_wave_packet_contract(width):
    G = Grid(1024, 8)
    for pos in (0, width // 3):
        tile = Tile(8, width, pos, -width // 2)
        phi = wave_packet(tile, G)
        coef = forward_transform(phi).coefficients
        xi = G.frequencies.astype(float)
        core = np.abs(xi - tile.freq_center()) <= 0.45 * float(tile.omega.length)
        assert not np.any(coef[~core])
        assert lp_norm(phi, 2) == pytest.approx(1, abs=1e-6)
        assert decay_ratio(phi, tile, 4) <= DECAY_CONSTANT
