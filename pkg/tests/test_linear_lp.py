import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lpsquare.linear_lp import (IntervalFamily, SmoothBump, admissible_scales, covering_constant, full_band_units,
                                linear_square, project, project_many, symbol_leakage)
from lpsquare.signal_core import FreqInterval, Grid, Signal, from_coefficients, inner, lp_norm, random_bandlimited

G = Grid(512, 8)


def rand(seed, grid=G, band=None):
    return random_bandlimited(grid, np.random.default_rng(seed), band)


def test_project_full_band_is_identity():
    f = rand(0)
    out = project(f, FreqInterval.of(-32, 32))
    assert np.abs(out.values - f.values).max() < 1e-13


def test_project_disjoint_band_is_zero():
    f = rand(1, band=4)
    assert np.abs(project(f, FreqInterval.of(10, 12)).values).max() == 0


def test_project_against_character_sum():
    f = from_coefficients(G, np.arange(0, 16), 1.0)  # f^ = 1_[0, 2)
    out = project(f, FreqInterval.of(0, 1))
    direct = np.exp(2j * np.pi * np.outer(G.x, np.arange(8)) / G.period).sum(axis=1)
    assert np.abs(out.values - direct).max() < 1e-12


def test_project_rejects_off_lattice():
    with pytest.raises(ValueError):
        project(rand(2), FreqInterval.of("1/16", 1))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.integers(-20, 18), st.integers(1, 8))
def test_project_idempotent_and_orthogonal(seed, a, w):
    f = rand(seed)
    I = FreqInterval.of(a, a + w)
    J = FreqInterval.of(a + w, a + w + 3)
    once = project(f, I)
    assert np.array_equal(project(once, I).values, once.values)
    assert abs(inner(once, project(f, J))) <= 1e-10 * lp_norm(f, 2) ** 2


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.lists(st.integers(-31, 31), min_size=1, max_size=6, unique=True))
def test_partition_reconstruction(seed, cuts):
    f = rand(seed)
    edges = [-32] + sorted(cuts) + [32]
    parts = [FreqInterval.of(a, b) for a, b in zip(edges[:-1], edges[1:]) if a < b]
    total = project_many(f, parts).sum(axis=0)
    assert np.abs(total - f.values).max() <= 1e-10 * np.abs(f.values).max()


def test_square_of_single_mode_is_modulus():
    f = from_coefficients(G, [3], [2.0 - 1j])  # frequency 3/8 in [0, 1)
    sq = linear_square(f, {"type": "unit_intervals", "from": -4, "to": 4})
    assert np.abs(sq.values - np.abs(f.values)).max() < 1e-13


def test_square_plancherel_on_full_band():
    fam = full_band_units(G)
    for seed in range(5):
        f = rand(seed)
        assert lp_norm(linear_square(f, fam), 2) == pytest.approx(lp_norm(f, 2), rel=1e-10)


def test_square_growth_counterexample():
    # f^ = 1_[0, N'), unit intervals: ||square||_p / ||f||_p grows like N'^(1/2 - 1/p')
    grid = Grid(2048, 8)
    Ns = [4, 8, 16, 32]
    ratios = []
    for n in Ns:
        f = from_coefficients(grid, np.arange(0, n * grid.period), 1.0)
        sq = linear_square(f, {"type": "unit_intervals", "from": 0, "to": n})
        ratios.append(lp_norm(sq, 1.5) / lp_norm(f, 1.5))
    slope = np.polyfit(np.log(Ns), np.log(ratios), 1)[0]
    assert slope == pytest.approx(0.5 - 1 / 3, abs=0.1)


def test_square_ratio_regression_p4():
    fam = {"type": "unit_intervals", "from": -16, "to": 16}
    rng = np.random.default_rng(7)
    worst = max(lp_norm(linear_square(f, fam), 4) / lp_norm(f, 4)
                for f in (random_bandlimited(G, rng) for _ in range(50)))
    assert worst <= 10


def test_arbitrary_family_and_covering():
    fam = IntervalFamily([FreqInterval.of(0, 2), FreqInterval.of(1, 3), FreqInterval.of(2, 5)])
    assert fam.kappa == 2
    assert covering_constant([FreqInterval.of(0, 1), FreqInterval.of(1, 2)]) == 1
    with pytest.raises(ValueError):
        IntervalFamily([FreqInterval.of(0, 2), FreqInterval.of(1, 3)], declared_disjoint=True)
    with pytest.raises(ValueError):
        IntervalFamily([])
    f = rand(3)
    sq = linear_square(f, {"type": "arbitrary", "family": fam})
    pieces = [project(f, I).values for I in fam]
    assert np.abs(sq.values - np.sqrt(sum(np.abs(p) ** 2 for p in pieces))).max() < 1e-12


def test_empty_and_unknown_families():
    f = rand(4)
    with pytest.raises(ValueError):
        linear_square(f, {"type": "unit_intervals", "from": 2, "to": 2})
    with pytest.raises(ValueError):
        linear_square(f, {"type": "nope"})


@pytest.mark.parametrize("bump", [
    SmoothBump("gaussian", center=0.0, width=0.5, vanishing=True),
    SmoothBump("cosine", center=1.0, width=0.5, taper=0.5, vanishing=True),
    SmoothBump("smooth", center=1.0, width=1.0, vanishing=True),
])
def test_bump_normalisation_and_vanishing(bump):
    from scipy import integrate
    lo, hi = bump.support()
    val, _ = integrate.quad(lambda t: bump.hat(t) ** 2, lo, hi, limit=400, epsabs=1e-14)
    assert val == pytest.approx(1, abs=1e-9)
    assert abs(bump.hat(0.0)) < 1e-12
    sig = bump.on_grid(Grid(4096, 64))
    assert lp_norm(sig, 2) == pytest.approx(1, abs=1e-6)


def test_bump_validation():
    with pytest.raises(ValueError):
        SmoothBump("triangle")
    with pytest.raises(ValueError):
        SmoothBump("cosine", center=0.0, width=1.0, taper=1.0, vanishing=True)
    with pytest.raises(ValueError):
        SmoothBump("cosine", width=1.0, taper=2.0)


def test_smooth_dilation_scales_and_leakage():
    bump = SmoothBump("gaussian", center=1.0, width=0.25, vanishing=True)
    kept, skipped = admissible_scales(bump, G, range(-8, 4))
    assert kept and skipped
    assert all(2.0**n >= G.spacing for n in kept)
    f = rand(5)
    sq = linear_square(f, {"type": "smooth_dilation", "bump": bump, "scales": kept})
    assert np.all(np.isfinite(sq.values))
    with pytest.raises(ValueError):
        linear_square(f, {"type": "smooth_dilation", "bump": bump, "scales": [skipped[0]]})


def test_smooth_modulation_matches_symbol_product():
    bump = SmoothBump("cosine", center=0.0, width=0.5, taper=0.5)
    f = rand(6, band=4)
    sq = linear_square(f, {"type": "smooth_modulation", "bump": bump, "modulations": [0, 1]})
    c = np.fft.fftshift(np.fft.fft(f.values)) / G.samples
    rows = []
    for n in (0, 1):
        sym = bump.hat(G.frequencies - n)
        rows.append(np.fft.ifft(np.fft.ifftshift(sym * c)) * G.samples)
    assert np.abs(sq.values - np.sqrt(sum(np.abs(r) ** 2 for r in rows))).max() < 1e-12
    assert symbol_leakage(lambda xi: bump.hat(xi), G) == 0
