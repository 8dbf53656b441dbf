import csv
import io
import json

import numpy as np
import pytest

from lpsquare.bilinear_lp import bilinear_project
from lpsquare.lab.cli import main
from lpsquare.lab.config import ConfigError, ExperimentConfig
from lpsquare.lab.emit import UnsupportedFormat, emit, load_report, render
from lpsquare.lab.experiments import ExperimentReport, adversarial_data, fit_power_law, run
from lpsquare.signal_core import FreqInterval, Grid, lp_norm, random_bandlimited


def cfg(**kw):
    return ExperimentConfig.from_dict(kw)


# power-law fit


def test_fit_exact_square():
    fit = fit_power_law([(x, x**2) for x in (1, 2, 4, 8, 16)])
    assert fit.slope == pytest.approx(2, abs=1e-12) and fit.residual < 1e-12


def test_fit_constant():
    fit = fit_power_law([(x, 3.0) for x in (8, 16, 32, 64)])
    assert abs(fit.slope) < 1e-12
    lin = fit_power_law([(0, 1), (1, 3), (2, 5)], loglog=False)
    assert lin.slope == pytest.approx(2) and lin.intercept == pytest.approx(1)


def test_fit_errors():
    with pytest.raises(ValueError):
        fit_power_law([(1, 1), (2, 2)])
    with pytest.raises(ValueError):
        fit_power_law([(2, 1), (2, 2), (2, 3)])
    with pytest.raises(ValueError):
        fit_power_law([(1, 1), (2, 0), (3, 1)])


# configuration


def test_config_defaults_and_holder_fill():
    c = cfg(exponents=[[4, 4]])
    assert c.exponents == [[4.0, 4.0, 2.0]]
    with pytest.raises(ConfigError):
        cfg(exponents=[[4, 4, 3]])
    with pytest.raises(ConfigError):
        cfg(colour="red")
    with pytest.raises(ConfigError):
        cfg(samples=32768)
    with pytest.raises(ConfigError):
        cfg(theta=[0.5, 0.5, 0])


def test_dual_exponent_below_two_needs_exploratory_mode():
    with pytest.raises(ConfigError, match="open question"):
        cfg(exponents=[[6, 6]])
    c = cfg(exponents=[[6, 6]], mode="exploratory")
    assert c.exponents[0][2] == pytest.approx(3)


def test_theorem_ranges_per_mode():
    with pytest.raises(ConfigError):
        cfg(exponents=[[1.5, 4]])  # strips need p > 2
    with pytest.raises(ConfigError):
        cfg(exponents=[[1.5, 1]], mode="linear")
    cfg(exponents=[[2, 1]], mode="linear")
    cfg(exponents=[[1.5, 1.5]], mode="sequence")
    with pytest.raises(ConfigError):
        cfg(exponents=[[1.1, 1.1]], mode="sequence")  # 1/r > 3/2
    # the counterexample deliberately leaves the bounded range
    cfg(kind="counterexample", exponents=[[1.25, 4]])
    with pytest.raises(ConfigError):
        cfg(kind="counterexample", P_values=[8, 16])
    with pytest.raises(ConfigError):
        cfg(kind="counterexample", mode="sequence")


def test_infeasible_p_range():
    with pytest.raises(ConfigError):
        run(cfg(kind="counterexample", P_values=[8, 16, 1024], exponents=[[1.5, 4]]))


# boundedness consistency


def test_single_strip_equals_single_multiplier():
    c = cfg(strips={"a0": 0, "width": 1, "gap": 1, "n_min": 0, "n_max": 0}, trials=3, exponents=[[4, 4]], seed=5)
    rep = run(c)
    grid = Grid(c.samples, c.period)
    rng = np.random.default_rng(5)
    for row in rep.rows:
        f, g = random_bandlimited(grid, rng), random_bandlimited(grid, rng)
        T = bilinear_project(f, g, FreqInterval.of(0, 1))
        assert row["ratio"] == pytest.approx(lp_norm(T, 2) / (lp_norm(f, 4) * lp_norm(g, 4)), rel=1e-10)


def test_one_hot_sequence_matches_bilinear_project():
    c = cfg(mode="sequence", intervals=[[-1, 2]], trials=3, exponents=[[1.5, 1.5]], seed=6)
    rep = run(c)
    grid = Grid(c.samples, c.period)
    rng = np.random.default_rng(6)
    r = 1 / (2 / 1.5)
    for row in rep.rows:
        f, g = random_bandlimited(grid, rng), random_bandlimited(grid, rng)
        T = bilinear_project(f, g, FreqInterval.of(-1, 2))
        assert row["ratio"] == pytest.approx(lp_norm(T, r) / (lp_norm(f, 1.5) * lp_norm(g, 1.5)), rel=1e-10)


@pytest.mark.parametrize("mode,exps", [("strips", [[4, 4]]), ("parallelogram", [[3, 6]]), ("sequence", [[1.5, 3]]),
                                       ("linear", [[2], [4]])])
def test_boundedness_modes_pass(mode, exps):
    rep = run(cfg(mode=mode, exponents=[e + [None] * (2 - len(e)) for e in exps], trials=10))
    assert rep.passed, rep.summary


def test_exploratory_reports_without_checks():
    rep = run(cfg(mode="exploratory", exponents=[[6, 6]], trials=3))
    assert rep.checks == {} and len(rep.rows) == 3


# tile audit


def test_tile_audit_empty_collection_is_vacuous():
    rep = run(cfg(kind="tile-audit", trials=1, collection={"extent": 1, "spatial_depth": 1, "freq_extent": 1,
                                                           "empty": True}))
    assert rep.passed and rep.checks == {"vacuous": True}


def test_tile_audit_small_collection():
    rep = run(cfg(kind="tile-audit", trials=2, collection={"extent": 1, "spatial_depth": 2, "freq_extent": 1,
                                                           "runs": 1}))
    assert rep.passed and rep.summary["worst_tree_ratio"] <= 1 + 1e-9
    assert {"tree_estimate", "abstract_bound"} <= set(rep.checks)


def test_adversarial_data_concentrates_on_tree():
    from lpsquare.tiles.geometry import build_collection, default_strips, maximal_tree
    from lpsquare.tiles.quantities import size
    coll = build_collection(default_strips(1), 2, 1)
    T = maximal_tree(coll, int(coll.reference()[3]), 3, coll.reference())
    f = adversarial_data(coll, T)
    assert size(coll, f, 1).value >= (len(T) / T.top_length(coll.base)) ** 0.5 * (1 - 1e-3)


# emit


def test_emit_is_deterministic(tmp_path):
    c = cfg(kind="square", exponents=[[4, 4], [3, 6]], seed=3)
    a, b = run(c), run(c)
    for fmt in ("json", "csv"):
        pa, pb = tmp_path / f"a.{fmt}", tmp_path / f"b.{fmt}"
        emit(a, fmt, str(pa))
        emit(b, fmt, str(pb))
        assert pa.read_bytes() == pb.read_bytes()
    back = load_report(str(tmp_path / "a.json"))
    assert render(back, "json") == render(a, "json")


def test_empty_report_gives_valid_table():
    rep = ExperimentReport("boundedness", {}, ["triple", "ratio"])
    rows = list(csv.reader(io.StringIO(render(rep, "csv"))))
    assert rows == [["triple", "ratio"]]
    assert json.loads(render(rep, "json"))["rows"] == []


def test_svg_needs_curves_or_figure():
    rep = run(cfg(kind="square"))
    with pytest.raises(UnsupportedFormat):
        render(rep, "svg")
    with pytest.raises(UnsupportedFormat):
        render(rep, "xml")
    curves = run(cfg(trials=3, exponents=[[4, 4], [3, 6]]))
    assert render(curves, "svg").count("<polyline") == 2


# command line


def test_cli_exit_codes(tmp_path, capsys):
    out = tmp_path / "sq.json"
    assert main(["square", "--seed", "1", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["kind"] == "square"
    assert main(["report", str(out), "--format", "csv"]) == 0
    assert capsys.readouterr().out.startswith("triple,")
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"exponents": [[6, 6]]}))
    assert main(["boundedness", "--config", str(bad)]) == 2
    assert "exploratory" in capsys.readouterr().err
    assert main(["square", "--format", "svg"]) == 2
    strict = tmp_path / "strict.json"
    strict.write_text(json.dumps({"exponents": [[1.25, 4]], "P_values": [4, 8, 16], "slope_tolerance": 1e-6}))
    assert main(["counterexample", "--config", str(strict)]) == 1
    assert "FAIL" in capsys.readouterr().err


def test_cli_rejects_unknown_subcommand():
    with pytest.raises(SystemExit):
        main(["nope"])
