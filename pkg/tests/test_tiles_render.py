import xml.etree.ElementTree as ET
from fractions import Fraction

import pytest

from lpsquare.bilinear_lp import Ladder, ParallelogramFamily, StripFamily
from lpsquare.tiles.render import parallelograms_svg, ratio_curves_svg, strips_svg
from tile_fixtures import small_collection

NS = "{http://www.w3.org/2000/svg}"


def parse(text):
    root = ET.fromstring(text)
    assert root.tag == NS + "svg"
    return root


def test_strips_svg_is_valid_and_deterministic():
    S = StripFamily.unit(-3, 3)
    a = strips_svg(S, 4.0)
    assert a == strips_svg(S, 4.0)
    assert len(parse(a).findall(f".//{NS}polygon")) >= 7


def test_strips_svg_with_collection():
    c = small_collection()
    root = parse(strips_svg(c.base.strips, 40.0, c))
    assert len(root.findall(f".//{NS}polygon")) > len(parse(strips_svg(c.base.strips, 40.0)).findall(f".//{NS}polygon"))


def test_parallelograms_svg():
    L = Ladder(0, 1, 2, -3, 3)
    fam = ParallelogramFamily(Fraction(1), Fraction(-3), L, L)
    parse(parallelograms_svg(fam, 6.0))


def test_ratio_curves_svg():
    root = parse(ratio_curves_svg({"p=1.5": [(8, 1.0), (16, 1.2), (32, 1.5)], "p=4": [(8, 1.0), (16, 0.9), (32, 0.8)]}))
    assert len(root.findall(f".//{NS}polyline")) == 2
    parse(ratio_curves_svg({"flat": [(0, 1), (1, 1)]}, loglog=False))
    with pytest.raises(ValueError):
        ratio_curves_svg({"bad": [(0, 1), (1, 2)]}, loglog=True)
