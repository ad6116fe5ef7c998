import re
import xml.etree.ElementTree as ET

from liesym.simulate import SweepConfig, run_sweep
from liesym.svg import Series, line_chart, nice_ticks, sweep_chart

NS = "{http://www.w3.org/2000/svg}"


def test_nice_ticks_cover_range():
    ticks = nice_ticks(1.0, 1.02)
    assert ticks[0] >= 1.0 - 1e-12 and ticks[-1] <= 1.02 + 1e-12
    assert 3 <= len(ticks) <= 11
    assert nice_ticks(2.0, 2.0)  # flat series still gets ticks


def test_line_chart_structure():
    svg = line_chart([Series("a", [0, 1, 2], [0, 1, 4]), Series("b", [0, 1, 2], [1, 1, 1], dashed=True)], title="t & u")
    root = ET.fromstring(svg)
    assert root.tag == f"{NS}svg" and root.get("version") == "1.1"
    polylines = root.findall(f".//{NS}polyline")
    assert len(polylines) == 2
    assert polylines[1].get("stroke-dasharray")
    assert polylines[0].get("stroke-dasharray") is None
    assert "t &amp; u" in svg


def test_sweep_chart():
    result = run_sweep(SweepConfig())
    svg = sweep_chart(result, metadata='{"seed": 1}')
    root = ET.fromstring(svg)
    assert len(root.findall(f".//{NS}polyline")) == 2
    assert root.find(f"{NS}metadata").text == '{"seed": 1}'
    assert root.find(f".//{NS}g[@id='legend']") is not None
    assert root.find(f".//{NS}g[@id='axes']") is not None
    assert len(svg.encode()) < 100_000
    # self-contained: no external references
    assert not re.search(r"(href|src)=", svg)
