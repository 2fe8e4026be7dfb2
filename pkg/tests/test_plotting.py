import xml.etree.ElementTree as ET

import numpy as np
import pytest

from qtransport.efficiency import daoqt_sweep
from qtransport.plotting import EmptyDataError, LineSeries, emit_plot, marching_squares
from qtransport.presets import onsite_config

from conftest import FIG3

NS = "{http://www.w3.org/2000/svg}"


def _parse(svg):
    return ET.fromstring(svg.encode())


def test_two_point_line_has_one_polyline():
    svg = emit_plot([LineSeries("eta", np.array([1.0, 2.0]), np.array([0.3, 0.4]))])
    root = _parse(svg)
    assert root.get("version") == "1.1"
    assert len(root.findall(f".//{NS}polyline")) == 1


def test_sweep_plot_marks_refined_extrema(tmp_path):
    res = daoqt_sweep(onsite_config(**FIG3), np.geomspace(0.3, 30, 25))
    svg = emit_plot(res, "line", tmp_path / "s.svg", log_x=True)
    root = _parse((tmp_path / "s.svg").read_text())
    assert svg == (tmp_path / "s.svg").read_text()
    argmax = root.find(f".//{NS}polygon[@class='argmax']")
    argmin = root.find(f".//{NS}rect[@class='argmin']")
    assert float(argmax.get("data-x")) == pytest.approx(res.opt_value, rel=1e-5)
    assert float(argmin.get("data-x")) == pytest.approx(res.min_value, rel=1e-5)
    assert "omega / nu" in svg


def test_constant_contour_has_no_lines():
    z = np.full((4, 5), 0.42)
    root = _parse(emit_plot((np.arange(5.0), np.arange(4.0), z), "contour"))
    assert root.findall(f".//{NS}path[@class='contour']") == []
    fills = {r.get("fill") for r in root.findall(f".//{NS}rect") if r.get("stroke") == "none"}
    assert len(fills) == 1


def test_varying_contour_draws_lines():
    x = np.linspace(0, 1, 6)
    z = np.add.outer(x, x)
    root = _parse(emit_plot((x, x, z), "contour", levels=4))
    assert len(root.findall(f".//{NS}path[@class='contour']")) == 3


def test_marching_squares_straight_level():
    x = np.array([0.0, 1.0])
    z = np.array([[0.0, 1.0], [0.0, 1.0]])
    (a, b), = marching_squares(x, x, z, 0.25)
    assert a[0] == pytest.approx(0.25) and b[0] == pytest.approx(0.25)


def test_empty_data_rejected():
    with pytest.raises(EmptyDataError):
        emit_plot([])
    with pytest.raises(EmptyDataError):
        emit_plot((np.array([]), np.array([]), np.zeros((0, 0))), "contour")
    with pytest.raises(ValueError):
        emit_plot([LineSeries("a", np.array([1.0]), np.array([1.0]))], "pie")
