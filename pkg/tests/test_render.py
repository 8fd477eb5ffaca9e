import xml.etree.ElementTree as ET

import numpy as np
import pytest

from qcx import boundary_map as bm
from qcx.render import RenderSpec, render

NS = "{http://www.w3.org/2000/svg}"


def _polylines(svg):
    root = ET.fromstring(svg.encode())
    return {g.get("id"): g.findall(f"{NS}polyline") for g in root.findall(f"{NS}g")}


def test_halfplane_identity_lines():
    spec = RenderSpec(window=(-1.0, 1.0, 0.5, 2.0), lines=(3, 4), samples=5)
    svg = render(bm.identity(), spec)
    groups = _polylines(svg)
    assert len(groups["vertical"]) == 3 and len(groups["horizontal"]) == 4
    # identity extension (x, y/2): vertical image lines keep their x
    pts = [tuple(map(float, p.split(","))) for p in groups["vertical"][0].get("points").split()]
    assert all(p[0] == pytest.approx(-1.0) for p in pts)
    assert pts[0][1] == pytest.approx(-0.25) and pts[-1][1] == pytest.approx(-1.0)


def test_render_deterministic():
    spec = RenderSpec(samples=50)
    h = bm.log_singular()
    assert render(h, spec) == render(h, spec)


def test_disk_render_groups():
    svg = render(bm.rotation(0.5), RenderSpec(domain="disk", lines=(6, 3), samples=40))
    groups = _polylines(svg)
    assert len(groups["boundary"]) == 1
    assert len(groups["rays"]) == 6 and len(groups["circles"]) == 3
    for p in groups["circles"][0].get("points").split():
        a, b = map(float, p.split(","))
        assert np.hypot(a, b) < 1.0


@pytest.mark.parametrize("kw", [dict(domain="sphere"), dict(lines=(0, 3)), dict(samples=1),
                                dict(window=(1.0, 0.0, 0.1, 1.0)),
                                dict(window=(0.0, 1.0, 0.0, 1.0))])
def test_spec_validation(kw):
    with pytest.raises(ValueError):
        RenderSpec(**kw)
