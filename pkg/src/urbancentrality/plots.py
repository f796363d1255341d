"""Static SVG charts for elasticity matrices.

Written with ``xml.etree`` rather than a plotting library so the output is
deterministic and structurally simple: one ``rect`` per heatmap cell and
one ``rect`` (with a value label) per bar.
"""
from __future__ import annotations

import xml.etree.ElementTree as ET

import numpy as np

from .io import fmt

__all__ = ["diverging_color", "heatmap_svg", "bar_chart_svg"]

SVG_NS = "http://www.w3.org/2000/svg"
_NEG = (33, 102, 172)
_POS = (178, 24, 43)
_PALETTE = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666"]


def diverging_color(v: float, vmax: float) -> str:
    """Blue (negative) - white (0) - red (positive), saturating at ``vmax``."""
    if vmax <= 0 or v == 0:
        return "#ffffff"
    t = min(1.0, abs(v) / vmax)
    end = _POS if v > 0 else _NEG
    r, g, b = (round(255 + (c - 255) * t) for c in end)
    return f"#{r:02x}{g:02x}{b:02x}"


def _svg(width, height):
    return ET.Element("svg", {
        "xmlns": SVG_NS, "width": str(width), "height": str(height),
        "viewBox": f"0 0 {width} {height}", "font-family": "sans-serif", "font-size": "12",
    })


def _text(parent, x, y, s, **attrs):
    el = ET.SubElement(parent, "text", {"x": f"{x:.1f}", "y": f"{y:.1f}", **attrs})
    el.text = s
    return el


def _to_string(root) -> str:
    return ET.tostring(root, encoding="unicode") + "\n"


def heatmap_svg(values, row_labels, col_labels, title="Elasticities", cell=64) -> str:
    """Heatmap with rows = nodes, columns = parameters, values printed in cells."""
    v = np.asarray(values, dtype=float)
    nr, nc = v.shape
    vmax = float(np.max(np.abs(v))) if v.size else 0.0
    left, top = 70, 50
    width = left + nc * cell + 20
    height = top + nr * cell + 50
    root = _svg(width, height)
    _text(root, width / 2, 24, title, **{"text-anchor": "middle", "font-size": "15"})
    for j, lbl in enumerate(col_labels):
        _text(root, left + (j + 0.5) * cell, top - 8, str(lbl), **{"text-anchor": "middle"})
    for i, lbl in enumerate(row_labels):
        _text(root, left - 8, top + (i + 0.5) * cell + 4, str(lbl), **{"text-anchor": "end"})
        for j in range(nc):
            x, y = left + j * cell, top + i * cell
            ET.SubElement(root, "rect", {
                "class": "cell", "x": str(x), "y": str(y), "width": str(cell), "height": str(cell),
                "fill": diverging_color(v[i, j], vmax), "stroke": "#999999",
                "data-row": str(lbl), "data-col": str(col_labels[j]),
            })
            _text(root, x + cell / 2, y + cell / 2 + 4, fmt(round(v[i, j], 4)), **{"text-anchor": "middle"})
    _text(root, left, height - 18, f"scale: [{fmt(-vmax)}, {fmt(vmax)}]")
    return _to_string(root)


def bar_chart_svg(values, row_labels, col_labels, title="Elasticities", bar=22) -> str:
    """Grouped bars: one group per node, one bar per parameter."""
    v = np.asarray(values, dtype=float)
    nr, nc = v.shape
    vmax = float(np.max(np.abs(v))) if v.size else 0.0
    vmax = vmax or 1.0
    left, top, plot_h = 60, 50, 240
    group = nc * bar + 24
    width = left + nr * group + 140
    height = top + plot_h + 60
    zero = top + plot_h / 2
    unit = (plot_h / 2) / vmax
    root = _svg(width, height)
    _text(root, width / 2, 24, title, **{"text-anchor": "middle", "font-size": "15"})
    ET.SubElement(root, "line", {"x1": str(left), "x2": str(left + nr * group),
                                 "y1": f"{zero:.1f}", "y2": f"{zero:.1f}", "stroke": "#000000"})
    for i, rl in enumerate(row_labels):
        gx = left + i * group + 12
        _text(root, gx + nc * bar / 2, top + plot_h + 24, str(rl), **{"text-anchor": "middle"})
        for j, cl in enumerate(col_labels):
            val = v[i, j]
            h = abs(val) * unit
            y = zero - h if val >= 0 else zero
            g = ET.SubElement(root, "g", {"class": "bar", "data-row": str(rl), "data-col": str(cl)})
            ET.SubElement(g, "title").text = f"{rl} / {cl}: {fmt(val)}"
            ET.SubElement(g, "rect", {
                "x": str(gx + j * bar), "y": f"{y:.2f}", "width": str(bar - 2), "height": f"{h:.2f}",
                "fill": _PALETTE[j % len(_PALETTE)],
            })
            ly = y - 4 if val >= 0 else y + h + 12
            _text(g, gx + j * bar + (bar - 2) / 2, ly, fmt(round(val, 3)),
                  **{"text-anchor": "middle", "font-size": "9"})
    lx = left + nr * group + 20
    for j, cl in enumerate(col_labels):
        ET.SubElement(root, "rect", {"x": str(lx), "y": str(top + 18 * j), "width": "12", "height": "12",
                                     "fill": _PALETTE[j % len(_PALETTE)]})
        _text(root, lx + 18, top + 18 * j + 10, str(cl))
    return _to_string(root)
