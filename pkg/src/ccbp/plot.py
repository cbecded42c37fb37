"""Dependency-free SVG line chart of ratio against N, one series per
parameter combination, each with its target drawn as a dashed line."""

from __future__ import annotations

from fractions import Fraction
from xml.sax.saxutils import escape

from .core import parse_rational
from .harness import PARAM_COLUMNS, read_csv

WIDTH, HEIGHT = 640, 400
LEFT, RIGHT, TOP, BOTTOM = 60, 20, 20, 50
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f")


def _series(rows):
    groups: dict[tuple, list] = {}
    for r in rows:
        if r.get("error") or not r.get("N") or not r.get("ratio_exact"):
            continue
        key = (r["kind"], r["procedure"], *(r[c] for c in PARAM_COLUMNS if c != "N"))
        groups.setdefault(key, []).append(
            (int(r["N"]), parse_rational(r["ratio_exact"]), parse_rational(r["target_exact"]))
        )
    return [(key, sorted(points)) for key, points in groups.items()]


def _label(key) -> str:
    kind, procedure, *vals = key
    names = [c for c in PARAM_COLUMNS if c != "N"]
    parts = [f"{n}={v}" for n, v in zip(names, vals) if v]
    return " ".join([kind, procedure, *parts])


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def emit_plot(csv_text: str) -> str:
    """Deterministic SVG text for a sweep CSV; an empty CSV gives bare axes."""
    series = _series(read_csv(csv_text)) if csv_text.strip() else []
    xs = [p[0] for _, pts in series for p in pts]
    ys = [v for _, pts in series for p in pts for v in (p[1], p[2])]
    x_lo, x_hi = (min(xs), max(xs)) if xs else (0, 1)
    y_lo, y_hi = (Fraction(min(min(ys), 1)), Fraction(max(ys))) if ys else (Fraction(0), Fraction(1))
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 1, x_hi + 1
    if y_hi == y_lo:
        y_hi = y_lo + 1
    y_hi += (y_hi - y_lo) / 10
    plot_w = WIDTH - LEFT - RIGHT
    plot_h = HEIGHT - TOP - BOTTOM

    def px(x) -> float:
        return LEFT + plot_w * (x - x_lo) / (x_hi - x_lo)

    def py(y) -> float:
        return TOP + plot_h * float((y_hi - y) / (y_hi - y_lo))

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<line x1="{LEFT}" y1="{TOP + plot_h}" x2="{LEFT + plot_w}" y2="{TOP + plot_h}" stroke="black"/>',
        f'<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{TOP + plot_h}" stroke="black"/>',
        f'<text x="{LEFT + plot_w / 2:.2f}" y="{HEIGHT - 10}" text-anchor="middle" font-size="12">N</text>',
        f'<text x="15" y="{TOP + plot_h / 2:.2f}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 15 {TOP + plot_h / 2:.2f})">ratio</text>',
    ]
    for frac in (0, Fraction(1, 2), 1):
        y = y_lo + (y_hi - y_lo) * frac
        out.append(
            f'<text x="{LEFT - 5}" y="{_fmt(py(y) + 4)}" text-anchor="end" font-size="10">{float(y):.3g}</text>'
        )
    for x in sorted({x_lo, x_hi}):
        out.append(
            f'<text x="{_fmt(px(x))}" y="{TOP + plot_h + 15}" text-anchor="middle" font-size="10">{x}</text>'
        )
    for idx, (key, pts) in enumerate(series):
        color = COLORS[idx % len(COLORS)]
        out.append(f'<g data-series="{escape(_label(key))}">')
        targets = sorted({p[2] for p in pts})
        for target in targets:
            out.append(
                f'<line x1="{LEFT}" y1="{_fmt(py(target))}" x2="{LEFT + plot_w}" y2="{_fmt(py(target))}" '
                f'stroke="{color}" stroke-dasharray="6,4"/>'
            )
        coords = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}" for x, y, _ in pts)
        if len(pts) > 1:
            out.append(f'<polyline points="{coords}" fill="none" stroke="{color}"/>')
        for x, y, _ in pts:
            out.append(f'<circle cx="{_fmt(px(x))}" cy="{_fmt(py(y))}" r="3" fill="{color}"/>')
        out.append(
            f'<text x="{LEFT + 10}" y="{TOP + 14 * (idx + 1)}" font-size="11" fill="{color}">'
            f"{escape(_label(key))}</text>"
        )
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
