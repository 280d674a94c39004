"""Deterministic SVG rendering of learning curves and metric scatter plots.

Hand-built SVG 1.1: no plotting dependency, no timestamps, no randomness,
so identical inputs always give byte-identical files.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

from perturblab.curves import TypologyReport
from perturblab.engine import HOP_FAMILY, REVERSE_FAMILY, Variant
from perturblab.errors import ValidationError

WIDTH, HEIGHT = 840, 520
MARGIN_LEFT, MARGIN_RIGHT, MARGIN_TOP, MARGIN_BOTTOM = 70, 200, 40, 60

#: Diverging ramp keyed to mean-error sign, plus baseline blue.
STYLE_COLORS = {
    "baseline": "#2c6fbb",
    "positive": "#2e8b57",
    "negative": "#d1567b",
    "neutral": "#666666",
}
_DASHES = ("none", "6,3", "2,3", "8,3,2,3")

# Unit-circle glyph outlines, precomputed so no trig runs at render time.
_TRIANGLE = ((0.0, -1.0), (0.866, 0.5), (-0.866, 0.5))
_DIAMOND = ((0.0, -1.0), (1.0, 0.0), (0.0, 1.0), (-1.0, 0.0))
_STAR = (
    (0.0, -1.0), (0.2351, -0.3236), (0.9511, -0.309), (0.3804, 0.1236),
    (0.5878, 0.809), (0.0, 0.4), (-0.5878, 0.809), (-0.3804, 0.1236),
    (-0.9511, -0.309), (-0.2351, -0.3236),
)


@dataclass(frozen=True)
class Series:
    label: str
    points: tuple[tuple[float, float], ...]
    style: str = "neutral"
    annotation: str | None = None

    def __post_init__(self):
        if not all(math.isfinite(x) and math.isfinite(y) for x, y in self.points):
            raise ValidationError(f"series {self.label!r} contains non-finite points")


@dataclass(frozen=True)
class ChartSpec:
    title: str
    series: tuple[Series, ...]
    x_label: str = "training step"
    y_label: str = "validation perplexity"

    def __post_init__(self):
        if not self.series:
            raise ValidationError("chart needs at least one series")


def _ranges(series: Sequence[Series]) -> tuple[float, float, float, float]:
    xs = [x for s in series for x, _ in s.points]
    ys = [y for s in series for _, y in s.points]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = 0.95 * min(ys), 1.05 * max(ys)
    if x_lo == x_hi:
        x_lo, x_hi = x_lo - 1.0, x_hi + 1.0
    if y_lo == y_hi:
        y_lo, y_hi = y_lo - 1.0, y_hi + 1.0
    return x_lo, x_hi, y_lo, y_hi


def _mapper(x_lo, x_hi, y_lo, y_hi):
    plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM

    def to_canvas(x: float, y: float) -> tuple[float, float]:
        cx = MARGIN_LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w
        cy = MARGIN_TOP + (y_hi - y) / (y_hi - y_lo) * plot_h
        return cx, cy

    return to_canvas


def _axes(parts: list[str], x_lo, x_hi, y_lo, y_hi, x_label: str, y_label: str) -> None:
    to_canvas = _mapper(x_lo, x_hi, y_lo, y_hi)
    left, _ = to_canvas(x_lo, y_lo)
    bottom = to_canvas(x_lo, y_lo)[1]
    right = to_canvas(x_hi, y_lo)[0]
    top = to_canvas(x_lo, y_hi)[1]
    parts.append(
        f'<g class="axes" stroke="#222" fill="none">'
        f'<line x1="{left:.2f}" y1="{bottom:.2f}" x2="{right:.2f}" y2="{bottom:.2f}"/>'
        f'<line x1="{left:.2f}" y1="{bottom:.2f}" x2="{left:.2f}" y2="{top:.2f}"/></g>'
    )
    for i in range(5):
        xv = x_lo + (x_hi - x_lo) * i / 4
        yv = y_lo + (y_hi - y_lo) * i / 4
        cx, _ = to_canvas(xv, y_lo)
        _, cy = to_canvas(x_lo, yv)
        parts.append(
            f'<text class="tick" x="{cx:.2f}" y="{bottom + 18:.2f}" font-size="11" '
            f'text-anchor="middle">{xv:.0f}</text>'
        )
        parts.append(
            f'<text class="tick" x="{left - 6:.2f}" y="{cy + 4:.2f}" font-size="11" '
            f'text-anchor="end">{yv:.1f}</text>'
        )
    parts.append(
        f'<text x="{(left + right) / 2:.2f}" y="{HEIGHT - 14}" font-size="13" '
        f'text-anchor="middle">{escape(x_label)}</text>'
    )
    parts.append(
        f'<text x="16" y="{(top + bottom) / 2:.2f}" font-size="13" text-anchor="middle" '
        f'transform="rotate(-90 16 {(top + bottom) / 2:.2f})">{escape(y_label)}</text>'
    )


def render_curve_chart(spec: ChartSpec) -> str:
    """One polyline per series, legend at the right, ME annotations below labels."""
    x_lo, x_hi, y_lo, y_hi = _ranges(spec.series)
    to_canvas = _mapper(x_lo, x_hi, y_lo, y_hi)
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" width="{WIDTH}" height="{HEIGHT}">',
        f'<title>{escape(spec.title)}</title>',
        f'<text x="{WIDTH / 2:.0f}" y="24" font-size="16" text-anchor="middle">'
        f'{escape(spec.title)}</text>',
    ]
    _axes(parts, x_lo, x_hi, y_lo, y_hi, spec.x_label, spec.y_label)

    dash_counts: dict[str, int] = {}
    legend_x = WIDTH - MARGIN_RIGHT + 16
    legend_y = MARGIN_TOP + 10
    for series in spec.series:
        color = STYLE_COLORS.get(series.style, STYLE_COLORS["neutral"])
        dash = _DASHES[dash_counts.get(series.style, 0) % len(_DASHES)]
        dash_counts[series.style] = dash_counts.get(series.style, 0) + 1
        coords = " ".join(f"{cx:.2f},{cy:.2f}" for cx, cy in map(lambda p: to_canvas(*p), series.points))
        parts.append(
            f'<polyline class="series" fill="none" stroke="{color}" stroke-width="1.5" '
            f'stroke-dasharray="{dash}" points="{coords}"/>'
        )
        parts.append(
            f'<line x1="{legend_x}" y1="{legend_y - 4}" x2="{legend_x + 22}" y2="{legend_y - 4}" '
            f'stroke="{color}" stroke-width="1.5" stroke-dasharray="{dash}"/>'
        )
        parts.append(
            f'<text x="{legend_x + 28}" y="{legend_y}" font-size="11">{escape(series.label)}</text>'
        )
        legend_y += 15
        if series.annotation is not None:
            parts.append(
                f'<text class="me-annotation" x="{legend_x + 28}" y="{legend_y}" '
                f'font-size="10" fill="{color}">{escape(series.annotation)}</text>'
            )
            legend_y += 14
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit_curve_chart(spec: ChartSpec, path: str | Path) -> None:
    Path(path).write_bytes(render_curve_chart(spec).encode("utf-8"))


def _family_glyph(variant: Variant) -> tuple[str, tuple[tuple[float, float], ...]]:
    if variant in REVERSE_FAMILY:
        return "star", _STAR
    if variant in HOP_FAMILY:
        return "diamond", _DIAMOND
    return "triangle", _TRIANGLE


def _glyph(outline, cx: float, cy: float, r: float, fill: str, name: str, title: str) -> str:
    pts = " ".join(f"{cx + r * dx:.2f},{cy + r * dy:.2f}" for dx, dy in outline)
    return (
        f'<polygon class="glyph {name}" points="{pts}" fill="{fill}" '
        f'stroke="#333" stroke-width="0.5"><title>{escape(title)}</title></polygon>'
    )


def format_variance(value: float) -> str:
    return f"{value:.2f}"


def render_scatter(report: TypologyReport) -> str:
    """One glyph per (language, variant); shape keyed to the variant's baseline family.

    Baseline variants are filled blue, perturbed ones orange; the across- and
    within-language variances are printed beneath the plot.
    """
    languages, variants = report.languages, report.variants
    cells = [report.values[lang][v] for lang in languages for v in variants]
    y_lo, y_hi = 0.95 * min(cells), 1.05 * max(cells)
    if y_lo == y_hi:
        y_lo, y_hi = y_lo - 1.0, y_hi + 1.0
    plot_w = WIDTH - MARGIN_LEFT - 40
    plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM
    slot = plot_w / len(languages)

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" width="{WIDTH}" height="{HEIGHT}">',
        f'<title>{escape(report.metric_name)} by language and variant</title>',
        f'<text x="{WIDTH / 2:.0f}" y="24" font-size="16" text-anchor="middle">'
        f'{escape(report.metric_name)}</text>',
    ]
    baseline_variants = {v for v in variants if v not in {"shuffle_global", "shuffle_local",
                                                          "switch", "reverse_partial",
                                                          "reverse_full", "hop"}}
    for li, lang in enumerate(languages):
        x_center = MARGIN_LEFT + slot * (li + 0.5)
        parts.append(
            f'<text x="{x_center:.2f}" y="{HEIGHT - MARGIN_BOTTOM + 18}" font-size="11" '
            f'text-anchor="middle">{escape(lang)}</text>'
        )
        for vi, variant in enumerate(variants):
            value = report.values[lang][variant]
            cx = x_center + (vi - (len(variants) - 1) / 2) * min(10.0, slot / (len(variants) + 1))
            cy = MARGIN_TOP + (y_hi - value) / (y_hi - y_lo) * plot_h
            name, outline = _family_glyph(variant)
            fill = "#2c6fbb" if variant in baseline_variants else "#e08214"
            parts.append(_glyph(outline, cx, cy, 5.0, fill, name, f"{lang}/{variant}={value!r}"))
    for i in range(5):
        yv = y_lo + (y_hi - y_lo) * i / 4
        cy = MARGIN_TOP + (y_hi - yv) / (y_hi - y_lo) * plot_h
        parts.append(
            f'<text class="tick" x="{MARGIN_LEFT - 6}" y="{cy + 4:.2f}" font-size="11" '
            f'text-anchor="end">{yv:.1f}</text>'
        )
    parts.append(
        f'<text class="variances" x="{MARGIN_LEFT}" y="{HEIGHT - 12}" font-size="12">'
        f"across-language variance = {format_variance(report.across_variance)}; "
        f"within-language variance = {format_variance(report.within_variance)}</text>"
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit_scatter(report: TypologyReport, path: str | Path) -> None:
    Path(path).write_bytes(render_scatter(report).encode("utf-8"))
