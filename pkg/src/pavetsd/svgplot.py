"""Tiny self-contained SVG line charts.

Output only; nothing here parses SVG back. Charts are assembled as plain
strings so profile plots can be written next to their CSV files without a
plotting dependency. A chart holds one or two series, never more.
"""

import math
from dataclasses import dataclass
from pathlib import Path

from .errors import ValidationError

__all__ = ["ChartSeries", "line_chart", "write_chart"]

_WIDTH = 720
_HEIGHT = 432
_MARGIN_LEFT = 82
_MARGIN_RIGHT = 26
_MARGIN_TOP = 46
_MARGIN_BOTTOM = 62
_SERIES_COLORS = ("#2a6db0", "#c23b22")
_MAX_SERIES = 2


@dataclass(frozen=True)
class ChartSeries:
    """One named polyline: paired x and y samples."""

    label: str
    x: tuple
    y: tuple

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(float(v) for v in self.x))
        object.__setattr__(self, "y", tuple(float(v) for v in self.y))
        if not self.label:
            raise ValidationError("series label must be nonempty")
        if len(self.x) != len(self.y):
            raise ValidationError(
                f"series {self.label!r} has {len(self.x)} x values but "
                f"{len(self.y)} y values")
        if len(self.x) < 2:
            raise ValidationError(
                f"series {self.label!r} needs at least two points")
        for v in (*self.x, *self.y):
            if not math.isfinite(v):
                raise ValidationError(
                    f"series {self.label!r} contains a non-finite value")


def _padded_range(values):
    lo = min(values)
    hi = max(values)
    if hi == lo:
        pad = max(abs(lo), 1.0) * 0.05
        return lo - pad, hi + pad
    pad = (hi - lo) * 0.04
    return lo - pad, hi + pad


def _tick_step(raw: float) -> float:
    magnitude = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        step = mult * magnitude
        if raw <= step * (1.0 + 1e-12):
            return step
    return 10.0 * magnitude


def _ticks(lo: float, hi: float, target: int = 5):
    step = _tick_step((hi - lo) / target)
    first = math.ceil(lo / step - 1e-9) * step
    out = []
    t = first
    while t <= hi + 1e-9 * step:
        # snap near-zero ticks so the label reads 0, not 1.4e-17
        out.append(0.0 if abs(t) < 1e-9 * step else t)
        t += step
    return out


def _fmt_tick(value: float) -> str:
    return f"{value:g}"


def _escape(text: str) -> str:
    return (text.replace("&", "&amp;").replace("<", "&lt;")
            .replace(">", "&gt;"))


def line_chart(series, *, title: str, x_label: str, y_label: str) -> str:
    """Render one or two series as a complete ``<svg>`` document string."""
    series = tuple(series)
    if not 1 <= len(series) <= _MAX_SERIES:
        raise ValidationError(
            f"a chart holds one or two series, got {len(series)}")
    for entry in series:
        if not isinstance(entry, ChartSeries):
            raise ValidationError(f"expected ChartSeries, got {entry!r}")

    x_lo, x_hi = _padded_range([v for s in series for v in s.x])
    y_lo, y_hi = _padded_range([v for s in series for v in s.y])
    plot_w = _WIDTH - _MARGIN_LEFT - _MARGIN_RIGHT
    plot_h = _HEIGHT - _MARGIN_TOP - _MARGIN_BOTTOM

    def px(x: float) -> float:
        return _MARGIN_LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w

    def py(y: float) -> float:
        return _MARGIN_TOP + (1.0 - (y - y_lo) / (y_hi - y_lo)) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" '
        f'height="{_HEIGHT}" viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="#ffffff"/>',
        f'<text x="{_WIDTH / 2:.1f}" y="24" text-anchor="middle" '
        f'font-family="sans-serif" font-size="15">{_escape(title)}</text>',
    ]

    for t in _ticks(x_lo, x_hi):
        x = px(t)
        parts.append(
            f'<line x1="{x:.2f}" y1="{_MARGIN_TOP}" x2="{x:.2f}" '
            f'y2="{_MARGIN_TOP + plot_h}" stroke="#dddddd" stroke-width="1"/>')
        parts.append(
            f'<text x="{x:.2f}" y="{_MARGIN_TOP + plot_h + 18}" '
            f'text-anchor="middle" font-family="sans-serif" font-size="11">'
            f'{_fmt_tick(t)}</text>')
    for t in _ticks(y_lo, y_hi):
        y = py(t)
        parts.append(
            f'<line x1="{_MARGIN_LEFT}" y1="{y:.2f}" '
            f'x2="{_MARGIN_LEFT + plot_w}" y2="{y:.2f}" stroke="#dddddd" '
            f'stroke-width="1"/>')
        parts.append(
            f'<text x="{_MARGIN_LEFT - 8}" y="{y + 4:.2f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{_fmt_tick(t)}</text>')

    # axes drawn after the grid so they stay visible
    parts.append(
        f'<line x1="{_MARGIN_LEFT}" y1="{_MARGIN_TOP}" x2="{_MARGIN_LEFT}" '
        f'y2="{_MARGIN_TOP + plot_h}" stroke="#333333" stroke-width="1.2"/>')
    parts.append(
        f'<line x1="{_MARGIN_LEFT}" y1="{_MARGIN_TOP + plot_h}" '
        f'x2="{_MARGIN_LEFT + plot_w}" y2="{_MARGIN_TOP + plot_h}" '
        f'stroke="#333333" stroke-width="1.2"/>')
    parts.append(
        f'<text x="{_MARGIN_LEFT + plot_w / 2:.1f}" y="{_HEIGHT - 16}" '
        f'text-anchor="middle" font-family="sans-serif" font-size="13">'
        f'{_escape(x_label)}</text>')
    parts.append(
        f'<text x="20" y="{_MARGIN_TOP + plot_h / 2:.1f}" '
        f'text-anchor="middle" font-family="sans-serif" font-size="13" '
        f'transform="rotate(-90 20 {_MARGIN_TOP + plot_h / 2:.1f})">'
        f'{_escape(y_label)}</text>')

    for entry, color in zip(series, _SERIES_COLORS):
        points = " ".join(f"{px(x):.2f},{py(y):.2f}"
                          for x, y in zip(entry.x, entry.y))
        parts.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="1.6" '
            f'points="{points}"/>')
    if len(series) > 1:
        for i, (entry, color) in enumerate(zip(series, _SERIES_COLORS)):
            y = _MARGIN_TOP + 14 + 18 * i
            x = _MARGIN_LEFT + plot_w - 150
            parts.append(
                f'<line x1="{x}" y1="{y}" x2="{x + 24}" y2="{y}" '
                f'stroke="{color}" stroke-width="1.6"/>')
            parts.append(
                f'<text x="{x + 30}" y="{y + 4}" font-family="sans-serif" '
                f'font-size="11">{_escape(entry.label)}</text>')

    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_chart(path, svg: str) -> None:
    """Write a chart document; UTF-8 because axis labels may carry µ."""
    Path(path).write_text(svg, encoding="utf-8", newline="\n")
