"""Minimal deterministic SVG grid heatmaps (no plotting dependency).

Hand-rolled so output bytes are a pure function of the input: no timestamps,
no generated ids. Each data cell is exactly one ``<rect>`` element, which
keeps the structure testable.
"""
from __future__ import annotations

from pathlib import Path

from .errors import DataFileError

# diverging palette anchors: -1 -> NEG_HEX, 0 -> MID_HEX, +1 -> POS_HEX
NEG_HEX = "#2166ac"
MID_HEX = "#f7f7f7"
POS_HEX = "#b2182b"

CELL = 46
MARGIN_LEFT = 170
MARGIN_TOP = 60
MARGIN_BOTTOM = 150
MARGIN_RIGHT = 20


def _hex_to_rgb(h: str):
    return tuple(int(h[i : i + 2], 16) for i in (1, 3, 5))


def _rgb_to_hex(rgb) -> str:
    return "#%02x%02x%02x" % rgb


def _lerp(a, b, t: float):
    return tuple(int(round(a[i] + (b[i] - a[i]) * t)) for i in range(3))


def diverging_color(v: float) -> str:
    """Map [-1, 1] onto the blue-white-red diverging palette."""
    v = min(1.0, max(-1.0, float(v)))
    if v < 0.0:
        return _rgb_to_hex(_lerp(_hex_to_rgb(MID_HEX), _hex_to_rgb(NEG_HEX), -v))
    return _rgb_to_hex(_lerp(_hex_to_rgb(MID_HEX), _hex_to_rgb(POS_HEX), v))


def sequential_color(v: float) -> str:
    """Map [0, 1] onto a white-to-blue ramp."""
    v = min(1.0, max(0.0, float(v)))
    return _rgb_to_hex(_lerp(_hex_to_rgb("#ffffff"), _hex_to_rgb("#08519c"), v))


def _luminance(hex_color: str) -> float:
    r, g, b = _hex_to_rgb(hex_color)
    return (0.299 * r + 0.587 * g + 0.114 * b) / 255.0


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def render_grid_svg(path, colors, texts, row_labels, col_labels, title: str = "",
                    meta: str = "") -> None:
    """Write an n x m colored grid with per-cell text and axis labels.

    ``meta`` (e.g. seed / config hash) is embedded as an SVG ``<desc>``.
    """
    n = len(colors)
    m = len(colors[0]) if n else 0
    width = MARGIN_LEFT + m * CELL + MARGIN_RIGHT
    height = MARGIN_TOP + n * CELL + MARGIN_BOTTOM
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<style>text{{font-family:monospace;font-size:11px}}</style>',
    ]
    if meta:
        parts.append(f"<desc>{_esc(meta)}</desc>")
    if title:
        parts.append(
            f'<text x="{MARGIN_LEFT + m * CELL / 2:.0f}" y="24" text-anchor="middle" '
            f'font-size="15">{_esc(title)}</text>'
        )
    for i in range(n):
        for j in range(m):
            x = MARGIN_LEFT + j * CELL
            y = MARGIN_TOP + i * CELL
            fill = colors[i][j]
            parts.append(
                f'<rect class="cell" x="{x}" y="{y}" width="{CELL}" height="{CELL}" '
                f'fill="{fill}" stroke="#ffffff" stroke-width="1"/>'
            )
            text_fill = "#000000" if _luminance(fill) > 0.5 else "#ffffff"
            parts.append(
                f'<text x="{x + CELL / 2:.0f}" y="{y + CELL / 2 + 4:.0f}" '
                f'text-anchor="middle" fill="{text_fill}">{_esc(texts[i][j])}</text>'
            )
    for i, lab in enumerate(row_labels):
        y = MARGIN_TOP + i * CELL + CELL / 2 + 4
        parts.append(
            f'<text x="{MARGIN_LEFT - 6}" y="{y:.0f}" text-anchor="end">{_esc(lab)}</text>'
        )
    for j, lab in enumerate(col_labels):
        x = MARGIN_LEFT + j * CELL + CELL / 2
        y = MARGIN_TOP + n * CELL + 10
        parts.append(
            f'<text x="{x:.0f}" y="{y:.0f}" text-anchor="end" '
            f'transform="rotate(-60 {x:.0f} {y:.0f})">{_esc(lab)}</text>'
        )
    parts.append("</svg>")
    payload = "\n".join(parts) + "\n"
    try:
        Path(path).write_text(payload, encoding="utf-8")
    except OSError as exc:
        raise DataFileError(f"cannot write SVG to {path}: {exc}") from exc
