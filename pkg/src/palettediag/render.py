"""Streamgraph and heatmap layout plus deterministic SVG emission.

The 1D diagram stacks one band per group over the ordered vertex axis; the
2D diagram shows the same matrix as a color-depth grid.  All geometry is
computed here so tests can assert conservation without parsing SVG, and
the SVG text itself is byte-stable: fixed float formatting, no timestamps,
no randomness beyond the seeded color assignment.
"""

from __future__ import annotations

import colorsys
from dataclasses import dataclass, field

import numpy as np

from .ensemble import AssignmentMatrix
from .errors import ConfigError
from .embedding import VertexOrder

FLOAT_DECIMALS = 4

# Hand-picked categorical table; pairwise CIE76 distance >= 25 (verified
# by the color-distance test).
FIXED_COLORS = (
    (31, 119, 180),
    (255, 127, 14),
    (44, 160, 44),
    (214, 39, 40),
    (148, 103, 189),
    (140, 86, 75),
    (227, 119, 194),
    (127, 127, 127),
    (188, 189, 34),
    (23, 190, 207),
    (57, 59, 121),
    (255, 192, 203),
)
GOLDEN_RATIO_CONJUGATE = 0.6180339887498949
RESIDUAL_COLOR = (187, 187, 187)


def _fmt(v: float) -> str:
    s = f"{float(v):.{FLOAT_DECIMALS}f}"
    return "0.0000" if s == "-0.0000" else s


@dataclass(frozen=True)
class PaletteLayout:
    """Geometry of the 1D streamgraph.

    ``bands[g, i]`` is the (lower, upper) boundary pair of band g at vertex
    position i; stacking order is row order and identical at every
    position.
    """

    order: VertexOrder
    bands: np.ndarray  # (n_bands, n_positions, 2)
    baseline: np.ndarray  # (n_positions,)
    colors: tuple[tuple[int, int, int], ...]
    labels: tuple[str, ...]
    scale: float

    @property
    def lower(self) -> np.ndarray:
        return self.bands[:, :, 0]

    @property
    def upper(self) -> np.ndarray:
        return self.bands[:, :, 1]


@dataclass(frozen=True)
class HeatmapLayout:
    """Opacity grid for the 2D diagram; rows = groups, columns = order."""

    order: VertexOrder
    grid: np.ndarray  # (n_groups, n_positions) opacities in [0, 1]
    colors: tuple[tuple[int, int, int], ...]
    labels: tuple[str, ...]


@dataclass(frozen=True)
class SvgStyle:
    width: int = 960
    height: int = 360
    margin: int = 40
    legend: bool = True
    legend_width: int = 180


def group_label(partition_name: str, local_index: int) -> str:
    return f"{partition_name}/{local_index}"


def assign_colors(n_groups: int, seed: int = 0) -> list[tuple[int, int, int]]:
    """Deterministic categorical colors.

    The first 12 come from a fixed table chosen for mutual CIE76 distance;
    further colors walk the hue circle by the golden-ratio conjugate in
    HSL (s=0.65, l=0.5) from a seed-derived start, which keeps any number
    of extra colors roughly evenly spread.
    """
    if n_groups < 1:
        raise ConfigError("need at least one group to color")
    colors = list(FIXED_COLORS[:n_groups])
    if n_groups > len(FIXED_COLORS):
        rng = np.random.default_rng([int(seed), len(FIXED_COLORS)])
        hue = float(rng.random())
        for _ in range(n_groups - len(FIXED_COLORS)):
            hue = (hue + GOLDEN_RATIO_CONJUGATE) % 1.0
            # colorsys takes hue, lightness, saturation in that order
            r, g, b = colorsys.hls_to_rgb(hue, 0.5, 0.65)
            colors.append(
                (int(round(r * 255)), int(round(g * 255)), int(round(b * 255)))
            )
    return colors


def _matrix_labels(m: AssignmentMatrix) -> tuple[str, ...]:
    return tuple(group_label(name, idx) for name, idx in m.group_labels)


def _infer_scale(m: AssignmentMatrix) -> float:
    names = {name for name, _ in m.group_labels}
    return float(max(1, len(names)))


def streamgraph_layout(
    m: AssignmentMatrix,
    baseline_mode: str = "symmetric",
    scale: float | None = None,
    colors: list[tuple[int, int, int]] | None = None,
    residual_totals: np.ndarray | None = None,
    order: VertexOrder | None = None,
) -> PaletteLayout:
    """Stack band heights f_g(i) = p_{g,i}/scale over a per-position baseline.

    scale defaults to the number of partitions contributing rows, so a full
    hard-partition stack has unit total width.  residual_totals, when
    given, adds a final grey band carrying per-vertex mass that filtering
    removed from the display.
    """
    if scale is None:
        scale = _infer_scale(m)
    if not scale > 0:
        raise ConfigError("scale must be positive")
    if baseline_mode not in ("zero", "symmetric", "wiggle"):
        raise ConfigError(f"unknown baseline mode {baseline_mode!r}")

    f = m.entries / scale
    labels = _matrix_labels(m)
    band_colors = list(colors) if colors is not None else assign_colors(f.shape[0])
    if len(band_colors) != f.shape[0]:
        raise ConfigError(
            f"{len(band_colors)} colors for {f.shape[0]} groups"
        )
    if residual_totals is not None:
        res = np.asarray(residual_totals, dtype=float)
        if res.shape != (m.n_vertices,):
            raise ConfigError("residual totals must have one entry per vertex")
        if np.any(res < 0):
            raise ConfigError("residual totals must be nonnegative")
        f = np.vstack([f, res / scale])
        labels = labels + ("(residual)",)
        band_colors.append(RESIDUAL_COLOR)

    n_bands, n_pos = f.shape
    total = f.sum(axis=0)
    if baseline_mode == "zero":
        g0 = np.zeros(n_pos)
    elif baseline_mode == "symmetric":
        g0 = -0.5 * total
    else:
        g0 = _wiggle_baseline(f)

    cum = np.cumsum(f, axis=0)
    lower = np.vstack([g0[None, :], g0[None, :] + cum[:-1]]) if n_bands > 1 \
        else g0[None, :]
    upper = g0[None, :] + cum
    bands = np.stack([lower, upper], axis=2)
    bands.flags.writeable = False
    g0.flags.writeable = False
    if order is None:
        order = VertexOrder(permutation=tuple(range(n_pos)), source="")
    if len(order.permutation) != n_pos:
        raise ConfigError("order length does not match matrix width")
    return PaletteLayout(
        order=order,
        bands=bands,
        baseline=g0,
        colors=tuple(band_colors),
        labels=labels,
        scale=float(scale),
    )


def _wiggle_baseline(f: np.ndarray) -> np.ndarray:
    """Weighted-wiggle-minimizing baseline, integrated left to right.

    Per position the baseline slope is the thickness-weighted mean of the
    band midline slopes, negated; the free integration constant is set so
    the first column is centered like the symmetric baseline.
    """
    n_bands, n_pos = f.shape
    g0 = np.empty(n_pos)
    g0[0] = -0.5 * f[:, 0].sum()
    for i in range(1, n_pos):
        df = f[:, i] - f[:, i - 1]
        below = np.concatenate([[0.0], np.cumsum(df)[:-1]])
        s = f[:, i].sum()
        delta = 0.0 if s <= 0 else -float(((below + 0.5 * df) * f[:, i]).sum() / s)
        g0[i] = g0[i - 1] + delta
    return g0


def heatmap_layout(m: AssignmentMatrix) -> np.ndarray:
    """Opacity grid: the matrix entries clamped to [0, 1]."""
    grid = np.clip(m.entries, 0.0, 1.0)
    grid.flags.writeable = False
    return grid


def emit_svg(layout, style: SvgStyle = SvgStyle()) -> str:
    """Serialize a layout as SVG 1.1 text with stable 4-decimal formatting."""
    plot_w = style.width - 2 * style.margin - (
        style.legend_width if style.legend else 0
    )
    plot_h = style.height - 2 * style.margin
    if plot_w <= 0 or plot_h <= 0:
        raise ConfigError(
            f"canvas {style.width}x{style.height} leaves no plot area"
        )
    if isinstance(layout, PaletteLayout):
        body = _svg_streamgraph(layout, style, plot_w, plot_h)
        legend_items = list(zip(layout.labels, layout.colors))
    elif isinstance(layout, HeatmapLayout):
        body = _svg_heatmap(layout.grid, layout.colors, style, plot_w, plot_h)
        legend_items = list(zip(layout.labels, layout.colors))
    elif isinstance(layout, np.ndarray):
        grid = np.asarray(layout, dtype=float)
        cols = assign_colors(grid.shape[0])
        body = _svg_heatmap(grid, cols, style, plot_w, plot_h)
        legend_items = [
            (f"group {g}", cols[g]) for g in range(grid.shape[0])
        ]
    else:
        raise ConfigError(f"cannot render object of type {type(layout).__name__}")

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{style.width}" height="{style.height}" '
        f'viewBox="0 0 {style.width} {style.height}">',
        body,
    ]
    if style.legend:
        parts.append(_svg_legend(legend_items, style))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def color_hex(color: tuple[int, int, int]) -> str:
    return "#{:02x}{:02x}{:02x}".format(*color)


_hex = color_hex


def _svg_streamgraph(
    layout: PaletteLayout, style: SvgStyle, plot_w: float, plot_h: float
) -> str:
    n_bands, n_pos, _ = layout.bands.shape
    lo = float(layout.bands[:, :, 0].min())
    hi = float(layout.bands[:, :, 1].max())
    span = hi - lo
    if span <= 0.0:
        span = 1.0
    xs = (
        [style.margin + 0.5 * plot_w]
        if n_pos == 1
        else [style.margin + plot_w * i / (n_pos - 1) for i in range(n_pos)]
    )

    def ypix(v: float) -> float:
        return style.margin + plot_h * (hi - v) / span

    paths = []
    for g in range(n_bands):
        d = []
        for i in range(n_pos):
            cmd = "M" if i == 0 else "L"
            d.append(f"{cmd}{_fmt(xs[i])},{_fmt(ypix(layout.bands[g, i, 1]))}")
        for i in range(n_pos - 1, -1, -1):
            d.append(f"L{_fmt(xs[i])},{_fmt(ypix(layout.bands[g, i, 0]))}")
        d.append("Z")
        paths.append(
            f'<path fill="{_hex(layout.colors[g])}" d="{" ".join(d)}"/>'
        )
    return "\n".join(paths)


def _svg_heatmap(
    grid: np.ndarray,
    colors,
    style: SvgStyle,
    plot_w: float,
    plot_h: float,
) -> str:
    n_rows, n_cols = grid.shape
    cw = plot_w / n_cols
    rh = plot_h / n_rows
    rows = []
    for g in range(n_rows):
        y = style.margin + g * rh
        cells = [
            f'<rect x="{_fmt(style.margin + i * cw)}" y="{_fmt(y)}" '
            f'width="{_fmt(cw)}" height="{_fmt(rh)}" '
            f'opacity="{_fmt(grid[g, i])}"/>'
            for i in range(n_cols)
        ]
        rows.append(
            f'<g fill="{_hex(colors[g])}">' + "".join(cells) + "</g>"
        )
    return "\n".join(rows)


def _svg_legend(items, style: SvgStyle) -> str:
    x = style.width - style.legend_width - style.margin + 12
    out = []
    for idx, (label, color) in enumerate(items):
        y = style.margin + idx * 18
        out.append(
            f'<rect x="{x}" y="{y}" width="12" height="12" '
            f'fill="{_hex(color)}"/>'
        )
        out.append(
            f'<text x="{x + 18}" y="{y + 10}" font-family="sans-serif" '
            f'font-size="11">{_escape(label)}</text>'
        )
    return "\n".join(out)


def _escape(text: str) -> str:
    return (
        text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
    )


# --- color-space helpers (used by the palette-distance test) -------------


def srgb_to_lab(color: tuple[int, int, int]) -> tuple[float, float, float]:
    """CIE L*a*b* under D65, via linear sRGB and XYZ."""

    def lin(c: float) -> float:
        c /= 255.0
        return c / 12.92 if c <= 0.04045 else ((c + 0.055) / 1.055) ** 2.4

    r, g, b = (lin(c) for c in color)
    x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b
    y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b
    z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b
    xn, yn, zn = 0.95047, 1.0, 1.08883

    def f(t: float) -> float:
        return t ** (1 / 3) if t > (6 / 29) ** 3 else t / (3 * (6 / 29) ** 2) + 4 / 29

    fx, fy, fz = f(x / xn), f(y / yn), f(z / zn)
    return 116 * fy - 16, 500 * (fx - fy), 200 * (fy - fz)


def cie76(c1: tuple[int, int, int], c2: tuple[int, int, int]) -> float:
    l1, a1, b1 = srgb_to_lab(c1)
    l2, a2, b2 = srgb_to_lab(c2)
    return ((l1 - l2) ** 2 + (a1 - a2) ** 2 + (b1 - b2) ** 2) ** 0.5
