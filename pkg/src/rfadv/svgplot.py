"""Hand-rolled SVG line plots: no plotting stack, deterministic output."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

WIDTH, HEIGHT = 640, 440
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 160, 40, 60

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


@dataclass
class Series:
    name: str
    xs: list[float]
    ys: list[float]
    dashed: bool = False


@dataclass
class LinePlot:
    title: str
    xlabel: str
    ylabel: str
    series: list[Series] = field(default_factory=list)

    def add(self, name, xs, ys, dashed=False):
        self.series.append(Series(name, list(map(float, xs)),
                                  list(map(float, ys)), dashed))

    def render(self) -> str:
        xs = [x for s in self.series for x in s.xs if math.isfinite(x)]
        ys = [y for s in self.series for y in s.ys if math.isfinite(y)]
        if not xs:
            xs, ys = [0.0, 1.0], [0.0, 1.0]
        x_lo, x_hi = min(xs), max(xs)
        y_lo, y_hi = min(0.0, min(ys)), max(1.0, max(ys))
        if x_hi == x_lo:
            x_hi = x_lo + 1.0

        def sx(x):
            return MARGIN_L + (x - x_lo) / (x_hi - x_lo) * (WIDTH - MARGIN_L - MARGIN_R)

        def sy(y):
            return HEIGHT - MARGIN_B - (y - y_lo) / (y_hi - y_lo) * (
                HEIGHT - MARGIN_T - MARGIN_B)

        out = [
            f'<svg xmlns="http://www.w3.org/2000/svg" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" '
            f'font-size="12">',
            f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
            f'<text x="{WIDTH / 2:.0f}" y="20" text-anchor="middle" '
            f'font-size="15">{_esc(self.title)}</text>',
        ]
        # axes
        x0, y0 = sx(x_lo), sy(y_lo)
        x1, y1 = sx(x_hi), sy(y_hi)
        out.append(f'<line x1="{x0:.1f}" y1="{y0:.1f}" x2="{x1:.1f}" '
                   f'y2="{y0:.1f}" stroke="black"/>')
        out.append(f'<line x1="{x0:.1f}" y1="{y0:.1f}" x2="{x0:.1f}" '
                   f'y2="{y1:.1f}" stroke="black"/>')
        for i in range(6):
            xv = x_lo + i * (x_hi - x_lo) / 5
            yv = y_lo + i * (y_hi - y_lo) / 5
            out.append(f'<line x1="{sx(xv):.1f}" y1="{y0:.1f}" '
                       f'x2="{sx(xv):.1f}" y2="{y0 + 5:.1f}" stroke="black"/>')
            out.append(f'<text x="{sx(xv):.1f}" y="{y0 + 18:.1f}" '
                       f'text-anchor="middle">{xv:.3g}</text>')
            out.append(f'<line x1="{x0 - 5:.1f}" y1="{sy(yv):.1f}" '
                       f'x2="{x0:.1f}" y2="{sy(yv):.1f}" stroke="black"/>')
            out.append(f'<text x="{x0 - 8:.1f}" y="{sy(yv) + 4:.1f}" '
                       f'text-anchor="end">{yv:.2f}</text>')
        out.append(f'<text x="{(x0 + x1) / 2:.0f}" y="{HEIGHT - 12}" '
                   f'text-anchor="middle">{_esc(self.xlabel)}</text>')
        out.append(f'<text x="18" y="{(sy(y_lo) + sy(y_hi)) / 2:.0f}" '
                   f'text-anchor="middle" transform="rotate(-90 18 '
                   f'{(sy(y_lo) + sy(y_hi)) / 2:.0f})">{_esc(self.ylabel)}</text>')
        # series
        for i, s in enumerate(self.series):
            color = PALETTE[i % len(PALETTE)]
            pts = [(x, y) for x, y in zip(s.xs, s.ys)
                   if math.isfinite(x) and math.isfinite(y)]
            if not pts:
                continue
            coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in pts)
            dash = ' stroke-dasharray="6,4"' if s.dashed else ""
            out.append(f'<polyline points="{coords}" fill="none" '
                       f'stroke="{color}" stroke-width="1.8"{dash}/>')
            ly = MARGIN_T + 16 * i
            lx = WIDTH - MARGIN_R + 10
            out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 22}" y2="{ly}" '
                       f'stroke="{color}" stroke-width="1.8"{dash}/>')
            out.append(f'<text x="{lx + 28}" y="{ly + 4}">{_esc(s.name)}</text>')
        out.append("</svg>")
        return "\n".join(out) + "\n"


def _esc(text: str) -> str:
    return (str(text).replace("&", "&amp;").replace("<", "&lt;")
            .replace(">", "&gt;"))
