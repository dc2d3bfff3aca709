"""Minimal SVG 1.1 plots: probability heatmap, scatter, lines and a filled band."""
from __future__ import annotations

from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

LABEL_COLORS = ("#1f5fbf", "#d62728")


def prob_color(p: float) -> str:
    """Blue at 0, white at 1/2, red at 1."""
    p = min(max(float(p), 0.0), 1.0)
    lo, mid, hi = np.array([31, 95, 191]), np.array([255, 255, 255]), np.array([214, 39, 40])
    c = lo + (mid - lo) * 2 * p if p < 0.5 else mid + (hi - mid) * (2 * p - 1)
    return "#%02x%02x%02x" % tuple(int(round(v)) for v in c)


class SvgPlot:
    """A single axes box mapping data coordinates onto a fixed pixel canvas."""

    def __init__(self, xlim, ylim, width: int = 480, height: int = 480, margin: int = 50,
                 title: str = "", xlabel: str = "x1", ylabel: str = "x2"):
        self.xlim = (float(xlim[0]), float(xlim[1]))
        self.ylim = (float(ylim[0]), float(ylim[1]))
        self.width, self.height, self.margin = width, height, margin
        self.title, self.xlabel, self.ylabel = title, xlabel, ylabel
        self._body: list[str] = []

    def _px(self, x, y):
        m = self.margin
        sx = m + (np.asarray(x, dtype=float) - self.xlim[0]) / (self.xlim[1] - self.xlim[0]) * (self.width - 2 * m)
        sy = self.height - m - (np.asarray(y, dtype=float) - self.ylim[0]) / (self.ylim[1] - self.ylim[0]) * (
            self.height - 2 * m)
        return sx, sy

    @staticmethod
    def _f(v) -> str:
        return f"{float(v):.2f}"

    def heatmap(self, x_values, y_values, p, opacity: float = 0.6) -> None:
        """Cell ``(i, j)`` of ``p`` is drawn centred on ``(x_values[i], y_values[j])``."""
        x_values, y_values = np.asarray(x_values, float), np.asarray(y_values, float)
        xe = _edges(x_values)
        ye = _edges(y_values)
        for i in range(x_values.size):
            for j in range(y_values.size):
                x0, y1 = self._px(xe[i], ye[j])
                x1, y0 = self._px(xe[i + 1], ye[j + 1])
                self._body.append(
                    f'<rect x="{self._f(x0)}" y="{self._f(y0)}" width="{self._f(x1 - x0)}" '
                    f'height="{self._f(y1 - y0)}" fill="{prob_color(p[i, j])}" fill-opacity="{opacity}" '
                    f'stroke="none"/>'
                )

    def scatter(self, X, colors, radius: float = 2.5, stroke: str = "none") -> None:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if isinstance(colors, str):
            colors = [colors] * len(X)
        sx, sy = self._px(X[:, 0], X[:, 1])
        for a, b, c in zip(sx, sy, colors):
            self._body.append(f'<circle cx="{self._f(a)}" cy="{self._f(b)}" r="{radius}" fill="{c}" '
                              f'stroke="{stroke}"/>')

    def line(self, x, y, color: str = "black", width: float = 1.5, dash: str | None = None) -> None:
        sx, sy = self._px(x, y)
        pts = " ".join(f"{self._f(a)},{self._f(b)}" for a, b in zip(sx, sy))
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        self._body.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="{width}"{extra}/>')

    def band(self, x, lower, upper, color: str = "#555555", opacity: float = 0.35) -> None:
        x = np.asarray(x, dtype=float)
        xs = np.r_[x, x[::-1]]
        ys = np.r_[np.asarray(lower, float), np.asarray(upper, float)[::-1]]
        sx, sy = self._px(xs, ys)
        pts = " ".join(f"{self._f(a)},{self._f(b)}" for a, b in zip(sx, sy))
        self._body.append(f'<polygon points="{pts}" fill="{color}" fill-opacity="{opacity}" stroke="none"/>')

    def marker(self, x, color: str = "black", size: float = 7.0) -> None:
        a, b = self._px(x[0], x[1])
        s = size
        self._body.append(
            f'<path d="M{self._f(a - s)},{self._f(b - s)} L{self._f(a + s)},{self._f(b + s)} '
            f'M{self._f(a - s)},{self._f(b + s)} L{self._f(a + s)},{self._f(b - s)}" '
            f'stroke="{color}" stroke-width="2.5"/>'
        )

    def to_svg(self) -> str:
        m, w, h = self.margin, self.width, self.height
        iw, ih = w - 2 * m, h - 2 * m
        head = [
            '<?xml version="1.0" encoding="UTF-8"?>',
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" '
            f'viewBox="0 0 {w} {h}">',
            f'<defs><clipPath id="plotbox"><rect x="{m}" y="{m}" width="{iw}" height="{ih}"/></clipPath></defs>',
            f'<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>',
            '<g clip-path="url(#plotbox)">',
        ]
        tail = [
            "</g>",
            f'<rect x="{m}" y="{m}" width="{iw}" height="{ih}" fill="none" stroke="black"/>',
        ]
        for k in range(5):
            t = k / 4
            xv = self.xlim[0] + t * (self.xlim[1] - self.xlim[0])
            yv = self.ylim[0] + t * (self.ylim[1] - self.ylim[0])
            px, _ = self._px(xv, self.ylim[0])
            _, py = self._px(self.xlim[0], yv)
            tail.append(f'<text x="{self._f(px)}" y="{h - m + 16}" font-size="11" text-anchor="middle">'
                        f'{xv:.2f}</text>')
            tail.append(f'<text x="{m - 6}" y="{self._f(py + 4)}" font-size="11" text-anchor="end">{yv:.2f}</text>')
        tail += [
            f'<text x="{w / 2}" y="{h - 10}" font-size="13" text-anchor="middle">{escape(self.xlabel)}</text>',
            f'<text x="14" y="{h / 2}" font-size="13" text-anchor="middle" '
            f'transform="rotate(-90 14 {h / 2})">{escape(self.ylabel)}</text>',
            f'<text x="{w / 2}" y="{m / 2}" font-size="14" text-anchor="middle">{escape(self.title)}</text>',
            "<desc>" + escape(f"xlim={self.xlim} ylim={self.ylim}") + "</desc>",
            "</svg>",
        ]
        return "\n".join(head + self._body + tail) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.to_svg())


def _edges(centres: np.ndarray) -> np.ndarray:
    mid = (centres[1:] + centres[:-1]) / 2
    return np.r_[centres[0] - (mid[0] - centres[0]), mid, centres[-1] + (centres[-1] - mid[-1])]

