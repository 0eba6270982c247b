from __future__ import annotations

import math
from dataclasses import dataclass
from xml.sax.saxutils import escape, quoteattr

import numpy as np

seriesColors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


class SVG:
    def __init__(self, width: float, height: float):
        self.width = width
        self.height = height
        self.svg = ""

    def _attributes(self, extra: dict) -> str:
        return "".join(
            f" {key.replace('_', '-')}={quoteattr(str(value))}"
            for key, value in extra.items()
        )

    def rectangle(self, x, y, width, height, fill, **extra):
        self.svg += (
            f'<rect x="{x:.2f}" y="{y:.2f}" width="{width:.2f}" '
            f'height="{height:.2f}" fill="{fill}"{self._attributes(extra)}/>\n'
        )

    def line(self, x1, y1, x2, y2, stroke="#000", **extra):
        self.svg += (
            f'<line x1="{x1:.2f}" y1="{y1:.2f}" x2="{x2:.2f}" y2="{y2:.2f}" '
            f'stroke="{stroke}"{self._attributes(extra)}/>\n'
        )

    def polyline(self, points, stroke, **extra):
        coordinates = " ".join(f"{x:.2f},{y:.2f}" for x, y in points)
        self.svg += (
            f'<polyline points="{coordinates}" fill="none" '
            f'stroke="{stroke}"{self._attributes(extra)}/>\n'
        )

    def text(self, x, y, string, **extra):
        self.svg += (
            f'<text x="{x:.2f}" y="{y:.2f}"{self._attributes(extra)}>'
            f"{escape(str(string))}</text>\n"
        )

    def getSVG(self) -> str:
        return (
            '<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
            f'width="{self.width}" height="{self.height}" '
            f'viewBox="0 0 {self.width} {self.height}" '
            'font-family="sans-serif" font-size="11">\n'
            f"{self.svg}</svg>\n"
        )


@dataclass(kw_only=True)
class Series:
    label: str
    x: list[float]
    y: list[float]
    # half-width of the error band, same length as y
    spread: list[float] | None = None


def lineChart(
    series: list[Series],
    title: str,
    xLabel: str,
    yLabel: str,
    yRange: tuple[float, float] = (0.0, 1.0),
    width: int = 640,
    height: int = 420,
) -> str:
    left, right, top, bottom = 60, 130, 40, 50
    plotWidth = width - left - right
    plotHeight = height - top - bottom
    xs = [x for s in series for x in s.x]
    xMin, xMax = (min(xs), max(xs)) if xs else (0.0, 1.0)
    if xMax == xMin:
        xMax = xMin + 1
    yMin, yMax = yRange

    def px(x):
        return left + (x - xMin) / (xMax - xMin) * plotWidth

    def py(y):
        y = min(max(y, yMin), yMax)
        return top + (1 - (y - yMin) / (yMax - yMin)) * plotHeight

    svg = SVG(width, height)
    svg.rectangle(0, 0, width, height, "#fff")
    svg.text(width / 2, 20, title, text_anchor="middle", font_size=14)

    for i in range(6):
        yValue = yMin + i * (yMax - yMin) / 5
        svg.line(left, py(yValue), left + plotWidth, py(yValue), stroke="#ddd")
        svg.text(left - 6, py(yValue) + 4, f"{yValue:.2f}", text_anchor="end")
    for i in range(7):
        xValue = xMin + i * (xMax - xMin) / 6
        svg.line(px(xValue), top + plotHeight, px(xValue), top + plotHeight + 4)
        svg.text(px(xValue), top + plotHeight + 18, f"{xValue:g}", text_anchor="middle")
    svg.line(left, top, left, top + plotHeight)
    svg.line(left, top + plotHeight, left + plotWidth, top + plotHeight)
    svg.text(left + plotWidth / 2, height - 10, xLabel, text_anchor="middle")
    svg.text(
        15,
        top + plotHeight / 2,
        yLabel,
        text_anchor="middle",
        transform=f"rotate(-90 15 {top + plotHeight / 2:.2f})",
    )

    for index, s in enumerate(series):
        color = seriesColors[index % len(seriesColors)]
        points = [(px(x), py(y)) for x, y in zip(s.x, s.y) if math.isfinite(y)]
        if s.spread is not None:
            for x, y, spread in zip(s.x, s.y, s.spread):
                if math.isfinite(y) and math.isfinite(spread):
                    svg.line(px(x), py(y - spread), px(x), py(y + spread), stroke=color)
        if points:
            svg.polyline(points, color, stroke_width=1.5)
        legendY = top + 10 + index * 18
        svg.line(width - right + 10, legendY, width - right + 30, legendY, stroke=color)
        svg.text(width - right + 35, legendY + 4, s.label)

    return svg.getSVG()


def _grayLevel(value: float) -> str:
    # 0 is white, 1 is black
    level = round(255 * (1 - min(max(value, 0.0), 1.0)))
    return f"#{level:02x}{level:02x}{level:02x}"


def heatmap(matrix: np.ndarray, title: str, cellSize: int = 24) -> str:
    """Gray-level rendering of a nonnegative matrix, scaled by its maximum,
    rows and columns numbered from 1."""
    matrix = np.asarray(matrix, dtype=float)
    rows, columns = matrix.shape
    largest = matrix.max(initial=0.0)
    scaled = matrix / largest if largest > 0 else np.zeros_like(matrix)
    margin = 30
    width = margin + columns * cellSize + 10
    height = margin + 20 + rows * cellSize + 10

    svg = SVG(width, height)
    svg.rectangle(0, 0, width, height, "#fff")
    svg.text(width / 2, 16, title, text_anchor="middle", font_size=13)
    top = margin + 20
    for i in range(rows):
        svg.text(margin - 4, top + (i + 0.5) * cellSize + 4, i + 1, text_anchor="end")
        for j in range(columns):
            svg.rectangle(
                margin + j * cellSize,
                top + i * cellSize,
                cellSize,
                cellSize,
                _grayLevel(scaled[i, j]),
                stroke="#ccc",
                stroke_width=0.5,
            )
    for j in range(columns):
        svg.text(margin + (j + 0.5) * cellSize, top - 4, j + 1, text_anchor="middle")
    return svg.getSVG()
