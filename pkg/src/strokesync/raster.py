"""Deterministic software rasterizer: scenes to fixed 640x360 RGB frames.

Monochrome, no font engine, no anti-aliasing; identical input produces a
byte-identical frame. Output coordinates handed to predictors stay in canvas
units — the viewport only affects what the predictor sees, never what it
emits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .scene import Element, ElementType, Scene, scene_bounds

FRAME_W = 640
FRAME_H = 360
MARGIN = 16

_STAMP_OFFSETS = ((0, 0), (1, 0), (0, 1), (1, 1))  # 2px stroke width


@dataclass(frozen=True)
class Viewport:
    """Uniform canvas-to-pixel map: px = x * scale + offset."""

    scale: float
    offset_x: float
    offset_y: float

    def to_px(self, x: float, y: float) -> tuple[float, float]:
        return (x * self.scale + self.offset_x, y * self.scale + self.offset_y)


IDENTITY_VIEWPORT = Viewport(1.0, 0.0, 0.0)


@dataclass(frozen=True)
class RasterFrame:
    width: int
    height: int
    pixels: bytes

    def __post_init__(self) -> None:
        expected = self.width * self.height * 3
        if len(self.pixels) != expected:
            raise ValueError(f"pixel buffer must be {expected} bytes, got {len(self.pixels)}")

    def as_array(self) -> np.ndarray:
        return np.frombuffer(self.pixels, dtype=np.uint8).reshape(
            self.height, self.width, 3
        )


def blank_frame() -> RasterFrame:
    return RasterFrame(FRAME_W, FRAME_H, b"\xff" * (FRAME_W * FRAME_H * 3))


def fit_viewport(bounds: tuple[float, float, float, float]) -> Viewport:
    """Uniform scale fitting `bounds` into the frame minus a 16px margin,
    centered. Zero-extent bounds get scale 1 with the content centered."""
    min_x, min_y, max_x, max_y = bounds
    w = max_x - min_x
    h = max_y - min_y
    inner_w = FRAME_W - 2 * MARGIN
    inner_h = FRAME_H - 2 * MARGIN
    sx = inner_w / w if w > 0 else math.inf
    sy = inner_h / h if h > 0 else math.inf
    scale = min(sx, sy)
    if not math.isfinite(scale):
        scale = 1.0
    return Viewport(
        scale=scale,
        offset_x=(FRAME_W - w * scale) / 2 - min_x * scale,
        offset_y=(FRAME_H - h * scale) / 2 - min_y * scale,
    )


def _put(buf: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> None:
    h, w = buf.shape[:2]
    for ox, oy in _STAMP_OFFSETS:
        px = xs + ox
        py = ys + oy
        keep = (px >= 0) & (px < w) & (py >= 0) & (py < h)
        buf[py[keep], px[keep]] = 0


def _clip_segment(
    x0: float, y0: float, x1: float, y1: float, w: int, h: int
) -> tuple[float, float, float, float] | None:
    """Liang-Barsky clip to the frame (plus stamp slack); None if fully out."""
    lo_x = lo_y = -2.0
    hi_x, hi_y = w + 2.0, h + 2.0
    t0, t1 = 0.0, 1.0
    dx, dy = x1 - x0, y1 - y0
    for p, q in ((-dx, x0 - lo_x), (dx, hi_x - x0), (-dy, y0 - lo_y), (dy, hi_y - y0)):
        if p == 0:
            if q < 0:
                return None
            continue
        r = q / p
        if p < 0:
            if r > t1:
                return None
            if r > t0:
                t0 = r
        else:
            if r < t0:
                return None
            if r < t1:
                t1 = r
    return (x0 + t0 * dx, y0 + t0 * dy, x0 + t1 * dx, y0 + t1 * dy)


def _segment(buf: np.ndarray, p0: tuple[float, float], p1: tuple[float, float]) -> None:
    h, w = buf.shape[:2]
    clipped = _clip_segment(p0[0], p0[1], p1[0], p1[1], w, h)
    if clipped is None:
        return
    x0, y0, x1, y1 = clipped
    n = int(max(abs(x1 - x0), abs(y1 - y0)) + 0.5) + 1
    t = np.arange(n + 1, dtype=np.float64) / n
    xs = np.floor(x0 + t * (x1 - x0) + 0.5).astype(np.intp)
    ys = np.floor(y0 + t * (y1 - y0) + 0.5).astype(np.intp)
    _put(buf, xs, ys)


def _polyline(buf: np.ndarray, pts: list[tuple[float, float]]) -> None:
    if len(pts) == 1:
        _segment(buf, pts[0], pts[0])
        return
    for p0, p1 in zip(pts, pts[1:]):
        _segment(buf, p0, p1)


def _fill_triangle(
    buf: np.ndarray,
    a: tuple[float, float],
    b: tuple[float, float],
    c: tuple[float, float],
) -> None:
    h, w = buf.shape[:2]
    lo_x = max(0, int(math.floor(min(a[0], b[0], c[0]))))
    hi_x = min(w - 1, int(math.ceil(max(a[0], b[0], c[0]))))
    lo_y = max(0, int(math.floor(min(a[1], b[1], c[1]))))
    hi_y = min(h - 1, int(math.ceil(max(a[1], b[1], c[1]))))
    if lo_x > hi_x or lo_y > hi_y:
        return
    ys, xs = np.mgrid[lo_y : hi_y + 1, lo_x : hi_x + 1]
    px = xs + 0.5
    py = ys + 0.5

    def edge(p, q):
        return (q[0] - p[0]) * (py - p[1]) - (q[1] - p[1]) * (px - p[0])

    e0, e1, e2 = edge(a, b), edge(b, c), edge(c, a)
    inside = ((e0 >= 0) & (e1 >= 0) & (e2 >= 0)) | ((e0 <= 0) & (e1 <= 0) & (e2 <= 0))
    buf[lo_y : hi_y + 1, lo_x : hi_x + 1][inside] = 0


def _arrow_head(buf: np.ndarray, tail: tuple[float, float], tip: tuple[float, float]) -> None:
    dx = tip[0] - tail[0]
    dy = tip[1] - tail[1]
    length = math.hypot(dx, dy)
    if length == 0:
        return
    ux, uy = dx / length, dy / length
    size = min(10.0, max(4.0, length / 3))
    base = (tip[0] - ux * size, tip[1] - uy * size)
    half = size / 2
    left = (base[0] - uy * half, base[1] + ux * half)
    right = (base[0] + uy * half, base[1] - ux * half)
    _fill_triangle(buf, tip, left, right)


def _box_outline(buf: np.ndarray, p0: tuple[float, float], p1: tuple[float, float]) -> None:
    (x0, y0), (x1, y1) = p0, p1
    _polyline(buf, [(x0, y0), (x1, y0), (x1, y1), (x0, y1), (x0, y0)])


def _ellipse_outline(
    buf: np.ndarray, p0: tuple[float, float], p1: tuple[float, float]
) -> None:
    cx = (p0[0] + p1[0]) / 2
    cy = (p0[1] + p1[1]) / 2
    rx = abs(p1[0] - p0[0]) / 2
    ry = abs(p1[1] - p0[1]) / 2
    n = min(512, max(32, int(2 * math.pi * max(rx, ry))))
    pts = [
        (cx + rx * math.cos(2 * math.pi * i / n), cy + ry * math.sin(2 * math.pi * i / n))
        for i in range(n + 1)
    ]
    _polyline(buf, pts)


def _glyph_row(buf: np.ndarray, p0: tuple[float, float], p1: tuple[float, float]) -> None:
    # Placeholder marks along the box midline; no font rendering. Marks are
    # anchored to the box's left edge so clamping the visible range cannot
    # shift their phase.
    h, w = buf.shape[:2]
    x0, x1 = min(p0[0], p1[0]), max(p0[0], p1[0])
    y_mid = (p0[1] + p1[1]) / 2
    if y_mid < -4 or y_mid > h + 4:
        return
    first = 0
    if x0 + 4 < -4:
        first = int(math.ceil((-4 - (x0 + 4)) / 6))
    x = x0 + 4 + 6 * first
    stop = min(x1 - 4, w + 4.0)
    while x + 2 <= stop:
        xs = np.array([int(math.floor(x + 0.5))], dtype=np.intp)
        ys = np.array([int(math.floor(y_mid - 1 + 0.5))], dtype=np.intp)
        _put(buf, xs, ys)
        _put(buf, xs, ys + 2)
        x += 6


def _draw_element(buf: np.ndarray, e: Element, vp: Viewport) -> None:
    if e.type in (ElementType.FREEDRAW, ElementType.LINE, ElementType.ARROW):
        pts = [vp.to_px(px, py) for px, py in e.absolute_points()]
        _polyline(buf, pts)
        if e.type is ElementType.ARROW and len(pts) >= 2:
            _arrow_head(buf, pts[-2], pts[-1])
        return
    p0 = vp.to_px(e.x, e.y)
    p1 = vp.to_px(e.x + e.width, e.y + e.height)
    if e.type is ElementType.RECTANGLE:
        _box_outline(buf, p0, p1)
    elif e.type is ElementType.ELLIPSE:
        _ellipse_outline(buf, p0, p1)
    else:  # text: box placeholder plus a glyph row
        _box_outline(buf, p0, p1)
        _glyph_row(buf, p0, p1)


def render(scene: Scene, vp: Viewport | None = None) -> RasterFrame:
    """Rasterize a scene onto a white 640x360 frame.

    With `vp` unset, the viewport is fitted per scene; an empty scene
    renders blank.
    """
    buf = np.full((FRAME_H, FRAME_W, 3), 255, dtype=np.uint8)
    if scene.elements:
        if vp is None:
            vp = fit_viewport(scene_bounds(scene))
        for e in scene.elements:
            _draw_element(buf, e, vp)
    return RasterFrame(FRAME_W, FRAME_H, buf.tobytes())


def draw_element(frame: RasterFrame, e: Element, vp: Viewport) -> RasterFrame:
    """Paint one more element onto an existing frame (incremental render)."""
    buf = frame.as_array().copy()
    _draw_element(buf, e, vp)
    return RasterFrame(frame.width, frame.height, buf.tobytes())


def save_png(frame: RasterFrame, path: str | Path) -> None:
    from PIL import Image

    image = Image.frombytes("RGB", (frame.width, frame.height), frame.pixels)
    image.save(Path(path), format="PNG")
