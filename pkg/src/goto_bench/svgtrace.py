"""Footstep trace rendering as standalone SVG.

Each placement is a semi-transparent rectangle at the foot pose: left
feet carry a black border, right feet do not, and a small arrowhead
shows the foot's heading. Start and goal poses are black dot-and-arrow
markers. Output bytes are a pure function of the input trace.
"""

from __future__ import annotations

import math
from typing import List, Sequence

from .geometry import Pose2
from .stepper import StepRecord

SCALE = 120.0  # pixels per meter
PADDING = 0.6  # meters of margin around the content
FOOT_LENGTH = 0.22
FOOT_WIDTH = 0.09
ARROW_LENGTH = 0.3

LEFT_FILL = "#3182bd"
RIGHT_FILL = "#e6550d"


def _fmt(v: float) -> str:
    return f"{v:.2f}"


class _Canvas:
    """Maps world coordinates (y up) onto the SVG viewport (y down)."""

    def __init__(self, xs: Sequence[float], ys: Sequence[float]):
        self.x0 = min(xs) - PADDING
        self.y1 = max(ys) + PADDING
        self.width = (max(xs) - min(xs) + 2 * PADDING) * SCALE
        self.height = (max(ys) - min(ys) + 2 * PADDING) * SCALE

    def to_px(self, x: float, y: float):
        return (x - self.x0) * SCALE, (self.y1 - y) * SCALE


def _foot_rect(canvas: _Canvas, pose: Pose2, side: str) -> str:
    cx, cy = canvas.to_px(pose.x, pose.y)
    deg = -math.degrees(pose.theta)  # y axis is flipped in the viewport
    w = FOOT_LENGTH * SCALE
    h = FOOT_WIDTH * SCALE
    fill = LEFT_FILL if side == "L" else RIGHT_FILL
    stroke = ' stroke="black" stroke-width="1.5"' if side == "L" else ""
    tip = FOOT_LENGTH * 0.5 * SCALE
    back = FOOT_LENGTH * 0.25 * SCALE
    half = FOOT_WIDTH * 0.35 * SCALE
    return (
        f'<g transform="translate({_fmt(cx)},{_fmt(cy)}) rotate({_fmt(deg)})">'
        f'<rect class="foot foot-{side}" x="{_fmt(-w / 2)}" y="{_fmt(-h / 2)}" '
        f'width="{_fmt(w)}" height="{_fmt(h)}" fill="{fill}" fill-opacity="0.45"{stroke}/>'
        f'<path d="M {_fmt(tip)} 0 L {_fmt(back)} {_fmt(-half)} L {_fmt(back)} {_fmt(half)} Z" '
        f'fill="{fill}"/>'
        f"</g>"
    )


def _pose_marker(canvas: _Canvas, pose: Pose2, label: str) -> str:
    cx, cy = canvas.to_px(pose.x, pose.y)
    tx, ty = canvas.to_px(
        pose.x + ARROW_LENGTH * math.cos(pose.theta),
        pose.y + ARROW_LENGTH * math.sin(pose.theta),
    )
    # Arrowhead at the tip of the heading line.
    ang = math.atan2(ty - cy, tx - cx)
    a1 = ang + math.radians(150)
    a2 = ang - math.radians(150)
    s = 7.0
    return (
        f'<g class="marker marker-{label}">'
        f'<line x1="{_fmt(cx)}" y1="{_fmt(cy)}" x2="{_fmt(tx)}" y2="{_fmt(ty)}" '
        f'stroke="black" stroke-width="2"/>'
        f'<path d="M {_fmt(tx)} {_fmt(ty)} L {_fmt(tx + s * math.cos(a1))} '
        f'{_fmt(ty + s * math.sin(a1))} L {_fmt(tx + s * math.cos(a2))} '
        f'{_fmt(ty + s * math.sin(a2))} Z" fill="black"/>'
        f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="4" fill="black"/>'
        f"</g>"
    )


def render_traces(records: Sequence[StepRecord], start: Pose2, goal: Pose2) -> str:
    """Render a footstep trace with start/goal markers as an SVG string.

    An empty trace yields just the two pose markers. The output is
    byte-identical for identical input.
    """
    xs: List[float] = [start.x, goal.x] + [r.pose.x for r in records]
    ys: List[float] = [start.y, goal.y] + [r.pose.y for r in records]
    canvas = _Canvas(xs, ys)
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(canvas.width)}" '
        f'height="{_fmt(canvas.height)}" '
        f'viewBox="0 0 {_fmt(canvas.width)} {_fmt(canvas.height)}">',
        '<rect width="100%" height="100%" fill="white"/>',
    ]
    parts.extend(_foot_rect(canvas, r.pose, r.foot) for r in records)
    parts.append(_pose_marker(canvas, start, "start"))
    parts.append(_pose_marker(canvas, goal, "goal"))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
