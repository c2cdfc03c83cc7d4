"""Gantt chart geometry and its SVG rendering.

:func:`build_gantt` lays a schedule out as plain numbers: one row per (stage,
machine), one bar per operation, and a power strip underneath that traces the
total draw against ``q_max``. :func:`render_svg` draws that geometry through
the ``gantt.svg`` template; ``--json-gantt`` writes it out as data instead.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from edffs.config import AppConfig
from edffs.constants import (
    GANTT_FROZEN_COLOUR,
    GANTT_LABEL_WIDTH,
    GANTT_MARGIN,
    GANTT_PALETTE,
    GANTT_POWER_STRIP_HEIGHT,
    GANTT_ROW_GAP,
    GANTT_ROW_HEIGHT,
    GANTT_UNIT_WIDTH,
)
from edffs.model import Instance, OpStatus, Schedule, power_profile
from edffs.templating import render

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GanttRow:
    stage: int
    machine: int
    label: str
    y: float


@dataclass(frozen=True)
class GanttBar:
    job: int
    stage: int
    machine: int
    start: float
    end: float
    x: float
    y: float
    width: float
    height: float
    label: str
    colour: str
    frozen: bool


@dataclass
class GanttChart:
    """Everything the SVG template draws, in SVG units."""

    width: float
    height: float
    horizon: float
    rows: list[GanttRow] = field(default_factory=list)
    bars: list[GanttBar] = field(default_factory=list)
    ticks: list[tuple[float, str]] = field(default_factory=list)
    power_points: list[tuple[float, float]] = field(default_factory=list)
    power_top: float = 0.0
    power_bottom: float = 0.0
    q_max: float = 0.0
    q_max_y: float = 0.0
    peak: float = 0.0
    rs: float | None = None
    rs_x: float | None = None

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def _x(t: float) -> float:
    return GANTT_MARGIN + GANTT_LABEL_WIDTH + t * GANTT_UNIT_WIDTH


def build_gantt(instance: Instance, schedule: Schedule, rs: float | None = None) -> GanttChart:
    """Lay out *schedule*; *rs* adds a vertical line at the rescheduling point."""
    finish = schedule.completion(instance)
    assigned = (schedule.assign >= 0) & np.isfinite(schedule.start)
    horizon = float(finish[assigned].max()) if assigned.any() else 1.0
    pitch = GANTT_ROW_HEIGHT + GANTT_ROW_GAP

    rows = [
        GanttRow(s, m, f"S{s} M{m}", GANTT_MARGIN + (s * instance.o + m) * pitch)
        for s in range(instance.g)
        for m in range(instance.o)
    ]

    bars = []
    for j, s in np.argwhere(assigned).tolist():
        m = int(schedule.assign[j, s])
        start, end = float(schedule.start[j, s]), float(finish[j, s])
        frozen = schedule.status[j, s] == OpStatus.FROZEN
        bars.append(
            GanttBar(
                job=j,
                stage=s,
                machine=m,
                start=start,
                end=end,
                x=_x(start),
                y=rows[s * instance.o + m].y,
                width=(end - start) * GANTT_UNIT_WIDTH,
                height=GANTT_ROW_HEIGHT,
                label=f"{j}:{s}",
                colour=GANTT_FROZEN_COLOUR if frozen else GANTT_PALETTE[j % len(GANTT_PALETTE)],
                frozen=bool(frozen),
            )
        )

    power_top = GANTT_MARGIN + len(rows) * pitch + GANTT_ROW_GAP
    power_bottom = power_top + GANTT_POWER_STRIP_HEIGHT
    profile = power_profile(instance, schedule)
    scale_top = max(instance.q_max, profile.peak) or 1.0

    def level_y(power: float) -> float:
        return power_bottom - power / scale_top * GANTT_POWER_STRIP_HEIGHT

    points = [(_x(0.0), level_y(0.0))]
    level = 0.0
    for t, power in profile.breakpoints:
        points.append((_x(t), level_y(level)))
        points.append((_x(t), level_y(power)))
        level = power
    points.append((_x(horizon), level_y(level)))

    chart = GanttChart(
        width=_x(horizon) + GANTT_MARGIN,
        height=power_bottom + GANTT_MARGIN,
        horizon=horizon,
        rows=rows,
        bars=bars,
        ticks=[(_x(float(t)), f"{t:g}") for t in range(0, int(np.ceil(horizon)) + 1)],
        power_points=points,
        power_top=power_top,
        power_bottom=power_bottom,
        q_max=instance.q_max,
        q_max_y=level_y(instance.q_max),
        peak=profile.peak,
        rs=rs,
        rs_x=_x(rs) if rs is not None else None,
    )
    logger.debug("Gantt: %d bars over horizon %.3f", len(bars), horizon)
    return chart


def render_svg(chart: GanttChart, config: AppConfig | None = None) -> str:
    return render(
        "gantt.svg",
        config,
        chart=chart,
        label_x=GANTT_MARGIN,
        plot_left=_x(0.0),
        frozen_colour=GANTT_FROZEN_COLOUR,
    )
