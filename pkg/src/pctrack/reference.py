"""Piecewise reference trajectory generation.

A reference is a chain of contiguous segments, each holding a constant
forward speed and one of three heading behaviors: constant turn rate,
or a smooth exponential blend that ramps the turn rate from zero to a
final value over the segment.  The simulation engine integrates the
reference pose on its own grid and only queries the rate functions here;
standalone sampling reconstructs the pose from closed forms where they
exist and from a cached fine-grid quadrature across blend segments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional

import numpy as np

# Exponent floor below which the blend factor exp(g) is treated as zero;
# keeps 0 * inf out of the rate expressions near the blend start.
_EXP_FLOOR = -700.0

_BLEND_TABLE_DT = 1e-3


class OutOfRange(Exception):
    """Time queried outside the span covered by the reference segments."""


class ReferenceSample(NamedTuple):
    x_d: float          # target north position [m]
    y_d: float          # target east position [m]
    psi_ld: float       # reference heading [rad], accumulated (not wrapped)
    u_ld: float         # reference speed [m/s]
    psi_ld_dot: float   # reference turn rate [rad/s]
    u_ld_dot: float     # reference acceleration [m/s^2]
    psi_ld_ddot: float  # reference turn acceleration [rad/s^2]


@dataclass
class Segment:
    """One piece of the reference: [t_start, t_end) with its own heading law.

    ``kind`` is "rate" (constant turn rate) or "exp_blend" (turn rate
    rate*exp((t - t_end)/(t - t_start)), zero at the segment start and
    rate at the end).  ``t_end`` of None extends to infinity.
    """

    t_start: float
    t_end: Optional[float]
    u_ld: float
    kind: str = "rate"
    rate: float = 0.0

    def contains(self, t: float) -> bool:
        return t >= self.t_start and (self.t_end is None or t < self.t_end)

    def psi_ld_dot(self, t: float) -> float:
        if self.kind == "rate":
            return self.rate
        # exponential blend, only meaningful strictly inside the segment
        if t <= self.t_start:
            return 0.0
        g = (t - self.t_end) / (t - self.t_start)
        if g < _EXP_FLOOR:
            return 0.0
        return self.rate * math.exp(g)

    def psi_ld_ddot(self, t: float) -> float:
        if self.kind == "rate":
            return 0.0
        if t <= self.t_start:
            return 0.0
        g = (t - self.t_end) / (t - self.t_start)
        if g < _EXP_FLOOR:
            return 0.0
        span = self.t_end - self.t_start
        return self.rate * math.exp(g) * span / (t - self.t_start) ** 2


@dataclass
class ReferenceSpec:
    """Initial reference pose plus the contiguous segment chain."""

    x0: float
    y0: float
    psi0: float  # [rad]
    segments: List[Segment]
    _starts: list = field(default_factory=list, repr=False)
    _blend_tables: dict = field(default_factory=dict, repr=False)

    def validate(self, u_m: Optional[float] = None) -> list[str]:
        problems = []
        if not self.segments:
            problems.append("reference needs at least one segment")
            return problems
        if self.segments[0].t_start != 0.0:
            problems.append("reference segments must start at t = 0")
        for a, b in zip(self.segments, self.segments[1:]):
            if a.t_end is None or abs(a.t_end - b.t_start) > 1e-12:
                problems.append("reference segments must be contiguous in time")
                break
        for i, seg in enumerate(self.segments):
            if seg.u_ld <= 0.0:
                problems.append(f"reference segment {i}: forward speed must be > 0")
            if u_m is not None and seg.u_ld < u_m:
                problems.append(
                    f"reference segment {i}: forward speed {seg.u_ld} below floor u_m={u_m}")
            if seg.kind not in ("rate", "exp_blend"):
                problems.append(f"reference segment {i}: unknown heading kind {seg.kind!r}")
            if seg.kind == "exp_blend" and seg.t_end is None:
                problems.append(f"reference segment {i}: blend segment needs a finite end")
        return problems

    def min_speed(self) -> float:
        return min(seg.u_ld for seg in self.segments)

    def _segment(self, t: float) -> Segment:
        if t < 0.0:
            raise OutOfRange(f"reference undefined for t={t} < 0")
        for seg in self.segments:
            if seg.contains(t):
                return seg
        last = self.segments[-1]
        if last.t_end is not None and t >= last.t_end:
            raise OutOfRange(f"reference undefined for t={t} beyond {last.t_end}")
        return last

    def u_ld(self, t: float) -> float:
        return self._segment(t).u_ld

    def rates(self, t: float) -> tuple:
        """(forward speed, turn rate) with a single segment lookup."""
        seg = self._segment(t)
        return seg.u_ld, seg.psi_ld_dot(t)

    def psi_ld_dot(self, t: float) -> float:
        return self._segment(t).psi_ld_dot(t)

    def psi_ld_ddot(self, t: float) -> float:
        return self._segment(t).psi_ld_ddot(t)

    # -- standalone pose reconstruction ------------------------------------

    def _segment_starts(self):
        """Pose (t, x, y, psi) at the start of each segment, built lazily."""
        if self._starts:
            return self._starts
        t, x, y, psi = 0.0, self.x0, self.y0, self.psi0
        self._starts = [(t, x, y, psi)]
        for seg in self.segments[:-1]:
            x, y, psi = self._propagate(seg, seg.t_end, (x, y, psi))
            self._starts.append((seg.t_end, x, y, psi))
        return self._starts

    def _propagate(self, seg: Segment, t: float, start_pose):
        """Pose at time t inside segment seg, starting from the segment start."""
        x, y, psi = start_pose
        dt_seg = t - seg.t_start
        if seg.kind == "rate" and seg.rate == 0.0:
            return (x + seg.u_ld * math.cos(psi) * dt_seg,
                    y + seg.u_ld * math.sin(psi) * dt_seg,
                    psi)
        if seg.kind == "rate":
            # constant-rate arc
            psi_t = psi + seg.rate * dt_seg
            radius = seg.u_ld / seg.rate
            return (x + radius * (math.sin(psi_t) - math.sin(psi)),
                    y - radius * (math.cos(psi_t) - math.cos(psi)),
                    psi_t)
        tt, xs, ys, psis = self._blend_table(seg, start_pose)
        return (float(np.interp(t, tt, xs)),
                float(np.interp(t, tt, ys)),
                float(np.interp(t, tt, psis)))

    def _blend_table(self, seg: Segment, start_pose):
        """Cached fine-grid quadrature of heading and position over a blend."""
        key = id(seg)
        if key not in self._blend_tables:
            n = max(2, int(round((seg.t_end - seg.t_start) / _BLEND_TABLE_DT)) + 1)
            tt = np.linspace(seg.t_start, seg.t_end, n)
            rates = np.array([seg.psi_ld_dot(t) for t in tt])
            psis = start_pose[2] + _cumtrapz(rates, tt)
            xs = start_pose[0] + _cumtrapz(seg.u_ld * np.cos(psis), tt)
            ys = start_pose[1] + _cumtrapz(seg.u_ld * np.sin(psis), tt)
            self._blend_tables[key] = (tt, xs, ys, psis)
        return self._blend_tables[key]

    def sample(self, t: float) -> ReferenceSample:
        """Reference sample at time t, reconstructing the pose."""
        seg = self._segment(t)
        starts = self._segment_starts()
        idx = self.segments.index(seg)
        start_pose = starts[idx][1:]
        x, y, psi = self._propagate(seg, t, start_pose)
        return ReferenceSample(
            x_d=x, y_d=y, psi_ld=psi,
            u_ld=seg.u_ld,
            psi_ld_dot=seg.psi_ld_dot(t),
            u_ld_dot=0.0,
            psi_ld_ddot=seg.psi_ld_ddot(t),
        )


def _cumtrapz(values: np.ndarray, t: np.ndarray) -> np.ndarray:
    out = np.zeros_like(values)
    out[1:] = np.cumsum(0.5 * (values[1:] + values[:-1]) * np.diff(t))
    return out


def standard_reference(
    cruise_speed: float = 10.0,
    x0: float = 100.0,
    y0: float = 30.0,
    psi0: float = math.pi / 2.0,
    turn_rate: float = -0.05,
    straight_until: float = 60.0,
    blend_until: float = 75.0,
) -> ReferenceSpec:
    """Straight leg, smooth blend into a turn, then a steady turn.

    The default numbers give the benchmark trajectory used by the scenario
    presets: a straight constant-heading leg, a 15 s exponential blend of
    the turn rate, then a constant turn.  Only the cruise speed differs
    between presets.
    """
    return ReferenceSpec(
        x0=x0, y0=y0, psi0=psi0,
        segments=[
            Segment(0.0, straight_until, cruise_speed, kind="rate", rate=0.0),
            Segment(straight_until, blend_until, cruise_speed,
                    kind="exp_blend", rate=turn_rate),
            Segment(blend_until, None, cruise_speed, kind="rate", rate=turn_rate),
        ],
    )
