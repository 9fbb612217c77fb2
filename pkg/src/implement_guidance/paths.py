"""Reference path geometry: piecewise line/arc paths, curvature lookup, Frenet projection.

Paths are ordered sequences of G1-continuous segments. Lines have curvature 0;
arcs carry a signed curvature (positive = left turn). Curvature may jump at
junctions; a junction abscissa belongs to the later segment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import PathConstructionError, RangeError

_G1_TOL = 1e-9
_TWO_PI = 2.0 * math.pi


def wrap_angle(a: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    a = math.fmod(a, _TWO_PI)
    if a > math.pi:
        a -= _TWO_PI
    elif a <= -math.pi:
        a += _TWO_PI
    return a


@dataclass(frozen=True)
class PathSegment:
    kind: str                      # "line" or "arc"
    start: tuple[float, float]     # world coordinates, m
    start_heading: float           # rad
    length: float                  # m, > 0
    curvature: float               # 1/m; 0 for lines, signed for arcs

    def __post_init__(self):
        if self.kind not in ("line", "arc"):
            raise PathConstructionError(f"unknown segment kind {self.kind!r}")
        if not self.length > 0:
            raise PathConstructionError(f"segment length must be > 0, got {self.length}")
        if self.kind == "line" and self.curvature != 0.0:
            raise PathConstructionError("line segment must have curvature 0")
        if self.kind == "arc" and self.curvature == 0.0:
            raise PathConstructionError("arc segment must have nonzero curvature")

    def point_at(self, u: float) -> tuple[float, float, float]:
        """Exact (x, y, heading) at arc length u from the segment start."""
        x0, y0 = self.start
        h = self.start_heading
        c = self.curvature
        if c == 0.0:
            return x0 + u * math.cos(h), y0 + u * math.sin(h), h
        # circle center sits at 1/c along the left normal of the start tangent
        cx = x0 - math.sin(h) / c
        cy = y0 + math.cos(h) / c
        a = h + c * u
        return cx + math.sin(a) / c, cy - math.cos(a) / c, wrap_angle(a)

    def end_pose(self) -> tuple[float, float, float]:
        return self.point_at(self.length)

    def center(self) -> tuple[float, float]:
        """Arc center; undefined for lines."""
        x0, y0 = self.start
        h = self.start_heading
        c = self.curvature
        return x0 - math.sin(h) / c, y0 + math.cos(h) / c


@dataclass(frozen=True)
class FrenetState:
    s: float            # curvilinear abscissa, m
    y: float            # lateral deviation, m, positive left of the tangent
    theta_tilde: float  # angular deviation, rad, in (-pi, pi]


@dataclass(frozen=True)
class Projection:
    """Result of projecting a world pose onto the path."""
    frenet: FrenetState
    clamped: bool = False    # nearest point was a path endpoint, s clamped
    ambiguous: bool = False  # multiple global minimizers, smallest s chosen


@dataclass(frozen=True)
class ReferencePath:
    segments: tuple[PathSegment, ...]
    cumulative_lengths: tuple[float, ...] = field(init=False)
    labels: tuple[str, ...] = field(init=False)

    def __post_init__(self):
        if not self.segments:
            raise PathConstructionError("path needs at least one segment")
        cum = []
        total = 0.0
        n_line = n_arc = 0
        labels = []
        prev_end = None
        for i, seg in enumerate(self.segments):
            if prev_end is not None:
                ex, ey, eh = prev_end
                sx, sy = seg.start
                if math.hypot(sx - ex, sy - ey) > _G1_TOL or abs(wrap_angle(seg.start_heading - eh)) > _G1_TOL:
                    raise PathConstructionError(f"G1 discontinuity at junction {i}")
            prev_end = seg.end_pose()
            total += seg.length
            cum.append(total)
            if seg.kind == "line":
                n_line += 1
                labels.append(f"L{n_line}")
            else:
                n_arc += 1
                labels.append(f"C{n_arc}")
        object.__setattr__(self, "cumulative_lengths", tuple(cum))
        object.__setattr__(self, "labels", tuple(labels))

    @property
    def total_length(self) -> float:
        return self.cumulative_lengths[-1]

    def segment_index(self, s: float) -> int:
        """Index of the segment containing s; a junction belongs to the later segment."""
        if s < 0.0 or s > self.total_length:
            raise RangeError(f"s={s} outside [0, {self.total_length}]")
        for i, c in enumerate(self.cumulative_lengths):
            if s < c:
                return i
        return len(self.segments) - 1

    def segment_label(self, s: float) -> str:
        return self.labels[self.segment_index(s)]

    def junctions(self) -> tuple[float, ...]:
        """Abscissae of interior junctions where curvature may jump."""
        return self.cumulative_lengths[:-1]

    def min_arc_radius(self) -> float:
        radii = [1.0 / abs(seg.curvature) for seg in self.segments if seg.kind == "arc"]
        return min(radii) if radii else math.inf

    def point_at(self, s: float) -> tuple[tuple[float, float], float, float]:
        """(position, tangent heading, curvature) at abscissa s; piecewise exact."""
        i = self.segment_index(s)
        seg = self.segments[i]
        u = s - (self.cumulative_lengths[i - 1] if i > 0 else 0.0)
        x, y, h = seg.point_at(u)
        return (x, y), h, seg.curvature

    def curvature_at(self, s: float) -> float:
        return self.segments[self.segment_index(s)].curvature

    def curvature_ahead(self, s: float, ds: float) -> float:
        """Curvature at s + ds, clamped to the path end (preview lookup)."""
        return self.curvature_at(min(max(s + ds, 0.0), self.total_length))

    def project(self, position: tuple[float, float], heading: float) -> Projection:
        """Closest-point projection of a world pose onto the path.

        Returns the Frenet state at the global distance minimizer; ties break
        to the smallest s (flagged ambiguous); positions beyond the path ends
        clamp s to [0, total_length] (flagged clamped).
        """
        px, py = position
        candidates = []  # (distance, s, clamped)
        s0 = 0.0
        for seg in self.segments:
            u, clamped = _project_segment(seg, px, py)
            x, y, _ = seg.point_at(u)
            d = math.hypot(px - x, py - y)
            candidates.append((d, s0 + u, clamped))
            s0 += seg.length
        d_best = min(c[0] for c in candidates)
        near = [c for c in candidates if c[0] <= d_best + 1e-9]
        near.sort(key=lambda c: c[1])
        _, s_best, clamp_best = near[0]
        # two candidates at distinct abscissae within tolerance: genuinely ambiguous
        ambiguous = any(abs(c[1] - s_best) > 1e-6 for c in near[1:])
        # interior endpoint hits are junction duplicates, not clamping
        clamped = clamp_best and (s_best <= 1e-12 or s_best >= self.total_length - 1e-12)
        (qx, qy), th, _ = self.point_at(min(s_best, self.total_length))
        nx, ny = -math.sin(th), math.cos(th)
        y_signed = (px - qx) * nx + (py - qy) * ny
        return Projection(
            frenet=FrenetState(s=min(s_best, self.total_length), y=y_signed,
                               theta_tilde=wrap_angle(heading - th)),
            clamped=clamped,
            ambiguous=ambiguous,
        )


def _project_segment(seg: PathSegment, px: float, py: float) -> tuple[float, bool]:
    """Arc length u in [0, length] of the closest point on one segment.

    Second value is True when the minimizer was clamped to a segment end.
    """
    if seg.curvature == 0.0:
        x0, y0 = seg.start
        tx, ty = math.cos(seg.start_heading), math.sin(seg.start_heading)
        u = (px - x0) * tx + (py - y0) * ty
        if u < 0.0:
            return 0.0, True
        if u > seg.length:
            return seg.length, True
        return u, False
    cx, cy = seg.center()
    c = seg.curvature
    ang = math.atan2(py - cy, px - cx)
    # radial direction at arc length u has angle (h + c*u) -/+ pi/2 for c >/< 0
    if c > 0:
        u = (ang + math.pi / 2 - seg.start_heading) / c
    else:
        u = (ang - math.pi / 2 - seg.start_heading) / c
    period = _TWO_PI / abs(c)
    u = math.fmod(u, period)
    if u < 0.0:
        u += period
    if u <= seg.length:
        return u, False
    # off the swept arc: nearer endpoint wins
    d_start = math.hypot(px - seg.start[0], py - seg.start[1])
    ex, ey, _ = seg.end_pose()
    d_end = math.hypot(px - ex, py - ey)
    return (0.0, True) if d_start <= d_end else (seg.length, True)


def build_path(
    descriptors: list[dict],
    start: tuple[float, float] = (0.0, 0.0),
    start_heading: float = 0.0,
) -> ReferencePath:
    """Chain segment descriptors {kind, length_m, curvature_per_m} into a path.

    Segments are chained pose-continuously from the initial pose; a descriptor
    may pin its own start pose (x_m, y_m, heading_rad), which must match the
    chained pose within 1e-9 or construction fails naming the junction.
    """
    segs = []
    x, y, h = start[0], start[1], start_heading
    for i, d in enumerate(descriptors):
        kind = d["kind"]
        length = float(d["length_m"])
        curv = float(d.get("curvature_per_m", 0.0))
        if "x_m" in d or "y_m" in d or "heading_rad" in d:
            px, py = float(d.get("x_m", x)), float(d.get("y_m", y))
            ph = float(d.get("heading_rad", h))
            if segs and (math.hypot(px - x, py - y) > _G1_TOL or abs(wrap_angle(ph - h)) > _G1_TOL):
                raise PathConstructionError(f"G1 discontinuity at junction {i}")
            x, y, h = px, py, ph
        seg = PathSegment(kind=kind, start=(x, y), start_heading=h, length=length, curvature=curv)
        segs.append(seg)
        x, y, h = seg.end_pose()
    return ReferencePath(segments=tuple(segs))


# Experiment path presets. The source figures show shapes but no dimensions;
# these radii sit well above the implement lateral offset and the steering
# feasibility bound for a ~1.2 m wheelbase.
PRESET_DESCRIPTORS = {
    # straight, then a positive-curvature arc, then a negative-curvature arc
    "exp1": [
        {"kind": "line", "length_m": 20.0},
        {"kind": "arc", "length_m": 10.0 * math.pi / 2, "curvature_per_m": 0.1},
        {"kind": "arc", "length_m": 8.0 * math.pi / 2, "curvature_per_m": -0.125},
    ],
    # alternating straights and arcs, including one curve-to-curve junction
    "exp2": [
        {"kind": "line", "length_m": 10.0},
        {"kind": "arc", "length_m": 10.0 * math.pi / 2, "curvature_per_m": 0.1},
        {"kind": "line", "length_m": 10.0},
        {"kind": "arc", "length_m": 8.0 * math.pi / 2, "curvature_per_m": -0.125},
        {"kind": "arc", "length_m": 12.0 * math.pi / 3, "curvature_per_m": 1.0 / 12.0},
        {"kind": "line", "length_m": 10.0},
    ],
}


def build_experiment_path(preset_or_descriptors, start=(0.0, 0.0), start_heading=0.0) -> ReferencePath:
    """Build a preset path by name ("exp1", "exp2") or from explicit descriptors."""
    if isinstance(preset_or_descriptors, str):
        try:
            descriptors = PRESET_DESCRIPTORS[preset_or_descriptors]
        except KeyError:
            raise PathConstructionError(f"unknown path preset {preset_or_descriptors!r}") from None
    else:
        descriptors = preset_or_descriptors
    return build_path(descriptors, start=start, start_heading=start_heading)
