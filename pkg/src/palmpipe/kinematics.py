"""Closed-form kinematics of the inverted five-bar contact linkages.

Each of the three display rows is one planar five-bar: two cranks (l2,
l5) anchored at (0, 0) and (l1, 0), coupled by two distal links (l3, l4)
meeting at the contact point C = (x, y).  The two actuated angles are
solved dyad by dyad with the tangent-half-angle substitution.

Left dyad (anchor at origin, links l2 then l3):

    D = -2*l2*x,  E = -2*l2*y,  H = l2^2 + x^2 + y^2 - l3^2
    (H - D)*t^2 + 2*E*t + (H + D) = 0,   tau_a = 2*atan(t)

Right dyad (anchor at (l1, 0), links l5 then l4) is the same with

    I = -2*l5*(x - l1),  J = -2*l5*y,  K = l5^2 + (x - l1)^2 + y^2 - l4^2

The +/- root choice is the elbow (branch) selection; correctness is
defined by the forward-kinematic round trip FK(IK(c)) = c.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core_types import STIM_SIZE

Branch = tuple[int, int]
DEFAULT_BRANCH: Branch = (1, -1)  # elbow-out on both dyads: opens away from the palm

_ROUNDTRIP_TOL = 1e-9


class OutOfWorkspaceError(ValueError):
    """Target not reachable by the linkage (negative IK discriminant)."""


class SingularConfigurationError(ValueError):
    """Degenerate linkage pose: no unique solution exists."""


@dataclass(frozen=True)
class LinkageGeometry:
    """Link lengths in mm; base anchors at (0, 0) and (l1, 0)."""

    l1: float = 40.0
    l2: float = 25.0
    l3: float = 40.0
    l4: float = 40.0
    l5: float = 25.0

    def __post_init__(self) -> None:
        for name in ("l1", "l2", "l3", "l4", "l5"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        # Non-empty workspace check: sample the midline for at least one
        # target both dyads can reach.
        for y in np.linspace(1.0, self.l2 + self.l3, 64):
            if self._reachable(self.l1 / 2.0, float(y)):
                return
        raise ValueError("linkage workspace is empty for these link lengths")

    def _reachable(self, x: float, y: float) -> bool:
        left = math.hypot(x, y)
        right = math.hypot(x - self.l1, y)
        return (
            abs(self.l2 - self.l3) <= left <= self.l2 + self.l3
            and abs(self.l5 - self.l4) <= right <= self.l5 + self.l4
        )


@dataclass(frozen=True)
class ServoAngles:
    """Actuated joint angles in radians, with the elbow branch they solve."""

    tau_a: float
    tau_e: float
    branch: Branch = DEFAULT_BRANCH

    def __post_init__(self) -> None:
        for name, value in (("tau_a", self.tau_a), ("tau_e", self.tau_e)):
            if not (-math.pi < value <= math.pi):
                raise ValueError(f"{name}={value} outside (-pi, pi]")
        if self.branch[0] not in (-1, 1) or self.branch[1] not in (-1, 1):
            raise ValueError(f"branch signs must be +/-1, got {self.branch}")


def _solve_dyad(dd: float, ee: float, hh: float, sign: int) -> float:
    """Root of (H-D)t^2 + 2Et + (H+D) = 0 as an angle 2*atan(t)."""
    disc = ee * ee + dd * dd - hh * hh
    if disc < 0.0:
        raise OutOfWorkspaceError(
            f"target out of workspace (discriminant {disc:.6g} < 0)"
        )
    denom = hh - dd
    if abs(denom) < 1e-12:
        # Quadratic degenerates to linear; the lost root is tau = pi.
        if abs(ee) < 1e-12:
            raise SingularConfigurationError("dyad at a boundary singularity")
        t = -(hh + dd) / (2.0 * ee)
    else:
        t = (-ee + sign * math.sqrt(disc)) / denom
    return 2.0 * math.atan(t)


def _elbows(angles: ServoAngles, g: LinkageGeometry) -> tuple[float, float, float, float]:
    return (
        g.l2 * math.cos(angles.tau_a),
        g.l2 * math.sin(angles.tau_a),
        g.l1 + g.l5 * math.cos(angles.tau_e),
        g.l5 * math.sin(angles.tau_e),
    )


def _assembly_cross(angles: ServoAngles, g: LinkageGeometry, x: float, y: float) -> float:
    """Cross product locating the contact relative to the elbow chord."""
    ax, ay, bx, by = _elbows(angles, g)
    return (bx - ax) * (y - ay) - (by - ay) * (x - ax)


def inverse_kinematics(
    x: float,
    y: float,
    geometry: LinkageGeometry = LinkageGeometry(),
    branch: Branch = DEFAULT_BRANCH,
) -> ServoAngles:
    """Servo angles placing the contact point at (x, y) mm.

    The same actuator angles reach two mirror points (the distal links
    can assemble on either side of the elbow chord); a physical display
    never flips assembly, so each branch owns the half where the contact
    sits on its canonical side of the chord.  Targets in the flipped half
    are rejected as out-of-workspace, which is what makes FK(IK(c)) = c
    hold exactly for every accepted target.
    """
    if not (math.isfinite(x) and math.isfinite(y)):
        raise ValueError("target coordinates must be finite")
    g = geometry
    dd = -2.0 * g.l2 * x
    ee = -2.0 * g.l2 * y
    hh = g.l2**2 + x * x + y * y - g.l3**2
    tau_a = _solve_dyad(dd, ee, hh, branch[0])

    ii = -2.0 * g.l5 * (x - g.l1)
    jj = -2.0 * g.l5 * y
    kk = g.l5**2 + (x - g.l1) ** 2 + y * y - g.l4**2
    tau_e = _solve_dyad(ii, jj, kk, branch[1])
    angles = ServoAngles(tau_a=tau_a, tau_e=tau_e, branch=branch)
    if _assembly_cross(angles, g, x, y) * branch[0] < 0.0:
        raise OutOfWorkspaceError(
            "target lies in the flipped assembly half for this branch"
        )
    return angles


def forward_kinematics(
    angles: ServoAngles, geometry: LinkageGeometry = LinkageGeometry()
) -> tuple[float, float]:
    """Contact point for a pair of servo angles.

    Intersects the circle of radius l3 about the left elbow with the
    circle of radius l4 about the right elbow and returns the
    intersection on the branch's canonical side of the elbow chord (the
    assembly convention shared with :func:`inverse_kinematics`).
    """
    g = geometry
    ax, ay, bx, by = _elbows(angles, g)
    dx, dy = bx - ax, by - ay
    d = math.hypot(dx, dy)
    if d < 1e-12:
        raise SingularConfigurationError(
            "distal-link circles are concentric; contact point is not defined"
        )
    if d > g.l3 + g.l4 + 1e-9 or d < abs(g.l3 - g.l4) - 1e-9:
        raise SingularConfigurationError(
            f"distal-link circles do not intersect (center distance {d:.6g} mm)"
        )
    a = (d * d + g.l3**2 - g.l4**2) / (2.0 * d)
    h_sq = g.l3**2 - a * a
    h = math.sqrt(max(h_sq, 0.0))
    mx = ax + a * dx / d
    my = ay + a * dy / d
    # candidate at +h*(dy,-dx)/d sits at cross = -h*d; the other at +h*d
    if angles.branch[0] > 0:
        return mx - h * dy / d, my + h * dx / d
    return mx + h * dy / d, my - h * dx / d


@dataclass(frozen=True)
class DisplayMap:
    """How the 3x3 stimulus grid drives the three linkage planes.

    Row r of the grid belongs to linkage plane r.  Each column has a
    preset lateral target; intensity moves the contact from the retracted
    height toward full engagement.  Every implied target must be inside
    the linkage workspace (checked at construction).
    """

    x_presets: tuple[float, float, float] = (8.0, 20.0, 32.0)
    y_retracted: float = 45.0
    y_engaged: float = 30.0
    geometry: LinkageGeometry = LinkageGeometry()
    branch: Branch = DEFAULT_BRANCH

    def __post_init__(self) -> None:
        if len(self.x_presets) != STIM_SIZE:
            raise ValueError("x_presets must have one entry per display column")
        for x in self.x_presets:
            for y in (self.y_retracted, self.y_engaged):
                inverse_kinematics(x, y, self.geometry, self.branch)  # raises if outside

    def target_for(self, column: int, intensity: float) -> tuple[float, float]:
        y = self.y_retracted + intensity * (self.y_engaged - self.y_retracted)
        return self.x_presets[column], y

    @property
    def retracted_target(self) -> tuple[float, float]:
        return self.x_presets[1], self.y_retracted


@dataclass(frozen=True)
class ContactCommand:
    """Target point and servo angles for one linkage plane."""

    row: int
    x_mm: float
    y_mm: float
    angles: ServoAngles
    active: bool


def grid_to_contacts(
    stimulus: np.ndarray, display: DisplayMap = DisplayMap()
) -> list[ContactCommand]:
    """Per-row contact commands for a peak-filtered stimulus grid.

    An active row drives its linkage to the column's preset at the
    engagement depth set by the intensity; an inactive row parks at the
    retracted pose.
    """
    s = np.asarray(stimulus, dtype=np.float64)
    if s.shape != (STIM_SIZE, STIM_SIZE):
        raise ValueError(f"expected {STIM_SIZE}x{STIM_SIZE} stimulus, got {s.shape}")
    commands = []
    for row in range(STIM_SIZE):
        col = int(np.argmax(s[row]))
        intensity = float(s[row, col])
        if intensity > 0.0:
            x, y = display.target_for(col, intensity)
            active = True
        else:
            x, y = display.retracted_target
            active = False
        angles = inverse_kinematics(x, y, display.geometry, display.branch)
        commands.append(ContactCommand(row=row, x_mm=x, y_mm=y, angles=angles, active=active))
    return commands


def _parse_kv_text(path) -> dict[str, str]:
    values: dict[str, str] = {}
    with open(path, "r", encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}, line {lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            values[key] = value
    return values


def load_geometry(path) -> LinkageGeometry:
    """Read link lengths from key = value text (mm)."""
    kv = _parse_kv_text(path)
    kwargs = {k: float(v) for k, v in kv.items() if k in ("l1", "l2", "l3", "l4", "l5")}
    return LinkageGeometry(**kwargs)


def load_display_map(path, geometry: LinkageGeometry | None = None) -> DisplayMap:
    """Read display presets from key = value text (mm).

    Recognized keys: x_presets (three comma-separated values),
    y_retracted, y_engaged, plus l1..l5 when no geometry is supplied.
    """
    kv = _parse_kv_text(path)
    geom = geometry if geometry is not None else LinkageGeometry(
        **{k: float(v) for k, v in kv.items() if k in ("l1", "l2", "l3", "l4", "l5")}
    )
    kwargs: dict = {"geometry": geom}
    if "x_presets" in kv:
        presets = tuple(float(v) for v in kv["x_presets"].split(","))
        kwargs["x_presets"] = presets
    if "y_retracted" in kv:
        kwargs["y_retracted"] = float(kv["y_retracted"])
    if "y_engaged" in kv:
        kwargs["y_engaged"] = float(kv["y_engaged"])
    return DisplayMap(**kwargs)
