"""Simulated five-joint desktop manipulator.

Joint order is base-rotation, shoulder, elbow, wrist-pitch, gripper-roll.
All angles are degrees, link lengths millimetres.  The motion integrator
slews each joint independently at constant bounded speed until it lands
exactly on its target; the state transition functions are pure, so a single
actuation loop can own stepping while values are copied freely elsewhere.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, replace
from importlib import resources
from typing import NamedTuple

import numpy as np

JOINT_NAMES = ("j1", "j2", "j3", "j4", "j5")
LINK_NAMES = ("l1", "l2", "l3", "l4", "l5")

# Joint k lands exactly on its target once the remaining travel fits in one
# step; the epsilon absorbs float accumulation over hundreds of steps.
_LANDING_EPS = 1e-9


class ArmConfigError(ValueError):
    """Invalid or unreadable arm configuration."""


class JointVector(NamedTuple):
    """Five joint angles in degrees; the unit of command and feedback."""

    j1: float
    j2: float
    j3: float
    j4: float
    j5: float


ZERO_POSE = JointVector(0.0, 0.0, 0.0, 0.0, 0.0)


@dataclass(frozen=True)
class ArmConfig:
    """Geometry and motion envelope of the arm.

    limits_deg:   (min, max) per joint, min < max
    speeds_dps:   max angular speed per joint, degrees/second, > 0
    links_mm:     serial-chain link lengths, > 0
    settle_tolerance_deg: accepted |current - target| for a settled joint, > 0
    """

    limits_deg: tuple[tuple[float, float], ...]
    speeds_dps: tuple[float, float, float, float, float]
    links_mm: tuple[float, float, float, float, float]
    settle_tolerance_deg: float

    def __post_init__(self):
        if len(self.limits_deg) != 5 or len(self.speeds_dps) != 5 or len(self.links_mm) != 5:
            raise ArmConfigError("arm config needs 5 limits, 5 speeds and 5 link lengths")
        for name, (lo, hi) in zip(JOINT_NAMES, self.limits_deg):
            if not (lo < hi):
                raise ArmConfigError(f"{name}: limit minimum {lo} must be below maximum {hi}")
        for name, speed in zip(JOINT_NAMES, self.speeds_dps):
            if not speed > 0:
                raise ArmConfigError(f"{name}: speed must be positive, got {speed}")
        for name, length in zip(LINK_NAMES, self.links_mm):
            if not length > 0:
                raise ArmConfigError(f"{name}: link length must be positive, got {length}")
        if not self.settle_tolerance_deg > 0:
            raise ArmConfigError("settle tolerance must be positive")

    @property
    def reach_mm(self) -> float:
        return float(sum(self.links_mm))

    @classmethod
    def from_file(cls, path) -> "ArmConfig":
        """Load from the INI schema documented in README (see data/mentor_arm.ini)."""
        parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        read = parser.read(str(path))
        if not read:
            raise ArmConfigError(f"cannot read arm config {path}")
        return cls._from_parser(parser, str(path))

    @classmethod
    def _from_parser(cls, parser: configparser.ConfigParser, origin: str) -> "ArmConfig":
        try:
            limits = tuple(
                tuple(float(v) for v in parser.get("limits", name).split())
                for name in JOINT_NAMES
            )
            speeds = tuple(float(parser.get("speeds", name)) for name in JOINT_NAMES)
            links = tuple(float(parser.get("links", name)) for name in LINK_NAMES)
            tolerance = float(parser.get("motion", "settle_tolerance_deg"))
        except (configparser.Error, ValueError) as exc:
            raise ArmConfigError(f"{origin}: {exc}") from exc
        for name, pair in zip(JOINT_NAMES, limits):
            if len(pair) != 2:
                raise ArmConfigError(f"{origin}: limits.{name} must be 'min max'")
        return cls(limits, speeds, links, tolerance)  # type: ignore[arg-type]

    @classmethod
    def default(cls) -> "ArmConfig":
        """The Mentor-class defaults shipped with the package."""
        text = resources.files("telearm.data").joinpath("mentor_arm.ini").read_text()
        parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        parser.read_string(text)
        return cls._from_parser(parser, "builtin:mentor_arm")


@dataclass(frozen=True)
class ArmState:
    """Actual and commanded pose plus the integrator clock."""

    current: JointVector
    target: JointVector
    moving: bool
    sim_clock: float  # seconds

    def settled_within(self, tolerance_deg: float) -> bool:
        return max(abs(c - t) for c, t in zip(self.current, self.target)) <= tolerance_deg


def initial_state(cfg: ArmConfig, pose: JointVector = ZERO_POSE, sim_clock: float = 0.0) -> ArmState:
    pose = clamp_to_limits(cfg, pose)
    return ArmState(current=pose, target=pose, moving=False, sim_clock=sim_clock)


def clamp_to_limits(cfg: ArmConfig, joints: JointVector) -> JointVector:
    """Clamp each component into its configured range; inside values pass through."""
    return JointVector(
        *(min(max(value, lo), hi) for value, (lo, hi) in zip(joints, cfg.limits_deg))
    )


def within_limits(cfg: ArmConfig, joints: JointVector, slack: float = 1e-9) -> bool:
    return all(lo - slack <= v <= hi + slack for v, (lo, hi) in zip(joints, cfg.limits_deg))


class FramePose(NamedTuple):
    """Position (mm) and orientation of one link frame in base coordinates."""

    position: np.ndarray  # shape (3,)
    rotation: np.ndarray  # shape (3, 3), column-orthonormal


def _rot_z(deg: float) -> np.ndarray:
    c, s = math.cos(math.radians(deg)), math.sin(math.radians(deg))
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def _rot_y(deg: float) -> np.ndarray:
    c, s = math.cos(math.radians(deg)), math.sin(math.radians(deg))
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def _rot_x(deg: float) -> np.ndarray:
    c, s = math.cos(math.radians(deg)), math.sin(math.radians(deg))
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


# Joint rotation axes: base yaw about Z, three pitch joints about Y, gripper
# roll about X.  Every link extends along local +X, so the all-zero pose lays
# the arm out along the base +X axis at full reach.
_JOINT_ROTATIONS = (_rot_z, _rot_y, _rot_y, _rot_y, _rot_x)


def forward_kinematics(cfg: ArmConfig, joints: JointVector) -> list[FramePose]:
    """Pose of the base frame and each of the five link frames.

    Frame 0 is the identity at the base.  Frame k applies joint k's rotation
    to frame k-1 and then translates along the rotated local X by link k's
    length.  The end effector is frames[-1].
    """
    frames = [FramePose(np.zeros(3), np.eye(3))]
    position = np.zeros(3)
    rotation = np.eye(3)
    for angle, length, rot in zip(joints, cfg.links_mm, _JOINT_ROTATIONS):
        rotation = rotation @ rot(angle)
        position = position + rotation @ np.array([length, 0.0, 0.0])
        frames.append(FramePose(position, rotation))
    return frames


def end_effector(cfg: ArmConfig, joints: JointVector) -> np.ndarray:
    return forward_kinematics(cfg, joints)[-1].position


def step_motion(cfg: ArmConfig, state: ArmState, dt: float) -> ArmState:
    """Advance the integrator by dt seconds.

    Each joint moves toward its target by at most speed*dt and lands exactly
    on the target once the remaining travel fits in a single step; `moving`
    clears on the step where every joint has landed.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    current = list(state.current)
    for i, (cur, tgt, speed) in enumerate(zip(state.current, state.target, cfg.speeds_dps)):
        remaining = tgt - cur
        step = speed * dt
        if abs(remaining) <= step + _LANDING_EPS:
            current[i] = tgt
        else:
            current[i] = cur + math.copysign(step, remaining)
    new_current = JointVector(*current)
    moving = any(c != t for c, t in zip(new_current, state.target))
    return replace(state, current=new_current, moving=moving, sim_clock=state.sim_clock + dt)


def begin_motion(cfg: ArmConfig, state: ArmState, target: JointVector) -> ArmState:
    """Retarget the arm; target is clamped so the integrator can never exit limits."""
    target = clamp_to_limits(cfg, target)
    moving = any(c != t for c, t in zip(state.current, target))
    return replace(state, target=target, moving=moving)


def abort_motion(state: ArmState) -> ArmState:
    """Freeze in place: the current pose becomes the target."""
    return replace(state, target=state.current, moving=False)


def cycle_duration(cfg: ArmConfig, start: JointVector, goal: JointVector) -> float:
    """Seconds for the slowest joint to cover its travel at configured speed.

    Matches the integrator's settle time to within one integration step.
    """
    return max(abs(g - s) / v for s, g, v in zip(start, goal, cfg.speeds_dps))
