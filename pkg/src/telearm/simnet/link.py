"""Simulated network conditions: propagation, serialization, setup, jitter.

The three canonical profiles are calibrated so the application-level echo
round trip lands on the published timing-table means (1, 1.2 and 7.75 ms):
RTT = 2 * propagation + serialization of the two echo frames, so the
one-way propagation is back-solved as (target RTT)/2 with the tiny
serialization overhead absorbed by the tolerance.  Calibration derivation
lives in README.md.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass
from pathlib import Path
from random import Random
from typing import Callable, Optional


@dataclass(frozen=True)
class LinkProfile:
    """One network condition; jitter is uniform on [0, jitter_s], seeded."""

    name: str
    one_way_propagation_s: float
    bandwidth_bps: float
    setup_delay_s: float = 0.0
    jitter_s: float = 0.0

    def __post_init__(self):
        if self.one_way_propagation_s < 0:
            raise ValueError("propagation must be >= 0")
        if not self.bandwidth_bps > 0:
            raise ValueError("bandwidth must be > 0")
        if self.setup_delay_s < 0 or self.jitter_s < 0:
            raise ValueError("setup delay and jitter must be >= 0")


CANONICAL_PROFILES = {
    "local": LinkProfile("local", one_way_propagation_s=0.5e-3, bandwidth_bps=100e6),
    "lan": LinkProfile("lan", one_way_propagation_s=0.6e-3, bandwidth_bps=100e6),
    "inter-lan": LinkProfile("inter-lan", one_way_propagation_s=3.875e-3, bandwidth_bps=2e6),
}


def transit_time(profile: LinkProfile, frame_bytes: int, rng: Optional[Random] = None) -> float:
    """One-way latency of a frame: propagation + serialization + jitter draw."""
    if frame_bytes < 0:
        raise ValueError("frame_bytes must be >= 0")
    jitter = 0.0
    if profile.jitter_s > 0 and rng is not None:
        jitter = rng.uniform(0.0, profile.jitter_s)
    return profile.one_way_propagation_s + 8.0 * frame_bytes / profile.bandwidth_bps + jitter


def apply_link(
    profile: LinkProfile, frame_bytes: int, now: float, rng: Optional[Random] = None
) -> float:
    """Delivery instant of a frame entering the link at `now`."""
    return now + transit_time(profile, frame_bytes, rng)


def load_profile(name_or_path: str) -> LinkProfile:
    """A canonical profile by name, or a custom one from an INI file.

    File schema::

        [link]
        name = dsl
        one_way_propagation_ms = 12.0
        bandwidth_bps = 256000
        setup_delay_ms = 150
        jitter_ms = 2.0
    """
    key = name_or_path.lower()
    if key in CANONICAL_PROFILES:
        return CANONICAL_PROFILES[key]
    path = Path(name_or_path)
    if not path.is_file():
        known = ", ".join(sorted(CANONICAL_PROFILES))
        raise ValueError(f"{name_or_path!r} is neither a profile ({known}) nor a file")
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.read(str(path))
    try:
        section = parser["link"]
        return LinkProfile(
            name=section.get("name", path.stem),
            one_way_propagation_s=float(section["one_way_propagation_ms"]) / 1e3,
            bandwidth_bps=float(section["bandwidth_bps"]),
            setup_delay_s=float(section.get("setup_delay_ms", "0")) / 1e3,
            jitter_s=float(section.get("jitter_ms", "0")) / 1e3,
        )
    except (KeyError, ValueError) as exc:
        raise ValueError(f"bad link profile {path}: {exc}") from exc


class SimLink:
    """One direction of a link: delivers frames in FIFO order, never reordering.

    A frame whose computed delivery instant would overtake an earlier frame
    is held back to that frame's instant (tail-of-queue clamping).
    """

    def __init__(
        self,
        profile: LinkProfile,
        schedule: Callable[[float, Callable[[], None]], None],
        deliver: Callable[[bytes], None],
        rng: Optional[Random] = None,
    ):
        self.profile = profile
        self._schedule = schedule
        self._deliver = deliver
        self._rng = rng
        self._last_delivery = float("-inf")
        self.frames_sent = 0
        self.frames_delivered = 0

    def send(self, payload: bytes, now: float) -> float:
        t = apply_link(self.profile, len(payload), now, self._rng)
        t = max(t, self._last_delivery)
        self._last_delivery = t
        self.frames_sent += 1

        def fire():
            self.frames_delivered += 1
            self._deliver(payload)

        self._schedule(t, fire)
        return t
