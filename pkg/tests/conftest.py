"""Shared strategies and fixtures."""

from __future__ import annotations

import pytest
from hypothesis import strategies as st

from telearm import protocol
from telearm.arm import ArmConfig, JointVector

WIRE = protocol.WIRE_ANGLE_LIMIT

wire_ints = st.integers(min_value=-WIRE, max_value=WIRE)
joint_tuples = st.tuples(wire_ints, wire_ints, wire_ints, wire_ints, wire_ints)

# Field strings: printable ASCII without the space delimiter or line breaks.
_field_alphabet = st.characters(
    min_codepoint=33, max_codepoint=126, exclude_characters=" "
)
field_strings = st.text(_field_alphabet, min_size=1, max_size=24)

setpoints = st.builds(protocol.Setpoint, joints=joint_tuples)
feedbacks = st.builds(protocol.Feedback, joints=joint_tuples, reached=st.integers(0, 1))
client_counts = st.builds(protocol.ClientCount, n=st.integers(min_value=0, max_value=10_000))
host_events = st.builds(
    protocol.HostEvent, direction=st.sampled_from(("JOIN", "LEAVE")), host=field_strings
)
user_statuses = st.one_of(
    st.builds(protocol.UserStatus, client=field_strings, status=st.sampled_from(("ACTIVE", "IDLE"))),
    st.builds(
        protocol.UserStatus,
        client=field_strings,
        status=st.just("QUEUED"),
        position=st.integers(min_value=1, max_value=64),
    ),
)
nonces = st.integers(min_value=-(2**62), max_value=2**62)
pings = st.builds(protocol.Ping, nonce=nonces)
pongs = st.builds(protocol.Pong, nonce=nonces)
errors = st.builds(protocol.Error, code=field_strings, detail=field_strings)

_limit_pairs = st.tuples(
    st.integers(min_value=-WIRE, max_value=WIRE - 1), st.integers(min_value=1, max_value=WIRE)
).map(lambda pair: (pair[0], pair[0] + pair[1]))
arm_geometries = st.builds(
    protocol.ArmGeometry,
    link_lengths=st.tuples(*(st.integers(min_value=1, max_value=20_000),) * 5),
    limits=st.tuples(*(_limit_pairs,) * 5),
)

wire_messages = st.one_of(
    setpoints,
    feedbacks,
    client_counts,
    host_events,
    user_statuses,
    pings,
    pongs,
    errors,
    arm_geometries,
)


@pytest.fixture(scope="session")
def mentor() -> ArmConfig:
    return ArmConfig.default()


def random_pose(rng, cfg: ArmConfig) -> JointVector:
    return JointVector(*(rng.uniform(lo, hi) for lo, hi in cfg.limits_deg))
