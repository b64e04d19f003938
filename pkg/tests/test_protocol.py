"""Codec unit and property tests."""

from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from telearm import protocol as proto
from telearm.protocol import (
    ArityError,
    ArmGeometry,
    ClientCount,
    Error,
    Feedback,
    HostEvent,
    InvalidField,
    LineSplitter,
    ParseError,
    Ping,
    Pong,
    RangeError,
    Setpoint,
    UnknownPrefix,
    UserStatus,
    angle_to_wire,
    decode,
    encode,
    wire_to_angle,
)

from conftest import wire_messages


class TestEncode:
    def test_zero_setpoint(self):
        assert encode(Setpoint((0, 0, 0, 0, 0))) == b"S 0 0 0 0 0\n"

    def test_ping(self):
        assert encode(Ping(42)) == b"P 42\n"

    def test_feedback(self):
        assert encode(Feedback((100, 200, 300, -50, 0), 1)) == b"F 100 200 300 -50 0 1\n"

    def test_roster_frames(self):
        assert encode(ClientCount(3)) == b"N 3\n"
        assert encode(HostEvent("JOIN", "10.0.0.7")) == b"H JOIN 10.0.0.7\n"
        assert encode(UserStatus("c2", "QUEUED", 1)) == b"U c2 QUEUED 1\n"
        assert encode(UserStatus("c1", "ACTIVE")) == b"U c1 ACTIVE\n"
        assert encode(Error("LOCKSTEP", "await_previous_response")) == b"E LOCKSTEP await_previous_response\n"

    def test_deterministic(self):
        a = encode(Feedback((1, 2, 3, 4, 5), 0))
        b = encode(Feedback((1, 2, 3, 4, 5), 0))
        assert a == b

    def test_joint_out_of_range(self):
        with pytest.raises(RangeError):
            encode(Setpoint((0, 0, 0, 0, 3601)))
        with pytest.raises(RangeError):
            encode(Setpoint((-3601, 0, 0, 0, 0)))

    def test_string_with_delimiter_rejected(self):
        with pytest.raises(InvalidField):
            encode(HostEvent("JOIN", "two words"))
        with pytest.raises(InvalidField):
            encode(Error("X", "a\nb"))
        with pytest.raises(InvalidField):
            encode(UserStatus("", "IDLE"))

    def test_bad_reached_flag(self):
        with pytest.raises(RangeError):
            encode(Feedback((0, 0, 0, 0, 0), 2))

    def test_negative_client_count(self):
        with pytest.raises(RangeError):
            encode(ClientCount(-1))


class TestDecode:
    def test_feedback_line(self):
        msg = decode(b"F 100 200 300 -50 0 1\n")
        assert msg == Feedback((100, 200, 300, -50, 0), 1)

    def test_unknown_prefix(self):
        with pytest.raises(UnknownPrefix):
            decode(b"X 1 2\n")

    def test_wrong_arity(self):
        with pytest.raises(ArityError):
            decode(b"S 1 2 3\n")
        with pytest.raises(ArityError):
            decode(b"P\n")
        with pytest.raises(ArityError):
            decode(b"N 1 2\n")

    def test_non_integer_field(self):
        with pytest.raises(ParseError):
            decode(b"S 1 2 3 4 x\n")
        with pytest.raises(ParseError):
            decode(b"P 1.5\n")

    def test_out_of_range_joint(self):
        with pytest.raises(RangeError):
            decode(b"S 0 0 0 0 9999\n")

    def test_empty_line(self):
        with pytest.raises(UnknownPrefix):
            decode(b"\n")
        with pytest.raises(UnknownPrefix):
            decode(b"")

    def test_double_space_is_parse_error(self):
        with pytest.raises((ParseError, ArityError)):
            decode(b"S  1 2 3 4\n")

    def test_queued_status_needs_position(self):
        with pytest.raises(ArityError):
            decode(b"U c1 QUEUED\n")
        assert decode(b"U c1 QUEUED 2\n") == UserStatus("c1", "QUEUED", 2)

    def test_bad_direction(self):
        with pytest.raises(ParseError):
            decode(b"H SIDEWAYS host\n")

    def test_crlf_tolerated(self):
        assert decode(b"P 7\r\n") == Ping(7)

    def test_decode_is_total_over_junk(self):
        rng = random.Random(0)
        for _ in range(500):
            line = bytes(rng.randrange(256) for _ in range(rng.randrange(0, 40)))
            try:
                decode(line)
            except proto.ProtocolError:
                pass  # any grammar failure must be a ProtocolError, never a crash


class TestRoundTrip:
    @settings(max_examples=1000, deadline=None)
    @given(wire_messages)
    def test_decode_encode_identity(self, message):
        assert decode(encode(message)) == message

    @settings(max_examples=200, deadline=None)
    @given(st.lists(wire_messages, min_size=0, max_size=20))
    def test_framing_recovers_each_message(self, messages):
        blob = b"".join(encode(m) for m in messages)
        lines = blob.split(b"\n")
        assert lines[-1] == b""  # terminator discipline: no trailing partial
        recovered = [decode(line) for line in lines[:-1]]
        assert recovered == messages

    def test_prefix_totality(self):
        seen = set(proto.PREFIXES.values())
        assert seen == {b"S", b"F", b"N", b"H", b"U", b"P", b"p", b"E", b"C"}
        assert len(seen) == len(proto.PREFIXES)


class TestAngles:
    def test_zero(self):
        assert angle_to_wire(0.0) == 0

    def test_exact_decimal(self):
        assert angle_to_wire(90.0) == 900
        assert wire_to_angle(900) == 90.0

    def test_half_away_from_zero(self):
        assert angle_to_wire(0.05) == 1
        assert angle_to_wire(-0.05) == -1
        assert angle_to_wire(0.04999) == 0

    def test_bounds(self):
        assert angle_to_wire(360.0) == 3600
        assert angle_to_wire(-360.0) == -3600
        with pytest.raises(RangeError):
            angle_to_wire(360.0001)
        with pytest.raises(RangeError):
            angle_to_wire(float("nan"))

    def test_sweep_roundtrip_error_bound(self):
        # Exhaustive sweep over +/-360 deg in 0.013 deg steps.
        a = -360.0
        worst = 0.0
        while a <= 360.0:
            err = abs(wire_to_angle(angle_to_wire(a)) - a)
            worst = max(worst, err)
            a += 0.013
        assert worst <= 0.05 + 1e-12


class TestLineSplitter:
    def test_reassembles_chunks(self):
        frames = [encode(Ping(i)) for i in range(5)]
        blob = b"".join(frames)
        splitter = LineSplitter()
        out = []
        for i in range(0, len(blob), 3):
            out.extend(splitter.feed(blob[i : i + 3]))
        assert out == frames
        assert splitter.pending == b""

    def test_partial_line_held_back(self):
        splitter = LineSplitter()
        assert splitter.feed(b"S 1 2") == []
        assert splitter.feed(b" 3 4 5\nP 1") == [b"S 1 2 3 4 5\n"]
        assert splitter.pending == b"P 1"

    def test_oversize_line_rejected(self):
        splitter = LineSplitter(max_line_bytes=8)
        with pytest.raises(proto.ProtocolError):
            splitter.feed(b"x" * 64)
