"""Symbol-prefixed line codec for all client/server traffic.

Every frame is a single ASCII line: one prefix symbol, space-delimited
decimal fields, one terminating newline.  Joint angles travel as signed
integers in tenths of a degree so both ends can process them as integers;
the float/int conversions live here and nowhere else.

The full grammar is documented bit-exactly in PROTOCOL.md at the repo root.
All functions here are pure and reentrant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

JOINT_COUNT = 5
WIRE_ANGLE_LIMIT = 3600  # tenths of a degree, i.e. +/-360.0 deg on the wire

_DELIM = b" "
_NEWLINE = b"\n"


class ProtocolError(ValueError):
    """Base class for every encode/decode failure."""


class UnknownPrefix(ProtocolError):
    """Line does not start with a known prefix symbol."""


class ArityError(ProtocolError):
    """Wrong number of fields for the prefix."""


class ParseError(ProtocolError):
    """A field is not the integer/keyword the grammar requires."""


class RangeError(ProtocolError):
    """An integer field is outside its allowed range."""


class InvalidField(ProtocolError):
    """A string field contains the delimiter or a newline."""


@dataclass(frozen=True)
class Setpoint:
    """Commanded joint angles, wire tenths of a degree."""

    joints: tuple[int, int, int, int, int]


@dataclass(frozen=True)
class Feedback:
    """Actual joint angles; reached=1 marks the terminal frame of a cycle."""

    joints: tuple[int, int, int, int, int]
    reached: int


@dataclass(frozen=True)
class ClientCount:
    n: int


@dataclass(frozen=True)
class HostEvent:
    direction: str  # "JOIN" or "LEAVE"
    host: str


@dataclass(frozen=True)
class UserStatus:
    client: str
    status: str  # "ACTIVE", "IDLE" or "QUEUED"
    position: int | None = None  # 1-based queue position, QUEUED only


@dataclass(frozen=True)
class Ping:
    nonce: int


@dataclass(frozen=True)
class Pong:
    nonce: int


@dataclass(frozen=True)
class Error:
    code: str
    detail: str


@dataclass(frozen=True)
class ArmGeometry:
    """Handshake frame publishing the server's arm geometry to consoles.

    Link lengths are tenths of a millimetre, limits are (min, max) pairs in
    tenths of a degree, one pair per joint.
    """

    link_lengths: tuple[int, int, int, int, int]
    limits: tuple[tuple[int, int], ...]


WireMessage = Union[
    Setpoint,
    Feedback,
    ClientCount,
    HostEvent,
    UserStatus,
    Ping,
    Pong,
    Error,
    ArmGeometry,
]

PREFIXES = {
    Setpoint: b"S",
    Feedback: b"F",
    ClientCount: b"N",
    HostEvent: b"H",
    UserStatus: b"U",
    Ping: b"P",
    Pong: b"p",
    Error: b"E",
    ArmGeometry: b"C",
}

_DIRECTIONS = ("JOIN", "LEAVE")
_STATUSES = ("ACTIVE", "IDLE", "QUEUED")


def _check_joints(joints) -> tuple[int, ...]:
    if len(joints) != JOINT_COUNT:
        raise ArityError(f"expected {JOINT_COUNT} joints, got {len(joints)}")
    for value in joints:
        if not isinstance(value, int) or isinstance(value, bool):
            raise ParseError(f"joint value {value!r} is not an integer")
        if abs(value) > WIRE_ANGLE_LIMIT:
            raise RangeError(f"joint value {value} outside +/-{WIRE_ANGLE_LIMIT}")
    return tuple(joints)


def _check_string(value: str, what: str) -> str:
    if not isinstance(value, str) or not value:
        raise InvalidField(f"{what} must be a non-empty string")
    if " " in value or "\n" in value or "\r" in value:
        raise InvalidField(f"{what} {value!r} contains delimiter or newline")
    try:
        value.encode("ascii")
    except UnicodeEncodeError:
        raise InvalidField(f"{what} {value!r} is not ASCII") from None
    return value


def encode(message: WireMessage) -> bytes:
    """Encode a message into its single wire line (prefix, fields, newline).

    Equal messages always produce identical bytes.  Raises RangeError for
    out-of-range integers and InvalidField for strings that would break the
    line discipline.
    """
    if isinstance(message, Setpoint):
        fields = [str(j) for j in _check_joints(message.joints)]
    elif isinstance(message, Feedback):
        fields = [str(j) for j in _check_joints(message.joints)]
        if message.reached not in (0, 1):
            raise RangeError(f"reached flag must be 0 or 1, got {message.reached!r}")
        fields.append(str(message.reached))
    elif isinstance(message, ClientCount):
        if not isinstance(message.n, int) or message.n < 0:
            raise RangeError(f"client count must be a non-negative integer, got {message.n!r}")
        fields = [str(message.n)]
    elif isinstance(message, HostEvent):
        if message.direction not in _DIRECTIONS:
            raise InvalidField(f"direction must be JOIN or LEAVE, got {message.direction!r}")
        fields = [message.direction, _check_string(message.host, "host")]
    elif isinstance(message, UserStatus):
        if message.status not in _STATUSES:
            raise InvalidField(f"status must be one of {_STATUSES}, got {message.status!r}")
        fields = [_check_string(message.client, "client"), message.status]
        if message.status == "QUEUED":
            if not isinstance(message.position, int) or message.position < 1:
                raise RangeError(f"queue position must be >= 1, got {message.position!r}")
            fields.append(str(message.position))
        elif message.position is not None:
            raise InvalidField("position is only valid with QUEUED status")
    elif isinstance(message, (Ping, Pong)):
        if not isinstance(message.nonce, int) or isinstance(message.nonce, bool):
            raise ParseError(f"nonce {message.nonce!r} is not an integer")
        fields = [str(message.nonce)]
    elif isinstance(message, Error):
        fields = [_check_string(message.code, "code"), _check_string(message.detail, "detail")]
    elif isinstance(message, ArmGeometry):
        if len(message.link_lengths) != JOINT_COUNT or len(message.limits) != JOINT_COUNT:
            raise ArityError("arm geometry needs 5 link lengths and 5 limit pairs")
        for value in (*message.link_lengths, *(v for pair in message.limits for v in pair)):
            if not isinstance(value, int) or isinstance(value, bool):
                raise ParseError(f"geometry value {value!r} is not an integer")
        fields = [str(l) for l in message.link_lengths]
        for lo, hi in message.limits:
            if lo >= hi:
                raise RangeError(f"limit pair ({lo}, {hi}) is not ordered")
            fields.extend((str(lo), str(hi)))
    else:
        raise ProtocolError(f"not a wire message: {message!r}")

    prefix = PREFIXES[type(message)]
    return prefix + _DELIM + _DELIM.join(f.encode("ascii") for f in fields) + _NEWLINE


def _int_field(raw: bytes, what: str) -> int:
    text = raw.decode("ascii", errors="replace")
    try:
        return int(text, 10)
    except ValueError:
        raise ParseError(f"{what} {text!r} is not a decimal integer") from None


def _decode_joints(fields: list[bytes]) -> tuple[int, int, int, int, int]:
    joints = tuple(_int_field(f, "joint") for f in fields)
    for value in joints:
        if abs(value) > WIRE_ANGLE_LIMIT:
            raise RangeError(f"joint value {value} outside +/-{WIRE_ANGLE_LIMIT}")
    return joints  # type: ignore[return-value]


def decode(line: bytes) -> WireMessage:
    """Decode one wire line into its message.

    Total over byte strings: any input either yields the unique message the
    grammar assigns or raises a ProtocolError subclass.  A single trailing
    newline is tolerated and ignored.
    """
    if isinstance(line, (bytearray, memoryview)):
        line = bytes(line)
    if line.endswith(_NEWLINE):
        line = line[:-1]
    if line.endswith(b"\r"):
        line = line[:-1]
    if b"\n" in line:
        raise ParseError("embedded newline in frame")
    if not line:
        raise UnknownPrefix("empty line")

    prefix, fields = line[:1], line[1:].split(_DELIM)[1:] if line[1:2] == _DELIM else None
    # A frame is "<prefix> <fields...>"; a bare prefix or a missing delimiter
    # after it is an arity problem unless the prefix itself is unknown.
    known = prefix in (b"S", b"F", b"N", b"H", b"U", b"P", b"p", b"E", b"C")
    if not known:
        raise UnknownPrefix(f"unknown prefix {prefix!r}")
    if fields is None:
        raise ArityError(f"prefix {prefix!r} carries no fields")

    def need(n: int) -> None:
        if len(fields) != n:
            raise ArityError(f"prefix {prefix!r} takes {n} fields, got {len(fields)}")

    if prefix == b"S":
        need(JOINT_COUNT)
        return Setpoint(_decode_joints(fields))
    if prefix == b"F":
        need(JOINT_COUNT + 1)
        joints = _decode_joints(fields[:JOINT_COUNT])
        reached = _int_field(fields[JOINT_COUNT], "reached")
        if reached not in (0, 1):
            raise RangeError(f"reached flag must be 0 or 1, got {reached}")
        return Feedback(joints, reached)
    if prefix == b"N":
        need(1)
        n = _int_field(fields[0], "client count")
        if n < 0:
            raise RangeError(f"client count must be non-negative, got {n}")
        return ClientCount(n)
    if prefix == b"H":
        need(2)
        direction = fields[0].decode("ascii", errors="replace")
        if direction not in _DIRECTIONS:
            raise ParseError(f"direction {direction!r} is not JOIN or LEAVE")
        host = fields[1].decode("ascii", errors="replace")
        if not host:
            raise ParseError("empty host field")
        return HostEvent(direction, host)
    if prefix == b"U":
        if len(fields) not in (2, 3):
            raise ArityError(f"prefix b'U' takes 2 or 3 fields, got {len(fields)}")
        client = fields[0].decode("ascii", errors="replace")
        status = fields[1].decode("ascii", errors="replace")
        if not client:
            raise ParseError("empty client field")
        if status not in _STATUSES:
            raise ParseError(f"status {status!r} is not one of {_STATUSES}")
        if status == "QUEUED":
            if len(fields) != 3:
                raise ArityError("QUEUED status requires a position field")
            position = _int_field(fields[2], "queue position")
            if position < 1:
                raise RangeError(f"queue position must be >= 1, got {position}")
            return UserStatus(client, status, position)
        if len(fields) != 2:
            raise ArityError(f"{status} status takes no position field")
        return UserStatus(client, status)
    if prefix == b"P":
        need(1)
        return Ping(_int_field(fields[0], "nonce"))
    if prefix == b"p":
        need(1)
        return Pong(_int_field(fields[0], "nonce"))
    if prefix == b"E":
        need(2)
        code = fields[0].decode("ascii", errors="replace")
        detail = fields[1].decode("ascii", errors="replace")
        if not code or not detail:
            raise ParseError("empty code or detail field")
        return Error(code, detail)
    # prefix == b"C"
    need(JOINT_COUNT * 3)
    values = [_int_field(f, "geometry value") for f in fields]
    lengths = tuple(values[:JOINT_COUNT])
    pairs = []
    for i in range(JOINT_COUNT):
        lo, hi = values[JOINT_COUNT + 2 * i], values[JOINT_COUNT + 2 * i + 1]
        if lo >= hi:
            raise RangeError(f"limit pair ({lo}, {hi}) is not ordered")
        pairs.append((lo, hi))
    return ArmGeometry(lengths, tuple(pairs))  # type: ignore[arg-type]


def angle_to_wire(angle_deg: float) -> int:
    """Degrees to wire tenths, rounding half away from zero.

    The composition wire_to_angle(angle_to_wire(a)) moves a by at most
    0.05 degrees.
    """
    if not math.isfinite(angle_deg) or abs(angle_deg) > 360.0:
        raise RangeError(f"angle {angle_deg!r} outside +/-360 degrees")
    return int(math.copysign(math.floor(abs(angle_deg) * 10.0 + 0.5), angle_deg))


def wire_to_angle(wire: int) -> float:
    """Wire tenths back to degrees; exact (i / 10)."""
    return wire / 10.0


def joints_to_wire(angles_deg) -> tuple[int, int, int, int, int]:
    return tuple(angle_to_wire(a) for a in angles_deg)  # type: ignore[return-value]


def wire_to_joints(wire) -> tuple[float, float, float, float, float]:
    return tuple(wire_to_angle(w) for w in wire)  # type: ignore[return-value]


class LineSplitter:
    """Reassembles newline-terminated frames from arbitrary byte chunks.

    Used by every stream transport; keeps at most one partial line of state.
    """

    def __init__(self, max_line_bytes: int = 4096):
        self._buf = bytearray()
        self._max = max_line_bytes

    def feed(self, chunk: bytes) -> list[bytes]:
        """Absorb a chunk, return every complete line (newline included)."""
        self._buf.extend(chunk)
        lines: list[bytes] = []
        while True:
            idx = self._buf.find(_NEWLINE)
            if idx < 0:
                break
            lines.append(bytes(self._buf[: idx + 1]))
            del self._buf[: idx + 1]
        if len(self._buf) > self._max:
            raise ProtocolError(f"unterminated line exceeds {self._max} bytes")
        return lines

    @property
    def pending(self) -> bytes:
        return bytes(self._buf)
