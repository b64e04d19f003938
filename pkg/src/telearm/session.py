"""First-in-first-serve arbitration of multiple operators over one robot.

At most one command cycle is active at a time; later submissions queue in
arrival order, and each operator may have only one command outstanding
(lockstep).  Every transition is a pure function returning the new state
plus the roster/status frames the server must broadcast; the server owns
serialization of the transitions.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import NamedTuple, Optional

from .protocol import (
    WIRE_ANGLE_LIMIT,
    ClientCount,
    HostEvent,
    UserStatus,
    WireMessage,
)

DEFAULT_QUEUE_BOUND = 64


class SessionError(Exception):
    """Base class for session transition failures."""


class DuplicateClient(SessionError):
    pass


class UnknownClient(SessionError):
    pass


class NoActiveCommand(SessionError):
    pass


class QueueFull(SessionError):
    pass


class SetpointRangeError(SessionError):
    """Setpoint integers outside the wire range."""


class Client(NamedTuple):
    client_id: str
    host: str


@dataclass(frozen=True)
class PendingCommand:
    client_id: str
    setpoint: tuple[int, int, int, int, int]  # wire tenths of a degree
    enqueued_at: float


@dataclass(frozen=True)
class ActiveCycle:
    client_id: str
    setpoint: tuple[int, int, int, int, int]
    started_at: float


class Admission(Enum):
    ACTIVE = "active"
    QUEUED = "queued"
    REJECTED_LOCKSTEP = "rejected-lockstep"


@dataclass(frozen=True)
class SubmitDecision:
    admission: Admission
    position: int | None = None  # 1-based queue position when QUEUED


@dataclass(frozen=True)
class SessionState:
    """Roster, pending queue and the single active cycle."""

    clients: tuple[Client, ...] = ()
    queue: tuple[PendingCommand, ...] = ()
    active: Optional[ActiveCycle] = None

    @property
    def awaiting_feedback(self) -> frozenset[str]:
        """Clients blocked on a response: the active owner plus everyone queued."""
        ids = {cmd.client_id for cmd in self.queue}
        if self.active is not None:
            ids.add(self.active.client_id)
        return frozenset(ids)

    def has_client(self, client_id: str) -> bool:
        return any(c.client_id == client_id for c in self.clients)

    def host_of(self, client_id: str) -> str:
        for c in self.clients:
            if c.client_id == client_id:
                return c.host
        raise UnknownClient(client_id)

    def queue_position(self, client_id: str) -> int | None:
        for idx, cmd in enumerate(self.queue):
            if cmd.client_id == client_id:
                return idx + 1
        return None

    def status_of(self, client_id: str) -> UserStatus:
        if self.active is not None and self.active.client_id == client_id:
            return UserStatus(client_id, "ACTIVE")
        position = self.queue_position(client_id)
        if position is not None:
            return UserStatus(client_id, "QUEUED", position)
        return UserStatus(client_id, "IDLE")


def _check_setpoint(setpoint) -> tuple[int, int, int, int, int]:
    if len(setpoint) != 5:
        raise SetpointRangeError(f"setpoint needs 5 joints, got {len(setpoint)}")
    values = tuple(int(v) for v in setpoint)
    for v in values:
        if abs(v) > WIRE_ANGLE_LIMIT:
            raise SetpointRangeError(f"setpoint value {v} outside +/-{WIRE_ANGLE_LIMIT}")
    return values  # type: ignore[return-value]


def join(state: SessionState, client_id: str, host: str) -> tuple[SessionState, list[WireMessage]]:
    """Add an operator; emits the host-join event and the updated client count."""
    if state.has_client(client_id):
        raise DuplicateClient(client_id)
    new = replace(state, clients=state.clients + (Client(client_id, host),))
    events: list[WireMessage] = [HostEvent("JOIN", host), ClientCount(len(new.clients))]
    return new, events


def leave(state: SessionState, client_id: str) -> tuple[SessionState, list[WireMessage]]:
    """Remove an operator, dropping its queued command and aborting its active cycle.

    If the leaver owned the active cycle the head of the queue is promoted;
    the promoted owner's ACTIVE status and any shifted queue positions are in
    the returned events.  The caller is responsible for halting the physical
    motion of an aborted cycle.
    """
    if not state.has_client(client_id):
        raise UnknownClient(client_id)
    host = state.host_of(client_id)
    clients = tuple(c for c in state.clients if c.client_id != client_id)
    queue = tuple(cmd for cmd in state.queue if cmd.client_id != client_id)
    active = state.active
    events: list[WireMessage] = [HostEvent("LEAVE", host), ClientCount(len(clients))]

    promoted: Optional[ActiveCycle] = None
    if active is not None and active.client_id == client_id:
        active = None
        if queue:
            head, queue = queue[0], queue[1:]
            promoted = ActiveCycle(head.client_id, head.setpoint, head.enqueued_at)
            active = promoted

    new = SessionState(clients=clients, queue=queue, active=active)
    if promoted is not None:
        events.append(UserStatus(promoted.client_id, "ACTIVE"))
    # Anyone whose queue position shifted gets a fresh status frame.
    for idx, cmd in enumerate(new.queue):
        old_pos = state.queue_position(cmd.client_id)
        if old_pos != idx + 1:
            events.append(UserStatus(cmd.client_id, "QUEUED", idx + 1))
    return new, events


def submit(
    state: SessionState,
    client_id: str,
    setpoint,
    now: float,
    queue_bound: int = DEFAULT_QUEUE_BOUND,
) -> tuple[SessionState, SubmitDecision, list[WireMessage]]:
    """Admit one command: activate immediately, queue it, or reject for lockstep."""
    if not state.has_client(client_id):
        raise UnknownClient(client_id)
    values = _check_setpoint(setpoint)
    if client_id in state.awaiting_feedback:
        return state, SubmitDecision(Admission.REJECTED_LOCKSTEP), []
    if state.active is None:
        cycle = ActiveCycle(client_id, values, now)
        new = replace(state, active=cycle)
        return new, SubmitDecision(Admission.ACTIVE), [UserStatus(client_id, "ACTIVE")]
    if len(state.queue) >= queue_bound:
        raise QueueFull(f"queue bound {queue_bound} reached")
    command = PendingCommand(client_id, values, now)
    new = replace(state, queue=state.queue + (command,))
    position = len(new.queue)
    decision = SubmitDecision(Admission.QUEUED, position)
    return new, decision, [UserStatus(client_id, "QUEUED", position)]


class Delivery(NamedTuple):
    """Terminal feedback routing: which operator the completed cycle belongs to."""

    client_id: str
    feedback: tuple[int, int, int, int, int]


def complete_active(
    state: SessionState, feedback, now: float
) -> tuple[SessionState, Delivery, list[WireMessage]]:
    """Finish the active cycle and promote the head of the queue, if any."""
    if state.active is None:
        raise NoActiveCommand("no active command to complete")
    values = _check_setpoint(feedback)
    owner = state.active.client_id
    events: list[WireMessage] = [UserStatus(owner, "IDLE")]
    queue = state.queue
    active: Optional[ActiveCycle] = None
    if queue:
        head, queue = queue[0], queue[1:]
        active = ActiveCycle(head.client_id, head.setpoint, now)
        events.append(UserStatus(head.client_id, "ACTIVE"))
    new = SessionState(clients=state.clients, queue=queue, active=active)
    for idx, cmd in enumerate(new.queue):
        old_pos = state.queue_position(cmd.client_id)
        if old_pos != idx + 1:
            events.append(UserStatus(cmd.client_id, "QUEUED", idx + 1))
    return new, Delivery(owner, values), events
