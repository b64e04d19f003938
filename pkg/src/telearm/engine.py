"""Transport-free robot service core.

One engine owns the arm and the session queue.  Callers feed it connection
events, raw client lines and the current time; it returns the exact byte
frames each client must receive.  The request pipeline per accepted
setpoint: decode, clamp to limits, arbitrate through the FIFO session,
drive the arm to the setpoint on a fixed integration grid, broadcast
interim feedback at the configured rate, then emit the terminal feedback
frame and promote the next queued command.

The engine never reads a clock or a socket, which is what lets the TCP
server run it on wall time and the simulated-network harness run it on a
virtual clock, byte-for-byte identically.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import NamedTuple, Optional

from . import session as sess
from .arm import (
    ArmConfig,
    ArmState,
    JointVector,
    abort_motion,
    begin_motion,
    clamp_to_limits,
    initial_state,
    step_motion,
)
from .protocol import (
    ArmGeometry,
    Error,
    Feedback,
    Ping,
    Pong,
    ProtocolError,
    RangeError,
    Setpoint,
    UserStatus,
    WireMessage,
    decode,
    encode,
    joints_to_wire,
    wire_to_joints,
)

DEFAULT_DT = 0.01  # integration step, seconds
DEFAULT_BROADCAST_RATE_HZ = 10.0

_EPS = 1e-9


class Send(NamedTuple):
    """One outbound frame: deliver `data` to `client_id`."""

    client_id: str
    data: bytes


@dataclass
class CycleTrace:
    """Server-side instrumentation of one accepted setpoint."""

    client_id: str
    setpoint_wire: tuple[int, int, int, int, int]
    accepted_at: float  # processing starts when the request line is handled
    request_bytes: int
    activated_at: Optional[float] = None
    completed_at: Optional[float] = None  # processing ends at terminal emission
    response_bytes: Optional[int] = None
    outcome: str = "pending"  # pending | done | aborted


def geometry_frame(cfg: ArmConfig) -> ArmGeometry:
    """The handshake message publishing link lengths and joint limits."""
    return ArmGeometry(
        link_lengths=tuple(round(l * 10) for l in cfg.links_mm),  # type: ignore[arg-type]
        limits=tuple((round(lo * 10), round(hi * 10)) for lo, hi in cfg.limits_deg),
    )


class RobotEngine:
    def __init__(
        self,
        arm_config: ArmConfig,
        *,
        broadcast_rate_hz: float = DEFAULT_BROADCAST_RATE_HZ,
        queue_bound: int = sess.DEFAULT_QUEUE_BOUND,
        dt: float = DEFAULT_DT,
        start_time: float = 0.0,
    ):
        if not broadcast_rate_hz > 0:
            raise ValueError("broadcast rate must be positive")
        if not dt > 0:
            raise ValueError("dt must be positive")
        self.arm_config = arm_config
        self.dt = dt
        self.queue_bound = queue_bound
        self._broadcast_interval = 1.0 / broadcast_rate_hz
        self._arm: ArmState = initial_state(arm_config, sim_clock=start_time)
        self._session = sess.SessionState()
        self._next_broadcast: Optional[float] = None
        self._active_trace: Optional[CycleTrace] = None
        self._pending_traces: dict[str, CycleTrace] = {}
        self.cycles: list[CycleTrace] = []  # acceptance order

    # -- read-only views -------------------------------------------------

    @property
    def arm_state(self) -> ArmState:
        return self._arm

    @property
    def session_state(self) -> sess.SessionState:
        return self._session

    def next_deadline(self) -> Optional[float]:
        """Next instant on_tick needs to run, None while no motion is pending."""
        if self._session.active is None:
            return None
        return self._arm.sim_clock + self.dt

    # -- event handlers ---------------------------------------------------

    def on_connect(self, client_id: str, host: str, now: float) -> list[Send]:
        sends = self._advance(now)
        self._session, events = sess.join(self._session, client_id, host)
        # Handshake for the newcomer: geometry, a pose snapshot so consoles
        # can render immediately, and the current status of everyone present.
        sends.append(Send(client_id, encode(geometry_frame(self.arm_config))))
        sends.append(Send(client_id, encode(Feedback(joints_to_wire(self._arm.current), 1))))
        for client in self._session.clients:
            sends.append(Send(client_id, encode(self._session.status_of(client.client_id))))
        sends.extend(self._emit_events(events))
        return sends

    def on_disconnect(self, client_id: str, now: float) -> list[Send]:
        sends = self._advance(now)
        if not self._session.has_client(client_id):
            return sends  # transport double-close; nothing to do
        was_owner = (
            self._session.active is not None
            and self._session.active.client_id == client_id
        )
        dropped = self._pending_traces.pop(client_id, None)
        if dropped is not None and dropped.outcome == "pending":
            dropped.outcome = "aborted"
            dropped.completed_at = now
        self._session, events = sess.leave(self._session, client_id)
        if was_owner:
            # Fail safe: freeze the arm where it is, then let the promoted
            # command (if any) take over from that pose.
            self._arm = abort_motion(self._arm)
            self._next_broadcast = None
            if self._active_trace is not None:
                self._active_trace.outcome = "aborted"
                self._active_trace.completed_at = now
                self._active_trace = None
        sends.extend(self._emit_events(events))
        if was_owner and self._session.active is not None:
            sends.extend(self._kick_active(now))
        return sends

    def on_line(self, client_id: str, raw_line: bytes, now: float) -> list[Send]:
        sends = self._advance(now)
        try:
            message = decode(raw_line)
        except RangeError:
            sends.append(self._error_to(client_id, "RANGE", "value_out_of_range"))
            return sends
        except ProtocolError as exc:
            sends.append(self._error_to(client_id, "PROTOCOL", _detail_token(exc)))
            return sends

        if isinstance(message, Ping):
            sends.append(Send(client_id, encode(Pong(message.nonce))))
            return sends
        if isinstance(message, Setpoint):
            sends.extend(self._handle_setpoint(client_id, message, len(raw_line), now))
            return sends
        # Clients have no business sending server-to-client frame kinds.
        sends.append(self._error_to(client_id, "PROTOCOL", "unexpected_frame_kind"))
        return sends

    def on_tick(self, now: float) -> list[Send]:
        return self._advance(now)

    def shutdown(self, now: float) -> list[Send]:
        """Final status frame for every client; the caller closes transports."""
        sends = self._advance(now)
        for trace in [self._active_trace, *self._pending_traces.values()]:
            if trace is not None and trace.outcome == "pending":
                trace.outcome = "aborted"
                trace.completed_at = now
        self._active_trace = None
        self._pending_traces.clear()
        self._arm = abort_motion(self._arm)
        for client in self._session.clients:
            sends.append(Send(client.client_id, encode(UserStatus(client.client_id, "IDLE"))))
        self._session = sess.SessionState()
        self._next_broadcast = None
        return sends

    # -- internals ----------------------------------------------------------

    def _handle_setpoint(
        self, client_id: str, message: Setpoint, request_bytes: int, now: float
    ) -> list[Send]:
        degrees = JointVector(*wire_to_joints(message.joints))
        clamped = joints_to_wire(clamp_to_limits(self.arm_config, degrees))
        try:
            self._session, decision, events = sess.submit(
                self._session, client_id, clamped, now, self.queue_bound
            )
        except sess.QueueFull:
            return [self._error_to(client_id, "QFULL", "command_queue_full")]
        if decision.admission is sess.Admission.REJECTED_LOCKSTEP:
            return [self._error_to(client_id, "LOCKSTEP", "await_previous_response")]

        trace = CycleTrace(client_id, clamped, accepted_at=now, request_bytes=request_bytes)
        self.cycles.append(trace)
        self._pending_traces[client_id] = trace
        sends = self._emit_events(events)
        if decision.admission is sess.Admission.ACTIVE:
            sends.extend(self._kick_active(now))
        return sends

    def _advance(self, now: float) -> list[Send]:
        """Run the integration grid up to `now`, emitting whatever falls due."""
        sends: list[Send] = []
        while self._session.active is not None and self._arm.sim_clock + self.dt <= now + _EPS:
            self._arm = step_motion(self.arm_config, self._arm, self.dt)
            t = self._arm.sim_clock
            if self._arm.moving:
                if self._next_broadcast is not None and t + _EPS >= self._next_broadcast:
                    sends.extend(self._broadcast(Feedback(joints_to_wire(self._arm.current), 0)))
                    self._next_broadcast += self._broadcast_interval
            else:
                sends.extend(self._finish_active_cycle(t))
        if self._session.active is None and now > self._arm.sim_clock:
            self._arm = replace(self._arm, sim_clock=now)
        return sends

    def _kick_active(self, now: float) -> list[Send]:
        sends = self._start_active_cycle(now)
        if not self._arm.moving:
            sends.extend(self._finish_active_cycle(now))
        return sends

    def _start_active_cycle(self, now: float) -> list[Send]:
        cycle = self._session.active
        assert cycle is not None
        trace = self._pending_traces.pop(cycle.client_id)
        trace.activated_at = now
        self._active_trace = trace
        target = JointVector(*wire_to_joints(cycle.setpoint))
        self._arm = begin_motion(self.arm_config, self._arm, target)
        sends: list[Send] = []
        if self._arm.moving:
            # Motion-start frame; later interim frames follow the broadcast grid.
            self._next_broadcast = now + self._broadcast_interval
            sends.extend(self._broadcast(Feedback(joints_to_wire(self._arm.current), 0)))
        return sends

    def _finish_active_cycle(self, t: float) -> list[Send]:
        sends: list[Send] = []
        while True:
            current_wire = joints_to_wire(self._arm.current)
            frame = encode(Feedback(current_wire, 1))
            sends.extend(self._broadcast_bytes(frame))
            trace = self._active_trace
            assert trace is not None
            trace.completed_at = t
            trace.response_bytes = len(frame)
            trace.outcome = "done"
            self._active_trace = None
            self._next_broadcast = None
            self._session, _delivery, events = sess.complete_active(self._session, current_wire, t)
            sends.extend(self._emit_events(events))
            if self._session.active is None:
                break
            sends.extend(self._start_active_cycle(t))
            if self._arm.moving:
                break
        return sends

    def _error_to(self, client_id: str, code: str, detail: str) -> Send:
        return Send(client_id, encode(Error(code, detail)))

    def _emit_events(self, events: list[WireMessage]) -> list[Send]:
        sends: list[Send] = []
        for event in events:
            sends.extend(self._broadcast_bytes(encode(event)))
        return sends

    def _broadcast(self, message: WireMessage) -> list[Send]:
        return self._broadcast_bytes(encode(message))

    def _broadcast_bytes(self, data: bytes) -> list[Send]:
        # Encode once, fan the same bytes out to every client in join order.
        return [Send(client.client_id, data) for client in self._session.clients]


def _detail_token(exc: Exception) -> str:
    name = type(exc).__name__
    out = [name[0].lower()]
    for ch in name[1:]:
        if ch.isupper():
            out.append("_")
        out.append(ch.lower())
    return "".join(out)
