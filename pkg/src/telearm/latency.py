"""Response-time decomposition and measurement for command cycles.

A cycle's total response time t_r splits into request processing t_p
(actuation included), transfer of the request/response payload sum_D/v_l,
and connection setup t_c.  The model deliberately has no propagation term;
the simulated-network harness reports the measured-minus-predicted residual
so that gap shows up as data.
"""

from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass
from statistics import fmean
from typing import Iterable, Optional, Sequence

from .protocol import Ping, Pong, WireMessage


class LatencyError(Exception):
    pass


class DomainError(LatencyError):
    """Equation inputs outside their domain (v_l <= 0 or negative terms)."""


class NonMonotoneTimestamps(LatencyError):
    pass


class EmptySample(LatencyError):
    pass


class PingTimeout(LatencyError):
    pass


def predict_response(t_p: float, sum_d_bits: float, v_l_bps: float, t_c: float) -> float:
    """Predicted total response time: t_p + sum_D / v_l + t_c."""
    if not v_l_bps > 0:
        raise DomainError(f"link speed must be positive, got {v_l_bps}")
    if t_p < 0 or sum_d_bits < 0 or t_c < 0:
        raise DomainError("t_p, sum_D and t_c must be non-negative")
    return t_p + sum_d_bits / v_l_bps + t_c


@dataclass(frozen=True)
class LatencyRecord:
    """One measured cycle, decomposed into the model's terms."""

    t_p: float  # request processing incl. actuation, seconds
    sum_d_bits: float  # request + response payload, bits
    v_l_bps: float  # link speed, bits/second
    t_c: float  # connection setup, seconds
    t_r: float  # measured total response, seconds

    def __post_init__(self):
        if not self.v_l_bps > 0:
            raise DomainError(f"link speed must be positive, got {self.v_l_bps}")
        if self.t_p < 0 or self.t_c < 0 or self.t_r < 0 or self.sum_d_bits < 0:
            raise DomainError("negative latency terms")

    @property
    def predicted_t_r(self) -> float:
        return predict_response(self.t_p, self.sum_d_bits, self.v_l_bps, self.t_c)

    @property
    def residual(self) -> float:
        """Measured minus predicted; propagation and jitter land here."""
        return self.t_r - self.predicted_t_r


@dataclass(frozen=True)
class CycleTimestamps:
    """Client-side and server-side instants of one cycle, one clock.

    For cycles on an already-open persistent connection, connection_open
    equals request_sent (the setup cost was paid once at connect).
    """

    request_sent: float
    connection_open: float
    processing_start: float
    processing_end: float
    response_received: float

    def __post_init__(self):
        seq = (
            self.request_sent,
            self.connection_open,
            self.processing_start,
            self.processing_end,
            self.response_received,
        )
        if any(b < a for a, b in zip(seq, seq[1:])):
            raise NonMonotoneTimestamps(f"timestamps must be non-decreasing: {seq}")


def measure_cycle(
    stamps: CycleTimestamps, bytes_out: int, bytes_in: int, v_l_bps: float
) -> LatencyRecord:
    """Build a record from raw timestamps and payload byte counts."""
    if bytes_out < 0 or bytes_in < 0:
        raise DomainError("negative byte counts")
    return LatencyRecord(
        t_p=stamps.processing_end - stamps.processing_start,
        sum_d_bits=8.0 * (bytes_out + bytes_in),
        v_l_bps=v_l_bps,
        t_c=stamps.connection_open - stamps.request_sent,
        t_r=stamps.response_received - stamps.request_sent,
    )


def nearest_rank_percentile(values: Sequence[float], pct: float) -> float:
    """Nearest-rank percentile: deterministic, no interpolation."""
    if not values:
        raise EmptySample("no values")
    ordered = sorted(values)
    rank = max(1, math.ceil(pct / 100.0 * len(ordered)))
    return ordered[rank - 1]


@dataclass(frozen=True)
class LatencySummary:
    count: int
    mean_s: float
    min_s: float
    max_s: float
    p95_s: float
    ping_rtt_mean_s: Optional[float] = None

    def __post_init__(self):
        if self.count < 1:
            raise EmptySample("summary needs at least one record")
        if not (self.min_s <= self.mean_s <= self.max_s):
            raise DomainError("summary ordering violated")


def summarize(
    records: Sequence[LatencyRecord], ping_rtts_s: Sequence[float] = ()
) -> LatencySummary:
    """Aggregate measured response times plus the mean echo round trip."""
    if not records:
        raise EmptySample("no records to summarize")
    times = [r.t_r for r in records]
    return LatencySummary(
        count=len(times),
        mean_s=fmean(times),
        min_s=min(times),
        max_s=max(times),
        p95_s=nearest_rank_percentile(times, 95.0),
        ping_rtt_mean_s=fmean(ping_rtts_s) if ping_rtts_s else None,
    )


CSV_COLUMNS = ("profile", "n", "rtt_mean_ms", "tr_mean_s", "tr_p95_s")


def summaries_to_csv(rows: Iterable[tuple[str, LatencySummary]]) -> str:
    """Render (profile name, summary) pairs in the harness's report format."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for name, summary in rows:
        rtt_ms = "" if summary.ping_rtt_mean_s is None else f"{summary.ping_rtt_mean_s * 1e3:.3f}"
        writer.writerow(
            [name, summary.count, rtt_ms, f"{summary.mean_s:.6f}", f"{summary.p95_s:.6f}"]
        )
    return out.getvalue()


def ping(
    transport,
    nonce: int,
    timeout_s: float = 2.0,
    clock=time.monotonic,
) -> float:
    """Round-trip time of an application-level echo over a connected transport.

    The transport duck type: send(WireMessage) and receive(timeout_s) ->
    WireMessage | None.  Frames other than the matching echo reply are
    ignored here; demultiplexing transports keep them for their own readers.
    """
    started = clock()
    deadline = started + timeout_s
    transport.send(Ping(nonce))
    while True:
        remaining = deadline - clock()
        if remaining <= 0:
            raise PingTimeout(f"no echo for nonce {nonce} within {timeout_s}s")
        message: WireMessage | None = transport.receive(remaining)
        if isinstance(message, Pong) and message.nonce == nonce:
            return clock() - started
