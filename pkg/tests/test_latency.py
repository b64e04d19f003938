"""Latency decomposition tests."""

from __future__ import annotations

import math
import random
import time
from collections import deque

import pytest

from telearm.arm import ArmConfig
from telearm.engine import RobotEngine
from telearm.latency import (
    CycleTimestamps,
    DomainError,
    EmptySample,
    LatencyRecord,
    LatencySummary,
    NonMonotoneTimestamps,
    PingTimeout,
    measure_cycle,
    nearest_rank_percentile,
    ping,
    predict_response,
    summaries_to_csv,
    summarize,
)
from telearm.protocol import decode, encode


class TestPredict:
    def test_zero_case(self):
        assert predict_response(0.0, 0.0, 9600.0, 0.0) == 0.0

    def test_paper_floor_bandwidth(self):
        # 9600 bits over the 9600 bps floor costs exactly one second.
        assert predict_response(3.0, 9600.0, 9600.0, 0.1) == pytest.approx(4.1)

    def test_against_duplicate_arithmetic(self):
        rng = random.Random(5)
        for _ in range(500):
            t_p = rng.uniform(0, 10)
            sum_d = rng.uniform(0, 1e6)
            v_l = rng.uniform(1e3, 1e9)
            t_c = rng.uniform(0, 1)
            independent = math.fsum([t_p, sum_d / v_l, t_c])
            assert abs(predict_response(t_p, sum_d, v_l, t_c) - independent) <= 1e-12

    def test_domain(self):
        with pytest.raises(DomainError):
            predict_response(1.0, 1.0, 0.0, 0.0)
        with pytest.raises(DomainError):
            predict_response(-1.0, 1.0, 9600.0, 0.0)

    def test_monotone_in_each_term(self):
        base = predict_response(1.0, 1000.0, 9600.0, 0.1)
        assert predict_response(1.1, 1000.0, 9600.0, 0.1) > base
        assert predict_response(1.0, 2000.0, 9600.0, 0.1) > base
        assert predict_response(1.0, 1000.0, 9600.0, 0.2) > base
        assert predict_response(1.0, 1000.0, 19200.0, 0.1) < base


class TestMeasure:
    def test_all_zero(self):
        stamps = CycleTimestamps(0.0, 0.0, 0.0, 0.0, 0.0)
        record = measure_cycle(stamps, 0, 0, 9600.0)
        assert (record.t_p, record.t_c, record.t_r, record.sum_d_bits) == (0, 0, 0, 0)

    def test_component_sum(self):
        stamps = CycleTimestamps(0.0, 0.05, 0.06, 3.06, 3.2)
        record = measure_cycle(stamps, 70, 50, 9600.0)
        assert record.t_p == pytest.approx(3.0)
        assert record.t_c == pytest.approx(0.05)
        assert record.sum_d_bits == 8 * 120
        assert record.predicted_t_r == pytest.approx(3.15)
        assert record.t_r == pytest.approx(3.2)
        assert record.residual == pytest.approx(0.05)

    def test_non_monotone_rejected(self):
        with pytest.raises(NonMonotoneTimestamps):
            CycleTimestamps(1.0, 0.5, 2.0, 3.0, 4.0)

    def test_negative_bytes(self):
        with pytest.raises(DomainError):
            measure_cycle(CycleTimestamps(0, 0, 0, 0, 0), -1, 0, 9600.0)


def _record(t_r: float) -> LatencyRecord:
    return LatencyRecord(t_p=t_r, sum_d_bits=0.0, v_l_bps=9600.0, t_c=0.0, t_r=t_r)


class TestSummarize:
    def test_table_one_cycle_values(self):
        summary = summarize([_record(3.0), _record(3.1), _record(3.1)])
        assert summary.mean_s == pytest.approx(3.0666666, abs=1e-6)
        assert summary.min_s == 3.0
        assert summary.max_s == 3.1
        assert summary.count == 3

    def test_single_record(self):
        summary = summarize([_record(2.5)])
        assert summary.min_s == summary.mean_s == summary.max_s == 2.5

    def test_empty(self):
        with pytest.raises(EmptySample):
            summarize([])

    def test_ping_mean(self):
        summary = summarize([_record(1.0)], ping_rtts_s=[0.001, 0.003])
        assert summary.ping_rtt_mean_s == pytest.approx(0.002)

    def test_nearest_rank_p95(self):
        values = [float(i) for i in range(1, 101)]
        assert nearest_rank_percentile(values, 95.0) == 95.0
        assert nearest_rank_percentile([7.0], 95.0) == 7.0
        assert nearest_rank_percentile([1.0, 2.0], 95.0) == 2.0

    def test_summary_ordering_enforced(self):
        with pytest.raises(DomainError):
            LatencySummary(count=1, mean_s=5.0, min_s=6.0, max_s=7.0, p95_s=7.0)


class TestCsv:
    def test_columns_and_roundtrip(self):
        summary = summarize([_record(3.0), _record(3.2)], ping_rtts_s=[0.00775])
        text = summaries_to_csv([("inter-lan", summary)])
        lines = text.strip().split("\n")
        assert lines[0] == "profile,n,rtt_mean_ms,tr_mean_s,tr_p95_s"
        cells = lines[1].split(",")
        assert cells[0] == "inter-lan"
        assert int(cells[1]) == 2
        assert float(cells[2]) == pytest.approx(7.75, abs=1e-3)
        assert float(cells[3]) == pytest.approx(3.1, abs=1e-6)
        assert float(cells[4]) == pytest.approx(3.2, abs=1e-6)


class NullLinkTransport:
    """In-process loopback: frames reach the engine with zero injected delay."""

    def __init__(self):
        self.engine = RobotEngine(ArmConfig.default())
        self._inbox = deque()
        for send in self.engine.on_connect("me", "loopback", now=0.0):
            self._inbox.append(send.data)

    def send(self, message):
        for send in self.engine.on_line("me", encode(message), now=0.0):
            self._inbox.append(send.data)

    def receive(self, timeout_s):
        return decode(self._inbox.popleft()) if self._inbox else None


class TestPing:
    def test_loopback_under_five_ms(self):
        transport = NullLinkTransport()
        rtt = ping(transport, nonce=1)
        assert 0.0 <= rtt < 0.005

    def test_timeout(self):
        class DeafTransport:
            def send(self, message):
                pass

            def receive(self, timeout_s):
                time.sleep(min(timeout_s, 0.005))
                return None

        with pytest.raises(PingTimeout):
            ping(DeafTransport(), nonce=2, timeout_s=0.02)

    def test_ignores_unrelated_frames(self):
        transport = NullLinkTransport()
        transport.send  # the handshake frames queued at connect are skipped over
        rtt = ping(transport, nonce=77)
        assert rtt < 0.005
