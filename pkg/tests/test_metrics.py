import pytest

from artgas.metrics import Counters, MetricsError, MetricsLedger, success_probability, summarize, summarize_records


def test_success_probability():
    c = Counters(frames_delivered=36)
    assert success_probability(c, 4.0, 10.0) == pytest.approx(0.9)


@pytest.mark.parametrize("gamma,h", [(0, 1), (1, 0)])
def test_success_rejects_empty(gamma, h):
    with pytest.raises(MetricsError):
        success_probability(Counters(), gamma, h)


def test_empty_run_gives_nulls():
    s = summarize(Counters(frames_generated=3), 1.0, 1.0)
    assert s.success_prob == 0
    assert s.avg_delay_s is None and s.avg_wait_s is None and s.bandwidth_util is None


def test_ledger_streaming_matches_records():
    led = MetricsLedger(frames=[])
    led.delivered(0, 1.0, 2.5, 2.6)
    led.delivered(1, 0.0, 2.5, 2.6)
    led.delivered(1, 3.0, 5.0, 5.1)
    s = summarize(led.totals)
    d, w = summarize_records(led.frames)
    assert s.avg_wait_s == pytest.approx(2.0)
    assert abs(s.avg_delay_s - d) < 1e-9 and abs(s.avg_wait_s - w) < 1e-9
    assert led.subset([1]).frames_delivered == 2
    assert led.frames_delivered == 3


def test_utilization_modes():
    led = MetricsLedger(n_superframes=2)
    led.cfp_slot(0, True)
    led.cfp_slot(0, False)
    led.cfp_slot(1, True)
    assert summarize(led).bandwidth_util == pytest.approx(2 / 3)
    assert summarize(led, utilization="total").bandwidth_util == pytest.approx(2 / 32)
    with pytest.raises(MetricsError):
        summarize(led, utilization="bogus")


def test_merge():
    a = Counters(1, 2, 3, 4.0, 5.0, 6, 7)
    a.merge(Counters(1, 1, 1, 1.0, 1.0, 1, 1))
    assert a == Counters(2, 3, 4, 5.0, 6.0, 7, 8)
