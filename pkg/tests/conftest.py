import pytest

from artgas.engine import DeviceSpec, Scheme, SimConfig
from artgas.traffic import ArrivalMode, TrafficProfile


def periodic(rate):
    return TrafficProfile.light(rate, mode=ArrivalMode.PERIODIC)


@pytest.fixture
def golden_config():
    devices = (DeviceSpec(0, periodic(5.0)), DeviceSpec(1, periodic(2.5)))
    return SimConfig(scheme=Scheme.ARTGAS, devices=devices, duration_superframes=5, seed=1, backoff_exponent=0)


_ACCEPTANCE: list[tuple[str, bool, str]] = []


@pytest.fixture
def report(request):
    """Record one pass/fail line for an acceptance criterion."""
    def _report(criterion, ok, detail=""):
        _ACCEPTANCE.append((criterion, bool(ok), detail))
        print(f"{criterion}: {'PASS' if ok else 'FAIL'} {detail}")
        return ok
    return _report


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, ok, detail in sorted(_ACCEPTANCE, key=lambda r: int(r[0].split()[1])):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {criterion}  {detail}")
