import pytest

from polysafe.utils.timer import Timer, timer


@pytest.fixture(autouse=True)
def fresh_timer():
    Timer.clear_instances()
    yield
    Timer.clear_instances()


@pytest.mark.unit
def test_context_accumulates():
    with timer("block"):
        pass
    with timer("block"):
        pass
    assert set(Timer().log_dict()) == {"block"}
    assert Timer().log_dict()["block"] >= 0.0


@pytest.mark.unit
def test_decorator_uses_function_name():
    @timer
    def solve():
        return 3

    assert solve() == 3
    assert "solve" in Timer().log_dict()


@pytest.mark.unit
def test_timer_is_a_singleton():
    assert Timer() is Timer()
    with pytest.raises(AssertionError):
        Timer().end("never_started")


@pytest.mark.unit
def test_clear_instances_drops_running_timers():
    first = Timer()
    first.start("open")
    Timer.clear_instances()
    second = Timer()
    assert second is not first
    assert second.log_dict() == {}
    with timer("open"):
        pass
    assert "open" in second.log_dict()
