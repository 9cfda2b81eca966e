"""Tests for the timing monitor."""
import pytest

from core.exceptions import ConstructionError
from util.performance import PerformanceMonitor, monitor_performance, performance_monitor


class TestPerformanceMonitor:
    """Test recording of durations and failures."""

    def test_records_success_and_failure(self):
        monitor = PerformanceMonitor()
        with monitor.monitor_operation("search", bound=2):
            pass
        with pytest.raises(ConstructionError):
            with monitor.monitor_operation("search"):
                raise ConstructionError("nothing found")
        summary = monitor.get_metrics_summary()
        assert summary["search"]["count"] == 2
        assert monitor.last_duration("search") >= 0
        assert monitor.last_duration("other") is None

    def test_clear(self):
        monitor = PerformanceMonitor()
        with monitor.monitor_operation("search"):
            pass
        monitor.clear_metrics()
        assert monitor.get_metrics_summary() == {}

    def test_decorator_uses_global_monitor(self):
        @monitor_performance("decorated_call")
        def work(x):
            return 2 * x

        assert work(3) == 6
        assert performance_monitor.last_duration("decorated_call") is not None
