"""Timing of pipelines and searches."""
import functools
import logging
import threading
import time
from collections import defaultdict
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional

SLOW_OPERATION_SECONDS = 5.0


@dataclass
class TimingRecord:
    """One timed call."""
    operation_name: str
    duration: float
    success: bool
    error_message: Optional[str] = None
    metadata: Dict[str, Any] = field(default_factory=dict)


class PerformanceMonitor:
    """Thread-safe collector of timing records."""

    def __init__(self):
        self._records: List[TimingRecord] = []
        self._lock = threading.Lock()
        self._durations: Dict[str, List[float]] = defaultdict(list)
        self.logger = logging.getLogger(__name__)

    @contextmanager
    def monitor_operation(self, operation_name: str, **metadata):
        """Time the enclosed block and record it, also when it raises."""
        start = time.perf_counter()
        success = True
        error_message = None
        try:
            yield
        except Exception as e:
            success = False
            error_message = str(e)
            raise
        finally:
            self._record(TimingRecord(
                operation_name=operation_name,
                duration=time.perf_counter() - start,
                success=success,
                error_message=error_message,
                metadata=metadata,
            ))

    def _record(self, record: TimingRecord) -> None:
        with self._lock:
            self._records.append(record)
            self._durations[record.operation_name].append(record.duration)
            if record.duration > SLOW_OPERATION_SECONDS:
                self.logger.warning(
                    "Slow operation detected: %s took %.2fs", record.operation_name, record.duration
                )

    def get_metrics_summary(self) -> Dict[str, Dict[str, float]]:
        with self._lock:
            return {
                name: {
                    "count": len(durations),
                    "avg_duration": sum(durations) / len(durations),
                    "max_duration": max(durations),
                    "total_duration": sum(durations),
                }
                for name, durations in self._durations.items()
                if durations
            }

    def last_duration(self, operation_name: str) -> Optional[float]:
        with self._lock:
            durations = self._durations.get(operation_name)
            return durations[-1] if durations else None

    def clear_metrics(self) -> None:
        with self._lock:
            self._records.clear()
            self._durations.clear()


# Global performance monitor instance
performance_monitor = PerformanceMonitor()


def monitor_performance(operation_name: Optional[str] = None, **metadata):
    """Decorator recording the duration of every call."""
    def decorator(func: Callable) -> Callable:
        op_name = operation_name or f"{func.__module__}.{func.__name__}"

        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            with performance_monitor.monitor_operation(op_name, **metadata):
                return func(*args, **kwargs)

        return wrapper

    return decorator
