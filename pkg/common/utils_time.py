"""
Time utilities for the Code Curator toolkit.

This module provides:
- Timezone-aware "now" for run metadata (the only place timestamps appear)
- Wall-clock stopwatch for stage and benchmark timing
- Duration formatting for logs and reports
"""

import time
from datetime import datetime, timedelta
from typing import Optional

import pytz


DEFAULT_TZ = "UTC"


def now_local(tz_name: Optional[str] = None) -> datetime:
    """
    Get current time in the configured timezone.

    Args:
        tz_name (str, optional): IANA timezone name. If None, uses UTC.

    Returns:
        datetime: Current timezone-aware time
    """
    return datetime.now(pytz.timezone(tz_name or DEFAULT_TZ))


def timestamp_iso(tz_name: Optional[str] = None) -> str:
    """
    Get an ISO-8601 timestamp with offset, seconds precision.

    Args:
        tz_name (str, optional): IANA timezone name

    Returns:
        str: Timestamp such as 2026-10-17T08:40:00+00:00
    """
    return now_local(tz_name).replace(microsecond=0).isoformat()


def validate_timezone(tz_name: str) -> str:
    """
    Check that a timezone name is known to pytz.

    Raises:
        ValueError: If the name is not a known timezone
    """
    try:
        pytz.timezone(tz_name)
    except pytz.UnknownTimeZoneError:
        raise ValueError(f"Invalid timezone: {tz_name}. Use format like 'Europe/Stockholm'")
    return tz_name


class Stopwatch:
    """Monotonic wall-clock timer usable as a context manager."""

    def __init__(self):
        self.started: Optional[float] = None
        self.elapsed: float = 0.0

    def __enter__(self) -> "Stopwatch":
        self.started = time.perf_counter()
        return self

    def __exit__(self, *exc) -> None:
        self.elapsed = time.perf_counter() - self.started


def format_duration(duration: timedelta) -> str:
    """
    Format a timedelta into a human-readable string.

    Args:
        duration (timedelta): Duration to format

    Returns:
        str: Formatted duration string
    """
    total = duration.total_seconds()

    if total < 1:
        return f"{total * 1000:.0f} ms"
    if total < 60:
        return f"{total:.2f} seconds"

    total_seconds = int(total)
    if total_seconds < 3600:
        minutes = total_seconds // 60
        seconds = total_seconds % 60
        return f"{minutes}m {seconds}s"

    hours = total_seconds // 3600
    minutes = (total_seconds % 3600) // 60
    return f"{hours}h {minutes}m"
