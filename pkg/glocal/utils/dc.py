import time
import functools
import logging


def timing(func):
    """Decorator to measure and log the total execution time of a function."""
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        start_time = time.perf_counter()
        result = func(*args, **kwargs)
        elapsed = time.perf_counter() - start_time
        logging.getLogger(func.__module__).info(f">>>>> '{func.__qualname__}' executed in {elapsed:.6f} seconds")
        return result
    return wrapper


class Stopwatch:
    """Wall clock started at construction; `elapsed` is in seconds."""

    def __init__(self):
        self.start = time.perf_counter()

    @property
    def elapsed(self) -> float:
        return time.perf_counter() - self.start
