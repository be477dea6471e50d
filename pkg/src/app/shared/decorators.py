import functools
import time
from typing import Callable

from app import logger


def retry_on_fail(
    max_retries: int = 3,
    sleep_interval: float = 0.5,
    exceptions: tuple[type[Exception], ...] = (Exception,),
):
    def wrapper(func: Callable):
        @functools.wraps(func)
        def inner(*args, **kwargs):
            for i in range(max_retries + 1):
                try:
                    return func(*args, **kwargs)
                except exceptions as e:
                    if i == max_retries:
                        raise e
                    logger.info(
                        f"Retry: {func.__name__}, {i + 1} times, failed reason: {e}"
                    )
                    time.sleep(sleep_interval)

        return inner

    return wrapper


def log_duration(label: str | None = None):
    """Log wall time of the decorated call at INFO level."""

    def wrapper(func: Callable):
        name = label or func.__name__

        @functools.wraps(func)
        def inner(*args, **kwargs):
            start = time.perf_counter()
            try:
                return func(*args, **kwargs)
            finally:
                logger.info(f"[{name}] finished in {time.perf_counter() - start:.2f} s")

        return inner

    return wrapper
