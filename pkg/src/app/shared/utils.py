"""Shared utility functions"""
import logging
from queue import Queue
from threading import Thread
from typing import Callable, Sequence, TypeVar


T = TypeVar("T")
R = TypeVar("R")

logger = logging.getLogger(__name__)


def _worker(
    func: Callable[[T], R],
    index_queue: Queue,
    results: list,
    errors: list,
    worker_id: int,
) -> None:
    thread_prefix = f"[Worker-{worker_id}]"
    while True:
        item = index_queue.get()
        if item is None:
            index_queue.task_done()
            break

        index, value = item
        try:
            results[index] = func(value)
        except Exception as e:
            logger.exception(f"{thread_prefix} FAILED AT ITEM: {index}")
            errors.append((index, e))
        finally:
            index_queue.task_done()


def parallel_map(
    func: Callable[[T], R], items: Sequence[T], thread_number: int = 1
) -> list[R]:
    """Apply ``func`` to every item, preserving input order.

    Runs inline when ``thread_number`` is 1. The first failure (lowest
    index) is re-raised after all workers stop.
    """
    if thread_number <= 1 or len(items) <= 1:
        return [func(item) for item in items]

    thread_number = min(thread_number, len(items))
    index_queue: Queue = Queue()
    results: list = [None] * len(items)
    errors: list[tuple[int, Exception]] = []

    for index, value in enumerate(items):
        index_queue.put((index, value))

    threads = []
    for i in range(thread_number):
        t = Thread(
            target=_worker,
            args=(func, index_queue, results, errors, i + 1),
            daemon=True,
            name=f"Worker-{i + 1}",
        )
        t.start()
        threads.append(t)

    index_queue.join()
    for _ in range(thread_number):
        index_queue.put(None)
    for t in threads:
        t.join()

    if errors:
        raise min(errors, key=lambda pair: pair[0])[1]
    return results


