"""
Bounded producer/consumer stage between the stream parser and the engine.

The parser runs in a background thread and hands records to the single
engine thread through a bounded queue, so order is preserved and memory stays
flat. A parser exception is re-raised in the consumer at the point in the
stream where it happened.
"""

import logging
import queue
import threading
from typing import Iterable, Iterator, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")

_DONE = object()


class _Failure:
    __slots__ = ("error",)

    def __init__(self, error: BaseException):
        self.error = error


def iter_pipelined(records: Iterable[T], queue_size: int = 1024) -> Iterator[T]:
    """Iterate records, reading them ahead in a producer thread."""
    if queue_size < 1:
        raise ValueError("queue_size must be >= 1")

    buffer: "queue.Queue[object]" = queue.Queue(maxsize=queue_size)
    stop = threading.Event()

    def put(item) -> bool:
        while not stop.is_set():
            try:
                buffer.put(item, timeout=0.1)
                return True
            except queue.Full:
                continue
        return False

    def produce():
        try:
            for record in records:
                if not put(record):
                    return
        except BaseException as e:
            put(_Failure(e))
            return
        put(_DONE)

    producer = threading.Thread(target=produce, name="stream-parser", daemon=True)
    producer.start()
    try:
        while True:
            item = buffer.get()
            if item is _DONE:
                break
            if isinstance(item, _Failure):
                raise item.error
            yield item
    finally:
        stop.set()
        producer.join(timeout=5)
        if producer.is_alive():
            logger.warning("Stream parser thread did not stop within 5s")
