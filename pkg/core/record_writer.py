"""
Ordered record writer - the single point through which survey output passes.

Blocks of records may finish in any order when the survey runs on several
workers. The writer buffers them and releases only the contiguous prefix of
block indices, so whatever sits downstream (the in-memory list, a CSV stream)
always sees ascending |d| regardless of worker count.
"""
import logging
from threading import Lock
from typing import Callable, Dict, List, Optional


class OrderedRecordWriter:
    def __init__(self,
                 sink: Optional[Callable[[List], None]] = None,
                 logger: Optional[logging.Logger] = None):
        self.sink = sink
        self.logger = logger or logging.getLogger(__name__)
        self.records: List = []
        self._lock = Lock()
        self._pending: Dict[int, List] = {}
        self._next_index = 0

    @property
    def pending_blocks(self) -> int:
        return len(self._pending)

    def submit(self, index: int, block: List) -> int:
        """
        Hands over block `index`. Returns how many blocks were released.
        """
        with self._lock:
            if index < self._next_index or index in self._pending:
                self.logger.warning(f"Ignoring duplicate block {index}")
                return 0
            self._pending[index] = block

            released = 0
            while self._next_index in self._pending:
                ready = self._pending.pop(self._next_index)
                self.records.extend(ready)
                if self.sink:
                    self.sink(ready)
                self._next_index += 1
                released += 1
            return released

    def close(self) -> List:
        """Returns every released record; complains about gaps."""
        with self._lock:
            if self._pending:
                self.logger.error(f"{len(self._pending)} blocks never released (missing block {self._next_index})")
            return list(self.records)
