from typing import Dict, List, Optional


class SurveyState:
    """Progress and running statistics for one survey run."""
    def __init__(self):
        self.reset()

    def reset(self):
        """Resets the state for a new survey run."""
        self.is_running = False
        self.progress = 0
        self.total = 0
        self.blocks_done = 0
        self.failed = 0
        self.errors = 0
        self.stats: Dict[str, Optional[float]] = {
            "min_zimmert": None,
            "max_zimmert": None,
            "max_ratio": None,
            "max_ratio_d": None,
        }

    @property
    def percent(self) -> float:
        return (self.progress / self.total * 100) if self.total > 0 else 0.0

    def update_stats(self, records: List) -> None:
        """Folds a finished block of SurveyRecords into the counters."""
        self.blocks_done += 1
        for record in records:
            self.progress += 1
            if record.error is not None:
                self.errors += 1
                continue
            if not record.holds:
                self.failed += 1

            size = record.zimmert_size
            if self.stats["min_zimmert"] is None or size < self.stats["min_zimmert"]:
                self.stats["min_zimmert"] = size
            if self.stats["max_zimmert"] is None or size > self.stats["max_zimmert"]:
                self.stats["max_zimmert"] = size

            if record.burgess_reference:
                ratio = abs(record.partial_sum) / record.burgess_reference
                if self.stats["max_ratio"] is None or ratio > self.stats["max_ratio"]:
                    self.stats["max_ratio"] = ratio
                    self.stats["max_ratio_d"] = record.d
