import logging
import os
import re
from fractions import Fraction
from typing import List, Optional, Tuple

from utils.errors import ExportError, UsageError

_RANGE_PATTERN = re.compile(r"^\s*(\d+)\s*:\s*(\d+)\s*$")


class InputValidator:
    """Parses and checks command-line inputs before any computation starts."""

    def __init__(self, logger: Optional[logging.Logger] = None):
        self.logger = logger or logging.getLogger(__name__)

    def resolve_d(self, d: Optional[int], abs_d: Optional[int]) -> int:
        """Signed radicand from either `-d -163` or `--abs-d 163`."""
        if d is not None and abs_d is not None:
            raise UsageError("give either -d or --abs-d, not both")
        if abs_d is not None:
            if abs_d < 1:
                raise UsageError(f"--abs-d must be positive, got {abs_d}")
            return -abs_d
        if d is None:
            raise UsageError("a discriminant is required (-d, --abs-d or --range)")
        return d

    def parse_range(self, text: str) -> Tuple[int, int]:
        """'lo:hi' over |d|, 1 <= lo <= hi."""
        match = _RANGE_PATTERN.match(text or "")
        if not match:
            raise UsageError(f"range must look like lo:hi, got {text!r}")
        lo, hi = int(match.group(1)), int(match.group(2))
        if lo < 1 or lo > hi:
            raise UsageError(f"range needs 1 <= lo <= hi, got {lo}:{hi}")
        return lo, hi

    def parse_primes(self, text: Optional[str]) -> List[int]:
        """Comma-separated integers; primality is checked by SiftPrimeSet.of."""
        if not text:
            return []
        try:
            return [int(part) for part in text.split(",") if part.strip()]
        except ValueError as e:
            raise UsageError(f"cannot read prime list {text!r}", original_exception=e)

    def validate_output_path(self, path: str) -> str:
        directory = os.path.dirname(os.path.abspath(path))
        if not os.path.isdir(directory):
            raise ExportError(f"output directory does not exist: {directory}")
        if os.path.isdir(path):
            raise ExportError(f"output path is a directory: {path}")
        if not os.access(directory, os.W_OK) or (os.path.exists(path) and not os.access(path, os.W_OK)):
            raise ExportError(f"output path is not writable: {path}")
        return path

    def validate_corollary_params(self, c: float, c_prime: float) -> None:
        if not 0 < Fraction(repr(c)) < Fraction(repr(c_prime)) < Fraction(1, 4):
            raise UsageError(f"need 0 < c < c' < 1/4, got c={c}, c'={c_prime}")

    def validate_workers(self, workers: int) -> int:
        if workers < 1:
            raise UsageError(f"worker count must be at least 1, got {workers}")
        return workers

    def validate_positive(self, name: str, value: float) -> float:
        if value < 1:
            raise UsageError(f"{name} must be at least 1, got {value}")
        return value
