# -----------------------------------------------------------------------------
# Export Manager - serialize survey records as CSV, JSON, YAML or a table
# -----------------------------------------------------------------------------
import csv
import json
import logging
from typing import Any, Dict, Iterable, List, Optional, TextIO

import yaml
from rich.console import Console
from rich.table import Table

from utils.errors import ExportError

CSV_FIELDS = (
    "d", "abs_d", "nmax", "zimmert_size", "prime_support_size", "rank_lower_bound",
    "pi_x", "omega_d", "sifted", "sigma1", "sigma2", "burgess_reference", "holds",
)

FORMATS = ("table", "csv", "json", "yaml")


def format_value(value: Any) -> str:
    """Text form used in CSV and tables: true/false, 6 significant digits, '' for None."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".6g")
    return str(value)


def plain_value(value: Any) -> Any:
    """Structured form used in JSON and YAML."""
    if isinstance(value, float):
        return float(format(value, ".6g"))
    return value


class CsvStream:
    """Header-first CSV writer fed block by block."""

    def __init__(self, stream: TextIO):
        self._writer = csv.writer(stream, lineterminator="\n")
        self._writer.writerow(CSV_FIELDS)

    def write_rows(self, records: Iterable) -> None:
        for record in records:
            self._writer.writerow([format_value(getattr(record, name)) for name in CSV_FIELDS])


class ExportManager:
    """Writes SurveyRecords in the supported output formats."""

    def __init__(self, logger: Optional[logging.Logger] = None):
        self.logger = logger or logging.getLogger(__name__)

    @staticmethod
    def record_dict(record) -> Dict[str, Any]:
        return {name: plain_value(getattr(record, name)) for name in CSV_FIELDS}

    def write(self, records: List, fmt: str, stream: TextIO) -> None:
        if fmt not in FORMATS:
            raise ExportError(f"unknown output format: {fmt}")
        try:
            if fmt == "csv":
                CsvStream(stream).write_rows(records)
            elif fmt == "json":
                json.dump([self.record_dict(r) for r in records], stream, indent=2)
                stream.write("\n")
            elif fmt == "yaml":
                yaml.safe_dump([self.record_dict(r) for r in records], stream, sort_keys=False)
            else:
                self._print_table(records, stream)
        except OSError as e:
            raise ExportError(f"failed to write {fmt} output: {e}", original_exception=e)
        self.logger.debug(f"Exported {len(records)} records as {fmt}")

    def write_file(self, records: List, fmt: str, path: str) -> None:
        try:
            with open(path, "w", encoding="utf-8", newline="") as f:
                self.write(records, fmt, f)
        except OSError as e:
            raise ExportError(f"cannot write {path}: {e}", original_exception=e)
        self.logger.info(f"Wrote {len(records)} records to {path}")

    @staticmethod
    def _print_table(records: List, stream: TextIO) -> None:
        table = Table(header_style="bold magenta", box=None)
        for name in CSV_FIELDS:
            table.add_column(name, justify="right")
        for record in records:
            table.add_row(*(format_value(getattr(record, name)) for name in CSV_FIELDS))
        Console(file=stream, width=200).print(table)
