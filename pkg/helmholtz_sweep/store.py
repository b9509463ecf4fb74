"""Persistent CSV storage for experiment report rows."""
from __future__ import annotations

import csv
import logging
from pathlib import Path
from typing import Any

from .const import (
    ATTR_KEY,
    ATTR_STATUS,
    REPORT_COLUMNS,
    STATUS_FAILED,
    STATUS_PRIORITY,
)

_LOGGER = logging.getLogger(__name__)


class ReportStore:
    """Report rows keyed by row key, stored as one CSV file."""

    def __init__(self, path: str | Path) -> None:
        """Initialize the report store."""
        self._path = Path(path)
        self._rows: dict[str, dict[str, Any]] = {}

    @property
    def path(self) -> Path:
        """Location of the CSV file."""
        return self._path

    @property
    def rows(self) -> dict[str, dict[str, Any]]:
        """Return all stored rows."""
        return self._rows

    def load(self) -> None:
        """Load rows from the CSV file if it exists."""
        if not self._path.exists():
            return
        with self._path.open(newline="", encoding="utf-8") as handle:
            for row in csv.DictReader(handle):
                if row.get(ATTR_KEY):
                    self._rows[row[ATTR_KEY]] = row
        _LOGGER.debug("Loaded %d report rows from %s", len(self._rows), self._path)

    def save(self) -> None:
        """Write all rows; the file always carries the header."""
        self._path.parent.mkdir(parents=True, exist_ok=True)
        partial = self._path.with_name(self._path.name + ".tmp")
        with partial.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.DictWriter(
                handle, fieldnames=REPORT_COLUMNS, extrasaction="ignore"
            )
            writer.writeheader()
            for row in self._rows.values():
                writer.writerow(row)
        partial.replace(self._path)

    def merge_rows(self, new_rows: list[dict[str, Any]]) -> list[str]:
        """Merge rows into the store.

        A row never moves back to a worse status
        (failed -> not_converged -> converged). Rows of equal or better
        status replace the stored row.

        Returns list of row keys that were added or updated.
        """
        changed: list[str] = []

        for row in new_rows:
            key = row.get(ATTR_KEY)
            if not key:
                continue

            existing = self._rows.get(key)
            if existing is not None:
                new_priority = STATUS_PRIORITY.get(row.get(ATTR_STATUS), 0)
                old_priority = STATUS_PRIORITY.get(existing.get(ATTR_STATUS), 0)
                if new_priority < old_priority:
                    _LOGGER.debug("Kept %s row for %s", existing.get(ATTR_STATUS), key)
                    continue

            self._rows[key] = dict(row)
            changed.append(key)

        return changed

    def completed_keys(self) -> set[str]:
        """Keys of rows that finished, converged or not."""
        return {
            key
            for key, row in self._rows.items()
            if row.get(ATTR_STATUS, STATUS_FAILED) != STATUS_FAILED
        }
