"""Parameter study coordinator."""
from __future__ import annotations

import asyncio
import logging
from pathlib import Path
from typing import Any

from .config import ExperimentConfig, expand_vary
from .const import (
    ATTR_ERROR,
    ATTR_KEY,
    ATTR_STATUS,
    CONF_OUTPUT_DIR,
    CONF_REPORT_NAME,
    CONF_STUDY_WORKERS,
    ROW_KEY_FIELDS,
    STATUS_FAILED,
)
from .exceptions import ConfigurationError
from .runner import execute, report_row
from .store import ReportStore

_LOGGER = logging.getLogger(__name__)


class StudyCoordinator:
    """Run every row of a parameter grid and record it in the report CSV.

    Rows already completed in an existing report are skipped. A failing
    row is recorded as failed and the study carries on.
    """

    def __init__(
        self,
        base: ExperimentConfig,
        grid: list[tuple[str, list[str]]],
        output_dir: str | Path | None = None,
        workers: int | None = None,
    ) -> None:
        """Initialize the study coordinator."""
        self._base = base
        self._grid = grid
        self._output_dir = Path(
            output_dir if output_dir is not None else base[CONF_OUTPUT_DIR]
        )
        self._store = ReportStore(self._output_dir / base[CONF_REPORT_NAME])
        self._workers = workers or base[CONF_STUDY_WORKERS]
        self._key_fields = ROW_KEY_FIELDS + [
            key for key, _ in grid if key not in ROW_KEY_FIELDS
        ]
        self._lock = asyncio.Lock()
        self.skipped: list[str] = []

    @property
    def store(self) -> ReportStore:
        """Return the report store."""
        return self._store

    async def async_run(self) -> list[dict[str, Any]]:
        """Run all pending rows; returns the rows produced by this run."""
        self._store.load()
        completed = self._store.completed_keys()
        semaphore = asyncio.Semaphore(self._workers)

        tasks = []
        for overrides in expand_vary(self._grid):
            tasks.append(self._async_run_row(overrides, completed, semaphore))
        rows = [row for row in await asyncio.gather(*tasks) if row is not None]

        # Always leave a report behind, header-only for an empty grid
        async with self._lock:
            self._store.save()
        _LOGGER.info(
            "Study finished: %d rows run, %d skipped", len(rows), len(self.skipped)
        )
        return rows

    async def _async_run_row(
        self,
        overrides: dict[str, str],
        completed: set[str],
        semaphore: asyncio.Semaphore,
    ) -> dict[str, Any] | None:
        """Run one row unless it already completed."""
        try:
            config = self._base.with_overrides(overrides)
        except ConfigurationError as err:
            _LOGGER.warning("Study row %s is invalid: %s", overrides, err)
            key = ";".join(f"{k}={v}" for k, v in overrides.items())
            row = {ATTR_KEY: f"invalid:{key}", ATTR_STATUS: STATUS_FAILED, ATTR_ERROR: str(err)}
            await self._async_record(row)
            return row

        key = config.row_key(self._key_fields)
        if key in completed:
            _LOGGER.debug("Skipping completed row %s", key)
            self.skipped.append(key)
            return None

        async with semaphore:
            try:
                result = await asyncio.to_thread(execute, config, self._output_dir, key)
                row = result.row
            except Exception as err:
                _LOGGER.warning("Study row %s failed: %s", key, err)
                row = report_row(config, None, key)
                row[ATTR_ERROR] = str(err)

        await self._async_record(row)
        return row

    async def _async_record(self, row: dict[str, Any]) -> None:
        """Merge a row and persist the report."""
        async with self._lock:
            self._store.merge_rows([row])
            self._store.save()


def sweep_study(
    base: ExperimentConfig,
    vary: list[tuple[str, list[str]]],
    output_dir: str | Path | None = None,
    workers: int | None = None,
) -> list[dict[str, Any]]:
    """Run a parameter study to completion from synchronous code."""
    coordinator = StudyCoordinator(base, vary, output_dir, workers)
    return asyncio.run(coordinator.async_run())
