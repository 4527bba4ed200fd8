"""Runs experiments: validation, parallel replicate blocks, CSV and manifest output."""

import asyncio
import csv
import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

import mpmath
import numpy as np
import sympy

from . import __version__
from .config import ExperimentConfig, RunnerConfig, get_config
from .experiment_handlers import ExperimentHandlerFactory
from .parameter_schemas import get_schema
from .seeding import Block, ReplicateStreams
from .validation import get_validator

logger = logging.getLogger(__name__)

CSV_NAME = "results.csv"
MANIFEST_NAME = "manifest.json"


def format_value(value: Any) -> str:
    """CSV text of one cell; floats carry 17 significant digits."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (complex, np.complexfloating)):
        z = complex(value)
        sign = "+" if z.imag >= 0 or math.isnan(z.imag) else "-"
        return f"{format(z.real, '.17g')}{sign}{format(abs(z.imag), '.17g')}j"
    if isinstance(value, mpmath.mpf):
        return mpmath.nstr(value, 17)
    if isinstance(value, sympy.Basic):
        return str(value)
    if isinstance(value, Enum):
        return str(value.value)
    return str(value)


def _json_default(value: Any) -> Any:
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    return format_value(value)


@dataclass
class RunRecord:
    """Outcome of one run: config echo, rows in CSV column order, and a summary."""
    config: ExperimentConfig
    parameters: Dict[str, Any]
    version: str
    runtime_s: float
    columns: Sequence[str]
    rows: List[Dict[str, Any]] = field(default_factory=list)
    summary: Dict[str, Any] = field(default_factory=dict)

    def manifest(self) -> Dict[str, Any]:
        return {
            "experiment": self.config.experiment.value,
            "params": self.parameters,
            "seed": self.config.seed,
            "version": self.version,
            "runtime_s": self.runtime_s,
            "summary": self.summary,
        }


def write_csv(path: Path, columns: Sequence[str], rows: List[Dict[str, Any]]) -> None:
    """UTF-8, comma-delimited, '\\n' line ends, header row always written."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_value(row.get(column)) for column in columns])


def write_manifest(path: Path, manifest: Dict[str, Any]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(manifest, f, indent=2, sort_keys=True, default=_json_default)
        f.write('\n')


class RunManager:
    """Owns the worker pool and runs experiments end to end."""

    def __init__(self, config: Optional[RunnerConfig] = None):
        self.config = config or get_config()
        self._executor: Optional[ThreadPoolExecutor] = None

    def _get_executor(self) -> ThreadPoolExecutor:
        if self._executor is None:
            self._executor = ThreadPoolExecutor(max_workers=self.config.threads,
                                                thread_name_prefix="logcorr")
        return self._executor

    @staticmethod
    def _draw_block(streams: ReplicateStreams, block: Block,
                    draw: Callable[[np.random.Generator, int], np.ndarray]) -> np.ndarray:
        logger.debug(f"Drawing replicate {block.replicate} ({block.size} trials)")
        return np.asarray(draw(streams.rng(block), block.size))

    async def map_blocks(self, streams: ReplicateStreams, trials: int,
                         draw: Callable[[np.random.Generator, int], np.ndarray]) -> np.ndarray:
        """Evaluate `draw` on every replicate block and stack the results in block order."""
        blocks = streams.blocks(trials, self.config.block_size)
        if not blocks:
            raise ValueError(f"trials must be >= 1, got {trials}")
        loop = asyncio.get_running_loop()
        executor = self._get_executor()
        parts = await asyncio.gather(*[
            loop.run_in_executor(executor, self._draw_block, streams, block, draw) for block in blocks
        ])
        return np.concatenate(parts, axis=0)

    async def call(self, fn: Callable, *args, **kwargs) -> Any:
        """Run a deterministic computation on the pool without blocking the event loop."""
        loop = asyncio.get_running_loop()
        return await loop.run_in_executor(self._get_executor(), lambda: fn(*args, **kwargs))

    async def run(self, config: ExperimentConfig) -> Dict[str, Any]:
        """Validate, dispatch and time one experiment."""
        validation = get_validator().validate(config)
        if not validation.valid:
            return {"success": False, "error": validation.reason, "errors": validation.errors}

        logger.info(f"Running {config.experiment.value} with seed {config.seed} on {self.config.threads} threads")
        start = time.perf_counter()
        handler = ExperimentHandlerFactory(self.config, self).create_handler(config.experiment)
        streams = ReplicateStreams(config.seed, config.experiment.value)
        result = await handler.execute(streams, **validation.parameters)
        if not result["success"]:
            return result

        runtime = time.perf_counter() - start
        record = RunRecord(
            config=config,
            parameters=validation.parameters,
            version=__version__,
            runtime_s=runtime,
            columns=get_schema(config.experiment).columns,
            rows=result["rows"],
            summary=result.get("summary", {}),
        )
        logger.info(f"Finished {config.experiment.value} in {runtime:.2f}s ({len(record.rows)} rows)")
        return {"success": True, "record": record}

    def output_dir(self, config: ExperimentConfig) -> Path:
        if config.output_path:
            return Path(config.output_path)
        return Path(self.config.output_dir) / f"{config.experiment.value}-seed{config.seed}"

    def write_outputs(self, record: RunRecord) -> Dict[str, Path]:
        directory = self.output_dir(record.config)
        paths = {"csv": directory / CSV_NAME, "manifest": directory / MANIFEST_NAME}
        write_csv(paths["csv"], record.columns, record.rows)
        write_manifest(paths["manifest"], record.manifest())
        logger.info(f"Wrote {paths['csv']} and {paths['manifest']}")
        return paths

    def close(self) -> None:
        if self._executor is not None:
            self._executor.shutdown(wait=True)
            self._executor = None


# Global run manager instance
run_manager: Optional[RunManager] = None


def get_run_manager() -> RunManager:
    """Get the global run manager, created on first use from the global runner config."""
    global run_manager
    if run_manager is None:
        run_manager = RunManager()
    return run_manager
