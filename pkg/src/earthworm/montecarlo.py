"""Reproducible experiment sweeps: seed derivation, replicas, parallel execution.

A sweep runs `replicas` independent trajectories at every point of an
n-grid. Each row's generator stream is pinned by splitmix64 seed
derivation from the plan's base seed, so the resulting table is a pure
function of the plan - regardless of worker count or scheduling order.
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Optional

from .checkpoint import CheckpointError, FORMAT_VERSION, atomic_write_text
from .dynamics import new_state, run
from .rng import derive_seed, splitmix64_stream

__all__ = [
    "ExperimentPlan",
    "SampleRow",
    "SampleTable",
    "run_sweep",
    "derive_seed",
]


@dataclass(frozen=True)
class ExperimentPlan:
    """What to run: grid of step counts, replicas per point, base seed.

    ``record_every`` is carried for single-trajectory runs configured from
    a plan; `run_sweep` collects endpoint statistics only and ignores it.
    """

    dim: int
    n_grid: tuple
    replicas: int
    seed_base: int
    track_visits: bool = False
    record_every: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))
        if self.dim < 2:
            raise ValueError(f"dimension must be >= 2, got {self.dim}")
        if not self.n_grid:
            raise ValueError("n_grid must be nonempty")
        if any(n < 0 for n in self.n_grid):
            raise ValueError(f"n_grid entries must be nonnegative, got {self.n_grid}")
        if any(a >= b for a, b in zip(self.n_grid, self.n_grid[1:])):
            raise ValueError(f"n_grid must be strictly increasing, got {self.n_grid}")
        if self.replicas < 1:
            raise ValueError(f"replicas must be >= 1, got {self.replicas}")

    def as_dict(self) -> dict:
        return {
            "dim": self.dim,
            "n_grid": list(self.n_grid),
            "replicas": self.replicas,
            "seed_base": self.seed_base,
            "track_visits": self.track_visits,
            "record_every": self.record_every,
        }

    def row_seeds(self) -> dict:
        """Seed per (n, replica): splitmix64 outputs of seed_base in row order.

        The global row index in (n, replica) enumeration order is the
        derivation index, so every row of the table has a disjoint stream.
        """
        total = len(self.n_grid) * self.replicas
        stream = splitmix64_stream(self.seed_base, total)
        seeds = {}
        idx = 0
        for n in self.n_grid:
            for r in range(self.replicas):
                seeds[(n, r)] = stream[idx]
                idx += 1
        return seeds


@dataclass(frozen=True)
class SampleRow:
    dim: int
    n: int
    replica: int
    seed: int
    s_n: int
    created_total: int
    tan_total: Optional[int]
    walltime_ms: float

    def as_dict(self) -> dict:
        return {
            "dim": self.dim,
            "n": self.n,
            "replica": self.replica,
            "seed": self.seed,
            "s_n": self.s_n,
            "created_total": self.created_total,
            "tan_total": self.tan_total,
            "walltime_ms": self.walltime_ms,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "SampleRow":
        return cls(
            dim=int(payload["dim"]),
            n=int(payload["n"]),
            replica=int(payload["replica"]),
            seed=int(payload["seed"]),
            s_n=int(payload["s_n"]),
            created_total=int(payload["created_total"]),
            tan_total=None if payload["tan_total"] is None else int(payload["tan_total"]),
            walltime_ms=float(payload["walltime_ms"]),
        )


@dataclass
class SampleTable:
    rows: list = field(default_factory=list)

    def validate(self) -> None:
        seen = set()
        for row in self.rows:
            if not 1 <= row.s_n <= row.n + 1:
                raise ValueError(f"row ({row.n},{row.replica}): s_n={row.s_n} outside [1, n+1]")
            if row.tan_total is not None and row.tan_total > row.n:
                raise ValueError(f"row ({row.n},{row.replica}): tan_total > n")
            key = (row.n, row.replica)
            if key in seen:
                raise ValueError(f"duplicate row key {key}")
            seen.add(key)

    def sorted_rows(self) -> list:
        return sorted(self.rows, key=lambda r: (r.n, r.replica))

    def n_values(self) -> list:
        return sorted({row.n for row in self.rows})

    def samples_at(self, n: int) -> list:
        return [row.s_n for row in self.sorted_rows() if row.n == n]

    def mean_pairs(self) -> list:
        """(n, mean of S_n) per grid point, for log-log regression."""
        pairs = []
        for n in self.n_values():
            samples = self.samples_at(n)
            pairs.append((n, sum(samples) / len(samples)))
        return pairs

    def tan_rate_pairs(self) -> list:
        """(n, mean of tan_total/n) per grid point; error if counts missing."""
        if any(row.tan_total is None for row in self.rows):
            raise ValueError("table has rows without tan counts (run with visit tracking)")
        pairs = []
        for n in self.n_values():
            rates = [row.tan_total / row.n for row in self.rows if row.n == n]
            pairs.append((n, sum(rates) / len(rates)))
        return pairs


def _run_row(args) -> SampleRow:
    dim, n, replica, seed, track_visits = args
    started = time.perf_counter()
    state = new_state(dim, seed=seed, track_visits=track_visits)
    summary = run(state, n)
    elapsed_ms = (time.perf_counter() - started) * 1e3
    return SampleRow(
        dim=dim,
        n=n,
        replica=replica,
        seed=seed,
        s_n=summary.s_n,
        created_total=summary.created_total,
        tan_total=summary.tan_total,
        walltime_ms=round(elapsed_ms, 3),
    )


def run_sweep(
    plan: ExperimentPlan,
    parallelism: int = 1,
    checkpoint_path: Optional[str] = None,
) -> SampleTable:
    """Run the plan; one row per (n, replica), sorted, deterministic.

    With a checkpoint path, completed rows are persisted after every finish
    and skipped on resume (the plan must match). Parallel workers each own
    their runs entirely; results are reduced in (n, replica) order, so the
    table never depends on ``parallelism``.
    """
    if parallelism < 1:
        raise ValueError(f"parallelism must be >= 1, got {parallelism}")

    seeds = plan.row_seeds()
    done: dict = {}
    if checkpoint_path is not None:
        done = _load_sweep_checkpoint(checkpoint_path, plan)

    pending = [
        (plan.dim, n, r, seeds[(n, r)], plan.track_visits)
        for n in plan.n_grid
        for r in range(plan.replicas)
        if (n, r) not in done
    ]

    if parallelism == 1 or len(pending) <= 1:
        for args in pending:
            row = _run_row(args)
            done[(row.n, row.replica)] = row
            if checkpoint_path is not None:
                _save_sweep_checkpoint(checkpoint_path, plan, done)
    else:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            futures = [pool.submit(_run_row, args) for args in pending]
            for fut in as_completed(futures):
                row = fut.result()
                done[(row.n, row.replica)] = row
                if checkpoint_path is not None:
                    _save_sweep_checkpoint(checkpoint_path, plan, done)

    table = SampleTable(rows=[done[k] for k in sorted(done)])
    table.validate()
    return table


def _save_sweep_checkpoint(path: str, plan: ExperimentPlan, done: dict) -> None:
    payload = {
        "format_version": FORMAT_VERSION,
        "kind": "sweep",
        "plan": plan.as_dict(),
        "completed": [done[k].as_dict() for k in sorted(done)],
    }
    atomic_write_text(path, json.dumps(payload, sort_keys=True) + "\n")


def _load_sweep_checkpoint(path: str, plan: ExperimentPlan) -> dict:
    if not os.path.exists(path):
        return {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
    for fieldname in ("format_version", "kind", "plan", "completed"):
        if fieldname not in payload:
            raise CheckpointError(f"checkpoint missing field {fieldname!r}")
    if payload["format_version"] != FORMAT_VERSION:
        raise CheckpointError(
            f"unsupported format_version {payload['format_version']!r} (expected {FORMAT_VERSION})"
        )
    if payload["kind"] != "sweep":
        raise CheckpointError(f"expected kind 'sweep', got {payload['kind']!r}")
    if payload["plan"] != plan.as_dict():
        raise CheckpointError("checkpoint plan does not match the requested plan")
    done = {}
    for raw in payload["completed"]:
        row = SampleRow.from_dict(raw)
        done[(row.n, row.replica)] = row
    return done
