"""Monte Carlo sweeps of the default count over the capital-ratio grid.

Each replication owns a deterministic random substream derived from
(master_seed, stream_index). Within a replication the draw order is fixed:
the topology first, then the initially shocked bank. Both are reused across
every capital ratio in the grid (paired sampling), so per-replication
default-count traces can be compared across ratios and curves inherit the
cascade's monotonicity. Replications are independent, results are assembled
in stream-index order, and sweep output is bit-identical for any worker
count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from time import perf_counter
from typing import Callable

import numpy as np

from .balance import apply_surcharge, build_balance_sheets, compute_weights
from .cascade import CascadeResult, LossRule, initial_shock, propagate
from .errors import InvalidParameterError, KnockonError, ReplicationError
from .netgen import (
    EXTERNAL,
    HETEROGENEOUS,
    HOMOGENEOUS,
    RngStream,
    Topology,
    gen_erdos_renyi,
    gen_preferential_attachment,
    read_edge_list,
)

SWEEP_CSV_HEADER = "R,mean,std,mean_plus_std,p90,p95,p99,max,knock_on_fraction"
RAW_CSV_HEADER = "R,stream_index,N_d"


@dataclass(frozen=True)
class SurchargePolicy:
    """Extra equity ratio imposed on a fraction of the biggest banks."""

    surcharge_ratio: float
    biggest_fraction: float


@dataclass(frozen=True)
class ScenarioConfig:
    """Full description of one Monte Carlo scenario."""

    n_banks: int
    topology_kind: str
    density: float
    loan_fraction: float
    capital_ratio_grid: tuple[float, ...]
    replications: int
    master_seed: int
    lender_power: float = 0.0
    borrower_power: float = 0.0
    total_external: float = 1.0
    loss_rule: LossRule = LossRule.AMPLIFIED
    surcharge: SurchargePolicy | None = None
    initial_bank_policy: str = "uniform_random"
    topology_path: str | None = None

    def validate(self) -> None:
        """Raise InvalidParameterError on the first violated bound."""
        if self.n_banks < 2:
            raise InvalidParameterError(f"n must be at least 2, got {self.n_banks}")
        if self.topology_kind not in (HOMOGENEOUS, HETEROGENEOUS, EXTERNAL):
            raise InvalidParameterError(
                f"topology must be homogeneous, heterogeneous or external, got {self.topology_kind!r}"
            )
        if self.topology_kind == EXTERNAL and not self.topology_path:
            raise InvalidParameterError("topology_path is required when topology = external")
        if not 0.0 <= self.density <= 1.0:
            raise InvalidParameterError(f"p must lie in [0, 1], got {self.density}")
        if not 0.0 < self.loan_fraction < 0.5:
            raise InvalidParameterError(
                f"Q must lie in (0, 0.5), got {self.loan_fraction}"
            )
        grid = self.capital_ratio_grid
        if not grid:
            raise InvalidParameterError("r_grid must contain at least one value")
        if any(not 0.0 < r < 1.0 for r in grid):
            raise InvalidParameterError(f"r_grid values must lie in (0, 1), got {grid}")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise InvalidParameterError(f"r_grid must be strictly increasing, got {grid}")
        if self.replications < 1:
            raise InvalidParameterError(
                f"replications must be at least 1, got {self.replications}"
            )
        if not 0 <= int(self.master_seed) < 2**64:
            raise InvalidParameterError(f"seed must be a 64-bit unsigned integer, got {self.master_seed}")
        if self.lender_power < 0 or self.borrower_power < 0:
            raise InvalidParameterError("s and t must be non-negative")
        if self.total_external <= 0:
            raise InvalidParameterError(f"E must be positive, got {self.total_external}")
        LossRule(self.loss_rule)
        if self.initial_bank_policy != "uniform_random":
            raise InvalidParameterError(
                f"initial_bank_policy must be uniform_random, got {self.initial_bank_policy!r}"
            )
        if self.surcharge is not None:
            pol = self.surcharge
            if pol.surcharge_ratio < 0 or pol.surcharge_ratio + max(grid) >= 1.0:
                raise InvalidParameterError(
                    f"R_s must lie in [0, 1 - max R), got {pol.surcharge_ratio}"
                )
            if not 0.0 <= pol.biggest_fraction <= 1.0:
                raise InvalidParameterError(
                    f"biggest_fraction must lie in [0, 1], got {pol.biggest_fraction}"
                )


@dataclass(frozen=True)
class SweepRecord:
    """Statistics of the default count at one capital ratio."""

    capital_ratio: float
    mean: float
    std: float
    p90: int
    p95: int
    p99: int
    max_defaults: int
    knock_on_fraction: float

    @property
    def mean_plus_std(self) -> float:
        return self.mean + self.std


@dataclass(frozen=True)
class SweepResult:
    """Per-ratio statistics over all replications, plus run metadata."""

    config: ScenarioConfig
    records: tuple[SweepRecord, ...]
    realized_density_mean: float
    samples: np.ndarray | None
    per_ratio_seconds: tuple[float, ...]
    total_seconds: float

    def to_csv(self) -> str:
        lines = [SWEEP_CSV_HEADER]
        for rec in self.records:
            lines.append(
                f"{rec.capital_ratio!r},{rec.mean!r},{rec.std!r},{rec.mean_plus_std!r},"
                f"{rec.p90},{rec.p95},{rec.p99},{rec.max_defaults},{rec.knock_on_fraction!r}"
            )
        return "\n".join(lines) + "\n"

    def raw_samples_csv(self) -> str:
        if self.samples is None:
            raise InvalidParameterError("sweep was run without keep_samples")
        lines = [RAW_CSV_HEADER]
        for row, ratio in zip(self.samples, self.config.capital_ratio_grid):
            lines.extend(
                f"{ratio!r},{k},{int(nd)}" for k, nd in enumerate(row)
            )
        return "\n".join(lines) + "\n"


def percentile(samples, quantile: float):
    """Nearest-rank percentile: the ceil(q * n)-th smallest sample.

    Args:
        samples: non-empty sequence (sorted or not; sorted internally).
        quantile: q in (0, 1].
    """
    data = np.sort(np.asarray(samples))
    if data.size == 0:
        raise InvalidParameterError("percentile of an empty sample list")
    if not 0.0 < quantile <= 1.0:
        raise InvalidParameterError(f"quantile must lie in (0, 1], got {quantile}")
    # The 1e-12 slack keeps float noise in q*n from bumping the rank up.
    rank = max(1, math.ceil(quantile * data.size - 1e-12))
    value = data[rank - 1]
    return int(value) if np.issubdtype(data.dtype, np.integer) else float(value)


def _make_topology(cfg: ScenarioConfig, gen: np.random.Generator) -> Topology:
    if cfg.topology_kind == HOMOGENEOUS:
        return gen_erdos_renyi(cfg.n_banks, cfg.density, gen)
    if cfg.topology_kind == HETEROGENEOUS:
        return gen_preferential_attachment(cfg.n_banks, cfg.density, gen)
    raise InvalidParameterError(f"cannot generate kind {cfg.topology_kind!r}")


def _replicate_grid(
    cfg: ScenarioConfig,
    external: Topology | None,
    stream_index: int,
    collect_results: bool = False,
) -> tuple[np.ndarray, float, np.ndarray, list[CascadeResult] | None]:
    """One replication: one topology, one shocked bank, all grid ratios.

    Returns (default counts per ratio, realized density, seconds per ratio,
    optional cascade results per ratio).
    """
    gen = RngStream(cfg.master_seed, stream_index).generator()
    try:
        topology = external if external is not None else _make_topology(cfg, gen)
        bank = int(gen.integers(0, cfg.n_banks))
        weights = compute_weights(
            topology,
            cfg.lender_power,
            cfg.borrower_power,
            cfg.loan_fraction,
            cfg.total_external,
        )
        grid = cfg.capital_ratio_grid
        counts = np.zeros(len(grid), dtype=np.int64)
        seconds = np.zeros(len(grid))
        results: list[CascadeResult] | None = [] if collect_results else None
        for idx, ratio in enumerate(grid):
            t0 = perf_counter()
            sheets = build_balance_sheets(
                weights, cfg.loan_fraction, ratio, cfg.total_external
            )
            if cfg.surcharge is not None:
                sheets = apply_surcharge(
                    sheets, cfg.surcharge.surcharge_ratio, cfg.surcharge.biggest_fraction
                )
            state = initial_shock(sheets, bank)
            outcome = propagate(sheets, weights, state, cfg.loss_rule)
            counts[idx] = outcome.n_defaults
            seconds[idx] = perf_counter() - t0
            if results is not None:
                results.append(outcome)
        density = topology.n_edges / (cfg.n_banks * (cfg.n_banks - 1))
        return counts, density, seconds, results
    except KnockonError as exc:
        if isinstance(exc, ReplicationError):
            raise
        raise ReplicationError(stream_index, str(exc)) from exc


def run_replication(cfg: ScenarioConfig, capital_ratio: float, stream_index: int) -> int:
    """Run one replication at a single capital ratio and return the default
    count. Equals the value the full-grid sweep reports for the same stream
    index at the same ratio."""
    single = replace(cfg, capital_ratio_grid=(float(capital_ratio),))
    single.validate()
    external = _load_external(single)
    counts, _, _, _ = _replicate_grid(single, external, stream_index)
    return int(counts[0])


def _load_external(cfg: ScenarioConfig) -> Topology | None:
    if cfg.topology_kind != EXTERNAL:
        return None
    topology = read_edge_list(cfg.topology_path)
    if topology.n_banks != cfg.n_banks:
        raise InvalidParameterError(
            f"topology file has {topology.n_banks} banks but config says {cfg.n_banks}"
        )
    return topology


def _sweep_block(
    cfg: ScenarioConfig, external: Topology | None, start: int, stop: int
) -> list[tuple[int, np.ndarray, float, np.ndarray]]:
    out = []
    for k in range(start, stop):
        counts, density, seconds, _ = _replicate_grid(cfg, external, k)
        out.append((k, counts, density, seconds))
    return out


def sweep(
    cfg: ScenarioConfig,
    workers: int = 1,
    keep_samples: bool = False,
    trace_sink: Callable[[dict], None] | None = None,
) -> SweepResult:
    """Run the full Monte Carlo sweep.

    Args:
        cfg: the scenario; ``cfg.validate()`` is called first.
        workers: process count. Any value yields bit-identical statistics;
            work is split over stream-index blocks and reassembled in order.
        keep_samples: retain the raw (ratio x replication) default counts.
        trace_sink: optional callable receiving one dict per default event
            (requires workers == 1).

    Raises:
        ReplicationError: a replication failed; the lowest failing stream
            index is reported and the sweep is aborted.
    """
    cfg.validate()
    if workers < 1:
        raise InvalidParameterError(f"workers must be at least 1, got {workers}")
    if trace_sink is not None and workers != 1:
        raise InvalidParameterError("trace collection requires workers=1")

    wall_start = perf_counter()
    external = _load_external(cfg)
    reps = cfg.replications
    grid = cfg.capital_ratio_grid
    samples = np.zeros((len(grid), reps), dtype=np.int64)
    densities = np.zeros(reps)
    seconds = np.zeros(len(grid))

    if workers == 1:
        for k in range(reps):
            counts, density, secs, results = _replicate_grid(
                cfg, external, k, collect_results=trace_sink is not None
            )
            samples[:, k] = counts
            densities[k] = density
            seconds += secs
            if trace_sink is not None and results is not None:
                for ratio, outcome in zip(grid, results):
                    for event in outcome.defaults:
                        trace_sink(
                            {
                                "stream_index": k,
                                "R": ratio,
                                "round": event.round,
                                "bank": event.bank,
                                "distress": event.distress,
                                "transmitted": event.transmitted,
                            }
                        )
    else:
        block = max(1, math.ceil(reps / (workers * 4)))
        spans = [(s, min(s + block, reps)) for s in range(0, reps, block)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_sweep_block, cfg, external, start, stop)
                for start, stop in spans
            ]
            for future in futures:
                for k, counts, density, secs in future.result():
                    samples[:, k] = counts
                    densities[k] = density
                    seconds += secs

    records = []
    for idx, ratio in enumerate(grid):
        row = samples[idx]
        mean = float(row.mean())
        std = float(row.std(ddof=1)) if reps > 1 else 0.0
        records.append(
            SweepRecord(
                capital_ratio=float(ratio),
                mean=mean,
                std=std,
                p90=percentile(row, 0.90),
                p95=percentile(row, 0.95),
                p99=percentile(row, 0.99),
                max_defaults=int(row.max()),
                knock_on_fraction=float(np.count_nonzero(row >= 2)) / reps,
            )
        )

    return SweepResult(
        config=cfg,
        records=tuple(records),
        realized_density_mean=float(densities.mean()),
        samples=samples if keep_samples else None,
        per_ratio_seconds=tuple(float(s) for s in seconds),
        total_seconds=perf_counter() - wall_start,
    )
