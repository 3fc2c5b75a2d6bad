"""Constrained Latin Hypercube sampling of indicator weights.

For a criterion with ``m`` indicators every weight column is drawn by LHS
over ``[min_weight, 1 + min_weight - min_weight * m]`` (uniform marginal,
independent per-column shuffle), then each row is divided by its sum.
Criteria with a single indicator get weight 1 and consume no randomness.

Random streams are keyed by (seed, criterion id, column) so a block never
depends on which other criteria exist or on the order they are generated in.
"""

from __future__ import annotations

import csv
import enum
import hashlib
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .hierarchy import Criterion, DecisionTree

DEFAULT_RUNS = 1000
DEFAULT_MIN_WEIGHT = 0.1
DEFAULT_SEED = 20230131
MAX_REDRAWS = 10_000


class SamplingError(RuntimeError):
    pass


class ConstraintMode(str, enum.Enum):
    LITERAL = "literal"
    REJECT_RESAMPLE = "reject-resample"

    @classmethod
    def parse(cls, value: "str | ConstraintMode") -> "ConstraintMode":
        if isinstance(value, ConstraintMode):
            return value
        v = str(value).strip().lower()
        if v == "reject":
            return cls.REJECT_RESAMPLE
        try:
            return cls(v)
        except ValueError:
            raise ValueError(f"unknown constraint mode {value!r} (use literal or reject)") from None


@dataclass(frozen=True)
class SamplerConfig:
    n_runs: int = DEFAULT_RUNS
    seed: int = DEFAULT_SEED
    min_weight: float = DEFAULT_MIN_WEIGHT
    constraint_mode: ConstraintMode = ConstraintMode.LITERAL

    def __post_init__(self) -> None:
        object.__setattr__(self, "constraint_mode", ConstraintMode.parse(self.constraint_mode))
        if int(self.n_runs) != self.n_runs or self.n_runs < 1:
            raise ValueError(f"n_runs must be a positive integer, got {self.n_runs}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if not 0.0 <= self.min_weight < 0.2:
            raise ValueError(f"min_weight must lie in [0, 0.2), got {self.min_weight}")


def _stable_key(text: str) -> int:
    return int.from_bytes(hashlib.sha256(text.encode("utf-8")).digest()[:8], "little")


def substream(seed: int, *keys: "str | int") -> np.random.Generator:
    """Independent generator for ``(seed, *keys)``; stable across processes."""
    spawn = tuple(_stable_key(k) if isinstance(k, str) else int(k) for k in keys)
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=spawn))


def weight_bounds(m: int, min_weight: float = DEFAULT_MIN_WEIGHT) -> tuple[float, float]:
    if m not in (2, 3, 4, 5):
        raise ValueError(f"m out of range: {m} (weight bounds need m in 2..5)")
    low = min_weight
    high = 1.0 + min_weight - min_weight * m
    if not low < high:
        raise ValueError(f"empty weight range for m={m}, min_weight={min_weight}")
    return low, high


def lhs_samples(n: int, low: float, high: float, stream: np.random.Generator) -> np.ndarray:
    """One uniform draw per equal-width stratum of ``[low, high]``, randomly permuted."""
    if n < 1:
        raise ValueError("need at least one sample")
    if not low < high:
        raise ValueError(f"empty interval [{low}, {high}]")
    u = (np.arange(n) + stream.random(n)) / n
    return stream.permutation(low + (high - low) * u)


@dataclass(frozen=True)
class CriterionBlock:
    weights: np.ndarray  # n_runs x m, rows sum to 1
    raw: np.ndarray  # pre-normalization draws; redrawn rows replaced
    redrawn: int = 0


def sample_criterion_weights(
    m: int, config: SamplerConfig, stream: "np.random.Generator | Sequence[np.random.Generator]"
) -> CriterionBlock:
    """Sample an ``n_runs x m`` block of normalized weights.

    ``stream`` is either one generator (used for everything) or ``m + 1``
    generators: one per LHS column plus one for reject-resample redraws.
    """
    n = config.n_runs
    if m == 1:
        ones = np.ones((n, 1))
        return CriterionBlock(weights=ones, raw=ones.copy())
    if not 1 <= m <= 5:
        raise ValueError(f"m out of range: {m}")
    streams = [stream] * (m + 1) if isinstance(stream, np.random.Generator) else list(stream)
    if len(streams) != m + 1:
        raise ValueError(f"expected {m + 1} streams, got {len(streams)}")

    low, high = weight_bounds(m, config.min_weight)
    raw = np.column_stack([lhs_samples(n, low, high, streams[j]) for j in range(m)])
    weights = raw / raw.sum(axis=1, keepdims=True)

    redrawn = 0
    if config.constraint_mode is ConstraintMode.REJECT_RESAMPLE:
        redraw = streams[m]
        attempts = np.zeros(n, dtype=int)
        bad = np.flatnonzero(weights.min(axis=1) < config.min_weight)
        while bad.size:
            if np.any(attempts[bad] >= MAX_REDRAWS):
                raise SamplingError(
                    f"redraw cap {MAX_REDRAWS} exceeded for m={m}, min_weight={config.min_weight}"
                )
            attempts[bad] += 1
            fresh = redraw.uniform(low, high, size=(bad.size, m))
            raw[bad] = fresh
            weights[bad] = fresh / fresh.sum(axis=1, keepdims=True)
            bad = bad[weights[bad].min(axis=1) < config.min_weight]
        redrawn = int(np.count_nonzero(attempts))
    return CriterionBlock(weights=weights, raw=raw, redrawn=redrawn)


@dataclass(frozen=True)
class WeightMatrix:
    values: np.ndarray  # n_runs x total indicators
    raw: np.ndarray
    columns: tuple[str, ...]
    blocks: tuple[tuple[str, int, int], ...]  # (criterion id, start, stop)
    config: SamplerConfig

    @property
    def n_runs(self) -> int:
        return self.values.shape[0]

    def block(self, criterion_id: str) -> np.ndarray:
        for cid, start, stop in self.blocks:
            if cid == criterion_id:
                return self.values[:, start:stop]
        raise KeyError(criterion_id)


def _criterion_block(criterion: Criterion, config: SamplerConfig) -> CriterionBlock:
    m = criterion.m
    streams = [substream(config.seed, criterion.id, j) for j in range(m + 1)]
    return sample_criterion_weights(m, config, streams)


def build_weight_matrix(tree: DecisionTree, config: SamplerConfig, workers: int | None = None) -> WeightMatrix:
    """Concatenate per-criterion blocks in tree order.

    ``workers > 1`` samples blocks on a thread pool; output is identical for
    any worker count.
    """
    criteria = tree.criteria
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(lambda c: _criterion_block(c, config), criteria))
    else:
        blocks = [_criterion_block(c, config) for c in criteria]

    spans = []
    start = 0
    for c in criteria:
        spans.append((c.id, start, start + c.m))
        start += c.m
    return WeightMatrix(
        values=np.hstack([b.weights for b in blocks]),
        raw=np.hstack([b.raw for b in blocks]),
        columns=tuple(tree.indicator_ids),
        blocks=tuple(spans),
        config=config,
    )


def write_weight_matrix(matrix: WeightMatrix, path: "str | Path") -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["run", *matrix.columns])
        for r, row in enumerate(matrix.values):
            w.writerow([r, *(f"{x:.17g}" for x in row)])


def default_seed() -> int:
    env = os.environ.get("PROBMIVES_SEED")
    return int(env) if env else DEFAULT_SEED
