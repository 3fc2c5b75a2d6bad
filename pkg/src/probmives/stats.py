"""Ranking probabilities and distribution summaries over simulation runs.

Ranks are a strict total order per run: higher value first, and values
within ``tie_epsilon`` of each other go to the lower scenario index. That
makes every rank-probability table doubly stochastic.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Any, Mapping, Sequence

import numpy as np

from .simulation import OVERALL, SimulationResult, mean_values

TIE_EPSILON = 1e-9
DEFAULT_BINS = 30
LEVELS = (OVERALL, "requirement", "criterion")


def _order(values: np.ndarray, tie_epsilon: float) -> np.ndarray:
    """Best-first scenario order for each row of ``values`` (runs x scenarios)."""
    v = np.atleast_2d(np.asarray(values, dtype=float))
    k = v.shape[1]
    vi = v[:, :, None]
    vj = v[:, None, :]
    lower_index = np.arange(k)[None, :] < np.arange(k)[:, None]  # [i, j]: j < i
    beats = (vj > vi + tie_epsilon) | ((np.abs(vj - vi) <= tie_epsilon) & lower_index[None])
    # number of scenarios placed ahead of i; stable sort keeps ascending index on collisions
    ahead = beats.sum(axis=2)
    return np.argsort(ahead, axis=1, kind="stable")


def rank_positions(values: Sequence[float], tie_epsilon: float = TIE_EPSILON) -> list[int]:
    """Scenario indices ordered best first."""
    if len(values) == 0:
        raise ValueError("need at least one scenario")
    return [int(i) for i in _order(np.asarray(values, dtype=float)[None, :], tie_epsilon)[0]]


@dataclass(frozen=True)
class RankProbabilityTable:
    """``tables[node][s, p]`` = probability that scenario ``s`` lands at position ``p``."""

    level: str
    scenarios: tuple[str, ...]
    tables: Mapping[str, np.ndarray]

    def first(self, node: str) -> dict[str, float]:
        return {s: float(p) for s, p in zip(self.scenarios, self.tables[node][:, 0])}

    def position(self, node: str, pos: int) -> dict[str, float]:
        return {s: float(p) for s, p in zip(self.scenarios, self.tables[node][:, pos])}


def rank_matrix(values: np.ndarray, tie_epsilon: float = TIE_EPSILON) -> np.ndarray:
    order = _order(values, tie_epsilon)
    n, k = order.shape
    counts = np.zeros((k, k), dtype=np.int64)
    for pos in range(k):
        counts[:, pos] = np.bincount(order[:, pos], minlength=k)
    return counts / n


def rank_probabilities(
    result: SimulationResult, level: str = OVERALL, tie_epsilon: float = TIE_EPSILON
) -> RankProbabilityTable:
    if result.n_runs == 0:
        raise ValueError("no runs")
    nodes = result.level(level)
    return RankProbabilityTable(
        level=level,
        scenarios=result.scenarios,
        tables={node: rank_matrix(arr, tie_epsilon) for node, arr in nodes.items()},
    )


@dataclass(frozen=True)
class EmpiricalDistribution:
    edges: np.ndarray
    counts: np.ndarray
    cdf: np.ndarray  # cumulative fraction at each bin's right edge

    @property
    def pdf(self) -> np.ndarray:
        """Density per bin; a degenerate single bin reports its probability mass."""
        widths = np.diff(self.edges)
        n = self.counts.sum()
        if np.all(widths == 0):
            return self.counts / n
        return self.counts / (n * widths)


def empirical_distribution(values: Sequence[float], n_bins: int = DEFAULT_BINS) -> EmpiricalDistribution:
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        raise ValueError("no values")
    if n_bins < 1:
        raise ValueError("n_bins must be >= 1")
    lo, hi = float(x.min()), float(x.max())
    if lo == hi:
        return EmpiricalDistribution(
            edges=np.array([lo, hi]), counts=np.array([x.size]), cdf=np.array([1.0])
        )
    counts, edges = np.histogram(x, bins=n_bins, range=(lo, hi))
    cdf = np.cumsum(counts) / x.size
    cdf[-1] = 1.0
    return EmpiricalDistribution(edges=edges, counts=counts, cdf=cdf)


@dataclass(frozen=True)
class Summary:
    mean: float
    min: float
    max: float
    p2_5: float
    median: float
    p97_5: float

    def as_dict(self) -> dict[str, float]:
        return {
            "mean": self.mean,
            "min": self.min,
            "p2.5": self.p2_5,
            "median": self.median,
            "p97.5": self.p97_5,
            "max": self.max,
        }


def summarize(values: Sequence[float]) -> Summary:
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        raise ValueError("no values")
    p_lo, med, p_hi = np.percentile(x, [2.5, 50.0, 97.5])
    lo, hi = float(x.min()), float(x.max())
    return Summary(
        mean=math.fsum(x) / x.size,
        min=lo,
        max=hi,
        # percentile interpolation can overshoot by an ulp
        p2_5=min(max(float(p_lo), lo), hi),
        median=float(med),
        p97_5=min(max(float(p_hi), lo), hi),
    )


def summary(result: SimulationResult, node: str = OVERALL) -> dict[str, Summary]:
    arr = result.node(node)
    return {s: summarize(arr[:, j]) for j, s in enumerate(result.scenarios)}


@dataclass(frozen=True)
class Statistics:
    """Everything the reports need, computed once so charts never recompute."""

    paradigm: str
    scenarios: tuple[str, ...]
    means: Mapping[str, Mapping[str, float]]
    ranks: Mapping[str, RankProbabilityTable]
    summaries: Mapping[str, Mapping[str, Summary]]
    distributions: Mapping[str, EmpiricalDistribution]
    node_names: Mapping[str, str]
    requirement_weights: Mapping[str, float]
    criterion_weights: Mapping[str, float]
    requirement_criteria: Mapping[str, tuple[str, ...]]
    # level -> node -> scenario -> (global weight x mean); sums to the overall mean
    contributions: Mapping[str, Mapping[str, Mapping[str, float]]]


def compute_statistics(
    result: SimulationResult, n_bins: int = DEFAULT_BINS, tie_epsilon: float = TIE_EPSILON
) -> Statistics:
    tree = result.tree
    names = {OVERALL: "Overall"}
    names.update({r.id: r.name for r in tree.requirements})
    names.update({c.id: c.name for c in tree.criteria})
    nodes = [OVERALL, *result.requirements, *result.criteria]
    means = mean_values(result)
    contributions = {
        "requirement": {
            r.id: {s: r.weight * means[r.id][s] for s in result.scenarios} for r in tree.requirements
        },
        "criterion": {
            c.id: {s: r.weight * c.ahp_weight * means[c.id][s] for s in result.scenarios}
            for r in tree.requirements
            for c in r.criteria
        },
    }
    return Statistics(
        paradigm=tree.paradigm.value,
        scenarios=result.scenarios,
        means=means,
        ranks={lvl: rank_probabilities(result, lvl, tie_epsilon) for lvl in LEVELS},
        summaries={node: summary(result, node) for node in nodes},
        distributions={
            s: empirical_distribution(result.overall[:, j], n_bins) for j, s in enumerate(result.scenarios)
        },
        node_names=names,
        requirement_weights={r.id: r.weight for r in tree.requirements},
        criterion_weights={c.id: c.ahp_weight for c in tree.criteria},
        requirement_criteria={r.id: tuple(c.id for c in r.criteria) for r in tree.requirements},
        contributions=contributions,
    )


def statistics_to_dict(stats: Statistics) -> dict[str, Any]:
    return {
        "paradigm": stats.paradigm,
        "scenarios": list(stats.scenarios),
        "means": {k: dict(v) for k, v in stats.means.items()},
        "rank_probabilities": {
            lvl: {node: table.tolist() for node, table in rpt.tables.items()} for lvl, rpt in stats.ranks.items()
        },
        "summaries": {node: {s: sm.as_dict() for s, sm in per.items()} for node, per in stats.summaries.items()},
        "distributions": {
            s: {"edges": d.edges.tolist(), "counts": d.counts.tolist(), "cdf": d.cdf.tolist()}
            for s, d in stats.distributions.items()
        },
    }


def rank_table_rows(stats: Statistics) -> list[dict[str, Any]]:
    """Flat ``(paradigm, level, node, scenario, position, probability)`` rows."""
    rows = []
    for lvl, rpt in stats.ranks.items():
        for node, table in rpt.tables.items():
            for si, s in enumerate(stats.scenarios):
                for pos in range(table.shape[1]):
                    rows.append(
                        {
                            "paradigm": stats.paradigm,
                            "level": lvl,
                            "node": node,
                            "scenario": s,
                            "position": pos + 1,
                            "probability": float(table[si, pos]),
                        }
                    )
    return rows


def rank_table_csv(stats: Statistics) -> str:
    buf = io.StringIO()
    fields = ["paradigm", "level", "node", "scenario", "position", "probability"]
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for row in rank_table_rows(stats):
        w.writerow({**row, "probability": repr(row["probability"])})
    return buf.getvalue()


def statistics_json(stats: Statistics) -> str:
    return json.dumps(statistics_to_dict(stats), indent=1, sort_keys=True) + "\n"
