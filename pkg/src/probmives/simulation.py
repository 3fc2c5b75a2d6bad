"""Aggregate indicator values through the weight hierarchy, run by run.

Indicator values depend only on the scenario scores, so they are computed
once; only the indicator weights vary across runs. Every layer is a plain
weighted sum, accumulated term by term in tree order (no BLAS) so results
are bit-reproducible.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from .hierarchy import DecisionTree, Paradigm, dump_tree, load_tree
from .sampler import WeightMatrix
from .value_functions import IndicatorValueTable

OVERALL = "overall"
SCHEMA = "probmives.simulation/1"


class SimulationError(ValueError):
    pass


def criterion_value(indicator_values: Sequence[float], weights_row: Sequence[float]) -> float:
    if len(indicator_values) != len(weights_row):
        raise SimulationError(
            f"length mismatch: {len(indicator_values)} values vs {len(weights_row)} weights"
        )
    if abs(math.fsum(weights_row) - 1.0) > 1e-9:
        raise SimulationError(f"weights sum to {math.fsum(weights_row)!r}, expected 1")
    acc = 0.0
    for v, w in zip(indicator_values, weights_row):
        acc += w * v
    return acc


@dataclass(frozen=True)
class RunResult:
    run_index: int
    overall_index: Mapping[str, float]
    requirements: Mapping[str, Mapping[str, float]]
    criteria: Mapping[str, Mapping[str, float]]


@dataclass
class SimulationResult:
    """Per-run values, each stored as an ``n_runs x n_scenarios`` array."""

    tree: DecisionTree
    scenarios: tuple[str, ...]
    overall: np.ndarray
    requirements: dict[str, np.ndarray]
    criteria: dict[str, np.ndarray]
    config: dict[str, Any] = field(default_factory=dict)

    @property
    def paradigm(self) -> Paradigm:
        return self.tree.paradigm

    @property
    def n_runs(self) -> int:
        return self.overall.shape[0]

    def level(self, level: str) -> dict[str, np.ndarray]:
        if level == OVERALL:
            return {OVERALL: self.overall}
        if level == "requirement":
            return self.requirements
        if level == "criterion":
            return self.criteria
        raise ValueError(f"unknown level {level!r}")

    def node(self, node_id: str) -> np.ndarray:
        if node_id == OVERALL:
            return self.overall
        if node_id in self.requirements:
            return self.requirements[node_id]
        return self.criteria[node_id]

    def run(self, r: int) -> RunResult:
        def row(a: np.ndarray) -> dict[str, float]:
            return {s: float(v) for s, v in zip(self.scenarios, a[r])}

        return RunResult(
            run_index=r,
            overall_index=row(self.overall),
            requirements={k: row(v) for k, v in self.requirements.items()},
            criteria={k: row(v) for k, v in self.criteria.items()},
        )

    @property
    def runs(self) -> list[RunResult]:
        return [self.run(r) for r in range(self.n_runs)]


def run_simulation(
    tree: DecisionTree,
    value_table: IndicatorValueTable,
    weights: WeightMatrix,
    config_extra: Mapping[str, Any] | None = None,
) -> SimulationResult:
    ids = tree.indicator_ids
    if list(weights.columns) != ids:
        raise SimulationError("weight matrix columns do not match the tree's indicator order")
    if any(c.ahp_weight is None for c in tree.criteria):
        raise SimulationError("tree has criteria with pending (derive-from-ratings) weights")
    values = value_table.values(ids)  # n_ind x n_scen
    n = weights.n_runs
    n_scen = len(value_table.scenarios)

    col = {i: k for k, i in enumerate(ids)}
    crit_vals: dict[str, np.ndarray] = {}
    req_vals: dict[str, np.ndarray] = {}
    overall = np.zeros((n, n_scen))
    for req in tree.requirements:
        acc_r = np.zeros((n, n_scen))
        for c in req.criteria:
            acc_c = np.zeros((n, n_scen))
            for ind in c.indicators:
                k = col[ind.id]
                acc_c += weights.values[:, k, None] * values[k][None, :]
            crit_vals[c.id] = acc_c
            acc_r += c.ahp_weight * acc_c
        req_vals[req.id] = acc_r
        overall += req.weight * acc_r

    cfg = {
        "paradigm": tree.paradigm.value,
        "seed": weights.config.seed,
        "n_runs": n,
        "min_weight": weights.config.min_weight,
        "constraint_mode": weights.config.constraint_mode.value,
        "stakeholder_profile": tree.stakeholder_profile,
        "requirement_weights": {r.id: r.weight for r in tree.requirements},
    }
    cfg.update(config_extra or {})
    return SimulationResult(
        tree=tree,
        scenarios=tuple(value_table.scenarios),
        overall=overall,
        requirements=req_vals,
        criteria=crit_vals,
        config=cfg,
    )


def mean_values(result: SimulationResult) -> dict[str, dict[str, float]]:
    """Mean over runs for every node (``"overall"``, requirement and criterion ids)."""
    if result.n_runs == 0:
        raise SimulationError("no runs")
    out = {OVERALL: result.overall}
    out.update(result.requirements)
    out.update(result.criteria)
    return {
        node: {s: math.fsum(arr[:, j]) / result.n_runs for j, s in enumerate(result.scenarios)}
        for node, arr in out.items()
    }


def result_to_dict(result: SimulationResult, include_runs: bool = True) -> dict[str, Any]:
    doc: dict[str, Any] = {
        "schema": SCHEMA,
        "config": result.config,
        "tree": dump_tree(result.tree),
        "scenarios": list(result.scenarios),
        "means": mean_values(result),
    }
    if include_runs:
        doc["runs"] = {
            OVERALL: result.overall.tolist(),
            "requirements": {k: v.tolist() for k, v in result.requirements.items()},
            "criteria": {k: v.tolist() for k, v in result.criteria.items()},
        }
    return doc


def dumps_result(result: SimulationResult, include_runs: bool = True) -> str:
    return json.dumps(result_to_dict(result, include_runs), indent=1, sort_keys=True) + "\n"


def result_from_dict(doc: Mapping[str, Any]) -> SimulationResult:
    if doc.get("schema") != SCHEMA:
        raise SimulationError(f"unsupported results schema {doc.get('schema')!r}")
    if "runs" not in doc:
        raise SimulationError("results file has no per-run arrays")
    tree = load_tree(doc["tree"])
    runs = doc["runs"]
    try:
        res = SimulationResult(
            tree=tree,
            scenarios=tuple(doc["scenarios"]),
            overall=np.asarray(runs[OVERALL], dtype=float),
            requirements={r.id: np.asarray(runs["requirements"][r.id], dtype=float) for r in tree.requirements},
            criteria={c.id: np.asarray(runs["criteria"][c.id], dtype=float) for c in tree.criteria},
            config=dict(doc.get("config", {})),
        )
    except KeyError as exc:
        raise SimulationError(f"results file lacks node {exc}") from None
    shape = (res.overall.shape[0], len(res.scenarios))
    for node, arr in [(OVERALL, res.overall), *res.requirements.items(), *res.criteria.items()]:
        if arr.shape != shape:
            raise SimulationError(f"node {node}: expected shape {shape}, got {arr.shape}")
    return res


def load_result(path: "str | Path") -> SimulationResult:
    return result_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
