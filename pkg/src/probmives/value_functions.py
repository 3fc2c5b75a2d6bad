"""MIVES exponential value functions.

A value function maps a raw score ``x`` in ``[x_min, x_max]`` to a
satisfaction value in ``[0, 1]``::

    V(x) = B * (1 - exp(-K * (d / C) ** F))
    B    = 1 / (1 - exp(-K * ((x_max - x_min) / C) ** F))

with ``d = x - x_min`` for increasing indicators and ``d = x_max - x``
for decreasing ones, so the best end always scores 1 and the worst 0.
"""

from __future__ import annotations

import csv
import enum
import json
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np


class ValueFunctionError(ValueError):
    pass


class Trend(str, enum.Enum):
    INCREASING = "I"
    DECREASING = "D"


CURVATURES = ("Convex", "Concave", "Linear", "S")
_SHAPE_RE = re.compile(r"^\s*([ID])\s*-\s*([A-Za-z]+)\s*$")


def parse_shape(code: str) -> tuple[Trend, str]:
    """Split a shape code like ``"D-Convex"`` or ``"I- S"`` into (trend, curvature)."""
    m = _SHAPE_RE.match(code or "")
    if not m:
        raise ValueFunctionError(f"unknown shape code {code!r}")
    label = next((c for c in CURVATURES if c.lower() == m.group(2).lower()), None)
    if label is None:
        raise ValueFunctionError(f"unknown shape code {code!r}")
    return Trend(m.group(1)), label


@dataclass(frozen=True)
class ValueFunctionSpec:
    x_min: float
    x_max: float
    F: float
    C: float
    K: float
    trend: Trend
    curvature_label: str = ""
    indicator: str = ""

    def __post_init__(self) -> None:
        if not self.x_min < self.x_max:
            raise ValueFunctionError(f"{self.indicator or 'spec'}: degenerate range [{self.x_min}, {self.x_max}]")
        for name in ("F", "C", "K"):
            if not getattr(self, name) > 0:
                raise ValueFunctionError(f"{self.indicator or 'spec'}: {name} must be positive")

    @property
    def shape(self) -> str:
        return f"{self.trend.value}-{self.curvature_label}"

    @property
    def best(self) -> float:
        return self.x_max if self.trend is Trend.INCREASING else self.x_min

    @property
    def worst(self) -> float:
        return self.x_min if self.trend is Trend.INCREASING else self.x_max


def normalization_factor(spec: ValueFunctionSpec) -> float:
    span = abs(spec.x_max - spec.x_min)
    if span == 0:
        raise ValueFunctionError(f"{spec.indicator or 'spec'}: degenerate range")
    return 1.0 / -math.expm1(-spec.K * (span / spec.C) ** spec.F)


def _distance(spec: ValueFunctionSpec, x: float) -> float:
    return abs(x - spec.x_min) if spec.trend is Trend.INCREASING else abs(x - spec.x_max)


def evaluate(spec: ValueFunctionSpec, x: float) -> float:
    if not spec.x_min <= x <= spec.x_max:
        raise ValueFunctionError(
            f"{spec.indicator or 'indicator'}: score {x} outside [{spec.x_min}, {spec.x_max}]"
        )
    d = _distance(spec, x)
    # d == 0 maps to 0 for any F > 0
    raw = -math.expm1(-spec.K * (d / spec.C) ** spec.F) if d > 0 else 0.0
    return min(1.0, max(0.0, normalization_factor(spec) * raw))


@dataclass(frozen=True)
class IndicatorValueTable:
    specs: Mapping[str, ValueFunctionSpec]
    scores: Mapping[str, Mapping[str, float]]
    scenarios: tuple[str, ...]

    def values(self, indicator_ids: Sequence[str]) -> np.ndarray:
        """Indicator values, shape ``(len(indicator_ids), n_scenarios)``."""
        missing = [i for i in indicator_ids if i not in self.specs]
        if missing:
            raise ValueFunctionError(f"value table lacks indicators {', '.join(missing)}")
        return np.array(
            [[evaluate(self.specs[i], self.scores[i][s]) for s in self.scenarios] for i in indicator_ids]
        )


def _float(raw: Any, where: str) -> float:
    try:
        return float(raw)
    except (TypeError, ValueError):
        raise ValueFunctionError(f"{where}: not a number: {raw!r}") from None


def _build(rows: Sequence[Mapping[str, Any]], scenarios: Sequence[str]) -> IndicatorValueTable:
    if not scenarios:
        raise ValueFunctionError("value table has no scenario columns")
    specs: dict[str, ValueFunctionSpec] = {}
    scores: dict[str, dict[str, float]] = {}
    for row in rows:
        ind = str(row.get("indicator", "")).strip()
        if not ind:
            raise ValueFunctionError("row without indicator id")
        if ind in specs:
            raise ValueFunctionError(f"duplicate indicator {ind}")
        trend, label = parse_shape(str(row.get("shape", "")))
        spec = ValueFunctionSpec(
            x_min=_float(row.get("x_min"), f"{ind}.x_min"),
            x_max=_float(row.get("x_max"), f"{ind}.x_max"),
            F=_float(row.get("F"), f"{ind}.F"),
            C=_float(row.get("C"), f"{ind}.C"),
            K=_float(row.get("K"), f"{ind}.K"),
            trend=trend,
            curvature_label=label,
            indicator=ind,
        )
        per_scen = {}
        for s in scenarios:
            if row.get(s) in (None, ""):
                raise ValueFunctionError(f"{ind}: missing scenario column {s}")
            x = _float(row[s], f"{ind}.{s}")
            if not spec.x_min <= x <= spec.x_max:
                raise ValueFunctionError(f"{ind}: score {x} for {s} outside [{spec.x_min}, {spec.x_max}]")
            per_scen[s] = x
        specs[ind] = spec
        scores[ind] = per_scen
    return IndicatorValueTable(specs=specs, scores=scores, scenarios=tuple(scenarios))


_FIXED_COLUMNS = ("indicator", "x_min", "x_max", "F", "C", "K", "shape")


def load_value_table(source: "str | Path | Mapping[str, Any]") -> IndicatorValueTable:
    """Load a value table from CSV (``indicator,x_min,x_max,F,C,K,shape,S1,...``) or JSON.

    The JSON form is ``{"scenarios": [...], "indicators": [{...row...}]}``.
    """
    if isinstance(source, Mapping):
        return _build(source.get("indicators", []), list(source.get("scenarios", [])))
    path = Path(source)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ValueFunctionError(f"cannot read value table: {exc}") from exc
    if path.suffix.lower() == ".json" or text.lstrip().startswith("{"):
        try:
            return load_value_table(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ValueFunctionError(f"malformed value table: {exc}") from exc
    reader = csv.DictReader(text.splitlines())
    header = [h.strip() for h in (reader.fieldnames or [])]
    absent = [c for c in _FIXED_COLUMNS if c not in header]
    if absent:
        raise ValueFunctionError(f"value table missing columns {', '.join(absent)}")
    reader.fieldnames = header
    scenarios = [h for h in header if h not in _FIXED_COLUMNS]
    return _build(list(reader), scenarios)
