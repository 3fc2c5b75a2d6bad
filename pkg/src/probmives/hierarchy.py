"""Four-layer decision tree: requirements -> criteria -> indicators.

Trees are immutable once loaded. Criterion and indicator ordering is kept
exactly as written in the source document, since downstream tie-breaking and
weight-matrix column layout depend on it.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Mapping, Sequence

WEIGHT_TOL = 1e-6
MAX_INDICATORS = 5
DERIVE_FROM_RATINGS = "derive-from-ratings"
DEFAULT_PROFILE = "General"


class TreeError(ValueError):
    """Raised when a tree document is malformed or violates an invariant."""


class Paradigm(str, enum.Enum):
    SUSTAINABILITY = "sustainability"
    CIRCULARITY = "circularity"

    @classmethod
    def parse(cls, value: "str | Paradigm") -> "Paradigm":
        if isinstance(value, Paradigm):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise TreeError(f"unknown paradigm {value!r}") from None


@dataclass(frozen=True)
class Indicator:
    # value function is looked up by id in an IndicatorValueTable
    id: str
    name: str = ""


@dataclass(frozen=True)
class Criterion:
    id: str
    name: str
    ahp_weight: float | None
    indicators: tuple[Indicator, ...]

    @property
    def m(self) -> int:
        return len(self.indicators)


@dataclass(frozen=True)
class Requirement:
    id: str
    name: str
    weight: float
    criteria: tuple[Criterion, ...]
    # AHP share of criteria pruned from this group; criterion weights sum to 1 - pruned_weight
    pruned_weight: float = 0.0


@dataclass(frozen=True)
class DecisionTree:
    paradigm: Paradigm
    requirements: tuple[Requirement, ...]
    stakeholder_profile: str = DEFAULT_PROFILE

    @property
    def criteria(self) -> tuple[Criterion, ...]:
        return tuple(c for r in self.requirements for c in r.criteria)

    @property
    def indicators(self) -> tuple[Indicator, ...]:
        return tuple(i for c in self.criteria for i in c.indicators)

    @property
    def indicator_ids(self) -> list[str]:
        return [i.id for i in self.indicators]

    def criterion(self, criterion_id: str) -> Criterion:
        for c in self.criteria:
            if c.id == criterion_id:
                return c
        raise KeyError(criterion_id)

    def requirement_of(self, criterion_id: str) -> Requirement:
        for r in self.requirements:
            if any(c.id == criterion_id for c in r.criteria):
                return r
        raise KeyError(criterion_id)


def _weight(value: Any, where: str, allow_pending: bool = False) -> float | None:
    if allow_pending and value == DERIVE_FROM_RATINGS:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise TreeError(f"{where}: weight must be a number, got {value!r}")
    return float(value)


def _require(obj: Mapping[str, Any], key: str, where: str) -> Any:
    if not isinstance(obj, Mapping):
        raise TreeError(f"{where}: expected an object")
    if key not in obj:
        raise TreeError(f"{where}: missing field {key!r}")
    return obj[key]


def parse_tree(doc: Mapping[str, Any], paradigm: Paradigm | None) -> DecisionTree:
    doc_paradigm = doc.get("paradigm") if isinstance(doc, Mapping) else None
    if paradigm is None and doc_paradigm is None:
        raise TreeError("document does not declare a paradigm")
    if paradigm is not None and doc_paradigm is not None and Paradigm.parse(doc_paradigm) != paradigm:
        raise TreeError(f"document paradigm {doc_paradigm!r} does not match requested {paradigm.value!r}")
    par = paradigm or Paradigm.parse(doc_paradigm)

    requirements = []
    for r_doc in _require(doc, "requirements", "tree"):
        rid = str(_require(r_doc, "id", "requirement"))
        criteria = []
        for c_doc in _require(r_doc, "criteria", rid):
            cid = str(_require(c_doc, "id", f"{rid} criterion"))
            inds = tuple(
                Indicator(id=str(_require(i, "id", cid)), name=str(i.get("name", "")))
                for i in _require(c_doc, "indicators", cid)
            )
            criteria.append(
                Criterion(
                    id=cid,
                    name=str(c_doc.get("name", "")),
                    ahp_weight=_weight(c_doc.get("ahp_weight", DERIVE_FROM_RATINGS), cid, allow_pending=True),
                    indicators=inds,
                )
            )
        requirements.append(
            Requirement(
                id=rid,
                name=str(r_doc.get("name", "")),
                weight=_weight(_require(r_doc, "weight", rid), rid),
                criteria=tuple(criteria),
                pruned_weight=_weight(r_doc.get("pruned_weight", 0.0), f"{rid}.pruned_weight"),
            )
        )
    return DecisionTree(
        paradigm=par,
        requirements=tuple(requirements),
        stakeholder_profile=str(doc.get("stakeholder_profile", DEFAULT_PROFILE)),
    )


def load_tree(config: "Mapping[str, Any] | str | Path", paradigm: "Paradigm | str | None" = None) -> DecisionTree:
    """Load and validate a tree from a JSON path, JSON text, or parsed mapping.

    Criteria whose ``ahp_weight`` is ``"derive-from-ratings"`` are loaded with
    a pending weight; their group sum is not checked until weights are applied.
    """
    if isinstance(config, Path) or (isinstance(config, str) and not config.lstrip().startswith("{")):
        try:
            text = Path(config).read_text(encoding="utf-8")
        except OSError as exc:
            raise TreeError(f"cannot read tree document: {exc}") from exc
        config = text
    if isinstance(config, str):
        try:
            config = json.loads(config)
        except json.JSONDecodeError as exc:
            raise TreeError(f"malformed tree document: {exc}") from exc
    tree = parse_tree(config, Paradigm.parse(paradigm) if paradigm is not None else None)
    problems = validate_tree(tree)
    if problems:
        raise TreeError("; ".join(problems))
    return tree


def dump_tree(tree: DecisionTree) -> dict[str, Any]:
    return {
        "paradigm": tree.paradigm.value,
        "stakeholder_profile": tree.stakeholder_profile,
        "requirements": [
            {
                "id": r.id,
                "name": r.name,
                "weight": r.weight,
                "criteria": [
                    {
                        "id": c.id,
                        "name": c.name,
                        "ahp_weight": DERIVE_FROM_RATINGS if c.ahp_weight is None else c.ahp_weight,
                        "indicators": [{"id": i.id, "name": i.name} for i in c.indicators],
                    }
                    for c in r.criteria
                ],
                **({"pruned_weight": r.pruned_weight} if r.pruned_weight else {}),
            }
            for r in tree.requirements
        ],
    }


def save_tree(tree: DecisionTree, path: "str | Path") -> None:
    Path(path).write_text(json.dumps(dump_tree(tree), indent=2) + "\n", encoding="utf-8")


def _duplicates(ids: Sequence[str]) -> list[str]:
    seen: set[str] = set()
    dups: list[str] = []
    for i in ids:
        if i in seen and i not in dups:
            dups.append(i)
        seen.add(i)
    return dups


def validate_tree(tree: DecisionTree) -> list[str]:
    """Return every invariant violation found in ``tree``; empty means valid."""
    problems: list[str] = []
    if not tree.requirements:
        problems.append("tree has no requirements")

    for kind, ids in (
        ("requirement", [r.id for r in tree.requirements]),
        ("criterion", [c.id for c in tree.criteria]),
        ("indicator", tree.indicator_ids),
    ):
        for dup in _duplicates(ids):
            problems.append(f"duplicate {kind} id {dup}")

    total = math.fsum(r.weight for r in tree.requirements)
    if tree.requirements and abs(total - 1.0) > WEIGHT_TOL:
        problems.append(f"requirement weights sum {total:.6g}")

    for r in tree.requirements:
        if not 0.0 < r.weight <= 1.0:
            problems.append(f"requirement {r.id} weight {r.weight:.6g} outside (0, 1]")
        if not r.criteria:
            problems.append(f"requirement {r.id} has no criteria")
            continue
        if not 0.0 <= r.pruned_weight < 1.0:
            problems.append(f"requirement {r.id} pruned weight {r.pruned_weight:.6g} outside [0, 1)")
        weights = [c.ahp_weight for c in r.criteria]
        if all(w is not None for w in weights):
            group = math.fsum(weights)
            if abs(group + r.pruned_weight - 1.0) > WEIGHT_TOL:
                if r.pruned_weight:
                    problems.append(
                        f"criterion weights of {r.id} sum {group:.6g} plus pruned {r.pruned_weight:.6g}"
                    )
                else:
                    problems.append(f"criterion weights of {r.id} sum {group:.6g}")
        elif any(w is not None for w in weights):
            problems.append(f"criterion weights of {r.id} partially derived from ratings")
        for c in r.criteria:
            if c.ahp_weight is not None and not 0.0 < c.ahp_weight <= 1.0:
                problems.append(f"criterion {c.id} weight {c.ahp_weight:.6g} outside (0, 1]")
            if not 1 <= c.m <= MAX_INDICATORS:
                problems.append(f"criterion {c.id}: m out of range ({c.m} indicators, allowed 1..{MAX_INDICATORS})")
    return problems


def has_pending_weights(tree: DecisionTree) -> bool:
    return any(c.ahp_weight is None for c in tree.criteria)


def _normalized(values: Sequence[float]) -> list[float]:
    total = math.fsum(values)
    return [v / total for v in values]


def with_criterion_weights(
    tree: DecisionTree,
    weights: Mapping[str, float],
    profile: str | None = None,
    normalize: bool = False,
) -> DecisionTree:
    """Return a copy of ``tree`` carrying the given criterion weights.

    Published tables are rounded to five significant digits, so their groups
    can miss 1 by ~1e-5; pass ``normalize=True`` to rescale each group.
    """
    missing = [c.id for c in tree.criteria if c.id not in weights]
    if missing:
        raise TreeError(f"missing weights for criteria {', '.join(missing)}")
    reqs = []
    for r in tree.requirements:
        ws = [float(weights[c.id]) for c in r.criteria]
        if normalize:
            ws = _normalized(ws)
        reqs.append(replace(r, criteria=tuple(replace(c, ahp_weight=w) for c, w in zip(r.criteria, ws))))
    reqs = tuple(reqs)
    out = replace(tree, requirements=reqs, stakeholder_profile=profile or tree.stakeholder_profile)
    problems = validate_tree(out)
    if problems:
        raise TreeError("; ".join(problems))
    return out


def with_requirement_weights(tree: DecisionTree, weights: "Sequence[float] | Mapping[str, float]") -> DecisionTree:
    if isinstance(weights, Mapping):
        missing = [r.id for r in tree.requirements if r.id not in weights]
        if missing:
            raise TreeError(f"missing weights for requirements {', '.join(missing)}")
        values = [float(weights[r.id]) for r in tree.requirements]
    else:
        values = [float(w) for w in weights]
        if len(values) != len(tree.requirements):
            raise TreeError(f"expected {len(tree.requirements)} requirement weights, got {len(values)}")
    out = replace(tree, requirements=tuple(replace(r, weight=w) for r, w in zip(tree.requirements, values)))
    problems = validate_tree(out)
    if problems:
        raise TreeError("; ".join(problems))
    return out


def _is_waste(c: Criterion) -> bool:
    return c.name.strip().lower() == "waste"


def derive_circularity_tree(
    sustainability_tree: DecisionTree,
    circularity_ahp_weights: Mapping[str, float],
    renormalize: bool = False,
) -> DecisionTree:
    """Prune the Waste criterion and re-index the remaining criteria.

    ``circularity_ahp_weights`` is keyed by the *sustainability* criterion ids.
    Criterion ids after the removed one shift down by one; indicator ids are
    kept so they still match the value table.

    By default the pruned group keeps its full-tree AHP shares and records
    the removed share as ``pruned_weight`` (the Waste term simply drops out of
    the weighted sum). ``renormalize=True`` instead rescales the survivors to
    sum to 1. Groups that lost nothing are rescaled to absorb table rounding.
    """
    waste = [c for c in sustainability_tree.criteria if _is_waste(c)]
    if not waste:
        return replace(sustainability_tree, paradigm=Paradigm.CIRCULARITY)

    survivors = [c for c in sustainability_tree.criteria if not _is_waste(c)]
    missing = [c.id for c in survivors if c.id not in circularity_ahp_weights]
    if missing:
        raise TreeError(f"circularity weight table lacks entries for {', '.join(missing)}")

    # positional re-index: C1..Cn over the surviving criteria in tree order
    new_ids = {c.id: f"C{k}" for k, c in enumerate(survivors, start=1)}
    reqs = []
    for r in sustainability_tree.requirements:
        kept = [c for c in r.criteria if not _is_waste(c)]
        dropped = [c for c in r.criteria if _is_waste(c)]
        kept_w = [float(circularity_ahp_weights[c.id]) for c in kept]
        pruned = r.pruned_weight
        if not dropped or renormalize:
            kept_w = _normalized(kept_w)
            pruned = 0.0 if dropped else pruned
        elif all(c.id in circularity_ahp_weights for c in dropped):
            total = math.fsum(kept_w) + math.fsum(float(circularity_ahp_weights[c.id]) for c in dropped)
            kept_w = [w / total for w in kept_w]
            pruned = 1.0 - math.fsum(kept_w)
        else:
            pruned = max(0.0, 1.0 - math.fsum(kept_w))
            if pruned == 0.0:
                kept_w = _normalized(kept_w)
        reqs.append(
            replace(
                r,
                criteria=tuple(replace(c, id=new_ids[c.id], ahp_weight=w) for c, w in zip(kept, kept_w)),
                pruned_weight=pruned,
            )
        )
    out = DecisionTree(
        paradigm=Paradigm.CIRCULARITY,
        requirements=tuple(reqs),
        stakeholder_profile=sustainability_tree.stakeholder_profile,
    )
    problems = validate_tree(out)
    if problems:
        raise TreeError("; ".join(problems))
    return out
