"""Criteria weights from stakeholder importance ratings (AHP).

Ratings on the 0..10 scale are averaged per criterion, turned into a ratio
pairwise matrix ``a_ij = r_i / r_j`` and reduced to the principal eigenvector.
Published weight tables can also be ingested directly, skipping the survey
stage entirely.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from .hierarchy import DEFAULT_PROFILE, DecisionTree

ZERO_RATING_FLOOR = 0.5
POWER_TOL = 1e-10
POWER_MAX_ITER = 10_000

# Saaty random consistency indices, k = 1..10
RANDOM_INDEX = (0.0, 0.0, 0.58, 0.90, 1.12, 1.24, 1.32, 1.41, 1.45, 1.49)


class AHPError(ValueError):
    pass


class ConvergenceError(AHPError):
    pass


@dataclass(frozen=True)
class RatingRow:
    respondent: str
    group: str
    ratings: Mapping[str, int]


@dataclass(frozen=True)
class RatingsTable:
    rows: tuple[RatingRow, ...]

    @property
    def groups(self) -> list[str]:
        return sorted({r.group for r in self.rows})

    @property
    def criteria(self) -> list[str]:
        return list(self.rows[0].ratings) if self.rows else []


@dataclass(frozen=True)
class GroupWeights:
    requirement_id: str
    weights: Mapping[str, float]
    consistency_ratio: float = 0.0


def read_ratings(source: "str | Path | io.TextIOBase") -> RatingsTable:
    """Parse a ``respondent,group,<criterion-id>...`` CSV file."""
    if isinstance(source, (str, Path)):
        with open(source, newline="", encoding="utf-8") as fh:
            return read_ratings(fh)
    reader = csv.reader(source)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise AHPError("ratings file is empty") from None
    if header[:2] != ["respondent", "group"] or len(header) < 3:
        raise AHPError("ratings header must start with 'respondent,group' followed by criterion ids")
    crit_ids = header[2:]
    rows = []
    for lineno, rec in enumerate(reader, start=2):
        if not rec or all(not f.strip() for f in rec):
            continue
        if len(rec) != len(header):
            raise AHPError(f"line {lineno}: expected {len(header)} fields, got {len(rec)}")
        ratings = {}
        for cid, raw in zip(crit_ids, rec[2:]):
            try:
                val = int(raw.strip())
            except ValueError:
                raise AHPError(f"line {lineno}: rating for {cid} is not an integer: {raw!r}") from None
            if not 0 <= val <= 10:
                raise AHPError(f"line {lineno}: rating for {cid} outside 0..10: {val}")
            ratings[cid] = val
        rows.append(RatingRow(respondent=rec[0].strip(), group=rec[1].strip(), ratings=ratings))
    return RatingsTable(rows=tuple(rows))


def pairwise_from_ratings(mean_ratings: Sequence[float]) -> np.ndarray:
    r = np.asarray(mean_ratings, dtype=float)
    if r.ndim != 1 or r.size == 0:
        raise AHPError("need a nonempty sequence of ratings")
    r = np.where(r == 0.0, ZERO_RATING_FLOOR, r)
    if np.any(r <= 0) or not np.all(np.isfinite(r)):
        raise AHPError("ratings must be positive after flooring zeros")
    return r[:, None] / r[None, :]


def _check_matrix(matrix: Any) -> np.ndarray:
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise AHPError(f"pairwise matrix must be square, got shape {a.shape}")
    if np.any(a <= 0):
        raise AHPError("pairwise matrix entries must be positive")
    return a


def principal_weights(matrix: Any) -> np.ndarray:
    """Normalized principal eigenvector by power iteration."""
    a = _check_matrix(matrix)
    k = a.shape[0]
    w = np.full(k, 1.0 / k)
    for _ in range(POWER_MAX_ITER):
        nxt = a @ w
        nxt /= nxt.sum()
        if np.max(np.abs(nxt - w)) <= POWER_TOL * np.max(np.abs(nxt)):
            return nxt
        w = nxt
    raise ConvergenceError(f"power iteration did not converge in {POWER_MAX_ITER} iterations")


def lambda_max(matrix: Any) -> float:
    a = _check_matrix(matrix)
    w = principal_weights(a)
    return float(np.mean((a @ w) / w))


def consistency_ratio(matrix: Any) -> float:
    a = _check_matrix(matrix)
    k = a.shape[0]
    if k > len(RANDOM_INDEX):
        raise AHPError(f"no random index for k={k} (max {len(RANDOM_INDEX)})")
    if k <= 2:
        return 0.0
    ci = (lambda_max(a) - k) / (k - 1)
    return max(ci / RANDOM_INDEX[k - 1], 0.0)


def mean_ratings(table: RatingsTable, criteria: Sequence[str], group_filter: str = DEFAULT_PROFILE) -> np.ndarray:
    rows = [r for r in table.rows if group_filter == DEFAULT_PROFILE or r.group == group_filter]
    if not rows:
        raise AHPError(f"no respondents in group {group_filter!r}; available: {', '.join(table.groups)}")
    out = []
    for cid in criteria:
        if any(cid not in r.ratings for r in rows):
            raise AHPError(f"criterion {cid} missing from ratings")
        out.append(math.fsum(r.ratings[cid] for r in rows) / len(rows))
    return np.array(out)


def group_weights(
    table: RatingsTable, tree: DecisionTree, group_filter: str = DEFAULT_PROFILE
) -> dict[str, GroupWeights]:
    """Per-requirement AHP weights for one stakeholder group ("General" pools everyone)."""
    out = {}
    for req in tree.requirements:
        ids = [c.id for c in req.criteria]
        matrix = pairwise_from_ratings(mean_ratings(table, ids, group_filter))
        w = principal_weights(matrix)
        out[req.id] = GroupWeights(
            requirement_id=req.id,
            weights=dict(zip(ids, (float(x) for x in w))),
            consistency_ratio=consistency_ratio(matrix),
        )
    return out


def flatten(weights: Mapping[str, GroupWeights]) -> dict[str, float]:
    return {cid: w for gw in weights.values() for cid, w in gw.weights.items()}


@dataclass(frozen=True)
class WeightTable:
    """Published per-profile criterion weights, keyed by criterion id."""

    paradigm: str
    criteria: Mapping[str, str]
    profiles: Mapping[str, Mapping[str, float]]

    def profile(self, name: str) -> dict[str, float]:
        if name not in self.profiles:
            raise AHPError(f"unknown stakeholder profile {name!r}; available: {', '.join(self.profiles)}")
        return dict(self.profiles[name])

    def grouped(self, tree: DecisionTree, name: str = DEFAULT_PROFILE) -> dict[str, GroupWeights]:
        """Split one profile into per-requirement groups following ``tree``.

        Criteria absent from the table (or present only in the table) are
        skipped, so a sustainability-keyed table can be grouped by either tree.
        """
        prof = self.profile(name)
        out = {}
        for req in tree.requirements:
            ws = {c.id: prof[c.id] for c in req.criteria if c.id in prof}
            out[req.id] = GroupWeights(requirement_id=req.id, weights=ws)
        return out


def load_weight_table(source: "str | Path | Mapping[str, Any]") -> WeightTable:
    if not isinstance(source, Mapping):
        try:
            source = json.loads(Path(source).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise AHPError(f"cannot read weight table: {exc}") from exc
    try:
        profiles = {
            name: {cid: float(w) for cid, w in ws.items()} for name, ws in source["profiles"].items()
        }
        return WeightTable(
            paradigm=str(source.get("paradigm", "")),
            criteria=dict(source.get("criteria", {})),
            profiles=profiles,
        )
    except (KeyError, AttributeError, TypeError, ValueError) as exc:
        raise AHPError(f"malformed weight table: {exc}") from exc
