"""Bundled reference inputs (case-study trees, value table, weight tables)."""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path
from typing import Any

BUNDLED = {
    "sustainability": "sustainability.json",
    "circularity": "circularity.json",
    "table4": "table4.csv",
    "ahp_sustainability": "ahp_sustainability.json",
    "ahp_circularity": "ahp_circularity.json",
    "published": "published.json",
}


def data_path(name: str) -> Path:
    """Filesystem path of a bundled file, by short name or file name."""
    fname = BUNDLED.get(name, name)
    path = Path(str(resources.files("probmives") / "data" / fname))
    if not path.exists():
        raise FileNotFoundError(f"no bundled file {name!r}")
    return path


def resolve(spec: str) -> Path:
    """``@name`` refers to a bundled file; anything else is a plain path."""
    if spec.startswith("@"):
        return data_path(spec[1:])
    return Path(spec)


def published_reference() -> dict[str, Any]:
    return json.loads(data_path("published").read_text(encoding="utf-8"))
