"""SVG figures and the JSON summary report.

Charts only draw numbers already present in :class:`~probmives.stats.Statistics`;
nothing is recomputed here beyond pixel geometry. Every data cell, bar or
point carries one ``<text class="data-label">`` element.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence
from xml.sax.saxutils import escape

from .resources import published_reference
from .simulation import OVERALL, SimulationResult
from .stats import Statistics, compute_statistics, statistics_to_dict

SCENARIO_COLORS = ("#4575b4", "#f46d43", "#66bd63", "#984ea3", "#8c564b", "#e7298a")
NODE_COLORS = (
    "#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02",
    "#a6761d", "#666666", "#1f78b4", "#b2df8a", "#fb9a99", "#cab2d6",
)
RAMP = ((0.0, (0xD7, 0x30, 0x27)), (0.5, (0xFF, 0xFF, 0xBF)), (1.0, (0x1A, 0x98, 0x50)))
FONT = 'font-family="Helvetica, Arial, sans-serif"'


class ChartError(ValueError):
    pass


class ChartKind(str, enum.Enum):
    DISTRIBUTION = "distribution"
    STACKED_BAR = "stacked_bar"
    RADAR = "radar"
    HEATMAP = "heatmap"
    RANK_BAR = "rank_bar"


@dataclass(frozen=True)
class ChartRequest:
    kind: ChartKind
    level: str
    paradigm: str
    path: Path

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", ChartKind(self.kind))
        object.__setattr__(self, "path", Path(self.path))
        if self.level not in (OVERALL, "requirement", "criterion"):
            raise ChartError(f"unknown level {self.level!r}")


def ramp_color(value: float) -> str:
    """Red (0) -> yellow (0.5) -> green (1), linear in RGB."""
    v = min(1.0, max(0.0, float(value)))
    for (x0, c0), (x1, c1) in zip(RAMP, RAMP[1:]):
        if v <= x1:
            t = (v - x0) / (x1 - x0)
            rgb = [round(a + (b - a) * t) for a, b in zip(c0, c1)]
            return "#{:02x}{:02x}{:02x}".format(*rgb)
    return "#1a9850"


class _Svg:
    def __init__(self, width: int, height: int, title: str):
        self.width = width
        self.height = height
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}">',
            f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>',
        ]
        self.text(width / 2, 28, title, size=16, anchor="middle", weight="bold")

    def text(self, x, y, s, size=11, anchor="start", cls=None, weight=None, rotate=None, fill="#222222"):
        attrs = [f'x="{x:.1f}"', f'y="{y:.1f}"', f'font-size="{size}"', FONT, f'text-anchor="{anchor}"', f'fill="{fill}"']
        if cls:
            attrs.append(f'class="{cls}"')
        if weight:
            attrs.append(f'font-weight="{weight}"')
        if rotate is not None:
            attrs.append(f'transform="rotate({rotate} {x:.1f} {y:.1f})"')
        self.parts.append(f"<text {' '.join(attrs)}>{escape(str(s))}</text>")

    def rect(self, x, y, w, h, fill, stroke="none", cls=None):
        c = f' class="{cls}"' if cls else ""
        self.parts.append(
            f'<rect x="{x:.2f}" y="{y:.2f}" width="{max(w, 0):.2f}" height="{max(h, 0):.2f}" '
            f'fill="{fill}" stroke="{stroke}"{c}/>'
        )

    def line(self, x1, y1, x2, y2, stroke="#444444", width=1.0, dash=None):
        d = f' stroke-dasharray="{dash}"' if dash else ""
        self.parts.append(
            f'<line x1="{x1:.2f}" y1="{y1:.2f}" x2="{x2:.2f}" y2="{y2:.2f}" stroke="{stroke}" stroke-width="{width}"{d}/>'
        )

    def polyline(self, pts, stroke, width=1.5, fill="none", closed=False, cls=None):
        tag = "polygon" if closed else "polyline"
        c = f' class="{cls}"' if cls else ""
        p = " ".join(f"{x:.2f},{y:.2f}" for x, y in pts)
        self.parts.append(f'<{tag} points="{p}" fill="{fill}" stroke="{stroke}" stroke-width="{width}"{c}/>')

    def circle(self, x, y, r, fill, cls=None):
        c = f' class="{cls}"' if cls else ""
        self.parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="{r}" fill="{fill}"{c}/>')

    def legend(self, x, y, items: Sequence[tuple[str, str]]):
        for k, (label, color) in enumerate(items):
            self.rect(x, y + 18 * k - 10, 12, 12, color)
            self.text(x + 18, y + 18 * k, label)

    def render(self) -> str:
        return '<?xml version="1.0" encoding="UTF-8"?>\n' + "\n".join(self.parts + ["</svg>"]) + "\n"


def _fmt(v: float) -> str:
    return f"{v:.3f}"


def _nodes(stats: Statistics, level: str) -> list[str]:
    if level == OVERALL:
        return [OVERALL]
    if level == "requirement":
        return list(stats.requirement_weights)
    return list(stats.criterion_weights)


def _axis_ticks(svg: _Svg, x0, y0, height, lo, hi, n=5):
    for k in range(n + 1):
        v = lo + (hi - lo) * k / n
        y = y0 + height - height * k / n
        svg.line(x0 - 4, y, x0, y)
        svg.text(x0 - 6, y + 4, f"{v:.2f}", size=9, anchor="end")
    svg.line(x0, y0, x0, y0 + height)


def heatmap_svg(stats: Statistics, level: str) -> str:
    rpt = stats.ranks[level]
    nodes = _nodes(stats, level)
    cell_w, cell_h = 64, 40
    left, top = 70, 60
    width = left + cell_w * len(nodes) + 30
    height = top + cell_h * len(stats.scenarios) + 60
    svg = _Svg(width, height, f"Probability of ranking first ({stats.paradigm}, {level})")
    for ci, node in enumerate(nodes):
        svg.text(left + cell_w * (ci + 0.5), top - 8, node, anchor="middle", weight="bold")
    for si, scen in enumerate(stats.scenarios):
        y = top + cell_h * si
        svg.text(left - 10, y + cell_h / 2 + 4, scen, anchor="end", weight="bold")
        for ci, node in enumerate(nodes):
            p = float(rpt.tables[node][si, 0])
            x = left + cell_w * ci
            svg.rect(x, y, cell_w, cell_h, ramp_color(p), stroke="#ffffff", cls="cell")
            svg.text(x + cell_w / 2, y + cell_h / 2 + 4, _fmt(p), anchor="middle", cls="data-label")
    # colour key
    ky = top + cell_h * len(stats.scenarios) + 20
    for k in range(11):
        svg.rect(left + 18 * k, ky, 18, 10, ramp_color(k / 10))
    svg.text(left, ky + 24, "0", size=9)
    svg.text(left + 18 * 11, ky + 24, "1", size=9, anchor="end")
    return svg.render()


def radar_svg(stats: Statistics, level: str) -> str:
    nodes = _nodes(stats, level)
    if len(nodes) < 3:
        raise ChartError(f"radar requires >=3 axes, level {level!r} has {len(nodes)}")
    size = 520
    cx, cy, radius = size / 2, size / 2 + 10, size / 2 - 90
    svg = _Svg(size + 140, size + 20, f"Mean value per {level} ({stats.paradigm})")
    k = len(nodes)

    def pt(i, r):
        a = -math.pi / 2 + 2 * math.pi * i / k
        return cx + r * math.cos(a), cy + r * math.sin(a)

    for ring in (0.25, 0.5, 0.75, 1.0):
        svg.polyline([pt(i, radius * ring) for i in range(k)], stroke="#cccccc", width=0.8, closed=True)
        svg.text(cx + 3, cy - radius * ring + 10, f"{ring:.2f}", size=8, fill="#888888")
    for i, node in enumerate(nodes):
        svg.line(cx, cy, *pt(i, radius), stroke="#cccccc", width=0.8)
        lx, ly = pt(i, radius + 26)
        svg.text(lx, ly + 4, node, anchor="middle", weight="bold")
    for si, scen in enumerate(stats.scenarios):
        color = SCENARIO_COLORS[si % len(SCENARIO_COLORS)]
        vals = [stats.means[node][scen] for node in nodes]
        pts = [pt(i, radius * v) for i, v in enumerate(vals)]
        svg.polyline(pts, stroke=color, width=2, closed=True, fill="none", cls="series")
        for (x, y), v in zip(pts, vals):
            svg.circle(x, y, 3, color, cls="point")
            svg.text(x + 4, y - 4 + 10 * si, _fmt(v), size=8, cls="data-label", fill=color)
    svg.legend(size + 20, 60, [(s, SCENARIO_COLORS[i % len(SCENARIO_COLORS)]) for i, s in enumerate(stats.scenarios)])
    return svg.render()


def stacked_bar_svg(stats: Statistics, level: str) -> str:
    """Weighted contributions of each node to the overall mean, per scenario."""
    if level == OVERALL:
        raise ChartError("stacked_bar needs level requirement or criterion")
    nodes = _nodes(stats, level)
    contrib = stats.contributions[level]
    left, top, plot_h, bar_w, gap = 70, 60, 380, 90, 60
    width = left + (bar_w + gap) * len(stats.scenarios) + 180
    svg = _Svg(width, top + plot_h + 70, f"Contribution to mean overall value by {level} ({stats.paradigm})")
    _axis_ticks(svg, left, top, plot_h, 0.0, 1.0)
    for si, scen in enumerate(stats.scenarios):
        x = left + gap / 2 + (bar_w + gap) * si
        base = 0.0
        for ni, node in enumerate(nodes):
            v = contrib[node][scen]
            y = top + plot_h * (1 - base - v)
            svg.rect(x, y, bar_w, plot_h * v, NODE_COLORS[ni % len(NODE_COLORS)], stroke="#ffffff", cls="segment")
            svg.text(x + bar_w / 2, y + plot_h * v / 2 + 3, _fmt(v), size=8, anchor="middle", cls="data-label")
            base += v
        svg.text(x + bar_w / 2, top + plot_h + 18, scen, anchor="middle", weight="bold")
        svg.text(x + bar_w / 2, top + plot_h * (1 - base) - 6, _fmt(stats.means[OVERALL][scen]), anchor="middle")
    svg.legend(
        width - 160, top + 10,
        [(f"{n} {stats.node_names.get(n, '')}", NODE_COLORS[i % len(NODE_COLORS)]) for i, n in enumerate(nodes)],
    )
    return svg.render()


def rank_bar_svg(stats: Statistics, level: str) -> str:
    """P(first) and P(last) per node and scenario."""
    rpt = stats.ranks[level]
    nodes = _nodes(stats, level)
    n_s = len(stats.scenarios)
    last = n_s - 1
    left, top, plot_h = 70, 60, 220
    group_w = max(24 * n_s + 20, 60)
    width = left + group_w * len(nodes) + 140
    height = top + 2 * (plot_h + 70)
    svg = _Svg(width, height, f"Ranking probabilities ({stats.paradigm}, {level})")
    for panel, (pos, label) in enumerate(((0, "first"), (last, "last"))):
        y0 = top + panel * (plot_h + 70)
        svg.text(left, y0 - 8, f"Probability of ranking {label}", weight="bold")
        _axis_ticks(svg, left, y0, plot_h, 0.0, 1.0)
        svg.line(left, y0 + plot_h, width - 130, y0 + plot_h)
        for ni, node in enumerate(nodes):
            gx = left + 10 + group_w * ni
            for si in range(n_s):
                p = float(rpt.tables[node][si, pos])
                x = gx + 24 * si
                svg.rect(x, y0 + plot_h * (1 - p), 20, plot_h * p, SCENARIO_COLORS[si % len(SCENARIO_COLORS)], cls="bar")
                svg.text(x + 10, y0 + plot_h * (1 - p) - 3, _fmt(p), size=7, anchor="middle", cls="data-label")
            svg.text(gx + 12 * n_s, y0 + plot_h + 16, node, anchor="middle")
    svg.legend(width - 110, top + 10, [(s, SCENARIO_COLORS[i % len(SCENARIO_COLORS)]) for i, s in enumerate(stats.scenarios)])
    return svg.render()


def distribution_svg(stats: Statistics, level: str = OVERALL) -> str:
    """Histogram (bars, left axis) and CDF (step line, right axis) per scenario."""
    if level != OVERALL:
        raise ChartError("distribution charts are available for the overall level only")
    panel_w, plot_h, left, top = 300, 220, 60, 70
    n_s = len(stats.scenarios)
    svg = _Svg(left + (panel_w + 70) * n_s, top + plot_h + 70, f"Distribution of overall value ({stats.paradigm})")
    for si, scen in enumerate(stats.scenarios):
        dist = stats.distributions[scen]
        x0 = left + (panel_w + 70) * si
        color = SCENARIO_COLORS[si % len(SCENARIO_COLORS)]
        svg.text(x0 + panel_w / 2, top - 16, scen, anchor="middle", weight="bold")
        counts = [int(c) for c in dist.counts]
        cmax = max(counts)
        nb = len(counts)
        bw = panel_w / nb
        svg.line(x0, top + plot_h, x0 + panel_w, top + plot_h)
        svg.line(x0, top, x0, top + plot_h)
        svg.line(x0 + panel_w, top, x0 + panel_w, top + plot_h)
        svg.text(x0 - 4, top + 4, str(cmax), size=8, anchor="end")
        svg.text(x0 + panel_w + 4, top + 4, "1.0", size=8)
        for b, c in enumerate(counts):
            h = plot_h * c / cmax
            svg.rect(x0 + bw * b + 0.5, top + plot_h - h, bw - 1, h, color, cls="bar")
            svg.text(x0 + bw * (b + 0.5), top + plot_h - h - 2, str(c), size=5, anchor="middle", cls="data-label")
        steps = [(x0, top + plot_h)]
        for b, f in enumerate(dist.cdf):
            y = top + plot_h * (1 - float(f))
            steps.append((x0 + bw * b, steps[-1][1]))
            steps.append((x0 + bw * b, y))
            steps.append((x0 + bw * (b + 1), y))
        svg.polyline(steps, stroke="#222222", width=1.2, cls="cdf")
        lo, hi = float(dist.edges[0]), float(dist.edges[-1])
        svg.text(x0, top + plot_h + 16, f"{lo:.4f}", size=9)
        svg.text(x0 + panel_w, top + plot_h + 16, f"{hi:.4f}", size=9, anchor="end")
    return svg.render()


def comparison_svg(stats_by_paradigm: Mapping[str, Statistics]) -> str:
    """Mean overall value per scenario, one bar per paradigm."""
    pars = list(stats_by_paradigm)
    scenarios = stats_by_paradigm[pars[0]].scenarios
    left, top, plot_h = 70, 60, 300
    group_w = 40 * len(pars) + 40
    width = left + group_w * len(scenarios) + 170
    svg = _Svg(width, top + plot_h + 60, "Mean overall value by paradigm")
    _axis_ticks(svg, left, top, plot_h, 0.0, 1.0)
    for si, scen in enumerate(scenarios):
        gx = left + 20 + group_w * si
        for pi, par in enumerate(pars):
            v = stats_by_paradigm[par].means[OVERALL][scen]
            x = gx + 40 * pi
            svg.rect(x, top + plot_h * (1 - v), 34, plot_h * v, SCENARIO_COLORS[pi % len(SCENARIO_COLORS)], cls="bar")
            svg.text(x + 17, top + plot_h * (1 - v) - 4, _fmt(v), size=9, anchor="middle", cls="data-label")
        svg.text(gx + 20 * len(pars), top + plot_h + 18, scen, anchor="middle", weight="bold")
    svg.legend(width - 150, top + 10, [(p, SCENARIO_COLORS[i % len(SCENARIO_COLORS)]) for i, p in enumerate(pars)])
    return svg.render()


_RENDERERS = {
    ChartKind.DISTRIBUTION: distribution_svg,
    ChartKind.STACKED_BAR: stacked_bar_svg,
    ChartKind.RADAR: radar_svg,
    ChartKind.HEATMAP: heatmap_svg,
    ChartKind.RANK_BAR: rank_bar_svg,
}


@dataclass
class ReportBundle:
    results: dict[str, SimulationResult]
    statistics: dict[str, Statistics] = field(default_factory=dict)

    @classmethod
    def from_results(cls, results: Sequence[SimulationResult], n_bins: int = 30) -> "ReportBundle":
        res = {}
        for r in results:
            key = r.paradigm.value
            if key in res:
                raise ChartError(f"two results for paradigm {key}")
            res[key] = r
        return cls(results=res, statistics={k: compute_statistics(v, n_bins) for k, v in res.items()})


def render_chart(bundle: ReportBundle, request: ChartRequest) -> str:
    if request.paradigm not in bundle.statistics:
        raise ChartError(f"no statistics for paradigm {request.paradigm!r}")
    return _RENDERERS[request.kind](bundle.statistics[request.paradigm], request.level)


def _write(path: Path, text: str) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise ChartError(f"cannot write {path}: {exc}") from exc
    return path


def emit_charts(bundle: ReportBundle, requests: Sequence[ChartRequest]) -> list[Path]:
    # render everything first so an invalid request writes nothing
    docs = [(req.path, render_chart(bundle, req)) for req in requests]
    return [_write(path, doc) for path, doc in docs]


def default_requests(bundle: ReportBundle, out_dir: "str | Path") -> list[ChartRequest]:
    out = Path(out_dir)
    reqs = []
    for par in bundle.statistics:
        reqs += [
            ChartRequest(ChartKind.DISTRIBUTION, OVERALL, par, out / f"{par}_distribution.svg"),
            ChartRequest(ChartKind.STACKED_BAR, "requirement", par, out / f"{par}_stacked_requirements.svg"),
            ChartRequest(ChartKind.STACKED_BAR, "criterion", par, out / f"{par}_stacked_criteria.svg"),
            ChartRequest(ChartKind.RADAR, "requirement", par, out / f"{par}_radar_requirements.svg"),
            ChartRequest(ChartKind.RADAR, "criterion", par, out / f"{par}_radar_criteria.svg"),
            ChartRequest(ChartKind.RANK_BAR, OVERALL, par, out / f"{par}_rank_overall.svg"),
            ChartRequest(ChartKind.HEATMAP, "requirement", par, out / f"{par}_heatmap_requirements.svg"),
            ChartRequest(ChartKind.HEATMAP, "criterion", par, out / f"{par}_heatmap_criteria.svg"),
        ]
    return reqs


def emit_comparison(bundle: ReportBundle, path: "str | Path") -> Path:
    if len(bundle.statistics) < 2:
        raise ChartError("comparison needs results for two paradigms")
    return _write(Path(path), comparison_svg(bundle.statistics))


def _published_comparison(par: str, stats: Statistics, published: Mapping[str, Any]) -> dict[str, Any]:
    ref = published.get(par)
    if not ref:
        return {}
    crit = {}
    for node, pub in ref.get("criterion_first", {}).items():
        if node not in stats.ranks["criterion"].tables:
            continue
        got = [float(x) for x in stats.ranks["criterion"].tables[node][:, 0]]
        crit[node] = {
            "computed": got,
            "published": pub,
            "max_abs_diff": max(abs(a - b) for a, b in zip(got, pub)),
        }
    return {
        "mean_overall": {"computed": dict(stats.means[OVERALL]), "published": ref.get("mean_overall")},
        "value_interval": {
            "computed": {s: [sm.min, sm.max] for s, sm in stats.summaries[OVERALL].items()},
            "published": ref.get("value_interval"),
        },
        "criterion_first_rank": crit,
    }


def build_summary(bundle: ReportBundle, charts: Sequence[Path] = (), timestamp: str | None = None) -> dict[str, Any]:
    published = published_reference()
    doc: dict[str, Any] = {"paradigms": {}, "charts": [str(p) for p in charts]}
    for par, stats in bundle.statistics.items():
        cfg = dict(bundle.results[par].config)
        rw = cfg.get("requirement_weights", {})
        cfg["requirement_weights_are_default_equal"] = bool(rw) and len({round(w, 12) for w in rw.values()}) == 1
        entry = statistics_to_dict(stats)
        entry.pop("distributions")
        entry["config"] = cfg
        entry["criterion_weights"] = dict(stats.criterion_weights)
        entry["criterion_first_rank_table"] = {
            node: dict(zip(stats.scenarios, (float(x) for x in t[:, 0])))
            for node, t in stats.ranks["criterion"].tables.items()
        }
        entry["published_comparison"] = _published_comparison(par, stats, published)
        doc["paradigms"][par] = entry
    doc["notes"] = list(published.get("notes", []))
    if timestamp is not None:
        doc["timestamp"] = timestamp
    return doc


def emit_summary(
    bundle: ReportBundle, path: "str | Path", charts: Sequence[Path] = (), timestamp: str | None = None
) -> Path:
    text = json.dumps(build_summary(bundle, charts, timestamp), indent=1, sort_keys=True) + "\n"
    return _write(Path(path), text)
