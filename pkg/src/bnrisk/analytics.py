"""Risk maps with posterior uncertainty and randomized-evidence influence.

A risk map fixes a condition ``c`` and sweeps one or two axis variables
``b``, reporting per cell the log-risk difference

    r(b, q) = log p(target | c, b, q) - log p(target | c, q)

at the posterior-mean parameters, a Monte-Carlo interval over parameter
draws, a verdict (no-evidence / increase / decrease depending on where zero
falls relative to the interval), and the population share p(b | c).

Influence rankings replay each positive case, adding its findings as
evidence one variable at a time in seeded random order and recording the
relative change of the log conditional target probability attributed to each
variable; means are taken across rows, then iterations.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass
from itertools import product
from typing import Mapping, Sequence

import numpy as np

from ._kernels import prefix_target_mass
from .data import Dataset
from .inference import (
    JOINT_STATE_LIMIT,
    ImpossibleEvidenceError,
    JointTable,
    query,
)
from .model import BayesianNetwork, NetworkSchema
from .params import (
    ParameterPosterior,
    network_from_draw,
    posterior_mean_network,
    sample_parameters,
)

RISKMAP_FORMAT = "bnrisk-riskmap"
INFLUENCE_FORMAT = "bnrisk-influence"
FORMAT_VERSION = "1.0"

VERDICT_NO_EVIDENCE = "no-evidence"
VERDICT_INCREASE = "increase"
VERDICT_DECREASE = "decrease"

_VERDICT_GLYPH = {VERDICT_NO_EVIDENCE: "=", VERDICT_INCREASE: "+", VERDICT_DECREASE: "-"}

# Diverging ramp anchored at zero; deliberately avoids red/yellow/green.
_RAMP_NEUTRAL = (0xF5, 0xF5, 0xF5)
_RAMP_BLUE = (0x21, 0x66, 0xAC)
_RAMP_ORANGE = (0xE0, 0x82, 0x14)


class DegenerateBaselineError(ValueError):
    """The target state has probability zero under the baseline condition."""


@dataclass(frozen=True)
class RiskMapSpec:
    """What to map: target state, fixed condition, one or two axis variables."""

    target: str
    target_state: int | str
    condition: Mapping[str, int | str]
    axes: tuple[str, ...]
    n_param_samples: int = 1000
    level: float = 0.9
    seed: int = 0

    def resolve(self, schema: NetworkSchema) -> "ResolvedRiskMapSpec":
        axes = tuple(self.axes) if not isinstance(self.axes, str) else (self.axes,)
        if not 1 <= len(axes) <= 2:
            raise ValueError("a risk map takes one or two axis variables")
        if len(set(axes)) != len(axes):
            raise ValueError("duplicate axis variable")
        condition = schema.coerce_evidence(dict(self.condition))
        ts = self.target_state
        target_state = schema.state_index(self.target, ts) if isinstance(ts, str) else int(ts)
        if not 0 <= target_state < schema.cardinality(self.target):
            raise ValueError(f"target state {ts!r} out of range")
        for a in axes:
            schema.index(a)
            if a in condition:
                raise ValueError(f"axis variable {a!r} also appears in the condition")
            if a == self.target:
                raise ValueError("target cannot be an axis variable")
        if self.target in condition:
            raise ValueError("target cannot appear in the condition")
        if not 0.0 < self.level < 1.0:
            raise ValueError("level must lie in (0, 1)")
        if self.n_param_samples < 1:
            raise ValueError("n_param_samples must be >= 1")
        return ResolvedRiskMapSpec(
            self.target, target_state, condition, axes,
            int(self.n_param_samples), float(self.level), int(self.seed),
        )


@dataclass(frozen=True)
class ResolvedRiskMapSpec:
    target: str
    target_state: int
    condition: dict[str, int]
    axes: tuple[str, ...]
    n_param_samples: int
    level: float
    seed: int


@dataclass(frozen=True)
class RiskCell:
    states: tuple[int, ...]  # axis state indices, same order as the axes
    labels: tuple[str, ...]
    r_hat: float
    lo: float
    hi: float
    mc_median: float
    verdict: str
    population_share: float
    flagged: bool  # point estimate fell outside the sampled interval


@dataclass(frozen=True)
class RiskMap:
    target: str
    target_state: int
    target_state_label: str
    condition: dict[str, int]
    axes: tuple[str, ...]
    axis_states: tuple[tuple[str, ...], ...]
    level: float
    n_param_samples: int
    seed: int
    cells: tuple[RiskCell, ...]

    def cell(self, *states: int) -> RiskCell:
        for c in self.cells:
            if c.states == tuple(states):
                return c
        raise KeyError(f"no cell {states}")


def _grid_stats(
    net: BayesianNetwork,
    condition: Mapping[str, int],
    axes: Sequence[str],
    target: str,
    target_state: int,
) -> tuple[np.ndarray, np.ndarray, float]:
    """Per-cell log-risk difference and population share for one network.

    Returns (r flat over the axes grid in C order, share, baseline p). Uses
    one conditioned reduction of the joint table when the state space allows,
    otherwise one elimination query per cell.
    """
    schema = net.schema
    if net.joint_size() <= JOINT_STATE_LIMIT:
        jt = JointTable(net)
        idx = tuple(condition.get(n, slice(None)) for n in schema.names)
        sub = jt.array[idx]
        remaining = [n for n in schema.names if n not in condition]
        keep = [remaining.index(v) for v in (*axes, target)]
        other = tuple(i for i in range(sub.ndim) if i not in keep)
        tbl = sub.sum(axis=other)
        # axes of tbl follow schema order of the kept variables; put them in
        # (axes..., target) order
        kept_sorted = sorted(keep)
        tbl = tbl.transpose([kept_sorted.index(i) for i in keep])
        p_cond = float(tbl.sum())
        if p_cond <= 0.0:
            raise ImpossibleEvidenceError("impossible evidence")
        p_cb = tbl.sum(axis=-1)
        if np.any(p_cb <= 0.0):
            raise ImpossibleEvidenceError("a grid cell has probability zero")
        p_t_cb = tbl[..., target_state] / p_cb
        p_t_c = float(tbl.reshape(-1, tbl.shape[-1]).sum(axis=0)[target_state]) / p_cond
        share = (p_cb / p_cond).reshape(-1)
        if p_t_c <= 0.0:
            raise DegenerateBaselineError("degenerate baseline")
        with np.errstate(divide="raise"):
            r = np.log(p_t_cb.reshape(-1)) - math.log(p_t_c)
        return r, share, p_t_c

    base = query(net, condition, target)
    p_t_c = float(base.distribution[target_state])
    if p_t_c <= 0.0:
        raise DegenerateBaselineError("degenerate baseline")
    p_c = base.evidence_probability
    cards = [schema.cardinality(a) for a in axes]
    r = np.empty(int(np.prod(cards)))
    share = np.empty_like(r)
    for flat, combo in enumerate(product(*[range(c) for c in cards])):
        ev = dict(condition)
        ev.update(zip(axes, combo))
        res = query(net, ev, target)
        r[flat] = math.log(float(res.distribution[target_state])) - math.log(p_t_c)
        share[flat] = res.evidence_probability / p_c
    return r, share, p_t_c


def risk_map(posterior: ParameterPosterior, spec: RiskMapSpec) -> RiskMap:
    """Build the interval-annotated risk map for a fitted model."""
    schema = posterior.schema
    rs = spec.resolve(schema)
    point_net = posterior_mean_network(posterior)
    r_hat, share, _ = _grid_stats(point_net, rs.condition, rs.axes, rs.target, rs.target_state)

    n_cells = r_hat.size
    draws = np.empty((rs.n_param_samples, n_cells))
    for s in range(rs.n_param_samples):
        params = sample_parameters(posterior, [rs.seed, s])
        net_s = network_from_draw(posterior, params)
        draws[s], _, _ = _grid_stats(net_s, rs.condition, rs.axes, rs.target, rs.target_state)

    tail = (1.0 - rs.level) / 2.0
    lo = np.quantile(draws, tail, axis=0)
    hi = np.quantile(draws, 1.0 - tail, axis=0)
    median = np.quantile(draws, 0.5, axis=0)

    axis_states = tuple(tuple(schema.variable(a).states) for a in rs.axes)
    cells = []
    cards = [schema.cardinality(a) for a in rs.axes]
    for flat, combo in enumerate(product(*[range(c) for c in cards])):
        if lo[flat] > 0.0:
            verdict = VERDICT_INCREASE
        elif hi[flat] < 0.0:
            verdict = VERDICT_DECREASE
        else:
            verdict = VERDICT_NO_EVIDENCE
        cells.append(
            RiskCell(
                states=tuple(combo),
                labels=tuple(axis_states[i][k] for i, k in enumerate(combo)),
                r_hat=float(r_hat[flat]),
                lo=float(lo[flat]),
                hi=float(hi[flat]),
                mc_median=float(median[flat]),
                verdict=verdict,
                population_share=float(share[flat]),
                flagged=not (lo[flat] <= r_hat[flat] <= hi[flat]),
            )
        )
    return RiskMap(
        target=rs.target,
        target_state=rs.target_state,
        target_state_label=schema.variable(rs.target).states[rs.target_state],
        condition=rs.condition,
        axes=rs.axes,
        axis_states=axis_states,
        level=rs.level,
        n_param_samples=rs.n_param_samples,
        seed=rs.seed,
        cells=tuple(cells),
    )


# --- rendering ---------------------------------------------------------------


def ramp_color(value: float, vmax: float) -> str:
    """Hex color on the blue/neutral/orange diverging ramp centered at 0."""
    if vmax <= 0.0:
        t = 0.0
    else:
        t = max(-1.0, min(1.0, value / vmax))
    anchor = _RAMP_BLUE if t < 0 else _RAMP_ORANGE
    w = abs(t)
    rgb = tuple(round((1 - w) * n + w * a) for n, a in zip(_RAMP_NEUTRAL, anchor))
    return "#{:02x}{:02x}{:02x}".format(*rgb)


def border_width(share: float) -> float:
    """Cell border thickness encoding the population share (monotone)."""
    return round(0.75 + 6.0 * share, 3)


def riskmap_to_obj(m: RiskMap) -> dict:
    return {
        "format": RISKMAP_FORMAT,
        "format_version": FORMAT_VERSION,
        "target": m.target,
        "target_state": m.target_state,
        "target_state_label": m.target_state_label,
        "condition": dict(m.condition),
        "axes": list(m.axes),
        "axis_states": [list(s) for s in m.axis_states],
        "level": m.level,
        "n_param_samples": m.n_param_samples,
        "seed": m.seed,
        "cells": [
            {
                "states": list(c.states),
                "labels": list(c.labels),
                "r_hat": c.r_hat,
                "lo": c.lo,
                "hi": c.hi,
                "mc_median": c.mc_median,
                "verdict": c.verdict,
                "population_share": c.population_share,
                "flagged": c.flagged,
            }
            for c in m.cells
        ],
    }


def riskmap_from_obj(obj: Mapping) -> RiskMap:
    if obj.get("format") != RISKMAP_FORMAT:
        raise ValueError("not a risk-map document")
    cells = tuple(
        RiskCell(
            states=tuple(c["states"]),
            labels=tuple(c["labels"]),
            r_hat=float(c["r_hat"]),
            lo=float(c["lo"]),
            hi=float(c["hi"]),
            mc_median=float(c["mc_median"]),
            verdict=c["verdict"],
            population_share=float(c["population_share"]),
            flagged=bool(c["flagged"]),
        )
        for c in obj["cells"]
    )
    return RiskMap(
        target=obj["target"],
        target_state=int(obj["target_state"]),
        target_state_label=obj["target_state_label"],
        condition={k: int(v) for k, v in obj["condition"].items()},
        axes=tuple(obj["axes"]),
        axis_states=tuple(tuple(s) for s in obj["axis_states"]),
        level=float(obj["level"]),
        n_param_samples=int(obj["n_param_samples"]),
        seed=int(obj["seed"]),
        cells=cells,
    )


def parse_risk_map(text: str) -> RiskMap:
    return riskmap_from_obj(json.loads(text))


def render_risk_map(m: RiskMap, format: str = "text") -> str:
    """Render a risk map as an aligned text grid, an SVG heatmap, or JSON."""
    if format == "json":
        return json.dumps(riskmap_to_obj(m))
    if format == "text":
        return _render_text(m)
    if format == "svg":
        return _render_svg(m)
    raise ValueError(f"unknown format {format!r}")


def _cell_grid(m: RiskMap) -> list[list[RiskCell]]:
    """Cells as rows over axis 1 (or one row) and columns over axis 0."""
    n0 = len(m.axis_states[0])
    n1 = len(m.axis_states[1]) if len(m.axes) == 2 else 1
    grid = [[None] * n0 for _ in range(n1)]
    for c in m.cells:
        col = c.states[0]
        row = c.states[1] if len(c.states) == 2 else 0
        grid[row][col] = c
    return grid


def _render_text(m: RiskMap) -> str:
    cond = ", ".join(f"{k}={v}" for k, v in sorted(m.condition.items())) or "(none)"
    out = io.StringIO()
    out.write(
        f"risk map: {m.target}={m.target_state_label} | condition {cond}"
        f" | level {m.level:g} | draws {m.n_param_samples}\n"
    )
    header = [""] + list(m.axis_states[0])
    rows = []
    grid = _cell_grid(m)
    row_labels = m.axis_states[1] if len(m.axes) == 2 else ("",)
    for r, row in enumerate(grid):
        cells_txt = []
        for c in row:
            cells_txt.append(
                f"{_VERDICT_GLYPH[c.verdict]} {c.r_hat:+.3f} [{c.lo:+.3f},{c.hi:+.3f}] p={c.population_share:.3f}"
                + ("!" if c.flagged else "")
            )
        rows.append([str(row_labels[r])] + cells_txt)
    widths = [max(len(r[i]) for r in [header] + rows) for i in range(len(header))]
    for line in [header] + rows:
        out.write("  ".join(s.ljust(w) for s, w in zip(line, widths)).rstrip() + "\n")
    out.write("verdicts: + increase, - decrease, = no evidence; ! point estimate outside interval\n")
    return out.getvalue()


def _render_svg(m: RiskMap) -> str:
    cw, ch, margin_left, margin_top = 150, 72, 110, 56
    grid = _cell_grid(m)
    n_cols = len(m.axis_states[0])
    n_rows = len(grid)
    width = margin_left + n_cols * cw + 16
    height = margin_top + n_rows * ch + 16
    vmax = max((abs(c.r_hat) for c in m.cells), default=0.0)
    cond = ", ".join(f"{k}={v}" for k, v in sorted(m.condition.items())) or "none"
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<title>{m.target}={m.target_state_label} given {cond}</title>',
        f'<text x="8" y="16">{m.target}={m.target_state_label} | condition: {cond} | '
        f'{m.level:g} interval, {m.n_param_samples} draws</text>',
    ]
    for j, label in enumerate(m.axis_states[0]):
        x = margin_left + j * cw + cw / 2
        parts.append(f'<text x="{x}" y="{margin_top - 8}" text-anchor="middle">{_esc(label)}</text>')
    row_labels = m.axis_states[1] if len(m.axes) == 2 else ("",)
    for i, label in enumerate(row_labels):
        y = margin_top + i * ch + ch / 2
        parts.append(
            f'<text x="{margin_left - 8}" y="{y}" text-anchor="end" dominant-baseline="middle">{_esc(label)}</text>'
        )
    for i, row in enumerate(grid):
        for j, c in enumerate(row):
            x, y = margin_left + j * cw, margin_top + i * ch
            fill = ramp_color(c.r_hat, vmax)
            sw = border_width(c.population_share)
            flag = " !" if c.flagged else ""
            parts.append(
                f'<rect x="{x}" y="{y}" width="{cw}" height="{ch}" fill="{fill}" '
                f'stroke="#333333" stroke-width="{sw}"/>'
            )
            parts.append(
                f'<text x="{x + cw / 2}" y="{y + ch / 2 - 8}" text-anchor="middle">'
                f'{c.r_hat:+.3f} ({_VERDICT_GLYPH[c.verdict]}){flag}</text>'
            )
            parts.append(
                f'<text x="{x + cw / 2}" y="{y + ch / 2 + 8}" text-anchor="middle">'
                f'[{c.lo:+.3f}, {c.hi:+.3f}]</text>'
            )
            parts.append(
                f'<text x="{x + cw / 2}" y="{y + ch / 2 + 24}" text-anchor="middle" fill="#555555">'
                f'pop {100 * c.population_share:.1f}%</text>'
            )
    parts.append("</svg>")
    return "\n".join(parts)


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


# --- influential findings ----------------------------------------------------


@dataclass(frozen=True)
class VariableInfluence:
    variable: str
    mean_rrv: float
    mean_abs_rrv: float
    std_rrv: float
    count: int
    per_state: tuple[tuple[str, float, int], ...]  # (state label, mean RRV, count)


@dataclass(frozen=True)
class InfluenceReport:
    target: str
    target_state: int
    iterations: int
    seed: int
    n_rows: int
    variables: tuple[VariableInfluence, ...]
    skipped: dict[str, int]

    def ranking(self) -> list[VariableInfluence]:
        """Variables sorted by signed mean relative risk variation, descending."""
        return sorted(self.variables, key=lambda v: -v.mean_rrv)


def influential_findings(
    posterior: ParameterPosterior,
    positives: Dataset,
    target: str,
    target_state: int | str,
    iterations: int = 10,
    seed: int = 0,
) -> InfluenceReport:
    """Randomized-evidence influence over the positive cases.

    For every iteration and row, the row's findings enter the evidence one
    variable at a time in a per-(iteration, row) seeded random order; the
    relative change of the log conditional target probability is credited to
    the variable just added. Terms whose denominator log-probability is zero
    (conditional probability 1) or whose conditional is 0 are skipped and
    tallied under diagnostics instead of producing infinities.
    """
    schema = posterior.schema
    if positives.schema != schema:
        raise ValueError("positives dataset schema does not match the model")
    if not positives.is_complete():
        raise ValueError("positives dataset must be complete")
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    if positives.n_rows == 0:
        raise ValueError("no positive rows supplied")
    ts = schema.state_index(target, target_state) if isinstance(target_state, str) else int(target_state)
    if not 0 <= ts < schema.cardinality(target):
        raise ValueError("target state out of range")

    net = posterior_mean_network(posterior)
    use_joint = net.joint_size() <= JOINT_STATE_LIMIT
    jt = JointTable(net) if use_joint else None
    evid_vars = [n for n in schema.names if n != target]
    n_rows = positives.n_rows

    rrv = np.full((iterations, n_rows, len(evid_vars)), np.nan)
    skipped = {"unit_probability_denominator": 0, "zero_probability": 0}

    t_idx = schema.index(target)
    ev_schema_idx = np.array([schema.index(v) for v in evid_vars], dtype=np.int64)

    for it in range(iterations):
        for i in range(n_rows):
            rng = np.random.default_rng([seed, it, i])
            perm = rng.permutation(len(evid_vars))
            row = positives.codes[i]
            if use_joint:
                mass = prefix_target_mass(
                    jt.flat, schema.cardinalities, row, ev_schema_idx[perm], t_idx
                )
                totals = mass.sum(axis=1)
                lp_prev = _safe_log_ratio(mass[0, ts], totals[0])
                for j in range(1, len(perm) + 1):
                    lp = _safe_log_ratio(mass[j, ts], totals[j])
                    lp_prev = _record(rrv, skipped, it, i, int(perm[j - 1]), lp, lp_prev)
            else:
                ev: dict[str, int] = {}
                lp_prev = math.log(float(query(net, ev, target).distribution[ts]))
                for oj in perm:
                    v = evid_vars[oj]
                    ev[v] = int(row[schema.index(v)])
                    p = float(query(net, ev, target).distribution[ts])
                    lp = math.log(p) if p > 0.0 else -math.inf
                    lp_prev = _record(rrv, skipped, it, i, int(oj), lp, lp_prev)

    variables = []
    state_labels = {v: schema.variable(v).states for v in evid_vars}
    for oj, v in enumerate(evid_vars):
        vals = rrv[:, :, oj]
        finite = np.isfinite(vals)
        count = int(finite.sum())
        if count:
            per_iter = np.nanmean(vals, axis=1)
            mean = float(np.nanmean(per_iter))
            per_iter_abs = np.nanmean(np.abs(vals), axis=1)
            mean_abs = float(np.nanmean(per_iter_abs))
            std = float(np.nanstd(vals))
        else:
            mean = mean_abs = std = float("nan")
        per_state = []
        col = positives.column(v)
        for k, label in enumerate(state_labels[v]):
            sel = vals[:, col == k]
            n_k = int(np.isfinite(sel).sum())
            per_state.append((label, float(np.nanmean(sel)) if n_k else float("nan"), n_k))
        variables.append(
            VariableInfluence(v, mean, mean_abs, std, count, tuple(per_state))
        )
    return InfluenceReport(
        target=target,
        target_state=ts,
        iterations=iterations,
        seed=seed,
        n_rows=n_rows,
        variables=tuple(variables),
        skipped=skipped,
    )


def _safe_log_ratio(mass: float, total: float) -> float:
    p = float(mass) / float(total) if total > 0.0 else 0.0
    return math.log(p) if p > 0.0 else -math.inf


def _record(rrv, skipped, it, i, oj, lp, lp_prev) -> float:
    """Store one RRV term; returns the log-probability to carry forward."""
    if not math.isfinite(lp):
        skipped["zero_probability"] += 1
        return lp_prev
    if abs(lp_prev) < 1e-12 or not math.isfinite(lp_prev):
        skipped["unit_probability_denominator"] += 1
        return lp
    rrv[it, i, oj] = 100.0 * (lp - lp_prev) / lp_prev
    return lp


def influence_to_obj(report: InfluenceReport) -> dict:
    return {
        "format": INFLUENCE_FORMAT,
        "format_version": FORMAT_VERSION,
        "target": report.target,
        "target_state": report.target_state,
        "iterations": report.iterations,
        "seed": report.seed,
        "n_rows": report.n_rows,
        "skipped": dict(report.skipped),
        "variables": [
            {
                "variable": v.variable,
                "mean_rrv": _json_float(v.mean_rrv),
                "mean_abs_rrv": _json_float(v.mean_abs_rrv),
                "std_rrv": _json_float(v.std_rrv),
                "count": v.count,
                "per_state": [
                    {"state": s, "mean_rrv": _json_float(m), "count": n}
                    for s, m, n in v.per_state
                ],
            }
            for v in report.variables
        ],
    }


def _json_float(x: float):
    return None if not math.isfinite(x) else float(x)


def influence_summary(report: InfluenceReport) -> str:
    out = io.StringIO()
    out.write(
        f"influential findings for {report.target} state {report.target_state} "
        f"({report.n_rows} rows x {report.iterations} iterations, seed {report.seed})\n"
    )
    for v in report.ranking():
        out.write(
            f"  {v.variable:12s} mean RRV {v.mean_rrv:+9.3f}%  std {v.std_rrv:9.3f}  n={v.count}\n"
        )
    if any(report.skipped.values()):
        out.write(f"  skipped terms: {report.skipped}\n")
    return out.getvalue()
