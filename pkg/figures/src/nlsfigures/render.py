"""Render log-log convergence panels from harness CSV reports.

The CSV schema is the harness contract: columns experiment_id, kind, gamma,
tau, n_modes, t_final, seed, error_l2, runtime_ms, saturated.  Rows with
seed == "geomean" are the aggregated series; other rows are per-seed
samples.  Fitted slopes are never recomputed here: they are read from the
JSON mirror written alongside the CSV, when present.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

REQUIRED_COLUMNS = ("gamma", "error_l2", "seed", "saturated")
X_COLUMNS = ("tau", "n_modes")


class SchemaError(ValueError):
    """Input does not conform to the harness CSV schema."""


@dataclass(frozen=True)
class PanelSpec:
    input_csv: Path
    x_column: str
    output: Path
    group_by: str = "gamma"
    reference_slopes: tuple[float, ...] = ()
    mirror: Path | None = None  # default: input_csv with .json suffix

    def mirror_path(self) -> Path:
        if self.mirror is not None:
            return Path(self.mirror)
        return Path(self.input_csv).with_suffix(".json")


@dataclass(frozen=True)
class GroupRender:
    gamma: float
    points: int
    fitted_slope: float | None
    label: str


@dataclass(frozen=True)
class RenderResult:
    output: Path
    groups: tuple[GroupRender, ...]


def _read_rows(path: Path, x_column: str) -> list[dict]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            header = reader.fieldnames or []
            for column in REQUIRED_COLUMNS + (x_column,):
                if column not in header:
                    raise SchemaError(f"column {column!r} missing from {path}")
            rows = list(reader)
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise SchemaError(f"no data rows in {path}")
    return rows


def _load_slopes(spec: PanelSpec) -> dict[float, float]:
    """gamma -> fitted_slope from the JSON mirror; empty when absent."""
    path = spec.mirror_path()
    if not path.exists():
        return {}
    payload = json.loads(path.read_text(encoding="utf-8"))
    out = {}
    for report in payload.get("report", {}).get("reports", []):
        if report.get("fitted_slope") is not None:
            out[float(report["gamma"])] = float(report["fitted_slope"])
    return out


def _log_margin(values: np.ndarray, factor: float = 0.05):
    lo, hi = float(np.min(values)), float(np.max(values))
    if lo <= 0:
        raise SchemaError("log-log panel needs positive values")
    pad = (hi / lo) ** factor if hi > lo else 1.5
    return lo / pad, hi * pad


def render_convergence(spec: PanelSpec) -> RenderResult:
    """Draw one scatter+line panel per group and write it to spec.output."""
    if spec.x_column not in X_COLUMNS:
        raise SchemaError(f"x_column must be one of {X_COLUMNS}, got {spec.x_column!r}")
    rows = _read_rows(Path(spec.input_csv), spec.x_column)
    slopes = _load_slopes(spec)

    groups: dict[float, list[dict]] = {}
    for row in rows:
        try:
            gamma = float(row[spec.group_by])
        except (KeyError, ValueError) as exc:
            raise SchemaError(f"bad {spec.group_by} value in {spec.input_csv}") from exc
        groups.setdefault(gamma, []).append(row)

    fig, ax = plt.subplots(figsize=(4.8, 4.2))
    all_x: list[float] = []
    all_y: list[float] = []
    rendered: list[GroupRender] = []
    colors = plt.rcParams["axes.prop_cycle"].by_key()["color"]

    for index, gamma in enumerate(sorted(groups)):
        color = colors[index % len(colors)]
        seed_x, seed_y, agg = [], [], []
        for row in groups[gamma]:
            error = float(row["error_l2"])
            if error <= 0:
                continue
            x = float(row[spec.x_column])
            if row["seed"] == "geomean":
                agg.append((x, error, row["saturated"] == "true"))
            else:
                seed_x.append(x)
                seed_y.append(error)
        if seed_x:
            ax.plot(seed_x, seed_y, "o", ms=3, alpha=0.35, color=color)
            all_x += seed_x
            all_y += seed_y
        agg.sort()
        line = [(x, e) for x, e, _ in agg] or sorted(zip(seed_x, seed_y))
        if not line:
            continue
        fitted = slopes.get(gamma)
        label = f"gamma={gamma:g}"
        if fitted is not None:
            label += f" (slope {fitted:.2f})"
        xs, ys = zip(*line)
        ax.plot(xs, ys, "-o", ms=4.5, color=color, label=label)
        flagged = [(x, e) for x, e, sat in agg if sat]
        if flagged:
            fx, fy = zip(*flagged)
            ax.plot(fx, fy, "x", ms=7, color=color)
        all_x += list(xs)
        all_y += list(ys)
        rendered.append(GroupRender(gamma, len(line), fitted, label))

    if not rendered:
        plt.close(fig)
        raise SchemaError(f"no plottable rows in {spec.input_csv}")

    ax.set_xscale("log", base=2)
    ax.set_yscale("log")
    xlim = _log_margin(np.array(all_x))
    ylim = _log_margin(np.array(all_y))
    ax.set_xlim(*xlim)
    ax.set_ylim(*ylim)

    # guide lines: error ~ x^s for step-size panels, x^-s for mode counts
    sign = 1.0 if spec.x_column == "tau" else -1.0
    xg = np.array([min(all_x), max(all_x)], dtype=float)
    anchor_x, anchor_y = max(all_x), max(all_y)
    for s in spec.reference_slopes:
        yg = anchor_y * (xg / anchor_x) ** (sign * s)
        ax.plot(xg, yg, "--", lw=0.8, color="0.55")
        ax.annotate(
            f"{s:g}",
            (xg[0], yg[0]),
            textcoords="offset points",
            xytext=(4, 2),
            fontsize=8,
            color="0.4",
        )

    ax.set_xlabel("time step" if spec.x_column == "tau" else "mode cutoff")
    ax.set_ylabel("error (discrete L2 at T)")
    ax.grid(True, which="both", lw=0.3, alpha=0.4)
    ax.legend(fontsize=8)
    fig.tight_layout()
    output = Path(spec.output)
    output.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(output, dpi=150, metadata={"Software": None})
    plt.close(fig)
    return RenderResult(output=output, groups=tuple(rendered))
