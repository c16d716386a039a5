"""Report assembly and emission: CSV sample tables, JSON summaries, figures.

CSV and JSON output is byte-stable for a fixed (config, seed, threads)
triple: floats are written with repr (shortest round-trip form), dict keys
are sorted, and sample rows keep the deterministic net ordering.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

CSV_COLUMNS = ("x1", "x2", "r", "beta", "gamma2", "alpha2_sq", "tilde_alpha_sq", "weight")


@dataclass
class Check:
    name: str
    value: float
    bound: float
    passed: bool

    def as_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "bound": self.bound,
                "pass": bool(self.passed)}


@dataclass
class Report:
    """Everything a scenario run produced, ready to emit."""

    scenario: str
    config: dict
    headline: dict = field(default_factory=dict)
    checks: list[Check] = field(default_factory=list)
    samples: list[dict] = field(default_factory=list)
    carleson_norm: float | None = None
    argmax_center: tuple | None = None
    argmax_radius: float | None = None
    fitted_constants: dict = field(default_factory=dict)
    truncation_r_min: float | None = None
    figures: dict = field(default_factory=dict)   # name -> plot spec

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add_check(self, name: str, value: float, bound: float, passed: bool) -> None:
        self.checks.append(Check(name, float(value), float(bound), bool(passed)))

    def summary_dict(self) -> dict:
        return _jsonable({
            "scenario": self.scenario,
            "params": self.config,
            "carleson_norm": self.carleson_norm,
            "argmax_center": list(self.argmax_center) if self.argmax_center else None,
            "argmax_radius": self.argmax_radius,
            "fitted_constants": {str(k): v for k, v in self.fitted_constants.items()},
            "truncation": {"r_min": self.truncation_r_min},
            "headline": self.headline,
            "checks": [c.as_dict() for c in self.checks],
        })


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "item"):
        obj = obj.item()
    if isinstance(obj, float):
        if obj != obj:
            return None
        if obj == float("inf"):
            return "inf"
        if obj == float("-inf"):
            return "-inf"
    return obj


def sample_row(center, r: float, weight: float, beta=None, gamma2=None,
               alpha2_sq=None, tilde_alpha_sq=None) -> dict:
    center = tuple(float(c) for c in np.atleast_1d(center))
    opt = lambda v: None if v is None else float(v)
    return {
        "x1": center[0],
        "x2": center[1] if len(center) > 1 else None,
        "r": float(r),
        "beta": opt(beta),
        "gamma2": opt(gamma2),
        "alpha2_sq": opt(alpha2_sq),
        "tilde_alpha_sq": opt(tilde_alpha_sq),
        "weight": float(weight),
    }


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit(report: Report, out_dir: str | Path, formats=("csv", "json"),
         render: bool = True) -> dict[str, Path]:
    """Write samples.csv / summary.json (and figures) under out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: dict[str, Path] = {}
    if "csv" in formats:
        path = out / "samples.csv"
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            for row in report.samples:
                writer.writerow([_fmt(row.get(c)) for c in CSV_COLUMNS])
        written["csv"] = path
    if "json" in formats:
        path = out / "summary.json"
        payload = json.dumps(report.summary_dict(), indent=2, sort_keys=True,
                             allow_nan=False)
        path.write_text(payload + "\n")
        written["json"] = path
    if "gnuplot-data" in formats:
        path = out / "samples.dat"
        with path.open("w") as fh:
            fh.write("# " + " ".join(CSV_COLUMNS) + "\n")
            for row in report.samples:
                fh.write(" ".join(_fmt(row.get(c)) or "nan" for c in CSV_COLUMNS) + "\n")
        written["gnuplot"] = path
    if render:
        written.update(render_figures(report, out))
    return written


def render_figures(report: Report, out_dir: Path) -> dict[str, Path]:
    """Render the report's figure specs to PNG files next to the tables."""
    written = {}
    for name, spec in report.figures.items():
        fig, ax = plt.subplots(figsize=(5.0, 3.4), dpi=140)
        kind = spec.get("kind", "line")
        for series in spec.get("series", []):
            if kind == "scatter":
                ax.plot(series["x"], series["y"], "o", ms=3.5,
                        label=series.get("label"))
            else:
                ax.plot(series["x"], series["y"], marker=series.get("marker", "o"),
                        ms=4, label=series.get("label"))
        if spec.get("logx"):
            ax.set_xscale("log")
        if spec.get("logy"):
            ax.set_yscale("log")
        ax.set_xlabel(spec.get("xlabel", ""))
        ax.set_ylabel(spec.get("ylabel", ""))
        if spec.get("title"):
            ax.set_title(spec["title"], fontsize=10)
        if any(s.get("label") for s in spec.get("series", [])):
            ax.legend(fontsize=8)
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        path = Path(out_dir) / f"{name}.png"
        fig.savefig(path)
        plt.close(fig)
        written[f"figure:{name}"] = path
    return written
