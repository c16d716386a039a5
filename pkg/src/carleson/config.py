"""Flat key-value configuration for scenario runs.

Config files are plain text, one `key = value` per line, `#` comments.
Documented keys:

    grid.d, grid.R, grid.h
    field.variant (constant | identity | diagonal_profile | smooth_dkp), field.*
    net.r_min, net.delta0_radius
    solver.tol, solver.max_iter, solver.face_average (arithmetic | harmonic)
    regions.kind (halfball | pencil)
    seed, threads, out

Scenario-specific knobs live under the scenario's own prefix (for example
counterexample.n_min); unknown keys are rejected so typos fail fast.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field
from pathlib import Path


class ConfigError(ValueError):
    """Invalid configuration (maps to CLI exit code 2)."""


_KNOWN_PREFIXES = (
    "grid.", "field.", "net.", "solver.", "regions.", "scenario.",
    "counterexample.", "convergence.", "comparison.", "theorem1.",
    "theorem2.", "decay.", "gamma_vs_alpha.", "corollary2.", "sinh.",
)
_KNOWN_BARE = ("seed", "threads", "out", "scenario")


def parse_config_text(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or not value:
            raise ConfigError(f"line {lineno}: empty key or value in {raw!r}")
        if key not in _KNOWN_BARE and not any(key.startswith(p) for p in _KNOWN_PREFIXES):
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        out[key] = value
    return out


def load_config(path: str | Path) -> dict[str, str]:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    return parse_config_text(p.read_text())


def _get(raw: dict, key: str, default, cast):
    if key not in raw:
        return default
    try:
        return cast(raw[key])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key}: {raw[key]!r} ({exc})") from None


@dataclass
class ScenarioConfig:
    """Resolved configuration of one scenario run."""

    scenario: str
    d: int = 1
    R: float = 1.0
    h: float = 1.0 / 128.0
    field: dict = dataclass_field(default_factory=dict)
    r_min: float | None = None
    delta0_radius: float | None = None
    tol: float = 1e-10
    max_iter: int | None = None
    face_average: str = "arithmetic"
    region_kind: str = "pencil"
    seed: int = 0
    threads: int = 1
    out_dir: str = "out"
    extra: dict = dataclass_field(default_factory=dict)

    def __post_init__(self):
        if self.d not in (1, 2):
            raise ConfigError(f"grid.d must be 1 or 2, got {self.d}")
        if self.R <= 0.0 or self.h <= 0.0:
            raise ConfigError("grid.R and grid.h must be positive")
        ratio = self.R / self.h
        if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 8:
            raise ConfigError(f"grid.R/grid.h must be an integer >= 8, got {ratio:g}")
        if self.face_average not in ("arithmetic", "harmonic"):
            raise ConfigError(f"solver.face_average must be arithmetic|harmonic, got "
                              f"{self.face_average!r}")
        if self.region_kind not in ("halfball", "pencil"):
            raise ConfigError(f"regions.kind must be halfball|pencil, got "
                              f"{self.region_kind!r}")
        if self.threads < 1:
            raise ConfigError(f"threads must be >= 1, got {self.threads}")
        if self.tol <= 0.0:
            raise ConfigError(f"solver.tol must be positive, got {self.tol}")

    @classmethod
    def from_raw(cls, scenario: str, raw: dict[str, str]) -> "ScenarioConfig":
        field_spec = {k.split(".", 1)[1]: v for k, v in raw.items() if k.startswith("field.")}
        extra = {
            k: v
            for k, v in raw.items()
            if not any(k.startswith(p) for p in ("grid.", "field.", "net.", "solver.", "regions."))
            and k not in _KNOWN_BARE
        }
        return cls(
            scenario=scenario,
            d=_get(raw, "grid.d", 1, int),
            R=_get(raw, "grid.R", 1.0, float),
            h=_get(raw, "grid.h", 1.0 / 128.0, float),
            field=field_spec,
            r_min=_get(raw, "net.r_min", None, float),
            delta0_radius=_get(raw, "net.delta0_radius", None, float),
            tol=_get(raw, "solver.tol", 1e-10, float),
            max_iter=_get(raw, "solver.max_iter", None, int),
            face_average=_get(raw, "solver.face_average", "arithmetic", str),
            region_kind=_get(raw, "regions.kind", "pencil", str),
            seed=_get(raw, "seed", 0, int),
            threads=_get(raw, "threads", 1, int),
            out_dir=_get(raw, "out", "out", str),
            extra=extra,
        )

    def extra_float(self, key: str, default: float) -> float:
        return _get(self.extra, key, default, float)

    def extra_int(self, key: str, default: int) -> int:
        return _get(self.extra, key, default, int)

    def extra_list(self, key: str, default: list[float]) -> list[float]:
        if key not in self.extra:
            return default
        try:
            return [float(tok) for tok in str(self.extra[key]).split(",") if tok.strip()]
        except ValueError:
            raise ConfigError(f"bad list for {key}: {self.extra[key]!r}") from None

    def resolved(self) -> dict:
        """Flat, JSON-friendly view of every setting that shaped the run."""
        out = {
            "scenario": self.scenario,
            "grid.d": self.d,
            "grid.R": self.R,
            "grid.h": self.h,
            "net.r_min": self.r_min,
            "net.delta0_radius": self.delta0_radius,
            "solver.tol": self.tol,
            "solver.max_iter": self.max_iter,
            "solver.face_average": self.face_average,
            "regions.kind": self.region_kind,
            "seed": self.seed,
            "threads": self.threads,
        }
        out.update({f"field.{k}": v for k, v in sorted(self.field.items())})
        out.update({k: v for k, v in sorted(self.extra.items())})
        return out
