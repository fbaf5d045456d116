"""Seeded random ensembles: run selectors next to the exact oracle and tabulate."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone

import numpy as np

from .errors import InputError, RadoError
from .geometry import BALL, BOX, Collection, from_balls, from_boxes
from .oracle import delta
from .selectors import ALGORITHMS, run_selector

RADIUS_MODELS = {"equal": 0, "uniform": 2, "two_scale": 2, "lacunary": 2}


@dataclass(frozen=True)
class ExperimentSpec:
    dimension: int = 2
    kind: str = BOX
    n_bodies: int = 10
    radius_model: str = "equal"
    radius_params: tuple[float, ...] = ()
    center_box: float = 3.0
    trials: int = 10
    seed: int = 0
    algorithms: tuple[str, ...] = ("greedy",)
    oracle_max_n: int = 14
    eps: float = 0.01

    def __post_init__(self):
        object.__setattr__(self, "radius_params", tuple(float(p) for p in self.radius_params))
        object.__setattr__(self, "algorithms", tuple(self.algorithms))
        if self.trials < 1 or self.n_bodies < 1 or self.dimension < 1:
            raise InputError("trials, n_bodies and dimension must be >= 1")
        if self.kind not in (BOX, BALL):
            raise InputError(f"experiments generate {BOX!r} or {BALL!r} bodies, got {self.kind!r}")
        if self.radius_model not in RADIUS_MODELS:
            raise InputError(f"unknown radius model {self.radius_model!r}")
        if len(self.radius_params) != RADIUS_MODELS[self.radius_model]:
            raise InputError(f"radius model {self.radius_model!r} takes "
                             f"{RADIUS_MODELS[self.radius_model]} parameters")
        if any(p <= 0 for p in self.radius_params) or self.center_box <= 0:
            raise InputError("radius parameters and center_box must be positive")
        if self.radius_model == "uniform" and self.radius_params[0] > self.radius_params[1]:
            raise InputError("uniform radius model needs lo <= hi")
        if self.radius_model == "lacunary" and (self.radius_params[0] <= 1 or self.radius_params[1] < 1):
            raise InputError("lacunary radius model needs base > 1 and levels >= 1")
        for name in self.algorithms:
            if name not in ALGORITHMS:
                raise InputError(f"unknown algorithm {name!r}")


@dataclass(frozen=True)
class ExperimentRow:
    trial: int
    algorithm: str
    n: int
    density: float = math.nan
    guarantee: float = math.nan
    oracle_delta: float = math.nan
    ratio_to_oracle: float = math.nan
    error: str = ""


@dataclass
class ExperimentSummary:
    rows: list[ExperimentRow]
    per_algorithm: dict[str, dict] = field(default_factory=dict)


def _radii(spec: ExperimentSpec, rng: np.random.Generator) -> np.ndarray:
    n, p = spec.n_bodies, spec.radius_params
    if spec.radius_model == "equal":
        return np.ones(n)
    if spec.radius_model == "uniform":
        return rng.uniform(p[0], p[1], n)
    if spec.radius_model == "two_scale":
        return np.where(rng.random(n) < 0.5, p[0], p[1])
    base, levels = p
    return base ** -rng.integers(0, int(levels), n).astype(float)


def generate(spec: ExperimentSpec, trial: int) -> Collection:
    """Collection number ``trial`` of the ensemble; a pure function of (seed, trial)."""
    rng = np.random.default_rng([spec.seed, trial])
    centers = rng.uniform(-spec.center_box, spec.center_box, (spec.n_bodies, spec.dimension))
    radii = _radii(spec, rng)
    label = f"{spec.radius_model} seed={spec.seed} trial={trial}"
    make = from_boxes if spec.kind == BOX else from_balls
    return make(centers, radii, label)


def run_trial(spec: ExperimentSpec, trial: int) -> list[ExperimentRow]:
    c = generate(spec, trial)
    best = delta(c) if len(c) <= spec.oracle_max_n else math.nan
    rows = []
    for name in spec.algorithms:
        try:
            res = run_selector(name, c, spec.eps)
        except RadoError as exc:
            rows.append(ExperimentRow(trial, name, len(c), oracle_delta=best,
                                      error=f"{type(exc).__name__}: {exc}"))
            continue
        rows.append(ExperimentRow(trial, name, len(c), res.density, res.guarantee, best,
                                  res.density / best if best == best else math.nan))
    return rows


def summarize(rows: list[ExperimentRow]) -> dict[str, dict]:
    out: dict[str, dict] = {}
    for name in dict.fromkeys(r.algorithm for r in rows):
        mine = [r for r in rows if r.algorithm == name]
        ok = [r for r in mine if not r.error]
        ratios = [r.ratio_to_oracle for r in ok if r.ratio_to_oracle == r.ratio_to_oracle]
        out[name] = {
            "runs": len(mine),
            "errors": len(mine) - len(ok),
            "min_density": min((r.density for r in ok), default=math.nan),
            "mean_density": float(np.mean([r.density for r in ok])) if ok else math.nan,
            "min_guarantee_slack": min((r.density - r.guarantee for r in ok), default=math.nan),
            "worst_ratio_to_oracle": min(ratios, default=math.nan),
        }
    return out


def run_experiment(spec: ExperimentSpec) -> ExperimentSummary:
    rows = [row for trial in range(spec.trials) for row in run_trial(spec, trial)]
    return ExperimentSummary(rows, summarize(rows))


def rows_to_csv(rows: list[ExperimentRow], timestamp: bool = True) -> str:
    buf = io.StringIO()
    if timestamp:
        buf.write(f"# generated {datetime.now(timezone.utc).isoformat(timespec='seconds')}\n")
    names = list(asdict(rows[0])) if rows else [f for f in ExperimentRow.__dataclass_fields__]
    writer = csv.DictWriter(buf, fieldnames=names, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in asdict(r).items()})
    return buf.getvalue()
