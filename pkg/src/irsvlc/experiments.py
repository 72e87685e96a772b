"""Parameter sweeps comparing assignment schemes, written out as CSV."""

from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from irsvlc.approx import build_approx, linearized_rate
from irsvlc.assign import KmOptions, exhaustive_oracle, iterative_km, random_assignment
from irsvlc.channel import gain_set
from irsvlc.config import ALGORITHMS, SWEEP_VARS, ScenarioConfig, reference_config
from irsvlc.rate import empty_assignment, secrecy_rate
from irsvlc.scene import WallGrid, build_scene, service_model

CSV_HEADER = ("scenario", "algorithm", "sweep_var", "sweep_value", "trial_count", "c_s_bps",
              "c_hat_s_bps", "c_e_bps", "outer_iters", "wall_ms", "seed")

# Eve's tangent point for the proposed-no-eve-sinr scheme is her true one
# scaled by a factor drawn uniformly from this range.
EVE_FACTOR_RANGE = (0.1, 10.0)


class SweepError(ValueError):
    pass


@dataclass
class SweepSpec:
    variable: str
    values: Sequence[float]
    algorithms: Sequence[str] = ("proposed", "random", "no-irs")
    trials: int = 200
    seed: int = 0
    strict_eq14_weights: bool = False
    scenario: Optional[str] = None
    workers: int = 1

    def __post_init__(self):
        if self.variable not in SWEEP_VARS:
            raise SweepError(f"unknown sweep variable {self.variable!r}")
        if len(self.values) == 0:
            raise SweepError("sweep values must be nonempty")
        bad = [a for a in self.algorithms if a not in ALGORITHMS]
        if bad or not self.algorithms:
            raise SweepError(f"unknown algorithms {bad}")
        if self.trials < 1:
            raise SweepError("trials must be at least 1")
        if self.variable == "reflectance" and any(not 0 <= v <= 1 for v in self.values):
            raise SweepError("reflectance values must lie in [0, 1]")
        if self.variable == "n_units":
            if any(v < 0 or v != int(v) for v in self.values):
                raise SweepError("unit counts must be nonnegative integers")
        self.values = [float(v) for v in self.values]

    @classmethod
    def from_block(cls, block, scenario: Optional[str] = None) -> "SweepSpec":
        return cls(variable=block.variable, values=list(block.values),
                   algorithms=list(block.algorithms), trials=block.trials, seed=block.seed,
                   strict_eq14_weights=block.strict_eq14_weights, scenario=scenario)


@dataclass
class ResultRow:
    scenario: str
    algorithm: str
    sweep_var: str
    sweep_value: float
    trial_count: int
    c_s_bps: float
    c_hat_s_bps: Optional[float]
    c_e_bps: float
    outer_iters: Optional[float]
    wall_ms: float
    seed: int
    extra: dict = field(default_factory=dict, repr=False)


def apply_sweep_value(cfg: ScenarioConfig, variable: str, value: float) -> ScenarioConfig:
    if variable == "power_dbw":
        leds = [led.model_copy(update={"power_dbw": float(value)}) for led in cfg.leds]
        return cfg.model_copy(update={"leds": leds})
    if variable == "n_units":
        return cfg.model_copy(update={"irs": cfg.irs.model_copy(update={"n_units": int(value)})})
    if variable == "reflectance":
        return cfg.model_copy(update={"irs": cfg.irs.model_copy(update={"reflectance": float(value)})})
    raise SweepError(f"unknown sweep variable {variable!r}")


def _rng(seed: int, point: int, algorithm: str) -> np.random.Generator:
    return np.random.default_rng([seed, point, ALGORITHMS.index(algorithm)])


def run_algorithm(cfg: ScenarioConfig, algorithm: str, trials: int = 1, rng=None,
                  strict: bool = False) -> dict:
    """One sweep point for one scheme; randomized schemes average ``trials`` runs."""
    rng = rng if rng is not None else np.random.default_rng(0)
    opts = KmOptions(strict_weights=strict)
    if algorithm == "no-irs":
        cfg = cfg.model_copy(update={"irs": cfg.irs.model_copy(update={"n_units": 0})})
    scene = build_scene(cfg)
    gains = gain_set(scene)
    svc = service_model(scene)
    N, L = scene.n_units, scene.n_leds

    if algorithm == "proposed":
        res = iterative_km(gains, scene, svc, opts)
        return dict(c_s=res.report.secrecy, c_hat=res.linearized, c_e=res.report.cap_eve,
                    iters=res.outer_iters, trials=1, converged=res.converged)
    if algorithm == "no-irs":
        g = empty_assignment(N, L)
        rep = secrecy_rate(gains, scene, svc, g)
        st = build_approx(gains, scene, svc, rep, strict_weights=strict)
        return dict(c_s=rep.secrecy, c_hat=linearized_rate(st.weights, st.bias, g),
                    c_e=rep.cap_eve, iters=0, trials=1)
    if algorithm == "proposed-no-eve-sinr":
        runs = []
        for _ in range(trials):
            factor = rng.uniform(*EVE_FACTOR_RANGE)
            res = iterative_km(gains, scene, svc, KmOptions(strict_weights=strict,
                                                            eve_tangent_factor=factor))
            runs.append((res.report.secrecy, res.linearized, res.report.cap_eve, res.outer_iters))
        cs, ch, ce, it = np.mean(runs, axis=0)
        return dict(c_s=cs, c_hat=ch, c_e=ce, iters=it, trials=trials)
    if algorithm == "random":
        reps = [secrecy_rate(gains, scene, svc, random_assignment(scene, rng)) for _ in range(trials)]
        return dict(c_s=float(np.mean([r.secrecy for r in reps])), c_hat=None,
                    c_e=float(np.mean([r.cap_eve for r in reps])), iters=None, trials=trials)
    if algorithm == "oracle":
        g, val = exhaustive_oracle(gains, scene, svc, "exact")
        rep = secrecy_rate(gains, scene, svc, g)
        return dict(c_s=val, c_hat=None, c_e=rep.cap_eve, iters=None, trials=1)
    raise SweepError(f"unknown algorithm {algorithm!r}")


def _run_point(args) -> list[ResultRow]:
    cfg, spec, point, value = args
    cfg_v = apply_sweep_value(cfg, spec.variable, value)
    rows = []
    for algo in spec.algorithms:
        t0 = time.perf_counter()
        out = run_algorithm(cfg_v, algo, spec.trials, _rng(spec.seed, point, algo),
                            spec.strict_eq14_weights)
        wall = (time.perf_counter() - t0) * 1e3
        rows.append(ResultRow(scenario=cfg.name, algorithm=algo, sweep_var=spec.variable,
                              sweep_value=value, trial_count=out["trials"], c_s_bps=out["c_s"],
                              c_hat_s_bps=out["c_hat"], c_e_bps=out["c_e"],
                              outer_iters=out["iters"], wall_ms=wall, seed=spec.seed,
                              extra={k: v for k, v in out.items() if k == "converged"}))
    return rows


def run_sweep(spec: SweepSpec, cfg: ScenarioConfig | None = None) -> list[ResultRow]:
    """Evaluate every algorithm at every sweep value.

    Rows come back value-major in spec order whatever the worker count, and
    the random streams are keyed by (seed, point, algorithm).
    """
    cfg = cfg if cfg is not None else reference_config()
    if spec.variable == "n_units":
        grid = WallGrid(spacing=cfg.irs.spacing, margin_h=cfg.irs.margin_h,
                        margin_v=cfg.irs.margin_v, fill=cfg.irs.fill)
        cap = grid.capacity(cfg.room)
        if max(spec.values) > cap:
            raise SweepError(f"unit count exceeds wall capacity {cap}")
    if "oracle" in spec.algorithms:
        n_max = max(spec.values) if spec.variable == "n_units" else cfg.irs.n_units
        if (len(cfg.leds) + 1) ** n_max > 10 ** 7:
            raise SweepError("instance too large for the exhaustive oracle")
    jobs = [(cfg, spec, i, v) for i, v in enumerate(spec.values)]
    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            chunks = list(pool.map(_run_point, jobs))
    else:
        chunks = [_run_point(j) for j in jobs]
    return [row for chunk in chunks for row in chunk]


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if x.is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def results_csv(rows: Sequence[ResultRow], include_timing: bool = False) -> str:
    """CSV text; ``wall_ms`` is left blank unless ``include_timing``, which
    keeps reruns byte-identical."""
    if not rows:
        raise SweepError("no result rows to write")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in rows:
        writer.writerow([r.scenario, r.algorithm, r.sweep_var, _fmt(r.sweep_value), r.trial_count,
                         _fmt(r.c_s_bps), _fmt(r.c_hat_s_bps), _fmt(r.c_e_bps),
                         _fmt(r.outer_iters), f"{r.wall_ms:.3f}" if include_timing else "",
                         r.seed])
    return buf.getvalue()


def write_results(rows: Sequence[ResultRow], path, include_timing: bool = False) -> Path:
    text = results_csv(rows, include_timing)
    path = Path(path)
    try:
        path.write_text(text)
    except OSError as exc:
        raise SweepError(f"cannot write {path}: {exc}") from exc
    return path


def power_study_runs(trials: int = 200, seed: int = 0) -> list[tuple[ScenarioConfig, SweepSpec]]:
    """Power sweeps 0..10 dBW in the reference room at N = 8 and N = 64."""
    algos = ("proposed", "proposed-no-eve-sinr", "random", "no-irs")
    runs = []
    for n in (8, 64):
        cfg = reference_config(n_units=n).model_copy(update={"name": f"power-N{n}"})
        runs.append((cfg, SweepSpec("power_dbw", list(range(11)), algos, trials=trials, seed=seed)))
    return runs


def unit_study_runs(seed: int = 0) -> list[tuple[ScenarioConfig, SweepSpec]]:
    """Unit-count sweeps 0..64 at 10 dBW for reflectances 0.3, 0.5 and 0.7."""
    runs = []
    for d in (0.3, 0.5, 0.7):
        cfg = reference_config(reflectance=d).model_copy(update={"name": f"units-delta{d}"})
        runs.append((cfg, SweepSpec("n_units", list(range(0, 65, 8)), ("proposed", "no-irs"),
                                    trials=1, seed=seed)))
    return runs


def random_placement(cfg: ScenarioConfig, rng, margin: float = 0.5,
                     height: float = 0.5) -> ScenarioConfig:
    """Same room with users and Eve redrawn uniformly on the receiver plane."""
    x_hi, y_hi = cfg.room[0] - margin, cfg.room[1] - margin
    pts = np.column_stack([rng.uniform(margin, x_hi, len(cfg.users) + 1),
                           rng.uniform(margin, y_hi, len(cfg.users) + 1),
                           np.full(len(cfg.users) + 1, height)])
    users = [tuple(p) for p in pts[:-1].tolist()]
    eve = cfg.eavesdropper.model_copy(update={"position": tuple(pts[-1].tolist())})
    return cfg.model_copy(update={"users": users, "eavesdropper": eve})


def parse_values(text: str) -> list[float]:
    """``"0,2.5,5"`` or an inclusive range ``"start:stop:step"``."""
    text = text.strip()
    if ":" in text:
        parts = [float(p) for p in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0:
            raise SweepError(f"bad range {text!r}; expected start:stop:step")
        start, stop, step = parts
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 12) for i in range(max(count, 0))]
    return [float(p) for p in text.split(",") if p.strip()]
