"""Monte-Carlo campaigns: bias / RMSE / RCRLB per estimator and size, plus CSV/JSON output."""
from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .errors import ConfigError, NumericalError, TdoaError
from .likelihood import fisher_information
from .linear import assemble, solve_bias_eliminated, solve_biased
from .model import (
    RNG_NAME,
    RNG_VERSION,
    NoiseModel,
    SensorArray,
    deploy_fixed_paper_array,
    load_array_csv,
    make_rng,
    sample_cube_surface,
    simulate,
)
from .noise_variance import estimate_sigma2
from .pipeline import GnConfig, localize

SCENARIOS = ("uniform_cube", "fixed_array", "custom_csv")
ESTIMATORS = ("biased", "bias_eliminated_true_sigma", "bias_eliminated_est_sigma", "two_step")
EXTRA_ESTIMATORS = ("two_step_true_sigma",)
DIVERGENCE_RADIUS = 100.0

# stream keys for make_rng(seed, kind, size_index[, trial_index])
_GEOMETRY, _TRIAL = 0, 1


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: str = "uniform_cube"
    source: tuple = (15.0, 15.0, 15.0)
    sigma: float = 10.0
    # m for uniform_cube, repeats T for fixed_array / custom_csv
    sizes: tuple = (10, 30, 100, 300, 1000, 3000)
    trials: int = 1000
    seed: int = 0
    gn: GnConfig = GnConfig()
    estimators: tuple = ESTIMATORS
    output_dir: Optional[str] = None
    edge: float = 100.0
    array_csv: Optional[str] = None
    redraw_geometry: Optional[bool] = None
    workers: int = 1

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}; choose from {SCENARIOS}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        sizes = tuple(int(s) for s in self.sizes)
        if not sizes or any(b <= a for a, b in zip(sizes, sizes[1:])):
            raise ConfigError(f"sizes must be nonempty and strictly ascending, got {sizes}")
        if min(sizes) < 1:
            raise ConfigError("sizes must be positive")
        unknown = set(self.estimators) - set(ESTIMATORS + EXTRA_ESTIMATORS)
        if unknown or not self.estimators:
            raise ConfigError(f"unknown estimators {sorted(unknown)}")
        if not np.isfinite(self.sigma) or self.sigma < 0:
            raise ConfigError("sigma must be finite and nonnegative")
        if self.scenario == "custom_csv" and not self.array_csv:
            raise ConfigError("custom_csv scenario needs array_csv")
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "source", tuple(float(v) for v in self.source))
        object.__setattr__(self, "estimators", tuple(self.estimators))
        if isinstance(self.gn, dict):
            object.__setattr__(self, "gn", GnConfig(**self.gn))

    @property
    def redraw(self) -> bool:
        if self.redraw_geometry is not None:
            return bool(self.redraw_geometry)
        return self.scenario == "uniform_cube"

    def to_dict(self) -> dict:
        out = asdict(self)
        out["source"] = list(self.source)
        out["sizes"] = list(self.sizes)
        out["estimators"] = list(self.estimators)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        data = dict(data)
        if "gn" in data:
            gn = data["gn"]
            gn_names = {f.name for f in fields(GnConfig)}
            if set(gn) - gn_names:
                raise ConfigError(f"unknown [gn] keys {sorted(set(gn) - gn_names)}")
            data["gn"] = GnConfig(**gn)
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc


def load_config(path) -> ExperimentConfig:
    import tomli

    try:
        with open(path, "rb") as fh:
            data = tomli.load(fh)
    except (OSError, tomli.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return ExperimentConfig.from_dict(data)


@dataclass(frozen=True)
class EstimatorStats:
    estimator: str
    size: int
    m: int
    bias: float
    rmse: float
    rcrlb: float
    sigma2_rmse: float
    mean_wall_time: float
    divergence_count: int
    trials: int


@dataclass
class CampaignResult:
    config: ExperimentConfig
    stats: list = field(default_factory=list)

    def get(self, estimator: str, size: int) -> EstimatorStats:
        for s in self.stats:
            if s.estimator == estimator and s.size == size:
                return s
        raise KeyError((estimator, size))

    def series(self, estimator: str, attr: str = "rmse") -> np.ndarray:
        return np.array([getattr(self.get(estimator, n), attr) for n in self.config.sizes])


# --- trial execution -------------------------------------------------------------

def _base_array(cfg: ExperimentConfig) -> Optional[SensorArray]:
    if cfg.scenario == "fixed_array":
        return deploy_fixed_paper_array(1)
    if cfg.scenario == "custom_csv":
        return load_array_csv(cfg.array_csv)
    return None


def _geometry(cfg, base, size, rng) -> SensorArray:
    if cfg.scenario == "uniform_cube":
        return SensorArray(np.zeros(3), sample_cube_surface(rng, size, cfg.edge))
    return base.repeated(size)


def _run_estimator(name, meas, cfg):
    sigma2 = cfg.sigma**2
    if name == "biased":
        return solve_biased(assemble(meas, sigma2), meas.array.reference).x
    if name == "bias_eliminated_true_sigma":
        return solve_bias_eliminated(meas, sigma2).x
    if name == "bias_eliminated_est_sigma":
        return solve_bias_eliminated(meas, estimate_sigma2(meas).sigma2_hat).x
    if name == "two_step":
        return localize(meas, replace(cfg.gn, use_true_sigma2=False)).x_hat
    if name == "two_step_true_sigma":
        return localize(meas, replace(cfg.gn, use_true_sigma2=True)).x_hat
    raise ConfigError(name)


def _run_trials(cfg: ExperimentConfig, size_index: int, trial_indices) -> dict:
    """Run trials for one size; returns per-trial arrays keyed by field."""
    base = _base_array(cfg)
    size = cfg.sizes[size_index]
    x_true = np.array(cfg.source)
    fixed = None
    if not cfg.redraw:
        fixed = _geometry(cfg, base, size, make_rng(cfg.seed, _GEOMETRY, size_index))

    k = len(trial_indices)
    est = {name: np.full((k, len(x_true)), np.nan) for name in cfg.estimators}
    times = {name: np.zeros(k) for name in cfg.estimators}
    sigma2_hat = np.full(k, np.nan)
    crlb = np.full(k, np.nan)
    noise = NoiseModel(cfg.sigma, cfg.seed)
    for row, t in enumerate(trial_indices):
        rng = make_rng(cfg.seed, _TRIAL, size_index, t)
        array = fixed if fixed is not None else _geometry(cfg, base, size, rng)
        meas = simulate(array, x_true, noise, rng=rng)
        if cfg.sigma > 0:
            try:
                crlb[row] = fisher_information(array, x_true, cfg.sigma**2).crlb
            except NumericalError:
                pass
        try:
            sigma2_hat[row] = estimate_sigma2(meas).sigma2_hat
        except NumericalError:
            pass
        for name in cfg.estimators:
            t0 = time.perf_counter()
            try:
                est[name][row] = _run_estimator(name, meas, cfg)
            except NumericalError:
                pass
            times[name][row] = time.perf_counter() - t0
    return {"est": est, "times": times, "sigma2_hat": sigma2_hat, "crlb": crlb}


def _merge(parts):
    out = {"est": {}, "times": {}}
    for key in ("sigma2_hat", "crlb"):
        out[key] = np.concatenate([p[key] for p in parts])
    for key in ("est", "times"):
        for name in parts[0][key]:
            out[key][name] = np.concatenate([p[key][name] for p in parts])
    return out


def _aggregate(cfg, size_index, raw) -> list:
    size = cfg.sizes[size_index]
    x_true = np.array(cfg.source)
    m = size if cfg.scenario == "uniform_cube" else size * _base_array(cfg).m
    radius = DIVERGENCE_RADIUS * max(np.linalg.norm(x_true - _reference(cfg)), 1.0)

    if cfg.sigma > 0:
        crlb = raw["crlb"][np.isfinite(raw["crlb"])]
        rcrlb = float(np.sqrt(np.mean(crlb))) if crlb.size else float("nan")
    else:
        rcrlb = 0.0
    s2 = raw["sigma2_hat"][np.isfinite(raw["sigma2_hat"])]
    sigma2_rmse = float(np.sqrt(np.mean((s2 - cfg.sigma**2) ** 2))) if s2.size else float("nan")

    stats = []
    for name in cfg.estimators:
        err = raw["est"][name] - x_true
        ok = np.all(np.isfinite(err), axis=1)
        ok &= np.linalg.norm(np.where(ok[:, None], err, 0.0), axis=1) <= radius
        good = err[ok]
        if good.shape[0]:
            bias = float(np.sum(np.abs(good.mean(axis=0))))
            rmse = float(np.sqrt(np.mean(np.sum(good**2, axis=1))))
        else:
            bias = rmse = float("nan")
        stats.append(
            EstimatorStats(
                estimator=name,
                size=size,
                m=m,
                bias=bias,
                rmse=rmse,
                rcrlb=rcrlb,
                sigma2_rmse=sigma2_rmse,
                mean_wall_time=float(np.mean(raw["times"][name])),
                divergence_count=int(np.sum(~ok)),
                trials=cfg.trials,
            )
        )
    return stats


def _reference(cfg):
    if cfg.scenario == "custom_csv":
        return _base_array(cfg).reference
    return np.zeros(len(cfg.source))


def run_campaign(cfg: ExperimentConfig) -> CampaignResult:
    if cfg.scenario == "uniform_cube" and len(cfg.source) != 3:
        raise ConfigError("uniform_cube scenario is three-dimensional")
    result = CampaignResult(cfg)
    for si in range(len(cfg.sizes)):
        trials = np.arange(cfg.trials)
        if cfg.workers > 1:
            chunks = [c for c in np.array_split(trials, cfg.workers) if c.size]
            with ProcessPoolExecutor(cfg.workers) as pool:
                parts = list(pool.map(_run_trials, [cfg] * len(chunks), [si] * len(chunks), chunks))
            raw = _merge(parts)
        else:
            raw = _run_trials(cfg, si, trials)
        result.stats.extend(_aggregate(cfg, si, raw))
    return result


# --- output ------------------------------------------------------------------------

def _fmt(v) -> str:
    return format(v, ".17g") if isinstance(v, float) else str(v)


def _write_csv(path: Path, header, rows):
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for r in rows:
                w.writerow([_fmt(v) for v in r])
    except OSError as exc:
        raise TdoaError(f"cannot write {path}: {exc}") from exc


def emit_results(res: CampaignResult, out_dir) -> list:
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise TdoaError(f"cannot create output directory {out}: {exc}") from exc
    st = res.stats
    _write_csv(out / "bias.csv", ["size", "estimator", "value"], [(s.size, s.estimator, s.bias) for s in st])
    _write_csv(
        out / "rmse.csv",
        ["size", "estimator", "value", "rcrlb"],
        [(s.size, s.estimator, s.rmse, s.rcrlb) for s in st],
    )
    seen = {}
    for s in st:
        seen.setdefault(s.size, (s.size, s.m, s.sigma2_rmse))
    _write_csv(out / "sigma2.csv", ["size", "m", "value"], list(seen.values()))
    _write_csv(
        out / "timing.csv",
        ["size", "estimator", "mean_wall_time", "divergence_count"],
        [(s.size, s.estimator, s.mean_wall_time, s.divergence_count) for s in st],
    )
    payload = {
        "tool": "tdoa",
        "version": __version__,
        "rng": {"name": RNG_NAME, "version": RNG_VERSION},
        "seed": res.config.seed,
        "config": res.config.to_dict(),
        "results": [asdict(s) for s in st],
    }
    path = out / "campaign.json"
    try:
        path.write_text(json.dumps(payload, indent=2))
    except OSError as exc:
        raise TdoaError(f"cannot write {path}: {exc}") from exc
    return [out / n for n in ("bias.csv", "rmse.csv", "sigma2.csv", "timing.csv", "campaign.json")]


def load_campaign(path) -> tuple:
    """(ExperimentConfig, list[EstimatorStats]) from a campaign.json."""
    data = json.loads(Path(path).read_text())
    cfg = ExperimentConfig.from_dict(data["config"])
    return cfg, [EstimatorStats(**r) for r in data["results"]]


def read_rmse_csv(path) -> dict:
    with Path(path).open(newline="") as fh:
        return {
            (row["estimator"], int(row["size"])): (float(row["value"]), float(row["rcrlb"]))
            for row in csv.DictReader(fh)
        }
