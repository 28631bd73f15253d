"""Two-step localization: variance estimate -> bias-eliminated initializer -> Gauss-Newton."""
from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, NumericalError, RankDeficiencyError
from .likelihood import fisher_information, rd_jacobian
from .linear import MAX_CONDITION, LiftedParameter, solve_bias_eliminated
from .model import MeasurementSet, as_position, check_clearance, range_differences_centered
from .noise_variance import estimate_sigma2

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GnConfig:
    max_iterations: int = 1
    step_tolerance: float = 1e-10
    damping: float = 0.0
    # use MeasurementSet.true_sigma2 instead of estimating it
    use_true_sigma2: bool = False

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ConfigError("max_iterations must be >= 1")
        if self.damping < 0:
            raise ConfigError("damping must be >= 0")
        if self.step_tolerance < 0:
            raise ConfigError("step_tolerance must be >= 0")


@dataclass
class EstimateReport:
    x_hat: np.ndarray
    sigma2_hat: float
    x_be: np.ndarray
    y_be: LiftedParameter
    gn_iterations: int
    gn_step_norms: list
    crlb: float
    fallbacks: list = field(default_factory=list)
    wall_time: float = 0.0

    def to_dict(self) -> dict:
        return {
            "x_hat": self.x_hat.tolist(),
            "sigma2_hat": self.sigma2_hat,
            "x_be": self.x_be.tolist(),
            "y_be": self.y_be.y.tolist(),
            "gn_iterations": self.gn_iterations,
            "gn_step_norms": list(self.gn_step_norms),
            "crlb": self.crlb,
            "fallbacks": list(self.fallbacks),
            "wall_time": self.wall_time,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _gn_update(a, d, x, damping):
    check_clearance(a, x)
    J = rd_jacobian(a, x)
    r = d - range_differences_centered(a, x)
    H = J.T @ J
    if damping:
        H = H + damping * np.eye(len(x))
    cond = np.linalg.cond(H)
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        hint = "" if damping else "; retry with damping > 0"
        raise RankDeficiencyError(f"J^T J is singular (condition {cond:.3e}){hint}")
    return np.linalg.solve(H, J.T @ r)


def gauss_newton_step(meas: MeasurementSet, x, damping: float = 0.0) -> np.ndarray:
    """One update x + (J^T J + damping I)^{-1} J^T (d - f(x))."""
    ref = meas.array.reference
    xc = as_position(x, meas.dim) - ref
    return xc + _gn_update(meas.array.centered(), meas.d, xc, damping) + ref


def localize(meas: MeasurementSet, cfg: GnConfig = GnConfig()) -> EstimateReport:
    t0 = time.perf_counter()
    fallbacks = []
    a = meas.array.centered()
    ref = meas.array.reference
    n = meas.dim
    if meas.m < n + 3:
        raise RankDeficiencyError(f"need at least n+3 = {n + 3} measurements, got {meas.m}")

    if cfg.use_true_sigma2 and meas.true_sigma2 is not None:
        sigma2 = float(meas.true_sigma2)
    else:
        try:
            sigma2 = estimate_sigma2(meas).sigma2_hat
        except NumericalError as exc:
            log.debug("variance estimation failed, using 0: %s", exc)
            sigma2 = 0.0
            fallbacks.append("variance_fallback")

    y_be = solve_bias_eliminated(meas, sigma2, fallback=True)
    if y_be.fallback:
        fallbacks.append("be_fallback")
    x = y_be.y[:n].copy()

    steps = []
    for _ in range(cfg.max_iterations):
        dx = _gn_update(a, meas.d, x, cfg.damping)
        x = x + dx
        steps.append(float(np.linalg.norm(dx)))
        if steps[-1] < cfg.step_tolerance:
            break
    if cfg.damping:
        fallbacks.append("damped")
    if not np.all(np.isfinite(x)):
        raise NumericalError("Gauss-Newton produced a non-finite estimate")

    x_hat = x + ref
    crlb = float("nan")
    if sigma2 > 0:
        try:
            crlb = fisher_information(meas.array, x_hat, sigma2).crlb
        except NumericalError:
            fallbacks.append("crlb_unavailable")
    else:
        fallbacks.append("crlb_unavailable")

    return EstimateReport(
        x_hat=x_hat,
        sigma2_hat=sigma2,
        x_be=y_be.x,
        y_be=y_be,
        gn_iterations=len(steps),
        gn_step_norms=steps,
        crlb=crlb,
        fallbacks=fallbacks,
        wall_time=time.perf_counter() - t0,
    )
