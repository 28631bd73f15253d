"""Closed-form estimates from the squared (lifted) measurement model.

Squaring d_i + ||x|| = ||a_i - x|| gives the linear model

    d_i^2 - ||a_i||^2 - sigma^2 = [-2 a_i^T, -2 d_i] y + eps_i,   y = [x; ||x||],

whose plain least-squares solution is biased because the regressor contains the
noisy d_i.  The bias-eliminated solve subtracts the asymptotic noise
contributions from the normal equations.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import IllConditionedError, RankDeficiencyError
from .model import MeasurementSet, as_position, range_differences_centered

MAX_CONDITION = 1e12


@dataclass(frozen=True)
class RegressionSystem:
    A: np.ndarray
    b: np.ndarray
    G: np.ndarray
    d: np.ndarray
    sigma2_used: float

    @property
    def m(self) -> int:
        return self.A.shape[0]


@dataclass(frozen=True)
class OracleRegressionSystem:
    A_o: np.ndarray
    d_o: np.ndarray


@dataclass(frozen=True)
class LiftedParameter:
    """y = [x; s] with s an (unconstrained) estimate of ||x||, centered frame.

    ``x`` is translated back to the caller's frame using ``origin``.
    """

    y: np.ndarray
    origin: np.ndarray
    fallback: bool = False
    condition: float = float("nan")

    @property
    def x(self) -> np.ndarray:
        return self.y[:-1] + self.origin

    @property
    def s(self) -> float:
        return float(self.y[-1])


def assemble(meas: MeasurementSet, sigma2: float) -> RegressionSystem:
    if sigma2 < 0:
        raise ValueError("sigma2 must be nonnegative")
    a = meas.array.centered()
    m, n = a.shape
    if m < n + 1:
        raise RankDeficiencyError(f"need at least {n + 1} sensors, got {m}")
    d = np.array(meas.d)
    A = np.column_stack([-2.0 * a, -2.0 * d])
    b = d**2 - np.sum(a**2, axis=1) - sigma2
    G = np.zeros((m, n + 1))
    G[:, n] = -2.0
    return RegressionSystem(A, b, G, d, float(sigma2))


def assemble_oracle(meas: MeasurementSet, x_true) -> OracleRegressionSystem:
    a = meas.array.centered()
    x = as_position(x_true, meas.dim) - meas.array.reference
    d_o = range_differences_centered(a, x)
    return OracleRegressionSystem(np.column_stack([-2.0 * a, -2.0 * d_o]), d_o)


def _solve_sym(M, v, what):
    cond = float(np.linalg.cond(M))
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise IllConditionedError(f"{what} is singular or ill-conditioned", cond)
    # LDL^T: the corrected matrix need not be PSD at finite m
    y = scipy.linalg.solve(M, v, assume_a="sym", check_finite=False)
    return y, cond


def solve_biased(sys: RegressionSystem, origin=None) -> LiftedParameter:
    """y = (A^T A)^{-1} A^T b."""
    y, cond = _solve_sym(sys.A.T @ sys.A, sys.A.T @ sys.b, "A^T A")
    if origin is None:
        origin = np.zeros(sys.A.shape[1] - 1)
    return LiftedParameter(y, np.asarray(origin, dtype=float), condition=cond)


def solve_bias_eliminated(meas: MeasurementSet, sigma2: float, fallback: bool = False) -> LiftedParameter:
    """y = (A^T A/m - s2 G^T G/m)^{-1} (A^T b(s2)/m - 2 s2 G^T d/m).

    With ``fallback=True`` a singular corrected matrix yields the biased solution
    (same ``sigma2`` in b) flagged with ``fallback=True`` instead of raising.
    """
    sys = assemble(meas, sigma2)
    m = sys.m
    M = sys.A.T @ sys.A / m - sigma2 / m * (sys.G.T @ sys.G)
    v = sys.A.T @ sys.b / m - 2.0 * sigma2 / m * (sys.G.T @ sys.d)
    origin = meas.array.reference
    try:
        y, cond = _solve_sym(M, v, "bias-corrected normal matrix")
    except IllConditionedError:
        if not fallback:
            raise
        biased = solve_biased(sys, origin)
        return LiftedParameter(biased.y, biased.origin, fallback=True, condition=biased.condition)
    return LiftedParameter(y, np.array(origin), condition=cond)


def solve_oracle_unbiased(meas: MeasurementSet, x_true) -> LiftedParameter:
    """Test-only y = (A_o^T A_o)^{-1} A_o^T b using the noiseless regressor and true sigma^2."""
    if meas.true_sigma2 is None:
        raise ValueError("oracle solve needs meas.true_sigma2")
    sys = assemble(meas, meas.true_sigma2)
    orc = assemble_oracle(meas, x_true)
    try:
        y, cond = _solve_sym(orc.A_o.T @ orc.A_o, orc.A_o.T @ sys.b, "A_o^T A_o")
    except IllConditionedError as exc:
        raise RankDeficiencyError(
            f"oracle normal matrix singular; sensors lie on a quadric ({exc})"
        ) from exc
    return LiftedParameter(y, np.array(meas.array.reference), condition=cond)
