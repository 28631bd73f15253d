"""ML objective, its exact derivatives, the information matrix M(x), Fisher matrix and CRLB."""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import NotLocalizableError
from .model import MeasurementSet, SensorArray, as_position, check_clearance, range_differences_centered

# lambda_min / lambda_max below this means F is treated as singular
SINGULAR_RATIO = 1e-12


@dataclass(frozen=True)
class ObjectiveEval:
    value: float
    gradient: np.ndarray
    hessian: np.ndarray


@dataclass(frozen=True)
class BoundsReport:
    fisher: np.ndarray
    crlb: float
    rcrlb: float
    m_matrix: np.ndarray
    condition: float

    def to_dict(self) -> dict:
        return {
            "fisher": self.fisher.reshape(-1).tolist(),
            "crlb": self.crlb,
            "rcrlb": self.rcrlb,
            "m_matrix": self.m_matrix.reshape(-1).tolist(),
            "condition": self.condition,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def rd_jacobian(a: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Rows grad f_i(x) = (x - a_i)/||x - a_i|| - x/||x|| (centered frame)."""
    diff = x - a
    return diff / np.linalg.norm(diff, axis=1)[:, None] - x / np.linalg.norm(x)


def _centered(meas_or_array, x):
    array = meas_or_array.array if isinstance(meas_or_array, MeasurementSet) else meas_or_array
    x = as_position(x, array.dim) - array.reference
    a = array.centered()
    check_clearance(a, x)
    return a, x


def ml_objective(meas: MeasurementSet, x) -> ObjectiveEval:
    """P(x) = mean((d_i + ||x|| - ||a_i - x||)^2) with exact gradient and Hessian.

    The Hessian keeps the curvature term -hess f_i(x) (d_i - f_i(x)); it is not
    the Gauss-Newton approximation.
    """
    a, x = _centered(meas, x)
    m, n = a.shape
    diff = x - a
    dist = np.linalg.norm(diff, axis=1)
    nx = np.linalg.norm(x)
    u = diff / dist[:, None]
    v = x / nx
    J = u - v
    res = meas.d - (dist - nx)

    value = float(np.mean(res**2))
    grad = -2.0 / m * (J.T @ res)

    eye = np.eye(n)
    # sum_i r_i * hess f_i = sum_i r_i (I - u u^T)/dist_i - (sum_i r_i)(I - v v^T)/||x||
    w = res / dist
    curv = w.sum() * eye - (u * w[:, None]).T @ u
    curv -= res.sum() * (eye - np.outer(v, v)) / nx
    hess = 2.0 / m * (J.T @ J - curv)
    hess = 0.5 * (hess + hess.T)
    return ObjectiveEval(value, grad, hess)


def information_matrix(array: SensorArray, x) -> np.ndarray:
    """Finite-sample M(x) = (1/m) sum grad f_i grad f_i^T."""
    a, x = _centered(array, x)
    J = rd_jacobian(a, x)
    return J.T @ J / a.shape[0]


# name used throughout the docs
information_matrix_M = information_matrix


def fisher_matrix(array: SensorArray, x, sigma2: float) -> np.ndarray:
    """Three-term Fisher information for i.i.d. Gaussian range differences."""
    if not sigma2 > 0:
        raise ValueError("sigma2 must be positive")
    a, x = _centered(array, x)
    m = a.shape[0]
    nx = np.linalg.norm(x)
    diff = x - a
    dist = np.linalg.norm(diff, axis=1)
    t1 = m * np.outer(x, x) / nx**2
    t2 = (diff / dist[:, None] ** 2).T @ diff
    s = (diff / dist[:, None]).sum(axis=0)
    t3 = (np.outer(x, s) + np.outer(s, x)) / nx
    return (t1 + t2 - t3) / sigma2


def fisher_information(array: SensorArray, x, sigma2: float) -> BoundsReport:
    F = fisher_matrix(array, x, sigma2)
    F = 0.5 * (F + F.T)
    lam, V = np.linalg.eigh(F)
    cond = float(lam[-1] / lam[0]) if lam[0] > 0 else np.inf
    if lam[-1] <= 0 or lam[0] <= SINGULAR_RATIO * lam[-1]:
        raise NotLocalizableError(
            f"Fisher information singular at x={np.asarray(x).tolist()} "
            f"(eigenvalues {lam.tolist()}); sensors give no information along "
            f"direction {V[:, 0].tolist()}"
        )
    crlb = float(np.sum(1.0 / lam))
    return BoundsReport(
        fisher=F,
        crlb=crlb,
        rcrlb=float(np.sqrt(crlb)),
        m_matrix=information_matrix(array, x),
        condition=cond,
    )
