"""Consistent noise-variance estimation.

sigma^2 is estimated as the smallest z with lambda_max(Q^{-1} S(z)) = 1, where
Q = A~^T A~ / m is built from the augmented regressor
[-2 a_i^T, 1, -2 d_i, d_i^2 - ||a_i||^2] and S(z) is the noise correction that
only touches the last 2x2 block.  Reducing through the Schur complement Q/Q22
turns the eigenvalue condition into a cubic in z.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import EmptyRootSetError, InsufficientGeometryError, NumericalError, SchurDegeneracyError
from .model import MeasurementSet

PD_RATIO = 1e-10
IMAG_CUTOFF = 1e-8
SIGN_TOL = 1e-9
RESIDUAL_TOL = 1e-6


@dataclass(frozen=True)
class NoiseVarianceProblem:
    A_tilde: np.ndarray
    Q: np.ndarray
    d_bar: float
    d2_bar: float
    schur: np.ndarray
    q1: float
    q2: float
    q3: float
    c1: float
    c2: float
    c3: float

    @property
    def dim(self) -> int:
        return self.Q.shape[0] - 3

    def cubic(self) -> np.ndarray:
        """Coefficients (highest degree first) of 32c1 z^3 - (4c1c3 + 8q1c1) z^2 + 4c1c2 z - 4c1^2."""
        c1, c2, c3, q1 = self.c1, self.c2, self.c3, self.q1
        return np.array([32 * c1, -(4 * c1 * c3 + 8 * q1 * c1), 4 * c1 * c2, -4 * c1**2])

    def sign_value(self, z):
        """2c1 + 2q1 z^2 - c2 z; positive iff lambda = 1 is the larger root at z."""
        return 2 * self.c1 + 2 * self.q1 * np.square(z) - self.c2 * z


@dataclass(frozen=True)
class VarianceEstimate:
    sigma2_hat: float
    roots: list
    accepted: list
    residual: float

    def to_dict(self) -> dict:
        return {
            "sigma2_hat": self.sigma2_hat,
            "roots": list(self.roots),
            "accepted": list(self.accepted),
            "residual": self.residual,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def build_problem(meas: MeasurementSet) -> NoiseVarianceProblem:
    a = meas.array.centered()
    m, n = a.shape
    if m < n + 3:
        raise InsufficientGeometryError(f"need at least n+3 = {n + 3} sensors, got {m}")
    d = np.array(meas.d)
    A_t = np.column_stack([-2.0 * a, np.ones(m), -2.0 * d, d**2 - np.sum(a**2, axis=1)])
    Q = A_t.T @ A_t / m
    Q = 0.5 * (Q + Q.T)

    # PD check on the unit-diagonal rescaling; raw columns span ~8 orders of magnitude
    scale = np.sqrt(np.diag(Q))
    if np.any(scale == 0):
        raise InsufficientGeometryError("A~ has an all-zero column")
    lam = np.linalg.eigvalsh(Q / np.outer(scale, scale))
    if lam[0] <= PD_RATIO * lam[-1]:
        raise InsufficientGeometryError(
            f"Q is not positive definite (scaled eigenvalues {lam.tolist()}); "
            "A~ is rank deficient: sensors collinear/coplanar or noise-free data"
        )

    k = n + 1
    Q11, Q12, Q22 = Q[:k, :k], Q[:k, k:], Q[k:, k:]
    try:
        L = scipy.linalg.cho_factor(Q11, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise InsufficientGeometryError(f"Q11 not positive definite: {exc}") from exc
    schur = Q22 - Q12.T @ scipy.linalg.cho_solve(L, Q12, check_finite=False)
    schur = 0.5 * (schur + schur.T)
    q1, q2, q3 = float(schur[0, 0]), float(schur[0, 1]), float(schur[1, 1])
    d_bar = float(np.mean(d))
    d2_bar = float(np.mean(d**2))
    c1 = q1 * q3 - q2**2
    c2 = 4 * q1 * d2_bar + 4 * q3 + 8 * q2 * d_bar
    c3 = 16 * (d2_bar - d_bar**2)
    return NoiseVarianceProblem(A_t, Q, d_bar, d2_bar, schur, q1, q2, q3, c1, c2, c3)


def S_block(prob: NoiseVarianceProblem, z: float) -> np.ndarray:
    db, d2 = prob.d_bar, prob.d2_bar
    return np.array([[4 * z, -4 * db * z], [-4 * db * z, 4 * d2 * z - 2 * z * z]])


def S_of_z(prob: NoiseVarianceProblem, z: float) -> np.ndarray:
    S = np.zeros_like(prob.Q)
    S[-2:, -2:] = S_block(prob, z)
    return S


def lambda_max_condition(prob: NoiseVarianceProblem, z: float) -> float:
    """lambda_max(Q^{-1} S(z)) as the larger root of det(lambda Q/Q22 - S22(z)) = 0.

    That determinant is c1 lambda^2 + (2q1 z^2 - c2 z) lambda - 8 z^3 + c3 z^2.
    """
    if not prob.c1 > 0:
        raise SchurDegeneracyError(f"Schur complement determinant c1={prob.c1} is not positive")
    B = 2 * prob.q1 * z * z - prob.c2 * z
    C = -8 * z**3 + prob.c3 * z * z
    disc = max(B * B - 4 * prob.c1 * C, 0.0)
    return (-B + np.sqrt(disc)) / (2 * prob.c1)


def lambda_max_direct(prob: NoiseVarianceProblem, z: float) -> float:
    """Largest generalized eigenvalue of (S(z), Q) from a full symmetric solve."""
    return float(scipy.linalg.eigh(S_of_z(prob, z), prob.Q, eigvals_only=True)[-1])


def real_roots(coeffs) -> np.ndarray:
    """Real roots via companion-matrix eigenvalues."""
    r = np.roots(coeffs)
    keep = np.abs(r.imag) < IMAG_CUTOFF * (1 + np.abs(r.real))
    return np.sort(r[keep].real)


def estimate_sigma2(meas: MeasurementSet, verify: bool = True) -> VarianceEstimate:
    """Smallest admissible root of the cubic; raises EmptyRootSetError if none."""
    prob = build_problem(meas)
    if not prob.c1 > 0:
        raise SchurDegeneracyError(f"Schur complement determinant c1={prob.c1} is not positive")
    roots = real_roots(prob.cubic())
    signs = prob.sign_value(roots)
    tol = SIGN_TOL * (2 * abs(prob.c1) + abs(prob.c2) * np.abs(roots) + 2 * abs(prob.q1) * roots**2)
    ok = (signs > -tol) & (roots >= 0)
    accepted = roots[ok]
    if accepted.size == 0:
        raise EmptyRootSetError(roots, signs)
    s2 = float(accepted.min())
    residual = abs(lambda_max_direct(prob, s2) - 1.0)
    if verify and not residual < RESIDUAL_TOL:
        raise NumericalError(
            f"noise-variance root {s2} fails the eigenvalue check (|lambda_max - 1| = {residual:.3e})"
        )
    return VarianceEstimate(s2, roots.tolist(), accepted.tolist(), float(residual))
