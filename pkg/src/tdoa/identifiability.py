"""Checkable deployment conditions: conic/quadric rank test, affine rank, M(x) definiteness."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .errors import NumericalError
from .likelihood import information_matrix
from .model import SensorArray

RANK_CUTOFF = 1e-10
# smallest eigenvalue of M(x) (dimensionless) required for an "identifiable" verdict
M_EIG_THRESHOLD = 1e-10

FULL_RANK = {2: 6, 3: 10}


@dataclass(frozen=True)
class IdentifiabilityReport:
    veronese_rank: int
    veronese_full: bool
    affine_rank: int
    m_matrix_min_eig: Optional[float]
    verdict: str  # "identifiable" | "degenerate" | "inconclusive"

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def veronese_vector(a) -> np.ndarray:
    """Monomials of degree <= 2, ordering frozen in docs/monomials.md.

    2D: [a1^2, a1 a2, a2^2, a1, a2, 1]
    3D: [a1^2, a2^2, a3^2, a1 a2, a1 a3, a2 a3, a1, a2, a3, 1]
    """
    a = np.asarray(a, dtype=float)
    if a.shape[-1] == 2:
        x, y = a[..., 0], a[..., 1]
        cols = [x * x, x * y, y * y, x, y, np.ones_like(x)]
    elif a.shape[-1] == 3:
        x, y, z = a[..., 0], a[..., 1], a[..., 2]
        cols = [x * x, y * y, z * z, x * y, x * z, y * z, x, y, z, np.ones_like(x)]
    else:
        raise ValueError(f"coordinates must have length 2 or 3, got {a.shape[-1]}")
    return np.stack(cols, axis=-1)


def _rank(s: np.ndarray, cutoff: float):
    if s.size == 0 or s[0] == 0:
        return 0, False
    rel = s / s[0]
    rank = int(np.sum(rel > cutoff))
    borderline = bool(np.any((rel > cutoff / 10) & (rel < cutoff * 10)))
    return rank, borderline


def veronese_moment(array: SensorArray) -> np.ndarray:
    """(1/m) sum v(a_i) v(a_i)^T with coordinates scaled by their RMS radius."""
    a = array.centered()
    radius = np.sqrt(np.mean(np.sum(a**2, axis=1)))
    V = veronese_vector(a / radius)
    return V.T @ V / a.shape[0]


def check_assumption5(array: SensorArray, probe=None) -> IdentifiabilityReport:
    """Rank test for all sensors lying on one conic (2D) or quadric (3D).

    Full rank rules out hyperbola/hyperboloid and line/plane concentration of the
    empirical sensor distribution.  ``probe`` additionally checks that M(x) is
    positive definite at that position.
    """
    full = FULL_RANK[array.dim]
    s = np.linalg.svd(veronese_moment(array), compute_uv=False)
    rank, borderline = _rank(s, RANK_CUTOFF)

    pts = array.sensors
    centred = pts - pts.mean(axis=0)
    affine_rank, _ = _rank(np.linalg.svd(centred, compute_uv=False), RANK_CUTOFF)

    min_eig = None
    if probe is not None:
        try:
            min_eig = float(np.linalg.eigvalsh(information_matrix(array, probe))[0])
        except NumericalError:
            min_eig = 0.0

    veronese_full = rank == full
    if borderline:
        verdict = "inconclusive"
    elif veronese_full and (min_eig is None or min_eig > M_EIG_THRESHOLD):
        verdict = "identifiable"
    else:
        verdict = "degenerate"
    return IdentifiabilityReport(rank, veronese_full, affine_rank, min_eig, verdict)
