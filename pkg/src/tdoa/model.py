"""Sensor geometries, range-difference measurements and the measurement simulator.

All estimators in this package work in a frame where the reference sensor sits at
the origin.  ``SensorArray.centered()`` gives the sensor coordinates in that frame;
callers can place the reference anywhere.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import ConfigError, DegenerateGeometryError

# Distances below this are treated as coincident points (meters).
COINCIDENCE_TOL = 1e-9

RNG_NAME = "numpy-philox4x64-seedsequence"
RNG_VERSION = 1

# Fixed 10-sensor deployment (reference at the origin).
FIXED_SENSORS = np.array(
    [
        [50, 0, 50],
        [50, 50, -50],
        [50, -50, 50],
        [50, 0, 0],
        [50, 50, 50],
        [-50, 0, -50],
        [-50, -50, 50],
        [-50, 50, -50],
        [-50, 0, 0],
        [-50, -50, -50],
    ],
    dtype=float,
)


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Counter-based generator for the stream ``(seed, *stream)``.

    Streams with different keys are statistically independent, so Monte-Carlo
    trials can be drawn in any order (or in parallel) with identical results.
    """
    ss = np.random.SeedSequence(int(seed) & (2**64 - 1), spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class SensorArray:
    reference: np.ndarray
    sensors: np.ndarray

    def __post_init__(self):
        ref = np.array(self.reference, dtype=float).reshape(-1)
        sen = np.array(self.sensors, dtype=float)
        if sen.ndim == 1:
            sen = sen.reshape(1, -1)
        if ref.shape[0] not in (2, 3):
            raise ConfigError(f"dimension must be 2 or 3, got {ref.shape[0]}")
        if sen.ndim != 2 or sen.shape[1] != ref.shape[0]:
            raise ConfigError(
                f"sensors must have shape (m, {ref.shape[0]}), got {sen.shape}"
            )
        if not (np.all(np.isfinite(ref)) and np.all(np.isfinite(sen))):
            raise ConfigError("sensor coordinates must be finite")
        gaps = np.linalg.norm(sen - ref, axis=1)
        if np.any(gaps < COINCIDENCE_TOL):
            i = int(np.argmin(gaps))
            raise DegenerateGeometryError(f"sensor {i + 1} coincides with the reference")
        ref.setflags(write=False)
        sen.setflags(write=False)
        object.__setattr__(self, "reference", ref)
        object.__setattr__(self, "sensors", sen)

    @property
    def dim(self) -> int:
        return self.reference.shape[0]

    @property
    def m(self) -> int:
        return self.sensors.shape[0]

    def centered(self) -> np.ndarray:
        """Sensor coordinates with the reference translated to the origin."""
        return self.sensors - self.reference

    def translated(self, shift) -> "SensorArray":
        shift = np.asarray(shift, dtype=float)
        return SensorArray(self.reference + shift, self.sensors + shift)

    def repeated(self, times: int) -> "SensorArray":
        """Each sensor repeated ``times`` times (T i.i.d. measurements per sensor)."""
        return SensorArray(self.reference, np.repeat(self.sensors, times, axis=0))


@dataclass(frozen=True)
class NoiseModel:
    sigma: float
    seed: int = 0

    def __post_init__(self):
        if not np.isfinite(self.sigma) or self.sigma < 0:
            raise ConfigError(f"sigma must be finite and nonnegative, got {self.sigma}")


@dataclass(frozen=True)
class MeasurementSet:
    array: SensorArray
    d: np.ndarray
    true_sigma2: Optional[float] = None

    def __post_init__(self):
        d = np.array(self.d, dtype=float).reshape(-1)
        if d.shape[0] != self.array.m:
            raise ConfigError(f"{d.shape[0]} measurements for {self.array.m} sensors")
        if not np.all(np.isfinite(d)):
            raise ConfigError("measurements must be finite")
        d.setflags(write=False)
        object.__setattr__(self, "d", d)

    @property
    def m(self) -> int:
        return self.array.m

    @property
    def dim(self) -> int:
        return self.array.dim


def as_position(x, dim: int) -> np.ndarray:
    x = np.array(x, dtype=float).reshape(-1)
    if x.shape[0] != dim:
        raise ConfigError(f"position must have length {dim}, got {x.shape[0]}")
    if not np.all(np.isfinite(x)):
        raise ConfigError("position must be finite")
    return x


def check_clearance(a: np.ndarray, x: np.ndarray) -> None:
    """Raise if ``x`` (centered frame) hits the reference or any sensor."""
    if np.linalg.norm(x) < COINCIDENCE_TOL:
        raise DegenerateGeometryError("position coincides with the reference sensor")
    gaps = np.linalg.norm(a - x, axis=1)
    if np.any(gaps < COINCIDENCE_TOL):
        i = int(np.argmin(gaps))
        raise DegenerateGeometryError(f"position coincides with sensor {i + 1}")


def range_differences_centered(a: np.ndarray, x: np.ndarray) -> np.ndarray:
    """f_i(x) = ||a_i - x|| - ||x|| for all sensors, reference at origin."""
    return np.linalg.norm(a - x, axis=1) - np.linalg.norm(x)


def range_difference(array: SensorArray, x, i: int) -> float:
    """Noiseless range difference of sensor ``i`` (1-based) in the original frame."""
    if not 1 <= i <= array.m:
        raise IndexError(f"sensor index {i} outside 1..{array.m}")
    x = as_position(x, array.dim)
    a_i = array.sensors[i - 1]
    if np.linalg.norm(x - array.reference) < COINCIDENCE_TOL:
        raise DegenerateGeometryError("position coincides with the reference sensor")
    if np.linalg.norm(x - a_i) < COINCIDENCE_TOL:
        raise DegenerateGeometryError(f"position coincides with sensor {i}")
    return float(np.linalg.norm(a_i - x) - np.linalg.norm(x - array.reference))


def range_differences(array: SensorArray, x) -> np.ndarray:
    x = as_position(x, array.dim) - array.reference
    a = array.centered()
    check_clearance(a, x)
    return range_differences_centered(a, x)


def simulate(
    array: SensorArray,
    x,
    noise: NoiseModel,
    rng: Optional[np.random.Generator] = None,
) -> MeasurementSet:
    """Noisy measurements d_i = f_i(x) + r_i, r_i ~ N(0, sigma^2) i.i.d.

    Draws from ``make_rng(noise.seed)`` unless an explicit generator is given.
    """
    f = range_differences(array, x)
    if rng is None:
        rng = make_rng(noise.seed)
    r = noise.sigma * rng.standard_normal(array.m)
    return MeasurementSet(array, f + r, true_sigma2=noise.sigma**2)


def sample_cube_surface(rng: np.random.Generator, m: int, edge: float) -> np.ndarray:
    half = edge / 2.0
    face = rng.integers(0, 6, size=m)
    uv = rng.uniform(-half, half, size=(m, 2))
    axis = face // 2
    pts = np.empty((m, 3))
    rows = np.arange(m)
    pts[rows, axis] = np.where(face % 2 == 0, -half, half)
    others = np.array([[1, 2], [0, 2], [0, 1]])[axis]
    pts[rows, others[:, 0]] = uv[:, 0]
    pts[rows, others[:, 1]] = uv[:, 1]
    return pts


def deploy_uniform_cube(edge: float, m: int, seed=0, rng: Optional[np.random.Generator] = None) -> SensorArray:
    """m sensors uniform on the surface of a cube centred on the reference (origin)."""
    if edge <= 0:
        raise ConfigError("cube edge must be positive")
    if m < 6:
        raise ConfigError(f"need at least n+3 = 6 sensors, got {m}")
    if rng is None:
        rng = make_rng(seed)
    return SensorArray(np.zeros(3), sample_cube_surface(rng, m, edge))


def deploy_fixed_paper_array(T: int = 1) -> SensorArray:
    """The ten fixed sensors, each repeated T times (m = 10 T)."""
    if T < 1:
        raise ConfigError("T must be >= 1")
    return SensorArray(np.zeros(3), np.repeat(FIXED_SENSORS, T, axis=0))


# --- CSV ------------------------------------------------------------------

def save_array_csv(array: SensorArray, path) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["dim", "n_sensors"])
        w.writerow([array.dim, array.m])
        for row in np.vstack([array.reference, array.sensors]):
            w.writerow([format(v, ".17g") for v in row])


def load_array_csv(path) -> SensorArray:
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    except OSError as exc:
        raise ConfigError(f"cannot read sensor file {path}: {exc}") from exc
    if rows and rows[0][0].strip() == "dim":
        rows = rows[1:]
    try:
        dim, m = int(rows[0][0]), int(rows[0][1])
        coords = np.array([[float(c) for c in r] for r in rows[1:]])
    except (IndexError, ValueError) as exc:
        raise ConfigError(f"malformed sensor file {path}: {exc}") from exc
    if coords.shape != (m + 1, dim):
        raise ConfigError(
            f"{path}: header says {m} sensors in {dim}D, found rows of shape {coords.shape}"
        )
    return SensorArray(coords[0], coords[1:])


def save_measurements_csv(meas: MeasurementSet, path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "d"])
        for i, v in enumerate(meas.d, start=1):
            w.writerow([i, format(v, ".17g")])


def load_measurements_csv(path, array: SensorArray, true_sigma2=None) -> MeasurementSet:
    try:
        with Path(path).open(newline="") as fh:
            reader = csv.DictReader(fh)
            d = [float(row["d"]) for row in reader]
    except (OSError, KeyError, ValueError) as exc:
        raise ConfigError(f"cannot read measurement file {path}: {exc}") from exc
    return MeasurementSet(array, np.array(d), true_sigma2=true_sigma2)
