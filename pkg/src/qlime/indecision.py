"""Regions of indecision, exact and ensemble-based, and the IQR boundary band."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .qlime import EnsembleExplanation, ProbabilityOracle
from .surrogate import VerticalBoundary, boundary_curve

MIN_BAND_MEMBERS = 4
UNRELIABLE_EXCLUDED_FRACTION = 0.25


class BandUndefinedError(ValueError):
    def __init__(self, usable: int, degenerate: int, vertical: int):
        super().__init__(
            f"need >= {MIN_BAND_MEMBERS} usable boundaries, got {usable} "
            f"({degenerate} degenerate, {vertical} vertical members excluded)"
        )
        self.usable = usable
        self.degenerate = degenerate
        self.vertical = vertical


class BandUnreliableWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class EvalGrid:
    """Rectangular grid; cell ``(i, j)`` is the point ``(x1_values[i], x2_values[j])``."""

    x1_values: np.ndarray
    x2_values: np.ndarray

    def __post_init__(self) -> None:
        for name in ("x1_values", "x2_values"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.ndim != 1 or v.size < 2 or np.any(np.diff(v) <= 0):
                raise ValueError(f"{name} must be strictly ascending with at least 2 points")
            object.__setattr__(self, name, v)

    @classmethod
    def uniform(cls, lo, hi, resolution: int | tuple[int, int] = 100) -> "EvalGrid":
        n1, n2 = (resolution, resolution) if np.isscalar(resolution) else resolution
        return cls(np.linspace(lo[0], hi[0], n1), np.linspace(lo[1], hi[1], n2))

    @property
    def shape(self) -> tuple[int, int]:
        return self.x1_values.size, self.x2_values.size

    def points(self) -> np.ndarray:
        """All cell centres, row-major in ``(i, j)``."""
        a, b = np.meshgrid(self.x1_values, self.x2_values, indexing="ij")
        return np.column_stack([a.ravel(), b.ravel()])


@dataclass(frozen=True, eq=False)
class RegionMask:
    mask: np.ndarray
    epsilon: float
    probabilities: np.ndarray
    grid: EvalGrid

    @property
    def fraction(self) -> float:
        return float(self.mask.mean())


@dataclass(frozen=True, eq=False)
class IndecisionBand:
    x1_values: np.ndarray
    q1: np.ndarray
    q3: np.ndarray
    n_used: int
    excluded_fraction: float

    @property
    def iqr(self) -> np.ndarray:
        return self.q3 - self.q1

    @property
    def unreliable(self) -> bool:
        return self.excluded_fraction > UNRELIABLE_EXCLUDED_FRACTION

    def column(self, x1: float) -> int:
        return int(np.argmin(np.abs(self.x1_values - x1)))


def _check_epsilon(epsilon: float) -> None:
    if not 0 < epsilon < 0.5:
        raise ValueError(f"epsilon must lie in (0, 0.5), got {epsilon}")


def mask_from_probabilities(p: np.ndarray, epsilon: float) -> np.ndarray:
    return np.abs(p - 0.5) < epsilon


def region_of_indecision(f: ProbabilityOracle, grid: EvalGrid, epsilon: float = 0.1) -> RegionMask:
    """Cells where the classifier's label-1 probability is within ``epsilon`` of 1/2."""
    _check_epsilon(epsilon)
    p = np.asarray(f(grid.points()), dtype=float).reshape(grid.shape)
    return RegionMask(mask_from_probabilities(p, epsilon), epsilon, p, grid)


def local_region_of_indecision(ensemble: EnsembleExplanation, grid: EvalGrid,
                               epsilon: float = 0.1) -> RegionMask:
    """Cells where the ensemble's vote fraction is within ``epsilon`` of 1/2."""
    _check_epsilon(epsilon)
    if len(ensemble) == 0:
        raise ValueError("empty ensemble")
    p = ensemble.predict_proba(grid.points()).reshape(grid.shape)
    return RegionMask(mask_from_probabilities(p, epsilon), epsilon, p, grid)


def quartiles(values) -> tuple[float, float]:
    """Medians of the lower and upper halves of the sorted values.

    With an odd count the middle element belongs to neither half.
    """
    v = np.sort(np.asarray(values, dtype=float))
    n = v.size
    if n < 2:
        raise ValueError("need at least two values")
    half = n // 2
    return float(np.median(v[:half])), float(np.median(v[n - half:]))


def iqr_band(ensemble: EnsembleExplanation, x1_grid) -> IndecisionBand:
    """Per-column Q1/Q3 of the members' boundary heights ``x2(x1)``.

    Degenerate members and vertical boundaries cannot be written as ``x2(x1)``
    and are dropped; their share is reported in ``excluded_fraction``.
    """
    x1_grid = np.asarray(x1_grid, dtype=float)
    curves = []
    degenerate = vertical = 0
    for m in ensemble.members:
        if m.degenerate:
            degenerate += 1
            continue
        c = boundary_curve(m.surrogate, x1_grid)
        if isinstance(c, VerticalBoundary):
            vertical += 1
            continue
        curves.append(c)
    if len(curves) < MIN_BAND_MEMBERS:
        raise BandUndefinedError(len(curves), degenerate, vertical)
    C = np.sort(np.array(curves), axis=0)
    n, half = C.shape[0], C.shape[0] // 2
    q1 = np.median(C[:half], axis=0)
    q3 = np.median(C[n - half:], axis=0)
    excluded = (degenerate + vertical) / len(ensemble)
    band = IndecisionBand(x1_grid, q1, q3, len(curves), excluded)
    if band.unreliable:
        warnings.warn(f"{excluded:.0%} of ensemble members excluded from the band", BandUnreliableWarning,
                      stacklevel=2)
    return band


def point_in_band(band: IndecisionBand, x) -> bool:
    """Closed-interval test of ``x2`` against the band at the nearest grid column."""
    j = band.column(float(x[0]))
    lo, hi = band.q1[j], band.q3[j]
    if not (np.isfinite(lo) and np.isfinite(hi)):
        raise ValueError(f"band undefined at column x1={band.x1_values[j]}")
    return bool(lo <= x[1] <= hi)


def find_contour_point(f: ProbabilityOracle, start, bounds=None, level: float = 0.5,
                       step: float = 1e-6, max_iter: int = 100) -> np.ndarray:
    """Newton walk from ``start`` along the probability gradient onto ``p == level``.

    Uses central differences of the oracle; useful for picking a maximally
    indecisive anchor.
    """
    x = np.array(start, dtype=float)
    eye = np.eye(x.size) * step
    for _ in range(max_iter):
        r = float(f(x[None, :])[0]) - level
        if abs(r) < 1e-12:
            break
        g = (f(x + eye) - f(x - eye)) / (2 * step)
        gg = float(g @ g)
        if gg == 0.0:
            raise ValueError(f"flat probability at {x}; cannot reach level {level}")
        x = x - r * g / gg
        if bounds is not None:
            x = np.clip(x, bounds[0], bounds[1])
    return x


def find_decisive_point(f: ProbabilityOracle, grid: EvalGrid, threshold: float = 0.99,
                        epsilon: float = 0.1) -> np.ndarray:
    """Grid cell with ``max(p, 1 - p) > threshold`` closest to the region of indecision."""
    pts = grid.points()
    p = np.asarray(f(pts), dtype=float)
    decisive = pts[np.maximum(p, 1 - p) > threshold]
    region = pts[mask_from_probabilities(p, epsilon)]
    if decisive.size == 0 or region.size == 0:
        raise ValueError("grid has no decisive cells or no region of indecision")
    d = np.min(np.linalg.norm(decisive[:, None, :] - region[None, :, :], axis=2), axis=1)
    return decisive[int(np.argmin(d))]
