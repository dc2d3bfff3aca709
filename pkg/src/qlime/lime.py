"""Classical LIME for a classifier that returns random labels.

A label-sampling classifier is any callable ``f(Z, rng) -> labels`` that
returns one 0/1 label per row of ``Z``, drawing its randomness from ``rng``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .surrogate import DegenerateFitError, SurrogateModel, fit_logistic

LabelSampler = Callable[[np.ndarray, np.random.Generator], np.ndarray]


@dataclass(frozen=True)
class LocalityConfig:
    """Perturbation and kernel settings, in normalized feature units.

    ``bounds`` is the ``(lower, upper)`` feature box that synthetic samples are
    clipped to; ``None`` disables clipping.
    """

    sigma: float = 1.0
    sample_stddev: float = 0.75
    n_samples: int = 500
    bounds: tuple[tuple[float, ...], tuple[float, ...]] | None = None

    def __post_init__(self) -> None:
        if not self.sigma > 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")
        if not self.sample_stddev > 0:
            raise ValueError(f"sample_stddev must be > 0, got {self.sample_stddev}")
        if self.n_samples < 2:
            raise ValueError(f"n_samples must be >= 2, got {self.n_samples}")


@dataclass(frozen=True, eq=False)
class Explanation:
    """One LIME fit. ``surrogate`` is None when every local label agreed."""

    surrogate: SurrogateModel | None
    achieved_loss: float
    omega: float
    anchor_x: np.ndarray
    seed: int
    constant_label: int | None = None
    samples: np.ndarray | None = None
    labels: np.ndarray | None = None
    weights: np.ndarray | None = None

    @property
    def degenerate(self) -> bool:
        return self.surrogate is None

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self.surrogate is None:
            return np.full(X.shape[0], self.constant_label, dtype=int)
        return self.surrogate.predict(X)

    def to_dict(self) -> dict:
        s = self.surrogate
        return {
            "weights": None if s is None else [float(v) for v in s.weights],
            "bias": None if s is None else s.bias,
            "degenerate_flag": self.degenerate,
            "constant_label": self.constant_label,
            "achieved_loss": float(self.achieved_loss),
            "child_seed": int(self.seed),
        }


def sample_local(x, cfg: LocalityConfig, rng: np.random.Generator) -> np.ndarray:
    """``K`` isotropic Gaussian draws around ``x``, clipped to ``cfg.bounds``."""
    x = np.asarray(x, dtype=float)
    Z = x + cfg.sample_stddev * rng.standard_normal((cfg.n_samples, x.shape[0]))
    if cfg.bounds is not None:
        Z = np.clip(Z, cfg.bounds[0], cfg.bounds[1])
    return Z


def locality_weight(x, z, sigma: float):
    """exp(-d(x, z)^2 / sigma^2) with Euclidean ``d``; ``z`` may be a stack of rows."""
    if not sigma > 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    if z.shape[-1] != x.shape[-1]:
        raise ValueError(f"dimension mismatch: {x.shape} vs {z.shape}")
    d2 = np.sum((z - x) ** 2, axis=-1)
    w = np.exp(-d2 / sigma**2)
    return float(w) if np.ndim(w) == 0 else w


def omega(g: SurrogateModel | None, reg: float) -> float:
    """Complexity term: the same L2 penalty the fit uses."""
    if g is None:
        return 0.0
    return 0.5 * reg * float(g.weights @ g.weights)


def lime_loss(f_labels, g, samples, weights, omega: float = 0.0) -> float:
    """Locality-weighted count of disagreements between ``f_labels`` and ``g``, plus ``omega``.

    ``g`` may be a SurrogateModel or an Explanation (constant ones included).
    """
    f_labels = np.asarray(f_labels)
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    weights = np.asarray(weights, dtype=float)
    if not (f_labels.shape[0] == samples.shape[0] == weights.shape[0]):
        raise ValueError(
            f"length mismatch: {f_labels.shape[0]} labels, {samples.shape[0]} samples, {weights.shape[0]} weights"
        )
    if samples.shape[0] == 0:
        return float(omega)
    disagree = f_labels != g.predict(samples)
    return float(np.sum(weights * disagree) + omega)


def explain_on_samples(f: LabelSampler, x, Z: np.ndarray, cfg: LocalityConfig, reg: float,
                       rng: np.random.Generator, seed: int) -> Explanation:
    x = np.asarray(x, dtype=float)
    labels = np.asarray(f(Z, rng), dtype=int)
    if labels.shape != (Z.shape[0],):
        raise ValueError(f"classifier returned {labels.shape} labels for {Z.shape[0]} samples")
    w = locality_weight(x, Z, cfg.sigma)
    try:
        g = fit_logistic(Z, labels, w, reg)
    except DegenerateFitError as exc:
        # every positively weighted label agrees; zero-weight disagreements cost nothing
        return Explanation(None, 0.0, 0.0, x, seed, exc.label, Z, labels, w)
    om = omega(g, reg)
    return Explanation(g, lime_loss(labels, g, Z, w, om), om, x, seed, None, Z, labels, w)


def lime_explain(f: LabelSampler, x, cfg: LocalityConfig, reg: float = 0.01, seed: int = 0) -> Explanation:
    """Sample around ``x``, label each sample once with ``f``, fit a weighted logistic surrogate.

    If every label agrees the result is a constant explanation with no boundary.
    """
    rng = np.random.default_rng(seed)
    Z = sample_local(x, cfg, rng)
    return explain_on_samples(f, x, Z, cfg, reg, rng, seed)
