"""Weighted logistic regression surrogates and their 2D decision boundaries."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

GRAD_TOL = 1e-8
MAX_ITER = 500
VERTICAL_TOL = 1e-9


class DegenerateFitError(ValueError):
    """All positively weighted samples carry the same label."""

    def __init__(self, label: int):
        super().__init__(f"all weighted samples have label {label}; no boundary to fit")
        self.label = label


class ConvergenceError(RuntimeError):
    def __init__(self, grad_norm: float, iterations: int):
        super().__init__(f"logistic fit did not converge after {iterations} iterations "
                         f"(gradient norm {grad_norm:.3e})")
        self.grad_norm = grad_norm
        self.iterations = iterations


class NoBoundaryError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SurrogateModel:
    weights: np.ndarray
    bias: float

    def __post_init__(self) -> None:
        w = np.array(self.weights, dtype=float).ravel()
        if not (np.all(np.isfinite(w)) and np.isfinite(self.bias)):
            raise ValueError("surrogate parameters must be finite")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", float(self.bias))

    def decision_function(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.weights.shape[0]:
            raise ValueError(f"expected {self.weights.shape[0]} features, got {X.shape[1]}")
        return X @ self.weights + self.bias

    def predict(self, X) -> np.ndarray:
        """Labels for each row; points exactly on the boundary get label 1."""
        return (self.decision_function(X) >= 0).astype(int)

    @property
    def normal(self) -> np.ndarray:
        return self.weights / np.linalg.norm(self.weights)

    def to_dict(self) -> dict:
        return {"weights": [float(v) for v in self.weights], "bias": self.bias}

    @classmethod
    def from_dict(cls, d: dict) -> "SurrogateModel":
        return cls(np.array(d["weights"], dtype=float), float(d["bias"]))


@dataclass(frozen=True)
class WeightedSample:
    features: tuple[float, ...]
    label: int
    weight: float = 1.0

    def __post_init__(self) -> None:
        if self.label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.label}")
        if not (np.isfinite(self.weight) and self.weight >= 0):
            raise ValueError(f"weight must be finite and >= 0, got {self.weight}")


def _objective(X1, y, sw, theta, reg):
    z = X1 @ theta
    # log(1 + e^z) - y z, computed stably
    nll = np.sum(sw * (np.logaddexp(0.0, z) - y * z))
    return nll + 0.5 * reg * np.sum(theta[:-1] ** 2)


def fit_logistic(X, y, sample_weight=None, reg: float = 0.01) -> SurrogateModel:
    """Newton's method (IRLS) with backtracking on the penalized weighted NLL.

    The penalty ``reg * ||w||^2 / 2`` leaves the bias free. Iterates until the
    gradient norm drops below ``GRAD_TOL``.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    sw = np.ones(len(y)) if sample_weight is None else np.asarray(sample_weight, dtype=float)
    if X.shape[0] != y.shape[0] or sw.shape[0] != y.shape[0]:
        raise ValueError("X, y and sample_weight lengths differ")
    if X.shape[0] < 2:
        raise ValueError("need at least two samples")
    if reg < 0:
        raise ValueError("reg must be >= 0")
    if np.any(sw < 0) or not np.all(np.isfinite(sw)):
        raise ValueError("sample weights must be finite and nonnegative")
    active = sw > 0
    labels = np.unique(y[active])
    if labels.size < 2:
        raise DegenerateFitError(int(labels[0]) if labels.size else 0)

    # centre features for conditioning; the unpenalized bias absorbs the shift
    centre = np.average(X, axis=0, weights=sw)
    Xc = X - centre
    n, d = Xc.shape
    X1 = np.hstack([Xc, np.ones((n, 1))])
    penalty = np.full(d + 1, reg)
    penalty[-1] = 0.0

    theta = np.zeros(d + 1)
    f = _objective(X1, y, sw, theta, reg)
    grad_norm = np.inf
    for it in range(MAX_ITER):
        p = 0.5 * (1.0 + np.tanh(0.5 * (X1 @ theta)))
        grad = X1.T @ (sw * (p - y)) + penalty * theta
        # convergence is judged in the caller's (uncentred) coordinates
        grad_norm = float(np.linalg.norm(np.r_[grad[:-1] + centre * grad[-1], grad[-1]]))
        if grad_norm < GRAD_TOL:
            break
        H = (X1 * (sw * p * (1 - p))[:, None]).T @ X1 + np.diag(penalty)
        try:
            step = np.linalg.solve(H, grad)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(H, grad, rcond=None)[0]
        # slack for decreases below the resolution of f near the optimum
        slack = 1e-13 * max(1.0, abs(f))
        t = 1.0
        while True:
            cand = theta - t * step
            fc = _objective(X1, y, sw, cand, reg)
            if fc <= f - 1e-4 * t * (grad @ step) + slack:
                break
            t *= 0.5
            if t < 1e-10:
                break
        if t < 1e-10:
            break
        theta, f = cand, fc
    else:
        it = MAX_ITER
    if grad_norm >= GRAD_TOL:
        raise ConvergenceError(grad_norm, it)
    w = theta[:-1]
    return SurrogateModel(w, float(theta[-1] - centre @ w))


def fit_weighted_logistic(samples: list[WeightedSample], reg: float = 0.01) -> SurrogateModel:
    if len(samples) < 2:
        raise ValueError("need at least two samples")
    X = np.array([s.features for s in samples], dtype=float)
    y = np.array([s.label for s in samples], dtype=float)
    sw = np.array([s.weight for s in samples], dtype=float)
    return fit_logistic(X, y, sw, reg)


def surrogate_predict(g: SurrogateModel, x) -> int:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError("expected a single feature vector")
    return int(g.predict(x[None, :])[0])


@dataclass(frozen=True)
class VerticalBoundary:
    x1: float


def boundary_curve(g: SurrogateModel, x1_grid) -> np.ndarray | VerticalBoundary:
    """Boundary as ``x2(x1)`` on the grid, or a vertical line when ``w2`` vanishes."""
    if g.weights.shape[0] != 2:
        raise ValueError("boundary_curve needs a 2D surrogate")
    w1, w2 = g.weights
    if abs(w2) > VERTICAL_TOL:
        return -(w1 * np.asarray(x1_grid, dtype=float) + g.bias) / w2
    if w1 == 0.0:
        raise NoBoundaryError("both weights are zero; the surrogate is constant")
    return VerticalBoundary(-g.bias / w1)
