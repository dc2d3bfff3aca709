"""Variational quantum classifier, label sampling and SPSA training."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable

import numpy as np

from .quantum_sim import (
    AnsatzParams,
    EncodingError,
    ParameterError,
    angle_encode_batch,
    apply_ansatz_batch,
    readout_probability_batch,
)

PROB_CLIP = 1e-9


class TrainingError(RuntimeError):
    def __init__(self, step: int, message: str):
        super().__init__(f"step {step}: {message}")
        self.step = step


@dataclass(frozen=True, eq=False)
class QnnModel:
    n_qubits: int
    n_layers: int
    params: AnsatzParams
    encoding_scale: float = 1.0
    readout_qubit: int = 0
    provenance: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.params.angles.shape != (self.n_layers, self.n_qubits):
            raise ParameterError(
                f"params shape {self.params.angles.shape} != ({self.n_layers}, {self.n_qubits})"
            )
        if not 0 <= self.readout_qubit < self.n_qubits:
            raise ParameterError(f"readout qubit {self.readout_qubit} out of range")

    @classmethod
    def initialize(cls, n_qubits: int, n_layers: int, seed: int, **kwargs) -> "QnnModel":
        """Angles drawn uniformly from [-pi, pi] using ``seed``."""
        rng = np.random.default_rng(seed)
        angles = rng.uniform(-np.pi, np.pi, size=(n_layers, n_qubits))
        return cls(n_qubits, n_layers, AnsatzParams(angles), provenance={"init_seed": seed}, **kwargs)

    def with_angles(self, angles: np.ndarray, **provenance) -> "QnnModel":
        return replace(self, params=AnsatzParams(np.reshape(angles, (self.n_layers, self.n_qubits))),
                       provenance={**self.provenance, **provenance})

    # -- the black box: probabilities and random labels --

    def predict_proba_batch(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        states = angle_encode_batch(X, self.encoding_scale, self.n_qubits)
        states = apply_ansatz_batch(states, self.params, self.n_qubits)
        return readout_probability_batch(states, self.readout_qubit, self.n_qubits)

    def sample_labels(self, X, rng: np.random.Generator) -> np.ndarray:
        """One independent measurement outcome per row of ``X``."""
        p = self.predict_proba_batch(X)
        return (rng.random(p.shape[0]) < p).astype(int)

    def __call__(self, X, rng: np.random.Generator) -> np.ndarray:
        return self.sample_labels(X, rng)

    # -- persistence --

    def to_dict(self) -> dict:
        return {
            "n_qubits": self.n_qubits,
            "n_layers": self.n_layers,
            "encoding_scale": self.encoding_scale,
            "readout_qubit": self.readout_qubit,
            "params": [float(v) for v in self.params.angles.ravel()],
            "seed_provenance": self.provenance,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "QnnModel":
        n_qubits, n_layers = int(d["n_qubits"]), int(d["n_layers"])
        angles = np.array(d["params"], dtype=float).reshape(n_layers, n_qubits)
        return cls(n_qubits, n_layers, AnsatzParams(angles), float(d["encoding_scale"]),
                   int(d["readout_qubit"]), dict(d.get("seed_provenance", {})))

    def save(self, path) -> None:
        # json writes floats via repr, which round-trips bit-exactly
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path) -> "QnnModel":
        return cls.from_dict(json.loads(Path(path).read_text()))


def predict_proba(model: QnnModel, x) -> float:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] != model.n_qubits:
        raise EncodingError(f"expected a feature vector of length {model.n_qubits}, got shape {x.shape}")
    return float(model.predict_proba_batch(x[None, :])[0])


def sample_label(model: QnnModel, x, rng: np.random.Generator) -> int:
    return int(rng.random() < predict_proba(model, x))


def cross_entropy(p: np.ndarray, y: np.ndarray) -> float:
    p = np.clip(p, PROB_CLIP, 1 - PROB_CLIP)
    return float(-np.mean(y * np.log(p) + (1 - y) * np.log(1 - p)))


def training_loss(model: QnnModel, X, y) -> float:
    """Mean binary cross-entropy of the exact label-1 probabilities."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    if X.shape[0] == 0:
        raise ValueError("training_loss needs a nonempty dataset")
    if X.shape[0] != y.shape[0]:
        raise ValueError(f"{X.shape[0]} rows but {y.shape[0]} labels")
    return cross_entropy(model.predict_proba_batch(X), y)


def accuracy(model: QnnModel, X, y) -> float:
    return float(np.mean((model.predict_proba_batch(X) > 0.5).astype(int) == np.asarray(y)))


# -- SPSA --


@dataclass(frozen=True)
class SpsaConfig:
    """Gain schedule a_k = a / (A + k + 1)**alpha, c_k = c / (k + 1)**gamma.

    ``a=None`` calibrates ``a`` so the first update moves each parameter by
    about ``target_step`` radians. ``A=None`` means 10% of ``iterations``.
    """

    iterations: int = 300
    a: float | None = None
    c: float = 0.1
    A: float | None = None
    alpha: float = 0.602
    gamma: float = 0.101
    seed: int = 0
    target_step: float = 0.1
    calibration_samples: int = 25

    def __post_init__(self) -> None:
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        if self.c <= 0:
            raise ValueError("c must be > 0")
        if self.a is not None and self.a <= 0:
            raise ValueError("a must be > 0")

    @property
    def stability(self) -> float:
        return 0.1 * self.iterations if self.A is None else self.A


def spsa_gradient(loss: Callable[[np.ndarray], float], theta: np.ndarray, ck: float,
                  rng: np.random.Generator) -> tuple[np.ndarray, float, float]:
    """Two-evaluation gradient estimate with a Rademacher perturbation.

    Returns ``(g_hat, loss_plus, loss_minus)``.
    """
    delta = rng.choice(np.array([-1.0, 1.0]), size=theta.shape)
    lp = loss(theta + ck * delta)
    lm = loss(theta - ck * delta)
    return (lp - lm) / (2 * ck) / delta, lp, lm


def calibrate_gain(loss, theta0, cfg: SpsaConfig, rng: np.random.Generator) -> float:
    A = cfg.stability
    mags = [np.mean(np.abs(spsa_gradient(loss, theta0, cfg.c, rng)[0]))
            for _ in range(cfg.calibration_samples)]
    mag = float(np.mean(mags))
    if not np.isfinite(mag) or mag == 0.0:
        return cfg.target_step * (A + 1) ** cfg.alpha
    return cfg.target_step * (A + 1) ** cfg.alpha / mag


@dataclass
class SpsaResult:
    theta: np.ndarray
    best_loss: float
    best_iteration: int
    losses: list[float]
    a: float


def spsa_minimize(loss: Callable[[np.ndarray], float], theta0, cfg: SpsaConfig) -> SpsaResult:
    """Minimize ``loss`` with SPSA, returning the lowest-loss iterate seen.

    ``losses[k]`` is the loss at the parameters before update ``k``; the final
    entry is the loss after the last update.
    """
    theta = np.array(theta0, dtype=float)
    rng = np.random.default_rng(cfg.seed)
    current = float(loss(theta))
    if not math.isfinite(current):
        raise TrainingError(0, f"non-finite loss {current}")
    best_theta, best_loss, best_k = theta.copy(), current, 0
    losses = [current]
    if cfg.iterations == 0:
        return SpsaResult(best_theta, best_loss, 0, losses, float("nan") if cfg.a is None else cfg.a)
    a = cfg.a if cfg.a is not None else calibrate_gain(loss, theta, cfg, rng)
    A = cfg.stability
    for k in range(cfg.iterations):
        ak = a / (A + k + 1) ** cfg.alpha
        ck = cfg.c / (k + 1) ** cfg.gamma
        g, lp, lm = spsa_gradient(loss, theta, ck, rng)
        if not (math.isfinite(lp) and math.isfinite(lm)):
            raise TrainingError(k, f"non-finite loss at perturbed parameters ({lp}, {lm})")
        theta = theta - ak * g
        current = float(loss(theta))
        if not math.isfinite(current):
            raise TrainingError(k, f"non-finite loss {current}")
        losses.append(current)
        if current < best_loss:
            best_theta, best_loss, best_k = theta.copy(), current, k + 1
    return SpsaResult(best_theta, best_loss, best_k, losses, a)


def spsa_train(model: QnnModel, X, y, cfg: SpsaConfig) -> tuple[QnnModel, SpsaResult]:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    if X.shape[0] == 0:
        raise ValueError("cannot train on an empty dataset")

    def loss(theta):
        return cross_entropy(model.with_angles(theta).predict_proba_batch(X), y)

    result = spsa_minimize(loss, model.params.angles.ravel(), cfg)
    if cfg.iterations == 0:
        return model, result
    trained = model.with_angles(result.theta, spsa_seed=cfg.seed, iterations=cfg.iterations,
                                best_iteration=result.best_iteration)
    return trained, result
