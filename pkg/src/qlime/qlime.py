"""Monte Carlo ensembles of LIME surrogates over independent label realizations."""
from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .lime import Explanation, LabelSampler, LocalityConfig, explain_on_samples, lime_explain, sample_local
from .surrogate import SurrogateModel

ProbabilityOracle = Callable[[np.ndarray], np.ndarray]


def child_seed(master_seed: int, index: int) -> int:
    """64-bit seed for ensemble member ``index``, independent of the ensemble size."""
    return int(np.random.SeedSequence([master_seed, index]).generate_state(1, np.uint64)[0])


@dataclass(frozen=True, eq=False)
class EnsembleExplanation:
    members: tuple[Explanation, ...]
    anchor_x: np.ndarray
    master_seed: int

    @property
    def M(self) -> int:
        return len(self.members)

    def __len__(self) -> int:
        return len(self.members)

    @property
    def degenerate_fraction(self) -> float:
        return sum(m.degenerate for m in self.members) / len(self.members)

    def label_matrix(self, X) -> np.ndarray:
        """``(M, n)`` labels of every member on every row of ``X``."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.array([m.predict(X) for m in self.members])

    def predict_proba(self, X) -> np.ndarray:
        if not self.members:
            raise ValueError("empty ensemble")
        return self.label_matrix(X).mean(axis=0)

    def to_dict(self) -> dict:
        return {
            "anchor_x": [float(v) for v in self.anchor_x],
            "master_seed": int(self.master_seed),
            "M": self.M,
            "members": [m.to_dict() for m in self.members],
        }

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def from_dict(cls, d: dict) -> "EnsembleExplanation":
        anchor = np.array(d["anchor_x"], dtype=float)
        members = []
        for m in d["members"]:
            g = None if m["degenerate_flag"] else SurrogateModel(np.array(m["weights"]), m["bias"])
            members.append(Explanation(g, m["achieved_loss"], 0.0, anchor, m["child_seed"],
                                       m.get("constant_label")))
        return cls(tuple(members), anchor, int(d["master_seed"]))


def qlime_explain(f: LabelSampler, x, cfg: LocalityConfig, reg: float = 0.01, M: int = 200,
                  master_seed: int = 0, *, resample_points: bool = True,
                  workers: int = 1) -> EnsembleExplanation:
    """Run LIME ``M`` times, each with fresh synthetic data and fresh labels.

    Member ``i`` (1-based) uses ``child_seed(master_seed, i)``. With
    ``resample_points=False`` the synthetic points are drawn once (seed index 0)
    and only the labels vary between members.
    """
    if M < 1:
        raise ValueError(f"M must be >= 1, got {M}")
    x = np.asarray(x, dtype=float)
    shared = None if resample_points else sample_local(x, cfg, np.random.default_rng(child_seed(master_seed, 0)))

    def member(i: int) -> Explanation:
        seed = child_seed(master_seed, i)
        if shared is None:
            return lime_explain(f, x, cfg, reg, seed)
        return explain_on_samples(f, x, shared, cfg, reg, np.random.default_rng(seed), seed)

    indices = range(1, M + 1)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            members = list(pool.map(member, indices))
    else:
        members = [member(i) for i in indices]
    return EnsembleExplanation(tuple(members), x, master_seed)


def ensemble_predict_proba(ensemble: EnsembleExplanation, x) -> float:
    """Fraction of members labelling ``x`` as 1."""
    x = np.asarray(x, dtype=float)
    return float(ensemble.predict_proba(x[None, :])[0])


def expected_loss(f: ProbabilityOracle, g, samples, weights, omega: float = 0.0) -> float:
    """Closed-form expectation of the LIME loss over the random labels of ``f``.

    ``f`` maps a stack of points to their label-1 probabilities.
    """
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    weights = np.asarray(weights, dtype=float)
    if samples.shape[0] != weights.shape[0]:
        raise ValueError(f"length mismatch: {samples.shape[0]} samples, {weights.shape[0]} weights")
    p = np.asarray(f(samples), dtype=float)
    pred = g.predict(samples)
    p_disagree = np.where(pred == 1, 1.0 - p, p)
    return float(np.sum(weights * p_disagree) + omega)
