import itertools

import numpy as np
import pytest

from qlime.data import load_iris_binary, normalize
from qlime.qnn import QnnModel, SpsaConfig, spsa_train
from qlime.surrogate import SurrogateModel

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def iris():
    ds, transform = normalize(load_iris_binary())
    return ds


@pytest.fixture(scope="session")
def trained_model(iris):
    model, _ = spsa_train(QnnModel.initialize(2, 2, seed=0), iris.X, iris.y, SpsaConfig(iterations=300, seed=0))
    return model


class LinearLabeler:
    """Deterministic classifier 1[w.x + b >= 0] with the label-sampler signature."""

    def __init__(self, w, b):
        self.w = np.asarray(w, dtype=float)
        self.b = float(b)
        self.calls = 0

    def proba(self, X):
        return (np.atleast_2d(X) @ self.w + self.b >= 0).astype(float)

    def __call__(self, X, rng):
        self.calls += len(X)
        return self.proba(X).astype(int)


class CountingSampler:
    def __init__(self, model):
        self.model = model
        self.labels_drawn = 0

    def __call__(self, X, rng):
        self.labels_drawn += len(X)
        return self.model.sample_labels(X, rng)


def toy_realizations():
    """3x3 grid (i, j) -> point (i, j); base labels 1[i + j > 2], two random cells."""
    pts = np.array([(i, j) for i in range(3) for j in range(3)], dtype=float)
    base = (pts.sum(axis=1) > 2).astype(int)
    p = base.astype(float)
    random_cells = {2: 0.5, 7: 0.75}  # (0, 2) and (2, 1)
    for k, q in random_cells.items():
        p[k] = q
    out = []
    for bits in itertools.product([0, 1], repeat=len(random_cells)):
        labels = base.copy()
        prob = 1.0
        for (k, q), b in zip(random_cells.items(), bits):
            labels[k] = b
            prob *= q if b else 1 - q
        out.append((labels, prob))
    return pts, p, out


def zero_one_surrogate(pts, labels):
    """Brute-force minimizer of the unweighted 0-1 loss over a dense family of lines."""
    best = None
    for ang in np.linspace(0, 2 * np.pi, 720, endpoint=False):
        w = np.array([np.cos(ang), np.sin(ang)])
        proj = pts @ w
        cuts = np.r_[proj.min() - 1, (np.sort(proj)[:-1] + np.sort(proj)[1:]) / 2, proj.max() + 1]
        for c in cuts:
            g = SurrogateModel(w, -c)
            loss = int(np.sum(g.predict(pts) != labels))
            if best is None or loss < best[0]:
                best = (loss, g)
            if loss == 0:
                return best
    return best


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
