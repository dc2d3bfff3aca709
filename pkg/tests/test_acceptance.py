"""Acceptance criteria; each test records one PASS/FAIL line in the terminal summary."""
import itertools
import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, toy_realizations, zero_one_surrogate
from qlime.cli import RunConfig, cmd_band, cmd_train
from qlime.data import load_iris_binary, normalize
from qlime.indecision import (
    EvalGrid,
    find_contour_point,
    find_decisive_point,
    iqr_band,
    local_region_of_indecision,
    region_of_indecision,
)
from qlime.lime import Explanation, lime_explain, lime_loss
from qlime.qlime import EnsembleExplanation, expected_loss
from qlime.qnn import QnnModel, SpsaConfig, accuracy, spsa_gradient, spsa_minimize, spsa_train
from qlime.quantum_sim import AnsatzParams, QuantumState, angle_encode, apply_ansatz, readout_probability
from qlime.surrogate import SurrogateModel


def record(number, name, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] {number:>2}. {name}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def default_run(tmp_path_factory):
    """Default configuration, trained once; the model path feeds the band commands."""
    out = tmp_path_factory.mktemp("acceptance")
    cfg = RunConfig(out=str(out))
    cmd_train(cfg)
    return cfg, out / "model.json", QnnModel.load(out / "model.json")


def test_criterion_01_simulator_soundness():
    t0 = time.perf_counter()
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(1, 5))
        v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
        state = QuantumState(v / np.linalg.norm(v), n)
        params = AnsatzParams(rng.uniform(-np.pi, np.pi, (int(rng.integers(0, 5)), n)))
        worst = max(worst, abs(apply_ansatz(state, params).norm - 1))
    uniform = QuantumState(np.full(4, 0.5), 2)
    cases = [
        readout_probability(QuantumState.zero(2), 0) == 0.0,
        abs(readout_probability(angle_encode([np.pi, 0.0], 1.0, 2), 0) - 1.0) < 1e-15,
        all(abs(readout_probability(uniform, q) - 0.5) < 1e-15 for q in (0, 1)),
    ]
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-10 and all(cases) and elapsed < 1.0
    record(1, "simulator soundness", ok,
           f"max norm error {worst:.1e}, analytic cases {sum(cases)}/3, {elapsed:.2f}s")


def test_criterion_02_spsa_estimator():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    theta = np.array([1.0, 1.0])
    est = np.mean([spsa_gradient(lambda t: float(t @ t), theta, 0.1, rng)[0] for _ in range(10_000)], axis=0)
    res = spsa_minimize(lambda t: float(t @ t), theta / math.sqrt(2), SpsaConfig(iterations=500, seed=1))
    elapsed = time.perf_counter() - t0
    rel = np.abs(est - 2.0) / 2.0
    final = float(np.linalg.norm(res.theta))
    ok = bool(np.all(rel < 0.02)) and final < 0.1 and elapsed < 5.0
    record(2, "SPSA estimator", ok,
           f"mean gradient {est.round(4).tolist()}, final |theta| {final:.3g}, {elapsed:.2f}s")


def test_criterion_03_qnn_training():
    t0 = time.perf_counter()
    ds, _ = normalize(load_iris_binary())
    accs = []
    for seed in range(10):
        model, _ = spsa_train(QnnModel.initialize(2, 2, seed=seed), ds.X, ds.y, SpsaConfig(iterations=300, seed=seed))
        accs.append(accuracy(model, ds.X, ds.y))
    elapsed = time.perf_counter() - t0
    hits = sum(a >= 0.9 for a in accs)
    ok = hits >= 8 and elapsed < 60
    record(3, "QNN training", ok, f"{hits}/10 seeds reach accuracy >= 0.90 (min {min(accs):.2f}), {elapsed:.1f}s")


def test_criterion_04_lime_consistent_at_decisive_point(default_run):
    cfg, _, model = default_run
    f = model.predict_proba_batch
    lo, hi = cfg.data.lo, cfg.data.hi
    x = find_decisive_point(f, EvalGrid.uniform((lo, lo), (hi, hi), cfg.grid_resolution))
    p = float(f(x[None])[0])
    lcfg = cfg.locality_config(cfg.locality.explain_samples)
    normals = []
    for seed in range(20):
        ex = lime_explain(model, x, lcfg, cfg.reg, seed)
        normals.append(None if ex.degenerate else ex.surrogate.normal)
    if any(n is None for n in normals):
        worst = 0.0
    else:
        worst = min(abs(float(a @ b)) for a, b in itertools.combinations(normals, 2))
    ok = max(p, 1 - p) > 0.99 and worst > 0.95
    record(4, "LIME consistency at a decisive point", ok, f"p={p:.4f}, min pairwise |cos| {worst:.4f} over 20 seeds")


def test_criterion_05_lime_random_at_indecisive_point(default_run):
    cfg, _, model = default_run
    f = model.predict_proba_batch
    lo, hi = cfg.data.lo, cfg.data.hi
    x = find_contour_point(f, [(lo + hi) / 2] * 2, ((lo, lo), (hi, hi)))
    p = float(f(x[None])[0])
    lcfg = cfg.locality_config(cfg.locality.explain_samples)
    disagree = 0
    for seed in range(50):
        ex = lime_explain(model, x, lcfg, cfg.reg, seed)
        fresh = model.sample_labels(x[None], np.random.default_rng([seed, 1]))[0]
        disagree += int(ex.predict(x[None])[0] != fresh)
    rate = disagree / 50
    ok = 0.45 < p < 0.55 and 0.35 <= rate <= 0.65
    record(5, "LIME randomness at an indecisive point", ok, f"p={p:.4f}, disagreement {rate:.2f} over 50 seeds")


def test_criterion_06_expected_loss_consistency(default_run):
    _, _, model = default_run
    t0 = time.perf_counter()
    rng = np.random.default_rng(10)
    Z = rng.uniform(0.5, 2.5, (10, 2))
    w = rng.uniform(0.1, 1.0, 10)
    g = SurrogateModel([1.0, -1.0], 0.1)
    p = model.predict_proba_batch(Z)
    n = 10_000
    losses = np.array([lime_loss(rng.random(10) < p, g, Z, w, 0.05) for _ in range(n)])
    exact = expected_loss(model.predict_proba_batch, g, Z, w, 0.05)
    se = losses.std(ddof=1) / math.sqrt(n)
    gap = abs(losses.mean() - exact)
    elapsed = time.perf_counter() - t0
    ok = gap < 3 * se and elapsed < 5.0
    record(6, "expected-loss consistency", ok, f"|MC - exact| = {gap:.2e} vs 3 SE = {3 * se:.2e}, {elapsed:.2f}s")


def test_criterion_07_ensemble_region_equals_exact_region():
    pts, p, realizations = toy_realizations()
    members = []
    fits = True
    for labels, prob in realizations:
        loss, g = zero_one_surrogate(pts, labels)
        fits &= loss == 0
        members += [Explanation(g, 0.0, 0.0, np.ones(2), 0)] * round(prob * 8)
    ens = EnsembleExplanation(tuple(members), np.ones(2), 0)
    grid = EvalGrid(np.arange(3.0), np.arange(3.0))
    same = []
    for eps in (0.1, 0.2, 0.3, 0.4):
        exact = region_of_indecision(lambda X: p, grid, eps).mask
        local = local_region_of_indecision(ens, grid, eps).mask
        same.append(np.array_equal(exact, local))
    ok = fits and all(same)
    record(7, "B = R on an exhaustively labelled toy grid", ok,
           f"zero-loss surrogates for all {len(realizations)} realizations: {fits}, masks equal at {sum(same)}/4 eps")


def test_criterion_08_band_verdicts(default_run, tmp_path):
    cfg, model_path, _ = default_run
    t0 = time.perf_counter()
    inside = outside = 0
    for seed in range(10):
        for point in ("indecisive", "decisive"):
            run = RunConfig(out=str(tmp_path / f"{point}{seed}"), seed=seed)
            v = cmd_band(run, model_path, point)
            if point == "indecisive":
                inside += v["in_band"]
            else:
                outside += not v["in_band"]
    elapsed = time.perf_counter() - t0
    ok = inside >= 9 and outside >= 9 and elapsed < 120
    record(8, "band verdicts", ok,
           f"indecisive point in band {inside}/10, decisive point outside {outside}/10, {elapsed:.1f}s")


def test_criterion_09_band_determinism(default_run, tmp_path):
    _, model_path, _ = default_run
    dirs = []
    for run in ("a", "b"):
        out = tmp_path / run
        cmd_band(RunConfig(out=str(out), seed=123), model_path, "indecisive")
        dirs.append(out)
    names = sorted(p.name for p in dirs[0].iterdir() if p.suffix in (".csv", ".json"))
    same = [n for n in names if (dirs[0] / n).read_bytes() == (dirs[1] / n).read_bytes()]
    ok = len(names) >= 5 and same == names
    record(9, "band determinism", ok, f"{len(same)}/{len(names)} CSV/JSON artifacts byte-identical")


def test_criterion_10_quartile_rule():
    members = tuple(Explanation(SurrogateModel([0.0, 1.0], -h), 0.0, 0.0, np.zeros(2), 0) for h in (3, 1, 4, 2))
    band = iqr_band(EnsembleExplanation(members, np.zeros(2), 0), [0.0])
    got = (float(band.q1[0]), float(band.q3[0]))
    record(10, "quartile rule", got == (1.5, 3.5), f"(Q1, Q3) = {got}")
