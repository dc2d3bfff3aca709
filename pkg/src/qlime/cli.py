"""Command-line entry point: ``qlime {train,explain,band,grid}``.

Exit codes: 0 success, 2 input or configuration error, 3 degenerate result
(band undefined, training diverged).
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .data import DataError, Dataset, iris_path, load_csv, normalize, subset_binary
from .indecision import (
    BandUndefinedError,
    BandUnreliableWarning,
    EvalGrid,
    find_contour_point,
    find_decisive_point,
    iqr_band,
    local_region_of_indecision,
    point_in_band,
    region_of_indecision,
)
from .lime import LocalityConfig, lime_explain
from .plotting import LABEL_COLORS, SvgPlot
from .qlime import qlime_explain
from .qnn import QnnModel, SpsaConfig, TrainingError, accuracy, spsa_train
from .quantum_sim import EncodingError, ParameterError
from .surrogate import VerticalBoundary, boundary_curve

EXIT_OK, EXIT_INPUT, EXIT_DEGENERATE = 0, 2, 3


class ConfigError(ValueError):
    pass


@dataclass
class DataSection:
    path: str | None = None  # None selects the bundled Iris table
    class_a: str | None = None
    class_b: str | None = None
    feature_i: str | None = None
    feature_j: str | None = None
    lo: float = 0.0
    hi: float = float(np.pi)


@dataclass
class QnnSection:
    n_qubits: int = 2
    n_layers: int = 2
    encoding_scale: float = 1.0


@dataclass
class SpsaSection:
    iterations: int = 300
    a: float | None = None
    c: float = 0.1
    A: float | None = None
    alpha: float = 0.602
    gamma: float = 0.101
    target_step: float = 0.1


@dataclass
class LocalitySection:
    sigma: float = 1.0
    sample_stddev: float = 0.75
    n_samples: int = 500  # per ensemble member
    explain_samples: int = 5000  # single-realization explanation


@dataclass
class RunConfig:
    data: DataSection = field(default_factory=DataSection)
    qnn: QnnSection = field(default_factory=QnnSection)
    spsa: SpsaSection = field(default_factory=SpsaSection)
    locality: LocalitySection = field(default_factory=LocalitySection)
    reg: float = 0.01
    members: int = 200
    epsilon: float = 0.1
    grid_resolution: int = 100
    decisive_threshold: float = 0.99
    seed: int = 0
    workers: int = 1
    out: str = "out"

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        sections = {"data": DataSection, "qnn": QnnSection, "spsa": SpsaSection, "locality": LocalitySection}
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kw = {}
        for k, v in d.items():
            if k in sections:
                if not isinstance(v, dict):
                    raise ConfigError(f"config section {k!r} must be an object")
                names = {f.name for f in dataclasses.fields(sections[k])}
                bad = set(v) - names
                if bad:
                    raise ConfigError(f"unknown keys in {k!r}: {sorted(bad)}")
                kw[k] = sections[k](**v)
            else:
                kw[k] = v
        cfg = cls(**kw)
        try:
            cfg.validate()
        except TypeError as exc:
            raise ConfigError(f"bad value type in config ({exc})") from None
        return cfg

    @classmethod
    def load(cls, path) -> "RunConfig":
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"no such config file: {path}")
        try:
            return cls.from_dict(json.loads(path.read_text()))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def validate(self) -> None:
        if self.members < 1:
            raise ConfigError("members must be >= 1")
        if not 0 < self.epsilon < 0.5:
            raise ConfigError("epsilon must lie in (0, 0.5)")
        if self.grid_resolution < 2:
            raise ConfigError("grid_resolution must be >= 2")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.spsa.iterations < 0:
            raise ConfigError("spsa.iterations must be >= 0")
        try:
            self.locality_config(self.locality.n_samples)
            self.locality_config(self.locality.explain_samples)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def spsa_config(self) -> SpsaConfig:
        s = self.spsa
        return SpsaConfig(iterations=s.iterations, a=s.a, c=s.c, A=s.A, alpha=s.alpha, gamma=s.gamma,
                          seed=self.seed, target_step=s.target_step)

    def locality_config(self, n_samples: int) -> LocalityConfig:
        d = self.data
        box = ((d.lo,) * 2, (d.hi,) * 2)
        return LocalityConfig(sigma=self.locality.sigma, sample_stddev=self.locality.sample_stddev,
                              n_samples=n_samples, bounds=box)


# -- helpers --

def load_dataset(cfg: RunConfig):
    """Normalized binary dataset and the transform from raw feature units."""
    d = cfg.data
    table = load_csv(d.path if d.path is not None else iris_path())
    ds = subset_binary(
        table,
        d.class_a or table.class_names[0],
        d.class_b or table.class_names[1],
        d.feature_i or table.feature_names[0],
        d.feature_j or table.feature_names[1],
    )
    norm, transform = normalize(ds, d.lo, d.hi)
    return ds, norm, transform


def load_model(path) -> QnnModel:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"no such model file: {path}")
    try:
        return QnnModel.load(path)
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise ConfigError(f"{path}: not a model file ({exc})") from None


def eval_grid(cfg: RunConfig) -> EvalGrid:
    lo, hi = cfg.data.lo, cfg.data.hi
    return EvalGrid.uniform((lo, lo), (hi, hi), cfg.grid_resolution)


def resolve_point(point: str, cfg: RunConfig, model: QnnModel, transform) -> tuple[np.ndarray, np.ndarray | None]:
    """Parse ``--point``. Returns (normalized point, raw point or None).

    ``"x1,x2"`` is in raw feature units. ``indecisive`` walks onto the p = 1/2
    contour from the box centre; ``decisive`` picks the grid cell with
    max(p, 1 - p) above the threshold closest to the region of indecision.
    """
    f = model.predict_proba_batch
    lo, hi = cfg.data.lo, cfg.data.hi
    try:
        if point == "indecisive":
            return find_contour_point(f, [(lo + hi) / 2] * 2, ((lo, lo), (hi, hi))), None
        if point == "decisive":
            return find_decisive_point(f, eval_grid(cfg), cfg.decisive_threshold, cfg.epsilon), None
    except ValueError as exc:
        raise ConfigError(f"cannot select a {point} point: {exc}") from None
    try:
        raw = np.array([float(v) for v in point.split(",")])
    except ValueError:
        raise ConfigError(f"bad --point {point!r}; expected 'x1,x2', 'indecisive' or 'decisive'") from None
    if raw.shape != (2,) or not np.all(np.isfinite(raw)):
        raise ConfigError(f"bad --point {point!r}; expected two finite numbers")
    x = transform.apply(raw)
    tol = 1e-9 * (hi - lo)
    if np.any(x < lo - tol) or np.any(x > hi + tol):
        raise ConfigError(f"point {point} lies outside the dataset's feature bounds")
    return np.clip(x, lo, hi), raw


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_csv(path: Path, header, rows) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) for v in r])


def write_json(path: Path, doc) -> None:
    path.write_text(json.dumps(doc, indent=2) + "\n")


def floats(a) -> list:
    return [float(v) for v in np.ravel(a)]


def _outdir(cfg: RunConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _axes(norm: Dataset):
    return norm.feature_names[0] + " (normalized)", norm.feature_names[1] + " (normalized)"


# -- commands --

def cmd_train(cfg: RunConfig) -> dict:
    _, norm, transform = load_dataset(cfg)
    out = _outdir(cfg)
    q = cfg.qnn
    model = QnnModel.initialize(q.n_qubits, q.n_layers, seed=cfg.seed, encoding_scale=q.encoding_scale)
    model, result = spsa_train(model, norm.X, norm.y, cfg.spsa_config())
    model.save(out / "model.json")
    write_csv(out / "train_loss.csv", ["iteration", "loss"], enumerate(result.losses))
    summary = {
        "accuracy": accuracy(model, norm.X, norm.y),
        "best_loss": float(result.best_loss),
        "best_iteration": int(result.best_iteration),
        "iterations": cfg.spsa.iterations,
        "seed": cfg.seed,
        "n_rows": len(norm),
        "class_names": list(norm.class_names),
        "feature_names": list(norm.feature_names),
        "normalization": transform.to_dict(),
    }
    write_json(out / "train_summary.json", summary)
    return summary


def _boundary_rows(g, x1_values, lo, hi):
    if g is None:
        return []
    c = boundary_curve(g, x1_values)
    if isinstance(c, VerticalBoundary):
        return [(c.x1, lo), (c.x1, hi)]
    return list(zip(x1_values, c))


def cmd_explain(cfg: RunConfig, model_path, point: str) -> dict:
    _, norm, transform = load_dataset(cfg)
    model = load_model(model_path)
    x, raw = resolve_point(point, cfg, model, transform)
    out = _outdir(cfg)
    grid = eval_grid(cfg)
    lcfg = cfg.locality_config(cfg.locality.explain_samples)
    ex = lime_explain(model, x, lcfg, cfg.reg, cfg.seed)

    write_csv(out / "samples.csv", ["x1", "x2", "label", "weight"],
              ((z[0], z[1], int(t), w) for z, t, w in zip(ex.samples, ex.labels, ex.weights)))
    doc = {
        "anchor_x": floats(x),
        "anchor_raw": None if raw is None else floats(raw),
        "oracle_p": float(model.predict_proba_batch(x[None])[0]),
        "n_samples": lcfg.n_samples,
        **ex.to_dict(),
    }
    write_json(out / "surrogate.json", doc)
    lo, hi = cfg.data.lo, cfg.data.hi
    rows = _boundary_rows(ex.surrogate, grid.x1_values, lo, hi)
    write_csv(out / "boundary.csv", ["x1", "x2"], rows)

    xl, yl = _axes(norm)
    plot = SvgPlot((lo, hi), (lo, hi), title="single-realization LIME", xlabel=xl, ylabel=yl)
    stoch = model.sample_labels(grid.points(), np.random.default_rng(cfg.seed)).reshape(grid.shape)
    plot.heatmap(grid.x1_values, grid.x2_values, stoch, opacity=0.35)
    plot.scatter(ex.samples, [LABEL_COLORS[t] for t in ex.labels], radius=1.5)
    if rows:
        r = np.array(rows)
        plot.line(r[:, 0], r[:, 1], width=2.5)
    plot.marker(x)
    plot.save(out / "explain.svg")
    return doc


def cmd_band(cfg: RunConfig, model_path, point: str) -> dict:
    _, norm, transform = load_dataset(cfg)
    model = load_model(model_path)
    x, raw = resolve_point(point, cfg, model, transform)
    out = _outdir(cfg)
    grid = eval_grid(cfg)
    lcfg = cfg.locality_config(cfg.locality.n_samples)
    ens = qlime_explain(model, x, lcfg, cfg.reg, cfg.members, cfg.seed, workers=cfg.workers)
    ens.save(out / "ensemble.json")

    exact = region_of_indecision(model.predict_proba_batch, grid, cfg.epsilon)
    pts = grid.points()
    write_csv(out / "region.csv", ["x1", "x2", "p", "in_region"],
              ((a, b, p, m) for (a, b), p, m in zip(pts, exact.probabilities.ravel(), exact.mask.ravel())))
    local = local_region_of_indecision(ens, grid, cfg.epsilon)
    write_csv(out / "local_region.csv", ["x1", "x2", "p", "in_region"],
              ((a, b, p, m) for (a, b), p, m in zip(pts, local.probabilities.ravel(), local.mask.ravel())))

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BandUnreliableWarning)
        band = iqr_band(ens, grid.x1_values)
    write_csv(out / "band.csv", ["x1", "q1", "q3"], zip(band.x1_values, band.q1, band.q3))
    j = band.column(float(x[0]))
    verdict = {
        "anchor_x": floats(x),
        "anchor_raw": None if raw is None else floats(raw),
        "oracle_p": float(model.predict_proba_batch(x[None])[0]),
        "in_band": point_in_band(band, x),
        "column_x1": float(band.x1_values[j]),
        "q1": float(band.q1[j]),
        "q3": float(band.q3[j]),
        "n_used": band.n_used,
        "excluded_fraction": band.excluded_fraction,
        "unreliable": band.unreliable,
        "degenerate_fraction": ens.degenerate_fraction,
        "members": cfg.members,
        "epsilon": cfg.epsilon,
        "master_seed": cfg.seed,
        "exact_region_fraction": exact.fraction,
        "local_region_fraction": local.fraction,
    }
    write_json(out / "verdict.json", verdict)

    lo, hi = cfg.data.lo, cfg.data.hi
    xl, yl = _axes(norm)
    plot = SvgPlot((lo, hi), (lo, hi), title=f"IQR band, M={cfg.members}", xlabel=xl, ylabel=yl)
    plot.heatmap(grid.x1_values, grid.x2_values, exact.probabilities)
    plot.scatter(norm.X, [LABEL_COLORS[t] for t in norm.y], radius=3, stroke="black")
    plot.band(band.x1_values, band.q1, band.q3)
    plot.line(band.x1_values, band.q1, color="#333333", width=1.0, dash="4 3")
    plot.line(band.x1_values, band.q3, color="#333333", width=1.0, dash="4 3")
    plot.marker(x)
    plot.save(out / "band.svg")
    return verdict


def cmd_grid(cfg: RunConfig, model_path, labels: bool = False) -> dict:
    _, norm, _ = load_dataset(cfg)
    model = load_model(model_path)
    out = _outdir(cfg)
    grid = eval_grid(cfg)
    pts = grid.points()
    p = model.predict_proba_batch(pts)
    write_csv(out / "grid.csv", ["x1", "x2", "p"], ((a, b, q) for (a, b), q in zip(pts, p)))
    lo, hi = cfg.data.lo, cfg.data.hi
    xl, yl = _axes(norm)
    plot = SvgPlot((lo, hi), (lo, hi), title="QNN label-1 probability", xlabel=xl, ylabel=yl)
    plot.heatmap(grid.x1_values, grid.x2_values, p.reshape(grid.shape))
    plot.scatter(norm.X, [LABEL_COLORS[t] for t in norm.y], radius=3, stroke="black")
    plot.save(out / "grid.svg")
    summary = {"shape": list(grid.shape), "p_min": float(p.min()), "p_max": float(p.max())}
    if labels:
        draw = model.sample_labels(pts, np.random.default_rng(cfg.seed))
        write_csv(out / "labels.csv", ["x1", "x2", "label"], ((a, b, int(t)) for (a, b), t in zip(pts, draw)))
        summary["label_seed"] = cfg.seed
    return summary


# -- argument parsing --

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
    common.add_argument("--out", help="output directory")
    common.add_argument("--epsilon", type=float, help="indecision threshold in (0, 0.5)")
    common.add_argument("--members", type=int, help="ensemble size M")
    common.add_argument("--samples", type=int, help="synthetic samples per ensemble member")
    common.add_argument("--explain-samples", type=int, help="synthetic samples for a single explanation")
    common.add_argument("--iterations", type=int, help="SPSA iterations")
    common.add_argument("--resolution", type=int, help="evaluation grid points per axis")
    common.add_argument("--workers", type=int, help="threads for ensemble members")

    parser = argparse.ArgumentParser(prog="qlime", description="Q-LIME explanations for a simulated QNN.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("train", parents=[common], help="train the QNN with SPSA")
    for name, helptext in (("explain", "single-realization LIME at a point"),
                           ("band", "Q-LIME ensemble, IQR band and verdict at a point")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--model", help="model JSON (default: <out>/model.json)")
        p.add_argument("--point", required=True, help="'x1,x2' in raw feature units, or indecisive|decisive")
    p = sub.add_parser("grid", parents=[common], help="probability grid of the trained QNN")
    p.add_argument("--model", help="model JSON (default: <out>/model.json)")
    p.add_argument("--labels", action="store_true", help="also write one sampled label per cell")
    return parser


def config_from_args(args) -> RunConfig:
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    overrides = {"seed": args.seed, "out": args.out, "epsilon": args.epsilon, "members": args.members,
                 "grid_resolution": args.resolution, "workers": args.workers}
    for k, v in overrides.items():
        if v is not None:
            setattr(cfg, k, v)
    if args.samples is not None:
        cfg.locality.n_samples = args.samples
    if args.explain_samples is not None:
        cfg.locality.explain_samples = args.explain_samples
    if args.iterations is not None:
        cfg.spsa.iterations = args.iterations
    cfg.validate()
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        model_path = getattr(args, "model", None) or Path(cfg.out) / "model.json"
        if args.command == "train":
            result = cmd_train(cfg)
        elif args.command == "explain":
            result = cmd_explain(cfg, model_path, args.point)
        elif args.command == "band":
            result = cmd_band(cfg, model_path, args.point)
        else:
            result = cmd_grid(cfg, model_path, args.labels)
    except (ConfigError, DataError, EncodingError, ParameterError) as exc:
        print(f"qlime: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except BandUndefinedError as exc:
        print(f"qlime: band undefined: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except TrainingError as exc:
        print(f"qlime: training failed: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    print(json.dumps(result, indent=2))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
