"""Command-line runner: ``simplexcode {certify,train,cluster,gen}``.

Each command takes an optional JSON config file whose keys are checked
against the defaults below; command-line flags override the file. The fully
resolved config is echoed into every JSON output so a run can be repeated
from its own report.

Exit codes: 0 success, 1 certification below 100%, 2 config error,
3 geometry failure, 4 training divergence, 5 degenerate similarity graph.
"""

import argparse
import copy
import os
import sys

import numpy as np

from . import _io
from .clustering import clustering_accuracy, kmeans, similarity_graph, spectral_embed
from .datasets import (
    gen_circle,
    gen_delaunay_model,
    gen_two_moons,
    load_dataset,
    load_idx,
    save_dataset,
)
from .errors import (
    DegenerateGraph,
    DegenerateSimplex,
    GeneralPositionFailure,
    NonFiniteLoss,
    NonUniqueTriangulation,
    NotGeneralPosition,
    SimplexCodeError,
)
from .geometry import save_landmarks_csv
from .kds import IMAGE_LAMBDA, SYNTHETIC_LAMBDA, TrainConfig, train
from .oracle import MAX_ATOMS, certify

EXIT_OK = 0
EXIT_CERTIFY_FAILED = 1
EXIT_CONFIG = 2
EXIT_GEOMETRY = 3
EXIT_DIVERGED = 4
EXIT_DEGENERATE = 5

GENERATORS = ("circle", "moons", "delaunay-model")
DATASET_KINDS = GENERATORS + ("csv", "idx")
DEFAULT_SIGMA = {"circle": 0.01, "moons": 0.05}

CERTIFY_DEFAULTS = {
    "m": 12,
    "d": 2,
    "instances": 100,
    "points": 20,
    "min_weight": 1e-3,
    "metric": "l1",
    "seed": 0,
    "out": "out",
}

GEN_DEFAULTS = {
    "generator": "circle",
    "n": 1000,
    "sigma": None,
    "m": 12,
    "d": 2,
    "min_weight": 1e-3,
    "seed": 0,
    "out": "out",
}

DATASET_DEFAULTS = {
    "kind": "moons",
    "n": 1000,
    "sigma": None,
    "landmarks": 12,
    "d": 2,
    "min_weight": 1e-3,
    "path": None,
    "images": None,
    "labels": None,
    "digits": [0, 3, 4, 6, 7],
    "per_digit": 200,
    "seed": None,
}

TRAIN_DEFAULTS = {
    "lam": None,
    "unroll_depth": 100,
    "step_size": "auto",
    "epochs": 200,
    "batch_size": 128,
    "learning_rate": 0.1,
}

RUN_DEFAULTS = {
    "dataset": DATASET_DEFAULTS,
    "train": TRAIN_DEFAULTS,
    "m": None,
    "seed": 0,
    "out": "out",
}

CLUSTER_DEFAULTS = dict(
    RUN_DEFAULTS, k=None, codes=None, strict=False, eigensolver="lapack"
)


class ConfigError(ValueError):
    pass


def _merge(defaults, given, where="config"):
    """Copy of ``defaults`` updated from ``given``; unknown keys are an error."""
    if not isinstance(given, dict):
        raise ConfigError(f"{where} must be a JSON object")
    unknown = sorted(set(given) - set(defaults))
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(unknown)}")
    out = copy.deepcopy(defaults)
    for key, value in given.items():
        if isinstance(defaults[key], dict):
            out[key] = _merge(defaults[key], value, f"{where}.{key}")
        else:
            out[key] = value
    return out


def _load_config(path, defaults):
    given = {}
    if path is not None:
        if not os.path.isfile(path):
            raise ConfigError(f"config file not found: {path}")
        try:
            given = _io.read_json(path)
        except ValueError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return _merge(defaults, given)


def _int(value, name, low=None):
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        if isinstance(value, float) and value.is_integer():
            value = int(value)
        else:
            raise ConfigError(f"{name} must be an integer, got {value!r}")
    if low is not None and value < low:
        raise ConfigError(f"{name} must be >= {low}, got {value}")
    return int(value)


def _seed(value, name="seed"):
    value = _int(value, name, 0)
    if value >= 2**64:
        raise ConfigError(f"{name} must fit in 64 bits")
    return value


def _number(value, name, low=None):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{name} must be a number, got {value!r}")
    if low is not None and value < low:
        raise ConfigError(f"{name} must be >= {low}, got {value}")
    return float(value)


def _check_out(out):
    if not isinstance(out, str) or not out:
        raise ConfigError("out must be a directory path")
    if os.path.exists(out) and not os.path.isdir(out):
        raise ConfigError(f"output path exists and is not a directory: {out}")
    try:
        os.makedirs(out, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {out}: {exc}") from exc


def _check_file(path, name):
    if not isinstance(path, str) or not os.path.isfile(path):
        raise ConfigError(f"{name}: file not found: {path}")


# config resolution -------------------------------------------------------

def _resolve_dataset(ds, seed):
    kind = ds["kind"]
    if kind not in DATASET_KINDS:
        raise ConfigError(f"unknown dataset kind {kind!r}; expected one of {', '.join(DATASET_KINDS)}")
    ds["seed"] = seed if ds["seed"] is None else _seed(ds["seed"], "dataset.seed")
    ds["n"] = _int(ds["n"], "dataset.n", 2)
    if ds["sigma"] is None:
        ds["sigma"] = DEFAULT_SIGMA.get(kind, 0.0)
    ds["sigma"] = _number(ds["sigma"], "dataset.sigma", 0.0)
    ds["landmarks"] = _int(ds["landmarks"], "dataset.landmarks", 1)
    ds["d"] = _int(ds["d"], "dataset.d", 1)
    ds["min_weight"] = _number(ds["min_weight"], "dataset.min_weight", 0.0)
    ds["per_digit"] = _int(ds["per_digit"], "dataset.per_digit", 1)
    ds["digits"] = sorted({_int(v, "dataset.digits", 0) for v in ds["digits"]})
    if kind == "delaunay-model":
        _check_model_size(ds["landmarks"], ds["d"], "dataset")
    if kind == "csv":
        _check_file(ds["path"], "dataset.path")
    if kind == "idx":
        _check_file(ds["images"], "dataset.images")
        _check_file(ds["labels"], "dataset.labels")
    return ds


def _check_model_size(m, d, where, cap=50):
    if d not in (2, 3):
        raise ConfigError(f"{where}: d must be 2 or 3, got {d}")
    if m < d + 2:
        raise ConfigError(f"{where}: need at least d+2 = {d + 2} landmarks, got {m}")
    if m > cap:
        raise ConfigError(f"{where}: at most {cap} landmarks are supported, got {m}")


def _resolve_run(cfg):
    cfg["seed"] = _seed(cfg["seed"])
    ds = _resolve_dataset(cfg["dataset"], cfg["seed"])
    tr = cfg["train"]
    if tr["lam"] is None:
        tr["lam"] = IMAGE_LAMBDA if ds["kind"] == "idx" else SYNTHETIC_LAMBDA
    if cfg["m"] is None:
        cfg["m"] = 100 if ds["kind"] == "idx" else 16
    cfg["m"] = _int(cfg["m"], "m", 1)
    try:
        TrainConfig(seed=cfg["seed"], **tr)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"train: {exc}") from exc
    _check_out(cfg["out"])
    return cfg


def _build_dataset(ds):
    kind = ds["kind"]
    if kind == "circle":
        return gen_circle(ds["n"], ds["sigma"], ds["seed"])
    if kind == "moons":
        return gen_two_moons(ds["n"], ds["sigma"], ds["seed"])
    if kind == "delaunay-model":
        data, _ = gen_delaunay_model(ds["landmarks"], ds["n"], ds["d"], ds["seed"], ds["min_weight"])
        return data
    if kind == "csv":
        return load_dataset(ds["path"])
    return load_idx(ds["images"], ds["labels"], ds["digits"], ds["per_digit"], ds["seed"])


def _echo(cfg):
    """Resolved config for reports; the output directory is left out so that
    identical runs written to different places produce identical bytes."""
    return {k: v for k, v in cfg.items() if k != "out"}


def _train_config(cfg):
    return TrainConfig(seed=cfg["seed"], **cfg["train"])


# commands ----------------------------------------------------------------

def cmd_certify(cfg):
    for key in ("m", "d", "instances", "points"):
        cfg[key] = _int(cfg[key], key, 1)
    cfg["seed"] = _seed(cfg["seed"])
    cfg["min_weight"] = _number(cfg["min_weight"], "min_weight", 0.0)
    if cfg["metric"] not in ("l1", "l0", "both"):
        raise ConfigError("metric must be 'l1', 'l0' or 'both'")
    _check_model_size(cfg["m"], cfg["d"], "certify", cap=MAX_ATOMS)
    _check_out(cfg["out"])
    report = certify(
        m=cfg["m"], d=cfg["d"], instances=cfg["instances"], points=cfg["points"],
        min_weight=cfg["min_weight"], seed=cfg["seed"],
    )
    report["config"] = _echo(cfg)
    rate = {"l1": report["l1_pass_rate"], "l0": report["l0_pass_rate"], "both": report["pass_rate"]}[cfg["metric"]]
    _io.write_json(os.path.join(cfg["out"], "certify_report.json"), report)
    print(
        f"certify: l1 pass rate {report['l1_pass_rate']:.4f}, "
        f"l0 pass rate {report['l0_pass_rate']:.4f} ({cfg['metric']} gates the exit code)"
    )
    return EXIT_OK if rate == 1.0 else EXIT_CERTIFY_FAILED


def cmd_gen(cfg):
    gen = cfg["generator"]
    if gen not in GENERATORS:
        raise ConfigError(f"unknown generator {gen!r}; expected one of {', '.join(GENERATORS)}")
    cfg["n"] = _int(cfg["n"], "n", 2)
    cfg["seed"] = _seed(cfg["seed"])
    if cfg["sigma"] is None:
        cfg["sigma"] = DEFAULT_SIGMA.get(gen, 0.0)
    cfg["sigma"] = _number(cfg["sigma"], "sigma", 0.0)
    cfg["m"] = _int(cfg["m"], "m", 1)
    cfg["d"] = _int(cfg["d"], "d", 1)
    cfg["min_weight"] = _number(cfg["min_weight"], "min_weight", 0.0)
    if gen == "delaunay-model":
        _check_model_size(cfg["m"], cfg["d"], "gen")
    _check_out(cfg["out"])
    out = cfg["out"]
    if gen == "circle":
        data = gen_circle(cfg["n"], cfg["sigma"], cfg["seed"])
    elif gen == "moons":
        data = gen_two_moons(cfg["n"], cfg["sigma"], cfg["seed"])
    else:
        data, truth = gen_delaunay_model(cfg["m"], cfg["n"], cfg["d"], cfg["seed"], cfg["min_weight"])
        save_landmarks_csv(os.path.join(out, "landmarks.csv"), truth.landmarks)
        _io.write_rows_csv(os.path.join(out, "true_codes.csv"), truth.true_codes.T)
    data.meta = dict(data.meta, config=_echo(cfg))
    save_dataset(out, data)
    print(f"gen: wrote {data.n} {gen} points to {out}")
    return EXIT_OK


def cmd_train(cfg):
    cfg = _resolve_run(cfg)
    data = _build_dataset(cfg["dataset"])
    report = train(data, _train_config(cfg), m=cfg["m"])
    report.extra["run_config"] = _echo(cfg)
    report.save(cfg["out"])
    h = report.loss_history
    print(f"train: loss {h[0]:.6g} -> {h[-1]:.6g} over {len(h)} epochs; artifacts in {cfg['out']}")
    return EXIT_OK


def cmd_cluster(cfg):
    cfg = _resolve_run(cfg)
    if cfg["eigensolver"] not in ("lapack", "jacobi"):
        raise ConfigError("eigensolver must be 'lapack' or 'jacobi'")
    if not isinstance(cfg["strict"], bool):
        raise ConfigError("strict must be true or false")
    if cfg["codes"] is not None:
        _check_file(cfg["codes"], "codes")
    data = _build_dataset(cfg["dataset"])
    if data.labels is None:
        raise ConfigError("clustering needs ground-truth labels in the dataset")
    k = len(np.unique(data.labels)) if cfg["k"] is None else _int(cfg["k"], "k", 2)
    cfg["k"] = k
    if cfg["codes"] is None:
        report = train(data, _train_config(cfg), m=cfg["m"])
        codes = report.codes
    else:
        codes = _io.read_rows_csv(cfg["codes"]).T
        if codes.shape[1] != data.n:
            raise ConfigError(f"codes file has {codes.shape[1]} rows, dataset has {data.n} points")
    U = spectral_embed(similarity_graph(codes), k, eigensolver=cfg["eigensolver"], strict=cfg["strict"])
    kds_labels = kmeans(U, k, seed=cfg["seed"])
    km_labels = kmeans(data.points.T, k, seed=cfg["seed"])
    metrics = {
        "config": _echo(cfg),
        "n": int(data.n),
        "k": k,
        "kds_accuracy": clustering_accuracy(kds_labels, data.labels),
        "km_accuracy": clustering_accuracy(km_labels, data.labels),
    }
    _io.write_rows_csv(os.path.join(cfg["out"], "labels.csv"), kds_labels[:, None])
    _io.write_json(os.path.join(cfg["out"], "metrics.json"), metrics)
    print(f"cluster: KDS accuracy {metrics['kds_accuracy']:.4f}, KM accuracy {metrics['km_accuracy']:.4f}")
    return EXIT_OK


COMMANDS = {
    "certify": (cmd_certify, CERTIFY_DEFAULTS),
    "train": (cmd_train, RUN_DEFAULTS),
    "cluster": (cmd_cluster, CLUSTER_DEFAULTS),
    "gen": (cmd_gen, GEN_DEFAULTS),
}


def _digits(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"digits must be comma separated integers: {text}") from exc


def build_parser():
    parser = argparse.ArgumentParser(prog="simplexcode", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", metavar="PATH", help="JSON config file")
        p.add_argument("--out", metavar="DIR", help="output directory")
        p.add_argument("--seed", type=int, help="64-bit seed")
        p.add_argument("--m", type=int, help="atoms (train, cluster) or landmarks (certify, gen)")
        if name == "gen":
            p.add_argument("generator", nargs="?", help="circle, moons or delaunay-model")
        if name in ("train", "cluster"):
            p.add_argument("--lambda", dest="lam", type=float, help="locality weight")
            p.add_argument("--unroll", type=int, help="encoder depth T")
            p.add_argument("--epochs", type=int)
            p.add_argument("--digits", type=_digits, help="comma separated digit classes for IDX data")
            p.add_argument("--per-digit", type=int, help="images per digit for IDX data")
        if name == "cluster":
            p.add_argument("--k", type=int, help="number of clusters (default: number of labels)")
    return parser


def _apply_flags(cfg, args):
    for flag in ("out", "seed", "m"):
        value = getattr(args, flag, None)
        if value is not None:
            cfg[flag] = value
    if getattr(args, "generator", None) is not None:
        cfg["generator"] = args.generator
    overrides = {"lam": ("train", "lam"), "unroll": ("train", "unroll_depth"),
                 "epochs": ("train", "epochs"), "digits": ("dataset", "digits"),
                 "per_digit": ("dataset", "per_digit"), "k": (None, "k")}
    for flag, (section, key) in overrides.items():
        value = getattr(args, flag, None)
        if value is None:
            continue
        if section is None:
            cfg[key] = value
        else:
            cfg[section][key] = value
    return cfg


def main(argv=None):
    args = build_parser().parse_args(argv)
    fn, defaults = COMMANDS[args.command]
    try:
        cfg = _apply_flags(_load_config(args.config, defaults), args)
        return fn(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (GeneralPositionFailure, NotGeneralPosition, NonUniqueTriangulation, DegenerateSimplex) as exc:
        print(f"geometry failure: {exc}", file=sys.stderr)
        return EXIT_GEOMETRY
    except NonFiniteLoss as exc:
        print(f"training diverged in epoch {exc.epoch}: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except DegenerateGraph as exc:
        print(f"degenerate similarity graph: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except SimplexCodeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
