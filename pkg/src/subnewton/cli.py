"""Command-line interface.

    subnewton run --dataset data.libsvm --format libsvm --classes 10 \
        --method subnewton-100 --lambda 1e-3 --cg-tol 1e-4 --cg-max-iters 10 \
        --epochs 100 --split 0.8 --seed 0 --out results/

    subnewton run --dataset data.libsvm --classes 10 --method adam \
        --lr grid --batch-size 128 --epochs 100 --out results/

    subnewton lipschitz --dataset data.libsvm --classes 10

Options may also come from a flat key-value config file (`key = value`
per line, keys named like the long flags); explicit command-line flags
win over the file.
"""

import argparse
import sys

from .bench import (
    ExperimentSpec,
    SolverRun,
    estimate_lipschitz,
    load_dataset,
    run_experiment,
    NEWTON_METHODS,
    FIRST_ORDER_METHODS,
)
from .dataset import normalize_columns
from .errors import SubnewtonError
from .softmax import SoftmaxProblem

_METHODS = tuple(NEWTON_METHODS) + FIRST_ORDER_METHODS


def _parse_batch_size(text):
    v = float(text)
    if v <= 0:
        raise argparse.ArgumentTypeError(f"batch size must be positive, got {text}")
    return v if v < 1 else int(v)


def _parse_lr(text):
    if text == "grid":
        return "grid"
    v = float(text)
    if v <= 0:
        raise argparse.ArgumentTypeError(f"learning rate must be positive, got {text}")
    return v


def _parse_bool(text):
    if isinstance(text, bool):
        return text
    lowered = str(text).strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


# key -> (converter, default); shared by config files and flag resolution
_OPTIONS = {
    "dataset": (str, None),
    "format": (str, "libsvm"),
    "classes": (int, None),
    "method": (str, None),
    "lambda": (float, 1e-3),
    "cg-tol": (float, 1e-4),
    "cg-max-iters": (int, 10),
    "epochs": (int, 100),
    "batch-size": (_parse_batch_size, 128),
    "lr": (_parse_lr, None),
    "split": (float, 0.8),
    "seed": (int, 0),
    "out": (str, "."),
    "normalize": (_parse_bool, True),
    "figures": (_parse_bool, True),
    "target-acc": (float, None),
    "epsilon": (float, 1e-8),
    "n-features": (int, None),
    "iters": (int, 200),
}


def read_config(path):
    """Flat `key = value` file; '#' starts a comment."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise SubnewtonError(f"{path}:{lineno}: expected 'key = value'")
            key, _, raw = line.partition("=")
            key = key.strip().replace("_", "-")
            if key not in _OPTIONS:
                raise SubnewtonError(f"{path}:{lineno}: unknown option {key!r}")
            converter, _ = _OPTIONS[key]
            values[key] = converter(raw.strip())
    return values


def _resolve(args, config, key):
    attr = "lambda_" if key == "lambda" else key.replace("-", "_")
    cli_value = getattr(args, attr, None)
    if cli_value is not None:
        return cli_value
    if key in config:
        return config[key]
    return _OPTIONS[key][1]


def _add_common(parser):
    parser.add_argument("--config", help="flat key=value config file; flags override it")
    parser.add_argument("--dataset", help="path to the data file")
    parser.add_argument("--format", choices=("libsvm", "csv"), help="data file format")
    parser.add_argument("--classes", type=int, help="number of classes C")
    parser.add_argument("--lambda", dest="lambda_", type=float, help="L2 coefficient")
    parser.add_argument("--n-features", type=int, help="override the feature dimension")
    parser.add_argument("--seed", type=int, help="master seed")
    parser.add_argument(
        "--normalize",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="scale columns to unit norm before use (default: on)",
    )


def build_parser():
    parser = argparse.ArgumentParser(
        prog="subnewton",
        description="Sub-sampled Newton-CG softmax classification benchmark",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="train one solver setting and write trace CSVs")
    _add_common(run)
    run.add_argument("--method", choices=_METHODS, help="solver to run")
    run.add_argument("--cg-tol", type=float, help="CG relative residual tolerance")
    run.add_argument("--cg-max-iters", type=int, help="CG iteration cap")
    run.add_argument("--epochs", type=int, help="outer iterations / epochs")
    run.add_argument(
        "--batch-size",
        type=_parse_batch_size,
        help="first-order batch size: a count like 128, or a fraction like 0.2",
    )
    run.add_argument("--lr", type=_parse_lr, help="learning rate value, or 'grid'")
    run.add_argument("--split", type=float, help="train fraction of the split")
    run.add_argument("--out", help="output directory")
    run.add_argument("--target-acc", type=float, help="test accuracy for time-to-target")
    run.add_argument("--epsilon", type=float, help="gradient norm stopping tolerance")
    run.add_argument(
        "--figures",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="render PNG figures next to the CSVs (default: on)",
    )

    lip = sub.add_parser("lipschitz", help="estimate L and the condition number")
    _add_common(lip)
    lip.add_argument("--iters", type=int, help="power iteration count (default 200)")

    return parser


def _require(value, name):
    if value is None:
        raise SubnewtonError(f"--{name} is required (flag or config file)")
    return value


def cmd_run(args):
    config = read_config(args.config) if args.config else {}
    get = lambda key: _resolve(args, config, key)
    method = _require(get("method"), "method")
    lr = get("lr")
    if method in FIRST_ORDER_METHODS and lr is None:
        raise SubnewtonError(f"{method} needs --lr (a value or 'grid')")

    solver = SolverRun(
        method=method,
        learning_rate=lr if method in FIRST_ORDER_METHODS else None,
        batch_size=get("batch-size"),
        epochs=get("epochs"),
        cg_tol=get("cg-tol"),
        cg_max_iters=get("cg-max-iters"),
        epsilon=get("epsilon"),
        seed=get("seed"),
    )
    spec = ExperimentSpec(
        dataset_path=_require(get("dataset"), "dataset"),
        fmt=get("format"),
        n_classes=_require(get("classes"), "classes"),
        solvers=[solver],
        normalize=get("normalize"),
        split_fraction=get("split"),
        seed=get("seed"),
        lam=get("lambda"),
        out_dir=get("out"),
        target_accuracy=get("target-acc"),
        figures=get("figures"),
        n_features=get("n-features"),
    )
    result = run_experiment(spec)
    for run in result.runs:
        final = run.trace.records[-1]
        print(
            f"{run.label}: {run.trace.iterations} iters, "
            f"objective {final.objective:.6g}, best test acc {run.trace.best_test_acc:.4f}, "
            f"stopped: {run.trace.reason}"
            + (f" [{run.classification}]" if run.classification else "")
        )
    print(f"summary: {result.summary_path}")
    for path in result.figure_paths:
        print(f"figure: {path}")
    return 0


def cmd_lipschitz(args):
    config = read_config(args.config) if args.config else {}
    get = lambda key: _resolve(args, config, key)
    ds = load_dataset(
        _require(get("dataset"), "dataset"),
        get("format"),
        _require(get("classes"), "classes"),
        get("n-features"),
    )
    if get("normalize"):
        ds = normalize_columns(ds)
    lam = get("lambda")
    L = estimate_lipschitz(SoftmaxProblem(ds, lam), iters=get("iters"), seed=get("seed"))
    print(f"n = {ds.n_rows}, p = {ds.n_features}, C = {ds.n_classes}")
    print(f"L = {L:.12g}")
    if lam > 0:
        print(f"(L + lambda) / lambda = {(L + lam) / lam:.12g}")
    else:
        print("(L + lambda) / lambda undefined for lambda = 0")
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args)
        if args.command == "lipschitz":
            return cmd_lipschitz(args)
    except (SubnewtonError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
