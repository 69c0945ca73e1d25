"""Command-line interface.

Subcommands: gen, fit, transform, reconstruct, benchmark, knn, curvature,
curve, mi. Every report-emitting command writes a delimited CSV and, unless
--no-plot is given, a PNG figure next to it. Exit codes: 0 success, 1 usage
error, 2 data/model error.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from . import benchmark as bench
from . import data as datamod
from . import geometry, infotheory, plots
from .exceptions import PpaError
from .model import (
    FitConfig,
    fit,
    load_model,
    reconstruct,
    save_model,
    transform,
)
from .optim import DescentOptions


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit(2); we want 1
        raise UsageError(f"{self.prog}: {message}")


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",")]


def build_parser() -> _Parser:
    parser = _Parser(prog="ppa", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic dataset CSV")
    p.add_argument("--kind", required=True, choices=["parabola2d", "helix3d", "helix4d"])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sigma", type=float, default=0.1, help="noise standard deviation")
    p.add_argument("--kappa", type=float, default=1.0, help="parabola curvature")
    p.add_argument("--offset", type=float, default=0.0, help="parabola vertical offset")
    p.add_argument("--a", type=float, default=2.0, help="helix radius")
    p.add_argument("--b", type=float, default=0.8, help="helix pitch / 2 pi")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("fit", help="fit a model to a CSV dataset")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True, help="model file to write (.ppa)")
    p.add_argument("--strategy", default="pca", choices=["pca", "gd"])
    p.add_argument("--degree", type=int, default=None, help="fixed polynomial degree")
    p.add_argument("--min-degree", type=int, default=1)
    p.add_argument("--max-degree", type=int, default=5)
    p.add_argument("--cv-fraction", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--normalize", action="store_true", help="map each column to [0,1] first")
    p.add_argument("--gd-iters", type=int, default=200)
    p.add_argument("--gd-step", type=float, default=0.1)
    p.add_argument("--gd-tol", type=float, default=1e-7)
    p.add_argument("--gd-restarts", type=int, default=0)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("transform", help="map a CSV through a fitted model")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--normalize", action="store_true")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("reconstruct", help="truncate to q coordinates and invert")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--keep", type=int, required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--normalize", action="store_true")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("benchmark", help="relative-MSE dimensionality reduction report")
    p.add_argument("--input", required=True)
    p.add_argument("--output", default=None, help="default: <input stem>.benchmark.csv")
    p.add_argument("--repeats", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--gd", action="store_true", help="include the gradient-descent strategy")
    p.add_argument("--max-dims", type=int, default=None, help="use only the first N columns")
    p.add_argument("--min-degree", type=int, default=1)
    p.add_argument("--max-degree", type=int, default=5)
    p.add_argument("--no-normalize", action="store_true")
    p.add_argument("--dataset", default=None, help="dataset id in the report")
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("knn", help="k-NN accuracy under three metrics")
    p.add_argument("--input", required=True, help="CSV with the class label in the last column")
    p.add_argument("--label-col", type=int, default=-1)
    p.add_argument("--train-per-class", type=int, default=50)
    p.add_argument("--k", type=_int_list, default=[1, 5, 15], help="comma-separated k values")
    p.add_argument(
        "--metrics",
        default="euclidean,mahalanobis,ppa-whitened",
        help="comma-separated metric names",
    )
    p.add_argument("--repeats", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--min-degree", type=int, default=1)
    p.add_argument("--max-degree", type=int, default=5)
    p.add_argument("--output", default=None, help="default: <input stem>.knn.csv")
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=cmd_knn)

    p = sub.add_parser("curvature", help="frames and curvatures along the first feature")
    p.add_argument("--model", required=True)
    p.add_argument("--alpha-min", type=float, required=True)
    p.add_argument("--alpha-max", type=float, required=True)
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--output", required=True)
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=cmd_curvature)

    p = sub.add_parser("curve", help="principal curve/surface/volume grid as CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--dims", type=int, default=1, help="number of gridded coordinates")
    p.add_argument("--grid", type=int, default=25, help="grid points per coordinate")
    p.add_argument("--input", default=None, help="CSV whose projections set the grid ranges")
    p.add_argument("--lo", type=float, default=None, help="grid lower bound (all coords)")
    p.add_argument("--hi", type=float, default=None, help="grid upper bound (all coords)")
    p.add_argument("--normalize", action="store_true")
    p.add_argument("--output", required=True)
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("mi", help="multi-information reduction report")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--baseline", default=None, choices=["pca"], help="extra baseline row")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--normalize", action="store_true")
    p.add_argument("--output", default=None, help="default: <input stem>.mi.csv")
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=cmd_mi)

    return parser


def _load_values(path, normalize: bool) -> np.ndarray:
    return datamod.load_dataset(path, normalize=normalize).values


def _default_output(input_path: str, suffix: str, explicit) -> Path:
    if explicit:
        return Path(explicit)
    p = Path(input_path)
    return p.with_name(p.stem + suffix)


def _fig_path(csv_path: Path) -> Path:
    return csv_path.with_suffix(".png")


def _fit_config(args) -> FitConfig:
    descent = None
    if args.strategy == "gd":
        descent = DescentOptions(
            max_iters=args.gd_iters,
            initial_step=args.gd_step,
            grad_tol=args.gd_tol,
            restarts=args.gd_restarts,
            seed=args.seed,
        )
    return FitConfig(
        degree=args.degree,
        degree_range=(args.min_degree, args.max_degree),
        cv_fraction=args.cv_fraction,
        strategy=args.strategy,
        seed=args.seed,
        descent=descent,
    )


def cmd_gen(args) -> int:
    if args.kind == "parabola2d":
        X = datamod.gen_parabola2d(
            args.kappa, args.sigma, args.n, seed=args.seed, offset=args.offset
        )
    elif args.kind == "helix3d":
        X = datamod.gen_helix3d(args.a, args.b, args.sigma, args.n, seed=args.seed)
    else:
        X, _ = datamod.gen_helix4d(args.a, args.b, args.sigma, args.n, seed=args.seed)
    datamod.save_csv(args.output, X)
    print(f"wrote {X.shape[1]} samples x {X.shape[0]} dims to {args.output}")
    return 0


def cmd_fit(args) -> int:
    X = _load_values(args.input, args.normalize)
    model = fit(X, _fit_config(args))
    save_model(model, args.output)
    degrees = [s.degree for s in model.steps]
    print(f"fitted {model.strategy} model: dims={model.dims} degrees={degrees}")
    print(f"wrote {args.output}")
    return 0


def cmd_transform(args) -> int:
    model = load_model(args.model)
    X = _load_values(args.input, args.normalize)
    datamod.save_csv(args.output, transform(model, X))
    print(f"wrote {args.output}")
    return 0


def cmd_reconstruct(args) -> int:
    model = load_model(args.model)
    X = _load_values(args.input, args.normalize)
    R = transform(model, X)
    datamod.save_csv(args.output, reconstruct(model, R, args.keep))
    print(f"wrote {args.output}")
    return 0


def cmd_benchmark(args) -> int:
    dataset = datamod.load_dataset(args.input, normalize=not args.no_normalize)
    X = dataset.values
    if args.max_dims is not None:
        X = X[: args.max_dims]
    name = args.dataset or Path(args.input).stem
    config = FitConfig(degree_range=(args.min_degree, args.max_degree))
    report = bench.rel_mse_benchmark(
        X,
        config=config,
        repeats=args.repeats,
        seed=args.seed,
        include_gd=args.gd,
        dataset=name,
    )
    out = _default_output(args.input, ".benchmark.csv", args.output)
    bench.write_benchmark_csv(report, out)
    print(f"wrote {out}")
    if not args.no_plot:
        plots.save_benchmark_figure(report, _fig_path(out))
        print(f"wrote {_fig_path(out)}")
    return 0


def cmd_knn(args) -> int:
    dataset = datamod.load_dataset(args.input, normalize=False)
    values = dataset.values
    label_row = args.label_col % values.shape[0]
    y = values[label_row]
    X = np.delete(values, label_row, axis=0)
    metrics = [m.strip() for m in args.metrics.split(",")]
    rows = bench.knn_benchmark(
        X,
        y,
        train_per_class=args.train_per_class,
        ks=args.k,
        metrics=metrics,
        repeats=args.repeats,
        seed=args.seed,
        fit_config=FitConfig(degree_range=(args.min_degree, args.max_degree)),
    )
    out = _default_output(args.input, ".knn.csv", args.output)
    bench.write_knn_csv(rows, out)
    print(f"wrote {out}")
    if not args.no_plot:
        plots.save_knn_figure(rows, _fig_path(out))
        print(f"wrote {_fig_path(out)}")
    return 0


def cmd_curvature(args) -> int:
    model = load_model(args.model)
    if args.steps < 2:
        raise UsageError("need at least 2 grid steps")
    alphas = np.linspace(args.alpha_min, args.alpha_max, args.steps)
    points, frames, chis = geometry.curvature_profile(model, alphas)
    d = model.dims
    names = {0: "tangent", 1: "normal", 2: "binormal"}
    header = ["alpha"]
    header += [f"x{i + 1}" for i in range(d)]
    for v in range(d):
        base = names.get(v, f"frame{v + 1}")
        header += [f"{base}_{i + 1}" for i in range(d)]
    header += [f"chi{i + 1}" for i in range(d - 1)]
    out = Path(args.output)
    with open(out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i, a in enumerate(alphas):
            row = [repr(float(a))]
            row += [repr(float(v)) for v in points[i]]
            row += [repr(float(v)) for v in frames[i].ravel()]
            row += [repr(float(v)) for v in chis[i]]
            writer.writerow(row)
    print(f"wrote {out}")
    if not args.no_plot:
        plots.save_curvature_figure(alphas, chis, _fig_path(out))
        print(f"wrote {_fig_path(out)}")
    return 0


def cmd_curve(args) -> int:
    model = load_model(args.model)
    if not 1 <= args.dims <= model.dims:
        raise UsageError(f"--dims must be in [1, {model.dims}]")
    if args.grid < 2:
        raise UsageError("--grid must be at least 2")
    background = None
    if args.input is not None:
        X = _load_values(args.input, args.normalize)
        R = transform(model, X)
        bounds = [
            (float(np.quantile(R[i], 0.01)), float(np.quantile(R[i], 0.99)))
            for i in range(args.dims)
        ]
        background = X
    elif args.lo is not None and args.hi is not None:
        bounds = [(args.lo, args.hi)] * args.dims
    else:
        raise UsageError("provide either --input or both --lo and --hi")
    axes = [np.linspace(lo, hi, args.grid) for lo, hi in bounds]
    coords, points = geometry.principal_grid(model, axes)
    out = Path(args.output)
    with open(out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [f"alpha{i + 1}" for i in range(args.dims)]
            + [f"x{i + 1}" for i in range(model.dims)]
        )
        for c, pt in zip(coords, points):
            writer.writerow([repr(float(v)) for v in c] + [repr(float(v)) for v in pt])
    print(f"wrote {out}")
    if not args.no_plot:
        plots.save_curve_figure(points, _fig_path(out), background=background)
        print(f"wrote {_fig_path(out)}")
    return 0


def cmd_mi(args) -> int:
    model = load_model(args.model)
    X = _load_values(args.input, args.normalize)
    entries = [
        {
            "method": "ppa" if model.strategy == "pca-based" else "ppa-gd",
            "delta_i_bits_per_dim": infotheory.multi_info_reduction(
                X, transform(model, X)
            ),
        }
    ]
    if args.baseline == "pca":
        baseline = fit(X, FitConfig(degree=1, seed=args.seed))
        entries.append(
            {
                "method": "pca",
                "delta_i_bits_per_dim": infotheory.multi_info_reduction(
                    X, transform(baseline, X)
                ),
            }
        )
    out = _default_output(args.input, ".mi.csv", args.output)
    with open(out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", "delta_i_bits_per_dim", "n", "estimator"])
        for e in entries:
            writer.writerow(
                [e["method"], repr(e["delta_i_bits_per_dim"]), X.shape[1], infotheory.ESTIMATOR]
            )
    print(f"wrote {out}")
    if not args.no_plot:
        plots.save_mi_figure(entries, _fig_path(out))
        print(f"wrote {_fig_path(out)}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except (PpaError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def run() -> None:
    sys.exit(main())
