"""Command line interface: run, figures, validate.

Exit code 0 on success; on failure a single machine-readable line
``error: {"type": ..., "message": ...}`` goes to stderr and the exit code
is nonzero.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace

from .errors import FidsatError
from .experiment import (
    ExperimentResult,
    read_result_csv,
    run_to_directory,
    validate_config,
)


def _load_config(path, output_dir=None, workers=None):
    with open(path) as fh:
        config = validate_config(fh.read())
    if output_dir is not None:
        config = replace(config, output_dir=output_dir)
    if workers is not None:
        config = replace(config, workers=workers)
    return config


def _cmd_run(args):
    config = _load_config(args.config, output_dir=args.output_dir,
                          workers=args.workers)
    if not config.output_dir:
        config = replace(config, output_dir=os.path.splitext(args.config)[0] + ".out")
    result = run_to_directory(config, resume=args.resume)
    print(f"wrote {len(result.rows)} rows to "
          f"{os.path.join(config.output_dir, 'results.csv')}")
    for fit in result.fits:
        print(f"fit: {fit.model} {json.dumps(fit.to_dict()['params'])} "
              f"[{fit.window}]")
    return 0


def _cmd_validate(args):
    config = _load_config(args.config)
    print(f"ok: ensemble={config.ensemble} N={config.dim} "
          f"deltas={list(config.deltas)} seeds={list(config.seeds)} "
          f"perturbation={config.perturbation} estimator={config.estimator} "
          f"window={config.window}")
    return 0


def _cmd_figures(args):
    # rebuilding from the sidecar files alone loses nothing the figures need
    from .figures import emit_figures
    from . import experiment as exp

    result_dir = args.result
    if result_dir.endswith(".csv"):
        result_dir = os.path.dirname(result_dir) or "."
    csv_path = os.path.join(result_dir, "results.csv")
    meta, rows = read_result_csv(csv_path)
    if not rows:
        raise FidsatError(f"{csv_path} holds no result rows")
    config = _reconstruct_config(meta, rows)
    result = ExperimentResult(
        config=config, rows=rows, fits=[],
        series=_read_series(os.path.join(result_dir, "series.csv")),
        ldos=_read_ldos(os.path.join(result_dir, "ldos.csv")),
        lambda_sq=float(meta.get("lambda_sq", "1")),
        provenance=meta,
    )
    result.fits = exp._auto_fits(config, rows, result.lambda_sq)
    out = args.output_dir or result_dir
    for path in emit_figures(result, out):
        print(f"wrote {path}")
    return 0


def _reconstruct_config(meta, rows):
    from .experiment import ExperimentConfig

    first = rows[0]
    deltas = tuple(sorted({r.delta for r in rows}))
    seeds = tuple(sorted({r.seed for r in rows}))
    estimators = {r.estimator for r in rows}
    estimator = "both" if len(estimators) > 1 else next(iter(estimators))
    window = meta.get("window", "2000,2000").split(",")
    return ExperimentConfig(
        ensemble=first.ensemble, dim=first.dim, deltas=deltas, seeds=seeds,
        estimator=estimator, window=(int(window[0]), int(window[1])),
    )


def _read_series(path):
    if not os.path.exists(path):
        return {}
    import csv as _csv

    with open(path, newline="") as fh:
        reader = _csv.reader(fh)
        header = next(reader)
        deltas = [float(h.split("_")[-1]) for h in header[1:]]
        columns = [[] for _ in deltas]
        for row in reader:
            for i, value in enumerate(row[1:]):
                if value:
                    columns[i].append(float(value))
    import numpy as np

    return {d: np.asarray(c) for d, c in zip(deltas, columns)}


def _read_ldos(path):
    if not os.path.exists(path):
        return {}
    import csv as _csv

    import numpy as np

    from .fidelity import LdosHistogram

    widths = None
    with open(path, newline="") as fh:
        first = fh.readline()
        if first.startswith("#"):
            widths = [float(w) for w in first.split("=", 1)[1].split(",")]
            header = fh.readline()
        else:
            header = first
        names = header.strip().split(",")
        deltas = [float(h.split("_")[-1]) for h in names[1:]]
        centers = []
        cols = [[] for _ in deltas]
        for line in fh:
            parts = line.strip().split(",")
            centers.append(float(parts[0]))
            for i, v in enumerate(parts[1:]):
                cols[i].append(float(v))
    centers = np.asarray(centers)
    if len(centers) < 2:
        return {}
    half = 0.5 * (centers[1] - centers[0])
    edges = np.concatenate([centers - half, [centers[-1] + half]])
    out = {}
    for i, d in enumerate(deltas):
        hist = LdosHistogram(bin_edges=edges, weights=np.asarray(cols[i]),
                             source_eigenstate="averaged")
        if widths is not None and not np.isnan(widths[i]):
            hist.fitted_width = widths[i]
        out[d] = hist
    return out


def build_parser():
    parser = argparse.ArgumentParser(
        prog="fidsat",
        description="Fidelity-decay saturation experiments for chaotic maps",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a sweep config")
    p_run.add_argument("config")
    p_run.add_argument("--workers", type=int, default=None,
                       help="parallel workers across sweep cells")
    p_run.add_argument("--resume", action="store_true",
                       help="extend an existing output directory")
    p_run.add_argument("--output-dir", default=None)
    p_run.set_defaults(func=_cmd_run)

    p_fig = sub.add_parser("figures", help="render SVG figures from results")
    p_fig.add_argument("result", help="results.csv path or its directory")
    p_fig.add_argument("--output-dir", default=None)
    p_fig.set_defaults(func=_cmd_figures)

    p_val = sub.add_parser("validate", help="check a config file")
    p_val.add_argument("config")
    p_val.set_defaults(func=_cmd_validate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FidsatError as exc:
        line = json.dumps({"type": type(exc).__name__, "message": str(exc)})
        print(f"error: {line}", file=sys.stderr)
        return 2
    except OSError as exc:
        line = json.dumps({"type": "IoError", "message": str(exc)})
        print(f"error: {line}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
