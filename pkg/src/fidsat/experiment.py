"""Declarative experiment sweeps: config parsing, the runner, result files.

A config is a flat key = value text file (lists are comma separated, '#'
starts a comment). The runner builds one map per seed, decomposes it once,
then for every perturbation strength decomposes the perturbed map, forms
the overlap matrix, and evaluates the configured saturation estimators
over the selected initial eigenstates. Identical config text produces a
byte-identical results table (the timestamp header line excepted).
"""

from __future__ import annotations

import csv
import datetime
import hashlib
import io
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import __version__
from .analysis import (
    FitResult,
    SaturationCurve,
    ensemble_beta,
    fit_lorentzian,
    fit_power_law,
    select_fgr_window,
    strong_perturbation_floor,
)
from .ensembles import (
    KickedTopParams,
    kicked_top,
    make_coe,
    oe_system,
    perturbation_generator_variance,
    perturbation_unitary,
    qubit_perturbation,
    sample_cue,
    spin_perturbation,
)
from .errors import (
    ConfigParseError,
    ConfigSemanticError,
    ExperimentError,
    OutputExistsError,
)
from .fidelity import fidelity_spectral_batch, ipr_all, ldos
from .linalg import certify_unitary, overlap_matrix, spectral_decompose

ENSEMBLES = ("CUE", "COE", "QKT", "QKT-oe")
ESTIMATORS = ("ipr", "time-average")

DEFAULT_WINDOW = (2000, 2000)
DEFAULT_BINS = 101
SHORT_SERIES_STEPS = 512  # series length kept for figures on ipr-only runs

RESULT_COLUMNS = ("ensemble", "N", "seed", "delta", "estimator",
                  "f_inf_mean", "f_inf_stderr", "n_eigenstates")


@dataclass(frozen=True)
class ExperimentConfig:
    ensemble: str
    dim: int
    deltas: tuple
    seeds: tuple
    j: float | None = None
    kick: float = 12.0
    perturbation: str = "qubit"            # qubit | spin
    eigenstates: object = "all"            # "all" or ("sample", count, seed)
    window: tuple = DEFAULT_WINDOW
    estimator: str = "both"                # ipr | time-average | both
    bins: int = DEFAULT_BINS
    output_dir: str | None = None
    workers: int = 1

    @property
    def estimators(self):
        return ESTIMATORS if self.estimator == "both" else (self.estimator,)


@dataclass(frozen=True)
class ResultRow:
    ensemble: str
    dim: int
    seed: int
    delta: float
    estimator: str
    f_inf_mean: float
    f_inf_stderr: float
    n_eigenstates: int


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    rows: list
    fits: list
    series: dict           # delta -> eigenstate-averaged F(n), first seed
    ldos: dict             # delta -> LdosHistogram, first seed
    lambda_sq: float
    provenance: dict


# ---------------------------------------------------------------------------
# config parsing

def _parse_list(text, line_no, kind=float):
    items = [t.strip() for t in text.split(",") if t.strip()]
    if not items:
        raise ConfigParseError("empty list", line=line_no)
    try:
        return tuple(kind(t) for t in items)
    except ValueError as exc:
        raise ConfigParseError(str(exc), line=line_no) from exc


def _is_power_of_two(n):
    return n >= 1 and (n & (n - 1)) == 0


def validate_config(text):
    """Parse config text, apply defaults, and reject contradictions."""
    raw = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigParseError("expected 'key = value'", line=line_no)
        key, value = stripped.split("=", 1)
        key = key.strip().lower()
        if key in raw:
            raise ConfigParseError(f"duplicate key {key!r}", line=line_no)
        raw[key] = (value.strip(), line_no)

    def take(key, default=None):
        if key in raw:
            return raw.pop(key)[0]
        return default

    ensemble = take("ensemble")
    if ensemble is None:
        raise ConfigSemanticError("config must set 'ensemble'")
    if ensemble not in ENSEMBLES:
        raise ConfigSemanticError(
            f"unknown ensemble {ensemble!r}; expected one of {ENSEMBLES}"
        )

    dim_text = take("dim")
    j_text = take("j")
    kick = float(take("k", 12.0))
    j = None
    if ensemble in ("QKT", "QKT-oe"):
        if j_text is not None:
            j = float(j_text)
        elif dim_text is not None:
            n = int(dim_text)
            # for the full top N = 2j + 1; for the odd subspace N = j
            j = (n - 1) / 2.0 if ensemble == "QKT" else float(n)
        else:
            raise ConfigSemanticError(f"{ensemble} config needs 'dim' or 'j'")
        if ensemble == "QKT":
            dim = int(round(2 * j + 1))
        else:
            jr = int(round(j))
            if abs(j - jr) > 1e-12 or jr % 2 != 0:
                raise ConfigSemanticError(
                    "QKT-oe needs an even integer j: the odd-parity eigenspace "
                    f"of exp(-i pi Jy) has dimension j only then (got j={j})"
                )
            dim = jr
    else:
        if dim_text is None:
            raise ConfigSemanticError(f"{ensemble} config needs 'dim'")
        dim = int(dim_text)
        if dim < 2:
            raise ConfigSemanticError("dim must be >= 2")

    default_pert = "spin" if ensemble == "QKT" else "qubit"
    perturbation = take("perturbation", default_pert)
    if perturbation not in ("qubit", "spin"):
        raise ConfigSemanticError(f"unknown perturbation form {perturbation!r}")
    if perturbation == "qubit" and not _is_power_of_two(dim):
        raise ConfigSemanticError(
            f"qubit-form perturbation needs a power-of-two dimension, got {dim}"
        )

    if "deltas" not in raw:
        raise ConfigSemanticError("config must set 'deltas'")
    deltas_text, line_no = raw.pop("deltas")
    deltas = _parse_list(deltas_text, line_no, float)
    if any(d < 0 for d in deltas) or any(
        b <= a for a, b in zip(deltas, deltas[1:])
    ):
        raise ConfigSemanticError("deltas must be non-negative and strictly increasing")

    if "seeds" not in raw:
        raise ConfigSemanticError("config must set 'seeds'")
    seeds_text, line_no = raw.pop("seeds")
    seeds = _parse_list(seeds_text, line_no, int)

    eig_text = take("eigenstates", "all")
    if eig_text == "all":
        eigenstates = "all"
    elif eig_text.startswith("sample:"):
        parts = eig_text.split(":")
        if len(parts) != 3:
            raise ConfigSemanticError("eigenstate sampling syntax: sample:COUNT:SEED")
        count, sseed = int(parts[1]), int(parts[2])
        if not 1 <= count <= dim:
            raise ConfigSemanticError(f"sample count must be in [1, {dim}]")
        eigenstates = ("sample", count, sseed)
    else:
        raise ConfigSemanticError(f"bad eigenstates value {eig_text!r}")

    window_text = take("window")
    if window_text is None:
        window = DEFAULT_WINDOW
    else:
        parts = _parse_list(window_text, 0, int)
        if len(parts) != 2 or parts[0] < 0 or parts[1] < 1:
            raise ConfigSemanticError("window must be 'start, count' with count >= 1")
        window = (parts[0], parts[1])

    estimator = take("estimator", "both")
    if estimator not in ("ipr", "time-average", "both"):
        raise ConfigSemanticError(f"unknown estimator {estimator!r}")

    bins = int(take("bins", DEFAULT_BINS))
    if bins < 8:
        raise ConfigSemanticError("bins must be >= 8")

    output_dir = take("output_dir")
    workers = int(take("workers", 1))
    if workers < 1:
        raise ConfigSemanticError("workers must be >= 1")

    if raw:
        key, (_, line_no) = next(iter(raw.items()))
        raise ConfigParseError(f"unknown key {key!r}", line=line_no)

    return ExperimentConfig(
        ensemble=ensemble, dim=dim, deltas=deltas, seeds=seeds, j=j, kick=kick,
        perturbation=perturbation, eigenstates=eigenstates, window=window,
        estimator=estimator, bins=bins, output_dir=output_dir, workers=workers,
    )


def config_hash(config):
    """Hash of the physics-defining fields (output_dir and workers excluded)."""
    parts = [
        f"ensemble={config.ensemble}",
        f"dim={config.dim}",
        f"j={config.j}",
        f"k={config.kick:.12g}",
        "deltas=" + ",".join(f"{d:.12g}" for d in config.deltas),
        "seeds=" + ",".join(str(s) for s in config.seeds),
        f"perturbation={config.perturbation}",
        f"eigenstates={config.eigenstates}",
        f"window={config.window}",
        f"estimator={config.estimator}",
        f"bins={config.bins}",
    ]
    return hashlib.sha256("\n".join(parts).encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# runner

def build_map(config, seed):
    """The unperturbed map whose eigenstates are the initial states."""
    if config.ensemble == "CUE":
        return sample_cue(config.dim, seed)
    if config.ensemble == "COE":
        return make_coe(sample_cue(config.dim, seed))
    params = KickedTopParams(j=config.j, k=config.kick)
    if config.ensemble == "QKT":
        return kicked_top(params)
    return oe_system(params).restricted  # QKT-oe: certified sector map


def perturbation_spec(config, delta):
    if config.perturbation == "qubit":
        n_qubits = config.dim.bit_length() - 1
        return qubit_perturbation(n_qubits, delta)
    if config.ensemble in ("QKT", "QKT-oe"):
        return spin_perturbation(config.j, delta)
    return spin_perturbation((config.dim - 1) / 2.0, delta)


def _selected_columns(config):
    if config.eigenstates == "all":
        return None, config.dim
    _, count, sseed = config.eigenstates
    rng = np.random.Generator(np.random.PCG64(sseed))
    cols = np.sort(rng.choice(config.dim, size=count, replace=False))
    return cols, count


def _series_steps(config):
    start, count = config.window
    if "time-average" in config.estimators:
        return start + count
    return SHORT_SERIES_STEPS


def _run_cell(u_matrix, dec, config, delta, columns, want_series):
    """One (map, delta) cell: decompose the perturbed map and estimate.

    Returns (per-estimator stats, eigenstate-averaged series or None,
    ldos histogram or None). Pure; safe to run in a worker process.
    """
    spec = perturbation_spec(config, delta)
    up = perturbation_unitary(spec)
    pert = certify_unitary(up.matrix @ u_matrix, provenance="composed")
    dec_p = spectral_decompose(pert)
    ov = overlap_matrix(dec, dec_p)

    stats = {}
    series = None
    if "ipr" in config.estimators:
        vals = ipr_all(ov, columns=columns)
        stats["ipr"] = (float(vals.mean()),
                        float(vals.std(ddof=1) / np.sqrt(len(vals)))
                        if len(vals) > 1 else 0.0)
    if "time-average" in config.estimators:
        start, count = config.window
        f = fidelity_spectral_batch(ov, start + count - 1, columns=columns)
        window_means = f[start:start + count].mean(axis=0)
        stats["time-average"] = (float(window_means.mean()),
                                 float(window_means.std(ddof=1)
                                       / np.sqrt(len(window_means)))
                                 if len(window_means) > 1 else 0.0)
        if want_series:
            series = f.mean(axis=1)
    elif want_series:
        f = fidelity_spectral_batch(ov, _series_steps(config) - 1, columns=columns)
        series = f.mean(axis=1)

    hist = ldos(ov, m="all", bins=config.bins) if want_series else None
    return stats, series, hist


def _cell_task(args):
    return _run_cell(*args)


def _iter_cell_outputs(tasks, workers):
    """Yield cell outputs in task order, optionally from a process pool.

    Results are consumed lazily so that completed cells reach the caller
    (and can be flushed) even when a later cell fails.
    """
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            yield from pool.map(_cell_task, tasks)
    else:
        for task in tasks:
            yield _cell_task(task)


def run_experiment(config, skip_cells=(), progress=None):
    """Execute a sweep and return the in-memory result.

    ``skip_cells`` is a set of (seed, delta) pairs already present in a
    resumed output; their rows are omitted here and merged by the caller.
    """
    skip = set(skip_cells)
    columns, n_eig = _selected_columns(config)
    lambda_sq = perturbation_generator_variance(perturbation_spec(config, 0.0))

    rows = []
    series = {}
    ldos_hists = {}
    try:
        for seed_idx, seed in enumerate(config.seeds):
            if all((seed, d) in skip for d in config.deltas):
                continue
            u = build_map(config, seed)
            dec = spectral_decompose(u)
            first_seed = seed_idx == 0
            todo = [d for d in config.deltas if (seed, d) not in skip]
            tasks = [
                (u.matrix, dec, config, delta, columns, first_seed)
                for delta in todo
            ]
            outputs = _iter_cell_outputs(tasks, config.workers)
            for delta in todo:
                try:
                    stats, cell_series, hist = next(outputs)
                except Exception as exc:
                    raise ExperimentError(
                        f"cell failed at seed={seed} delta={delta:g}: {exc}",
                        seed=seed, delta=delta,
                    ) from exc
                for est, (mean, err) in stats.items():
                    rows.append(ResultRow(
                        ensemble=config.ensemble, dim=config.dim, seed=seed,
                        delta=delta, estimator=est, f_inf_mean=mean,
                        f_inf_stderr=err, n_eigenstates=n_eig,
                    ))
                if cell_series is not None:
                    series[delta] = cell_series
                if hist is not None:
                    ldos_hists[delta] = hist
                if progress:
                    progress(seed, delta)
    except ExperimentError:
        # flush whatever exists before propagating
        if config.output_dir and rows:
            partial = _assemble(config, rows, series, ldos_hists, lambda_sq,
                                fits=[])
            write_result(partial, config.output_dir, overwrite=True)
        raise

    fits = _auto_fits(config, rows, lambda_sq)
    return _assemble(config, rows, series, ldos_hists, lambda_sq, fits)


def _assemble(config, rows, series, ldos_hists, lambda_sq, fits):
    rows = sorted(rows, key=lambda r: (r.seed, r.delta, r.estimator))
    for hist in ldos_hists.values():
        if hist.fitted_width is None:
            try:
                hist.fitted_width = fit_lorentzian(hist).params["width"]
            except Exception:
                hist.fitted_width = None
    provenance = {
        "config_hash": config_hash(config),
        "tool_version": __version__,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    return ExperimentResult(config=config, rows=rows, fits=fits, series=series,
                            ldos=ldos_hists, lambda_sq=lambda_sq,
                            provenance=provenance)


def mean_curve(result, estimator="ipr"):
    """Seed-averaged saturation curve for one estimator."""
    config = result.config
    by_delta = {}
    for row in result.rows:
        if row.estimator == estimator:
            by_delta.setdefault(row.delta, []).append(row.f_inf_mean)
    deltas = sorted(by_delta)
    f = [float(np.mean(by_delta[d])) for d in deltas]
    return SaturationCurve(
        deltas=np.array(deltas), f_inf=np.array(f), ensemble=config.ensemble,
        dim=config.dim, lambda_sq=result.lambda_sq,
    )


def _auto_fits(config, rows, lambda_sq):
    fits = []
    for est in config.estimators:
        by_delta = {}
        for row in rows:
            if row.estimator == est:
                by_delta.setdefault(row.delta, []).append(row.f_inf_mean)
        if len(by_delta) < 4:
            continue
        deltas = sorted(by_delta)
        f = [float(np.mean(by_delta[d])) for d in deltas]
        try:
            curve = SaturationCurve(
                deltas=np.array(deltas), f_inf=np.array(f),
                ensemble=config.ensemble, dim=config.dim, lambda_sq=lambda_sq,
            )
        except ValueError:
            continue
        window = select_fgr_window(curve)
        if window is None:
            continue
        try:
            fit = fit_power_law(curve, window[0], window[1])
        except Exception:
            continue
        fits.append(FitResult(
            model=fit.model, params=fit.params, residual=fit.residual,
            window=f"estimator={est}; {fit.window}", degenerate=fit.degenerate,
        ))
    return fits


# ---------------------------------------------------------------------------
# result files

def _format(x):
    return f"{x:.12g}"


def result_csv_text(result, timestamp=None):
    config = result.config
    buf = io.StringIO()
    buf.write("# fidsat results v1\n")
    buf.write(f"# config_hash = {result.provenance['config_hash']}\n")
    buf.write(f"# tool_version = {result.provenance['tool_version']}\n")
    ts = timestamp if timestamp is not None else result.provenance["timestamp"]
    buf.write(f"# timestamp = {ts}\n")
    buf.write(f"# lambda_sq = {_format(result.lambda_sq)}\n")
    buf.write(f"# window = {config.window[0]},{config.window[1]}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RESULT_COLUMNS)
    for r in result.rows:
        writer.writerow([r.ensemble, r.dim, r.seed, _format(r.delta),
                         r.estimator, _format(r.f_inf_mean),
                         _format(r.f_inf_stderr), r.n_eigenstates])
    return buf.getvalue()


def write_result(result, output_dir, overwrite=False):
    """Write results.csv, fits.json, series.csv, and ldos.csv."""
    os.makedirs(output_dir, exist_ok=True)
    path = os.path.join(output_dir, "results.csv")
    if os.path.exists(path) and not overwrite:
        raise OutputExistsError(
            f"{path} already exists; pass --resume to extend it"
        )
    with open(path, "w", newline="") as fh:
        fh.write(result_csv_text(result))

    import json

    floor_beta = ensemble_beta(result.config.ensemble)
    floor = strong_perturbation_floor(floor_beta, result.config.dim)
    with open(os.path.join(output_dir, "fits.json"), "w") as fh:
        json.dump({
            "config_hash": result.provenance["config_hash"],
            "tool_version": result.provenance["tool_version"],
            "lambda_sq": result.lambda_sq,
            "fits": [f.to_dict() for f in result.fits],
            "floor_check": {
                "beta": floor_beta,
                "floor": floor,
                "top_delta_f_inf": _top_delta_f_inf(result),
            },
        }, fh, indent=2, sort_keys=True)

    if result.series:
        deltas = sorted(result.series)
        length = max(len(result.series[d]) for d in deltas)
        with open(os.path.join(output_dir, "series.csv"), "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["n"] + [f"f_delta_{_format(d)}" for d in deltas])
            for n in range(length):
                row = [n]
                for d in deltas:
                    s = result.series[d]
                    row.append(_format(s[n]) if n < len(s) else "")
                writer.writerow(row)

    if result.ldos:
        deltas = sorted(result.ldos)
        first = result.ldos[deltas[0]]
        with open(os.path.join(output_dir, "ldos.csv"), "w", newline="") as fh:
            widths = ",".join(
                _format(result.ldos[d].fitted_width)
                if result.ldos[d].fitted_width is not None else "nan"
                for d in deltas
            )
            fh.write(f"# fitted_widths = {widths}\n")
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["bin_center"]
                            + [f"w_delta_{_format(d)}" for d in deltas])
            for i, x in enumerate(first.centers):
                writer.writerow([_format(x)]
                                + [_format(result.ldos[d].weights[i])
                                   for d in deltas])
    return path


def _top_delta_f_inf(result):
    top = max(result.config.deltas)
    vals = [r.f_inf_mean for r in result.rows if r.delta == top]
    return float(np.mean(vals)) if vals else None


def read_result_csv(path):
    """Read a results.csv back into (meta dict, list of ResultRow)."""
    meta = {}
    rows = []
    with open(path, newline="") as fh:
        header = None
        for line in fh:
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, value = body.split("=", 1)
                    meta[key.strip()] = value.strip()
                continue
            if header is None:
                header = [h.strip() for h in line.strip().split(",")]
                if tuple(header) != RESULT_COLUMNS:
                    raise ValueError(f"unexpected result columns {header}")
                continue
            parts = line.strip().split(",")
            if len(parts) != len(RESULT_COLUMNS):
                continue
            rows.append(ResultRow(
                ensemble=parts[0], dim=int(parts[1]), seed=int(parts[2]),
                delta=float(parts[3]), estimator=parts[4],
                f_inf_mean=float(parts[5]), f_inf_stderr=float(parts[6]),
                n_eigenstates=int(parts[7]),
            ))
    return meta, rows


def run_to_directory(config, resume=False):
    """Run a sweep into config.output_dir honoring resume semantics."""
    if not config.output_dir:
        raise ConfigSemanticError("config has no output_dir")
    path = os.path.join(config.output_dir, "results.csv")
    skip = set()
    existing = []
    if os.path.exists(path):
        if not resume:
            raise OutputExistsError(
                f"{path} already exists; pass --resume to extend it or choose "
                "another output directory"
            )
        meta, existing = read_result_csv(path)
        if meta.get("config_hash") != config_hash(config):
            raise OutputExistsError(
                f"{path} was produced by a different config "
                f"(hash {meta.get('config_hash')} != {config_hash(config)})"
            )
        done = {}
        for row in existing:
            done.setdefault((row.seed, row.delta), set()).add(row.estimator)
        needed = set(config.estimators)
        skip = {cell for cell, ests in done.items() if needed <= ests}
    result = run_experiment(config, skip_cells=skip)
    if existing:
        keep = [r for r in existing if (r.seed, r.delta) in skip
                and r.estimator in config.estimators]
        merged = sorted(keep + result.rows,
                        key=lambda r: (r.seed, r.delta, r.estimator))
        result.rows = merged
        result.fits = _auto_fits(config, merged, result.lambda_sq)
    write_result(result, config.output_dir, overwrite=True)
    return result
