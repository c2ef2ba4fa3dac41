"""Command-line entry point: ``atominterface <command> --config run.json``.

Exit codes: 0 success, 2 configuration or input error, 3 numerical error
(singularity, tracking loss, non-convergence), 4 I/O error.
"""

from __future__ import annotations

import argparse
import os
import sys
import warnings
from dataclasses import asdict
from pathlib import Path

from . import __version__
from .config import (OptimizeJob, PlotJob, RunConfig, SpectrumJob, StorageJob,
                     TransferJob, load_config, load_preset, preset_names, preset_text)
from .errors import ConfigError, NumericalError
from .io import CsvFormatError, write_csv, write_json
from .scatter import spectrum_sweep
from .storage import feasibility_report
from .transfer import optimize, schedule_for, sweep_diagnostics

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4

SPECTRUM_HEADER = ["delta", "T", "R", "re_t", "im_t", "re_r", "im_r", "error"]
DIAGNOSTICS_HEADER = ["eta1", "e1", "e2", "e3", "e4", "e5", "e6", "pop_E1", "pop_E2",
                      "pop_S1", "pop_S2", "pop_P1", "pop_P2", "eps1_pointwise"]
SURFACE_HEADER = ["eta_c", "delta2", "eps1", "eps2", "product"]


def _sidecar(out: Path, suffix: str) -> Path:
    return out.with_name(out.stem + suffix)


# --------------------------------------------------------------------------
# runners: compute first, then hand every file to the writer in order
# --------------------------------------------------------------------------

def run_spectrum(job: SpectrumJob, threads: int = 1):
    points = spectrum_sweep(job.delta_min, job.delta_max, job.n_points, job.params,
                            workers=threads)
    rows = [(p.delta, p.T, p.R, p.t.real, p.t.imag, p.r.real, p.r.imag, p.error or "")
            for p in points]
    return SPECTRUM_HEADER, rows


def run_storage(job: StorageJob) -> dict:
    report = feasibility_report(job.params, vg_variant=job.vg_variant, c_min=job.c_min,
                                window_factor=job.window_factor)
    out = {"version": __version__, "inputs": job.inputs, "vg_variant": job.vg_variant,
           "c_min": job.c_min, "window_factor": job.window_factor}
    out.update(report.to_dict())
    return out


def run_transfer(job: TransferJob):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        schedule = schedule_for(job.system, job.sweep)
        diag = sweep_diagnostics(schedule, job.system)
    messages = [str(w.message) for w in caught]
    pops = diag.populations()
    rows = []
    for k, eta1 in enumerate(diag.eta1):
        rows.append((eta1, *diag.energies[k], pops["E1"][k], pops["E2"][k], pops["S1"][k],
                     pops["S2"][k], pops["P1"][k], pops["P2"][k], diag.eps1_pointwise[k]))
    summary = {
        "version": __version__,
        "system": asdict(job.system),
        "sweep": asdict(job.sweep),
        "eta1_lo": float(diag.eta1[0]),
        "eta1_hi": float(diag.eta1[-1]),
        "eps1": diag.eps1,
        "eps1_eta1": float(diag.eta1[diag.eps1_step]),
        "eps2": diag.eps2,
        "product": diag.product,
        "dark_index": sorted(set(int(i) for i in diag.dark_index)),
        "warnings": messages,
    }
    return DIAGNOSTICS_HEADER, rows, summary


def run_optimize(job: OptimizeJob, threads: int = 1):
    result = optimize(job.template, job.eta_c, job.delta2, job.sweep, workers=threads)
    rows = [(p.eta_c, p.delta2, p.eps1, p.eps2, p.product) for p in result.points]
    b = result.best
    summary = {
        "version": __version__,
        "rates": {"kappa": job.template.kappa, "kappa_in": job.template.kappa_in,
                  "gamma": job.template.gamma},
        "sweep": asdict(job.sweep),
        "grid": {"eta_c": job.eta_c, "delta2": job.delta2},
        "best": asdict(b),
        "n_points": len(result.points),
        "n_not_ok": sum(p.status != "ok" for p in result.points),
        "statuses": sorted({p.status for p in result.points}),
    }
    return SURFACE_HEADER, rows, summary


def run_plot(job: PlotJob, out: Path) -> Path:
    from .plotting import contour_plot, line_plot

    if job.kind == "line":
        return line_plot(job.csv, out, job.x, job.y, job.log_x, job.log_y, job.title)
    return contour_plot(job.csv, out, job.x, job.y[0] if job.y else None, job.z,
                        job.log_x, job.log_y, job.log_z, job.title)


def execute(cfg: RunConfig, out: str | None = None, threads: int | None = None,
            figure: bool | None = None) -> list[Path]:
    """Run one configuration; returns the paths written."""
    out_path = Path(out or cfg.default_output())
    if threads is None:
        n_threads = cfg.resolved_threads()
    else:
        n_threads = threads if threads > 0 else (os.cpu_count() or 1)
    want_figure = cfg.figure if figure is None else figure
    job = cfg.job
    files: list[tuple[str, Path, object]] = []
    fig_args = None

    if cfg.command == "spectrum":
        header, rows = run_spectrum(job, n_threads)
        files.append(("csv", out_path, (header, rows)))
        fig_args = dict(kind="line", x="delta", y=("T", "R"), log_x=False, log_z=False)
    elif cfg.command == "storage":
        files.append(("json", out_path, run_storage(job)))
    elif cfg.command == "transfer":
        header, rows, summary = run_transfer(job)
        for message in summary["warnings"]:
            print(f"warning: {message}", file=sys.stderr)
        files.append(("csv", out_path, (header, rows)))
        files.append(("json", _sidecar(out_path, ".json"), summary))
        fig_args = dict(kind="line", x="eta1", y=(), log_x=True, log_z=False)
    elif cfg.command == "optimize":
        header, rows, summary = run_optimize(job, n_threads)
        files.append(("csv", out_path, (header, rows)))
        files.append(("json", _sidecar(out_path, ".best.json"), summary))
        fig_args = dict(kind="contour", x=None, y=(), log_x=True, log_z=True)
    elif cfg.command == "plot":
        out_path.parent.mkdir(parents=True, exist_ok=True)
        return [run_plot(job, out_path)]

    written = []
    out_path.parent.mkdir(parents=True, exist_ok=True)
    for kind, path, payload in files:
        if kind == "csv":
            write_csv(path, *payload)
        else:
            write_json(path, payload)
        written.append(path)
    if want_figure and fig_args is not None:
        plot = PlotJob(str(out_path), fig_args["kind"], fig_args["x"], fig_args["y"], None,
                       fig_args["log_x"], False, fig_args["log_z"], cfg.name)
        written.append(run_plot(plot, _sidecar(out_path, ".svg")))
    return written


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------

def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--config", metavar="PATH", help="JSON run configuration")
    src.add_argument("--preset", metavar="NAME", help="bundled configuration (see 'presets')")
    common.add_argument("--out", metavar="PATH", help="primary output file")
    common.add_argument("--threads", metavar="N", type=int,
                        help="worker count (0 = one per CPU); overrides the config")
    common.add_argument("--figure", action="store_true", default=None,
                        help="also write an SVG figure next to the output")

    parser = argparse.ArgumentParser(
        prog="atominterface",
        description="Atomic lattice spectra, EIT storage estimates and dark-state transfer.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="run whatever command the config names")
    helps = {
        "spectrum": "transmission/reflection spectrum of an atomic lattice (CSV)",
        "storage": "storage feasibility report (JSON)",
        "transfer": "dark-state transfer diagnostics along one sweep (CSV + JSON)",
        "optimize": "eps1*eps2 surface over (eta_c, delta2) (CSV + best-point JSON)",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[common], help=text)

    plot = sub.add_parser("plot", parents=[common], help="render a CSV from this tool as SVG")
    plot.add_argument("csv", nargs="?", help="input CSV (instead of a plot config)")
    plot.add_argument("--kind", choices=("line", "contour"), default="line")
    plot.add_argument("--x", help="x column")
    plot.add_argument("--y", help="comma-separated y columns (contour: the y axis)")
    plot.add_argument("--z", help="contour value column")
    plot.add_argument("--log-x", action="store_true")
    plot.add_argument("--log-y", action="store_true")
    plot.add_argument("--log-z", action="store_true")
    plot.add_argument("--title")

    presets = sub.add_parser("presets", help="list bundled presets or print one")
    presets.add_argument("name", nargs="?", help="preset to print")
    return parser


def _load(args) -> RunConfig:
    if args.config:
        return load_config(args.config)
    if args.preset:
        return load_preset(args.preset)
    raise ConfigError("one of --config or --preset is required")


def _dispatch(args) -> int:
    if args.command == "presets":
        if args.name:
            sys.stdout.write(preset_text(args.name))
        else:
            print("\n".join(preset_names()))
        return EXIT_OK
    if args.command == "plot" and args.csv:
        if not args.out:
            raise ConfigError("plot needs --out for the SVG path")
        y = tuple(s for s in (args.y or "").split(",") if s)
        job = PlotJob(args.csv, args.kind, args.x, y, args.z, args.log_x, args.log_y,
                      args.log_z, args.title)
        print(run_plot(job, Path(args.out)))
        return EXIT_OK
    cfg = _load(args)
    if args.command != "run" and args.command != cfg.command:
        raise ConfigError(f"configuration is for '{cfg.command}', not '{args.command}'")
    if args.threads is not None and args.threads < 0:
        raise ConfigError("--threads must be >= 0")
    for path in execute(cfg, out=args.out, threads=args.threads, figure=args.figure):
        print(path)
    return EXIT_OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return _dispatch(args)
    except (ConfigError, CsvFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
