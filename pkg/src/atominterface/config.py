"""Run configuration: one JSON document per run.

Layout::

    {
      "command": "spectrum" | "storage" | "transfer" | "optimize" | "plot",
      "description": "...",          # free text, ignored
      "threads": 1,                  # 0 = one per CPU
      "output": "result.csv",        # primary output; --out overrides
      "figure": false,               # also render an SVG next to the output
      "params": {...},               # mirrors the module's parameter type
      "sweep": {...}, "grid": {...}, "plot": {...}
    }

Unknown keys are rejected by name and every physical invariant is checked
here, before any computation starts.  Laboratory frequencies may be given
either as ``*_rad_per_s`` or as ``*_over_2pi_hz``, never both.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .core import RateSet, dimensionless, kappa_from_Q
from .errors import ConfigError
from .scatter import ScatterParams
from .storage import StorageParams
from .transfer import SweepSpec, TwoCellSystem

COMMANDS = ("spectrum", "storage", "transfer", "optimize", "plot")
_TOP = {"command", "description", "threads", "output", "figure",
        "params", "sweep", "grid", "plot"}
_SECTIONS = {
    "spectrum": {"params", "sweep"},
    "storage": {"params"},
    "transfer": {"params", "sweep"},
    "optimize": {"params", "sweep", "grid"},
    "plot": {"plot"},
}
_DEFAULT_EXT = {"spectrum": ".csv", "storage": ".json", "transfer": ".csv",
                "optimize": ".csv", "plot": ".svg"}


# --------------------------------------------------------------------------
# helpers
# --------------------------------------------------------------------------

def _section(doc, name, allowed, required=()):
    raw = doc.get(name, {})
    if not isinstance(raw, dict):
        raise ConfigError(f"'{name}' must be an object")
    for key in raw:
        if key not in allowed:
            raise ConfigError(f"unknown key '{name}.{key}'")
    for key in required:
        if key not in raw:
            raise ConfigError(f"missing key '{name}.{key}'")
    return raw


def _number(sec, where, key, default=None, *, integer=False):
    if key not in sec:
        if default is None:
            raise ConfigError(f"missing key '{where}.{key}'")
        return default
    v = sec[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"'{where}.{key}' must be a number, got {v!r}")
    if not math.isfinite(v):
        raise ConfigError(f"'{where}.{key}' must be finite")
    if integer:
        if int(v) != v:
            raise ConfigError(f"'{where}.{key}' must be an integer, got {v!r}")
        return int(v)
    return float(v)


def _frequency(sec, where, stem, required=True):
    """Angular frequency from ``<stem>_rad_per_s`` or ``<stem>_over_2pi_hz``."""
    rad, hz = f"{stem}_rad_per_s", f"{stem}_over_2pi_hz"
    if rad in sec and hz in sec:
        raise ConfigError(f"give only one of '{where}.{rad}' and '{where}.{hz}'")
    if rad in sec:
        return _number(sec, where, rad)
    if hz in sec:
        return 2.0 * math.pi * _number(sec, where, hz)
    if required:
        raise ConfigError(f"missing key '{where}.{rad}' (or '{where}.{hz}')")
    return None


def _wrap(fn, where, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{where}: {exc}") from None


# --------------------------------------------------------------------------
# per-command jobs
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SpectrumJob:
    params: ScatterParams
    delta_min: float
    delta_max: float
    n_points: int


@dataclass(frozen=True)
class StorageJob:
    params: StorageParams
    vg_variant: str
    c_min: float
    window_factor: float
    inputs: dict


@dataclass(frozen=True)
class TransferJob:
    system: TwoCellSystem
    sweep: SweepSpec


@dataclass(frozen=True)
class OptimizeJob:
    template: TwoCellSystem
    eta_c: np.ndarray
    delta2: np.ndarray
    sweep: SweepSpec


@dataclass(frozen=True)
class PlotJob:
    csv: str
    kind: str
    x: str | None
    y: tuple[str, ...]
    z: str | None
    log_x: bool
    log_y: bool
    log_z: bool
    title: str | None


@dataclass(frozen=True)
class RunConfig:
    command: str
    job: object
    threads: int
    output: str | None
    figure: bool
    name: str

    def resolved_threads(self) -> int:
        return self.threads if self.threads > 0 else (os.cpu_count() or 1)

    def default_output(self) -> str:
        return self.output or f"{self.name}{_DEFAULT_EXT[self.command]}"


def _spectrum_job(doc) -> SpectrumJob:
    p = _section(doc, "params", {
        "gamma_1d", "gamma_out", "omega", "delta_c", "a", "c_over_a",
        "bragg_ratio", "transition_wavelength_m", "n_sites", "atoms_per_site",
    })
    if "bragg_ratio" in p and "transition_wavelength_m" in p:
        raise ConfigError("give only one of 'params.bragg_ratio' and "
                          "'params.transition_wavelength_m'")
    a = _number(p, "params", "a", 500e-9)
    if "transition_wavelength_m" in p:
        lam = _number(p, "params", "transition_wavelength_m")
        if lam <= 0:
            raise ConfigError("'params.transition_wavelength_m' must be > 0")
        bragg = a / lam
    else:
        bragg = _number(p, "params", "bragg_ratio", 1.0)
    params = _wrap(
        ScatterParams, "params",
        gamma_1d=_number(p, "params", "gamma_1d"),
        gamma_out=_number(p, "params", "gamma_out"),
        omega=_number(p, "params", "omega"),
        delta_c=_number(p, "params", "delta_c", 0.0),
        a=a,
        c_over_a=_number(p, "params", "c_over_a", 1e7),
        bragg_ratio=bragg,
        n_sites=_number(p, "params", "n_sites", 1, integer=True),
        atoms_per_site=_number(p, "params", "atoms_per_site", 1, integer=True),
    )
    s = _section(doc, "sweep", {"delta_min", "delta_max", "n_points"},
                 required=("delta_min", "delta_max", "n_points"))
    d0 = _number(s, "sweep", "delta_min")
    d1 = _number(s, "sweep", "delta_max")
    n = _number(s, "sweep", "n_points", integer=True)
    if n < 2:
        raise ConfigError(f"'sweep.n_points' must be >= 2, got {n}")
    if not d0 < d1:
        raise ConfigError("'sweep.delta_min' must be < 'sweep.delta_max'")
    return SpectrumJob(params, d0, d1, n)


_STORAGE_KEYS = {
    "g_rad_per_s", "g_over_2pi_hz", "N", "gamma_per_s", "kappa_per_s",
    "kappa_in_per_s", "Q", "resonator_omega_rad_per_s",
    "resonator_omega_over_2pi_hz", "c_m_per_s", "L_m", "mode",
    "omega_rad_per_s", "omega_over_2pi_hz", "T_p_s", "branching",
    "vg_variant", "c_min", "window_factor",
}


def _kappa(p, where):
    has_q = "Q" in p or "resonator_omega_rad_per_s" in p or "resonator_omega_over_2pi_hz" in p
    if "kappa_per_s" in p and has_q:
        raise ConfigError(f"give either '{where}.kappa_per_s' or '{where}.Q' with the "
                          "resonator frequency, not both")
    if has_q:
        q = _number(p, where, "Q")
        w = _frequency(p, where, "resonator_omega")
        return _wrap(kappa_from_Q, where, w, q)
    return _number(p, where, "kappa_per_s", 0.0)


def _rates(p, where) -> RateSet:
    return _wrap(
        RateSet, where,
        g=_frequency(p, where, "g"),
        N=_number(p, where, "N", integer=True),
        gamma=_number(p, where, "gamma_per_s", 0.0),
        kappa=_kappa(p, where),
        kappa_in=_number(p, where, "kappa_in_per_s", 0.0),
        c=_number(p, where, "c_m_per_s", 299_792_458.0),
        L=_number(p, where, "L_m", 1.0),
    )


def _storage_job(doc) -> StorageJob:
    p = _section(doc, "params", _STORAGE_KEYS)
    rates = _rates(p, "params")
    mode = p.get("mode", "resonator")
    if mode not in ("resonator", "free_space"):
        raise ConfigError(f"'params.mode' must be 'resonator' or 'free_space', got {mode!r}")
    if mode == "resonator" and rates.kappa <= 0:
        raise ConfigError("resonator mode needs 'params.kappa_per_s' > 0 (or Q and frequency)")
    variant = p.get("vg_variant", "A")
    if variant not in ("A", "B"):
        raise ConfigError(f"'params.vg_variant' must be 'A' or 'B', got {variant!r}")
    t_p = _number(p, "params", "T_p_s") if "T_p_s" in p else None
    params = _wrap(
        StorageParams, "params",
        rates=rates, mode=mode,
        omega=_frequency(p, "params", "omega", required=False),
        T_p=t_p,
        branching=_number(p, "params", "branching", 0.0),
    )
    c_min = _number(p, "params", "c_min", 10.0)
    wf = _number(p, "params", "window_factor", 10.0)
    if c_min <= 0 or wf <= 0:
        raise ConfigError("'params.c_min' and 'params.window_factor' must be > 0")
    return StorageJob(params, variant, c_min, wf, dict(p))


_SYSTEM_KEYS = {"kappa", "kappa_in", "gamma", "delta2", "eta_c", "rates"}
_LAB_RATE_KEYS = {"g_rad_per_s", "g_over_2pi_hz", "N", "gamma_per_s", "kappa_per_s",
                  "kappa_in_per_s", "Q", "resonator_omega_rad_per_s",
                  "resonator_omega_over_2pi_hz"}


def _system(doc, need_point: bool) -> TwoCellSystem:
    p = _section(doc, "params", _SYSTEM_KEYS)
    if not need_point:
        for key in ("delta2", "eta_c"):
            if key in p:
                raise ConfigError(f"'params.{key}' is a grid axis for optimize; "
                                  f"set it under 'grid' instead")
    if "rates" in p:
        clash = {"kappa", "kappa_in", "gamma"} & set(p)
        if clash:
            raise ConfigError(f"'params.rates' and 'params.{sorted(clash)[0]}' both set the rates")
        lab = _section(p, "rates", _LAB_RATE_KEYS)
        kappa, kappa_in, gamma = _wrap(dimensionless, "params.rates", _rates(lab, "params.rates"))
    else:
        kappa = _number(p, "params", "kappa")
        kappa_in = _number(p, "params", "kappa_in", 0.0)
        gamma = _number(p, "params", "gamma", 0.0)
    if need_point:
        delta2 = _number(p, "params", "delta2")
        eta_c = _number(p, "params", "eta_c")
    else:
        delta2, eta_c = 0.0, 1.0
    return _wrap(TwoCellSystem, "params", kappa=kappa, kappa_in=kappa_in, gamma=gamma,
                 delta2=delta2, eta_c=eta_c)


def _sweep_spec(doc) -> SweepSpec:
    s = _section(doc, "sweep", {"bounds", "n_steps", "lo_factor", "hi_factor",
                                "purity", "probe_steps", "bisect_iter"})
    bounds = s.get("bounds", "fixed")
    if bounds not in ("fixed", "transfer"):
        raise ConfigError(f"'sweep.bounds' must be 'fixed' or 'transfer', got {bounds!r}")
    purity = _number(s, "sweep", "purity", 0.99)
    if not 0.5 < purity < 1.0:
        raise ConfigError("'sweep.purity' must lie in (0.5, 1)")
    probe = _number(s, "sweep", "probe_steps", 200, integer=True)
    iters = _number(s, "sweep", "bisect_iter", 30, integer=True)
    if probe < 3 or iters < 1:
        raise ConfigError("'sweep.probe_steps' must be >= 3 and 'sweep.bisect_iter' >= 1")
    return _wrap(
        SweepSpec, "sweep",
        bounds=bounds,
        n_steps=_number(s, "sweep", "n_steps", 400, integer=True),
        lo_factor=_number(s, "sweep", "lo_factor", 1e-2),
        hi_factor=_number(s, "sweep", "hi_factor", 1e2),
        purity=purity, probe_steps=probe, bisect_iter=iters,
    )


def _axis(g, name) -> np.ndarray:
    if name not in g:
        raise ConfigError(f"missing key 'grid.{name}'")
    spec = g[name]
    where = f"grid.{name}"
    if isinstance(spec, list):
        values = np.array([_number({"v": v}, where, "v") for v in spec], dtype=float)
    elif isinstance(spec, dict):
        ax = _section(g, name, {"min", "max", "n", "scale"}, required=("min", "max", "n"))
        lo, hi = _number(ax, where, "min"), _number(ax, where, "max")
        n = _number(ax, where, "n", integer=True)
        scale = ax.get("scale", "linear")
        if n < 0:
            raise ConfigError(f"'{where}.n' must be >= 0")
        if n > 1 and not lo < hi:
            raise ConfigError(f"'{where}.min' must be < '{where}.max'")
        if scale == "linear":
            values = np.linspace(lo, hi, n)
        elif scale == "log":
            if lo <= 0:
                raise ConfigError(f"'{where}.min' must be > 0 for a log axis")
            values = np.logspace(math.log10(lo), math.log10(hi), n)
        else:
            raise ConfigError(f"'{where}.scale' must be 'linear' or 'log', got {scale!r}")
    else:
        raise ConfigError(f"'{where}' must be a list of values or a {{min, max, n}} object")
    if values.size == 0:
        raise ConfigError(f"'{where}' is empty: the optimization grid needs at least one point")
    return values


def _optimize_job(doc) -> OptimizeJob:
    template = _system(doc, need_point=False)
    g = _section(doc, "grid", {"eta_c", "delta2"})
    eta_c = _axis(g, "eta_c")
    delta2 = _axis(g, "delta2")
    if np.any(eta_c <= 0):
        raise ConfigError("'grid.eta_c' values must be > 0")
    return OptimizeJob(template, eta_c, delta2, _sweep_spec(doc))


def _plot_job(doc) -> PlotJob:
    p = _section(doc, "plot", {"csv", "kind", "x", "y", "z", "log_x", "log_y",
                               "log_z", "title"}, required=("csv",))
    kind = p.get("kind", "line")
    if kind not in ("line", "contour"):
        raise ConfigError(f"'plot.kind' must be 'line' or 'contour', got {kind!r}")
    y = p.get("y", [])
    if isinstance(y, str):
        y = [y]
    for key in ("log_x", "log_y", "log_z"):
        if not isinstance(p.get(key, False), bool):
            raise ConfigError(f"'plot.{key}' must be true or false")
    return PlotJob(str(p["csv"]), kind, p.get("x"), tuple(y), p.get("z"),
                   p.get("log_x", False), p.get("log_y", False),
                   p.get("log_z", False), p.get("title"))


_BUILDERS = {
    "spectrum": _spectrum_job,
    "storage": _storage_job,
    "transfer": lambda doc: TransferJob(_system(doc, True), _sweep_spec(doc)),
    "optimize": _optimize_job,
    "plot": _plot_job,
}


# --------------------------------------------------------------------------
# entry points
# --------------------------------------------------------------------------

def parse_config(doc: dict, name: str = "run") -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("a run configuration must be a JSON object")
    for key in doc:
        if key not in _TOP:
            raise ConfigError(f"unknown key '{key}'")
    command = doc.get("command")
    if command not in COMMANDS:
        raise ConfigError(f"'command' must be one of {', '.join(COMMANDS)}; got {command!r}")
    for key in _TOP - {"command", "description", "threads", "output", "figure"}:
        if key in doc and key not in _SECTIONS[command]:
            raise ConfigError(f"key '{key}' does not apply to command '{command}'")
    threads = _number(doc, "", "threads", 1, integer=True) if "threads" in doc else 1
    if threads < 0:
        raise ConfigError("'threads' must be >= 0 (0 = one per CPU)")
    output = doc.get("output")
    if output is not None and not isinstance(output, str):
        raise ConfigError("'output' must be a path string")
    figure = doc.get("figure", False)
    if not isinstance(figure, bool):
        raise ConfigError("'figure' must be true or false")
    job = _BUILDERS[command](doc)
    return RunConfig(command, job, threads, output, figure, name)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    return parse_config(doc, name=path.stem)


def preset_names() -> list[str]:
    folder = resources.files("atominterface") / "presets"
    return sorted(p.name[:-5] for p in folder.iterdir() if p.name.endswith(".json"))


def preset_text(name: str) -> str:
    if name not in preset_names():
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(preset_names())}")
    return (resources.files("atominterface") / "presets" / f"{name}.json").read_text(encoding="utf-8")


def load_preset(name: str) -> RunConfig:
    return parse_config(json.loads(preset_text(name)), name=name)
