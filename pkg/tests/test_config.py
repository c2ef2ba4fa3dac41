import copy
import json
import math

import numpy as np
import pytest

from atominterface.config import load_config, load_preset, parse_config, preset_names
from atominterface.errors import ConfigError

SPECTRUM = {
    "command": "spectrum",
    "params": {"gamma_1d": 0.05, "gamma_out": 0.95, "omega": 10.0, "n_sites": 10},
    "sweep": {"delta_min": -1.0, "delta_max": 1.0, "n_points": 5},
}
STORAGE = {
    "command": "storage",
    "params": {"g_over_2pi_hz": 70.0, "N": 8000, "gamma_per_s": 20.0, "Q": 1e6,
               "resonator_omega_over_2pi_hz": 6.8e9},
}
TRANSFER = {
    "command": "transfer",
    "params": {"kappa": 0.2, "kappa_in": 1.0, "gamma": 0.0005, "delta2": 5.0, "eta_c": 20.0},
}
OPTIMIZE = {
    "command": "optimize",
    "params": {"kappa": 0.2, "kappa_in": 1.0, "gamma": 0.0005},
    "grid": {"eta_c": {"min": 1, "max": 100, "n": 4, "scale": "log"}, "delta2": [1.0, 5.0]},
}


def edited(doc, path, value):
    out = copy.deepcopy(doc)
    node = out
    for key in path[:-1]:
        node = node[key]
    if value is KeyError:
        del node[path[-1]]
    else:
        node[path[-1]] = value
    return out


def expect_error(doc, match):
    with pytest.raises(ConfigError, match=match):
        parse_config(doc)


def test_valid_documents_parse():
    for doc in (SPECTRUM, STORAGE, TRANSFER, OPTIMIZE):
        cfg = parse_config(doc)
        assert cfg.command == doc["command"] and cfg.threads == 1


def test_unknown_keys_are_named():
    expect_error(edited(SPECTRUM, ["colour"], 1), "'colour'")
    expect_error(edited(SPECTRUM, ["params", "gamma1d"], 1), "'params.gamma1d'")
    expect_error(edited(SPECTRUM, ["sweep", "step"], 1), "'sweep.step'")
    expect_error(edited(OPTIMIZE, ["grid", "kappa"], [1]), "'grid.kappa'")


def test_sections_must_match_command():
    expect_error(edited(STORAGE, ["sweep"], {}), "does not apply")
    expect_error(edited(SPECTRUM, ["command"], "fit"), "'command'")


def test_spectrum_requires_two_points():
    expect_error(edited(SPECTRUM, ["sweep", "n_points"], 1), "n_points")
    expect_error(edited(SPECTRUM, ["sweep", "delta_max"], -1.0), "delta_min")


def test_spectrum_invariants_revalidated():
    expect_error(edited(SPECTRUM, ["params", "gamma_out"], 0.5), "params")
    expect_error(edited(SPECTRUM, ["params", "n_sites"], 2.5), "integer")
    expect_error(edited(SPECTRUM, ["params", "omega"], "ten"), "number")


def test_bragg_ratio_sources_are_exclusive():
    doc = edited(SPECTRUM, ["params", "bragg_ratio"], 1.0)
    expect_error(edited(doc, ["params", "transition_wavelength_m"], 780e-9), "only one")
    cfg = parse_config(edited(SPECTRUM, ["params", "transition_wavelength_m"], 1e-6))
    assert cfg.job.params.bragg_ratio == 0.5


def test_frequency_units_are_exclusive_and_converted():
    cfg = parse_config(STORAGE)
    assert cfg.job.params.rates.g == pytest.approx(2 * math.pi * 70.0, rel=1e-15)
    assert cfg.job.params.rates.kappa == pytest.approx(2 * math.pi * 6.8e3, rel=1e-15)
    expect_error(edited(STORAGE, ["params", "g_rad_per_s"], 440.0), "only one")
    expect_error(edited(STORAGE, ["params", "kappa_per_s"], 1.0), "either")


def test_storage_validation():
    expect_error(edited(STORAGE, ["params", "mode"], "cavity"), "mode")
    expect_error(edited(STORAGE, ["params", "branching"], 2.0), "branching")
    expect_error(edited(STORAGE, ["params", "vg_variant"], "C"), "vg_variant")
    expect_error(edited(STORAGE, ["params", "N"], 0), "N")
    no_kappa = edited(edited(STORAGE, ["params", "Q"], KeyError),
                      ["params", "resonator_omega_over_2pi_hz"], KeyError)
    expect_error(no_kappa, "kappa")


def test_transfer_lab_rates_are_made_dimensionless():
    doc = edited(TRANSFER, ["params"], {
        "rates": {"g_rad_per_s": 2.0, "N": 100, "kappa_per_s": 4.0, "kappa_in_per_s": 20.0,
                  "gamma_per_s": 0.01},
        "delta2": 5.0, "eta_c": 20.0,
    })
    sys = parse_config(doc).job.system
    assert (sys.kappa, sys.kappa_in, sys.gamma) == pytest.approx((0.2, 1.0, 0.0005), rel=1e-15)
    expect_error(edited(doc, ["params", "kappa"], 0.2), "both set the rates")


def test_transfer_validation():
    expect_error(edited(TRANSFER, ["params", "eta_c"], 0.0), "eta_c")
    expect_error(edited(TRANSFER, ["params", "kappa"], -1.0), "kappa")
    expect_error(edited(TRANSFER, ["sweep"], {"bounds": "auto"}), "bounds")
    expect_error(edited(TRANSFER, ["sweep"], {"n_steps": 1}), "n_steps")
    expect_error(edited(TRANSFER, ["sweep"], {"purity": 1.0}), "purity")
    assert parse_config(TRANSFER).job.sweep.bounds == "fixed"


def test_optimize_grid_axes():
    job = parse_config(OPTIMIZE).job
    assert np.allclose(job.eta_c, [1.0, 100 ** (1 / 3), 100 ** (2 / 3), 100.0])
    assert list(job.delta2) == [1.0, 5.0]
    expect_error(edited(OPTIMIZE, ["grid", "delta2"], []), "empty")
    expect_error(edited(OPTIMIZE, ["grid", "eta_c"], {"min": 1, "max": 2, "n": 0}), "empty")
    expect_error(edited(OPTIMIZE, ["grid", "eta_c"], [0.0, 1.0]), "> 0")
    expect_error(edited(OPTIMIZE, ["grid", "eta_c"], {"min": 0, "max": 2, "n": 3,
                                                      "scale": "log"}), "log")
    expect_error(edited(OPTIMIZE, ["params", "eta_c"], 20.0), "grid axis")
    expect_error(edited(OPTIMIZE, ["grid", "delta2"], KeyError), "grid.delta2")


def test_top_level_options():
    assert parse_config(edited(SPECTRUM, ["threads"], 0)).resolved_threads() >= 1
    expect_error(edited(SPECTRUM, ["threads"], -1), "threads")
    expect_error(edited(SPECTRUM, ["figure"], "yes"), "figure")
    cfg = parse_config(SPECTRUM, name="demo")
    assert cfg.default_output() == "demo.csv"


def test_plot_section():
    doc = {"command": "plot", "plot": {"csv": "x.csv", "kind": "contour", "log_z": True}}
    job = parse_config(doc).job
    assert job.kind == "contour" and job.log_z
    expect_error({"command": "plot", "plot": {"kind": "line"}}, "plot.csv")
    expect_error({"command": "plot", "plot": {"csv": "x", "kind": "bar"}}, "kind")


def test_load_config_reports_json_line(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "command": "storage",\n  "params": {,}\n}\n')
    with pytest.raises(ConfigError, match="line 3"):
        load_config(path)


def test_load_config_missing_file(tmp_path):
    with pytest.raises(OSError):
        load_config(tmp_path / "nope.json")


def test_every_preset_parses():
    names = preset_names()
    assert {"fig2b", "figS1", "rb87_mw", "storage_zero_coupling", "fig3b", "figS2",
            "fig3c", "fig3c_kin01"} <= set(names)
    for name in names:
        cfg = load_preset(name)
        assert cfg.name == name
    with pytest.raises(ConfigError, match="unknown preset"):
        load_preset("fig9")


def test_fig2b_preset_uses_rb_d2_lattice():
    p = load_preset("fig2b").job.params
    assert p.bragg_ratio == pytest.approx(500e-9 / 780.241e-9, rel=1e-15)
    assert (p.gamma_1d, p.omega, p.c_over_a, p.n_sites) == (0.05, 10.0, 1e7, 8000)


def test_config_file_round_trip(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps(TRANSFER))
    cfg = load_config(path)
    assert cfg.name == "run" and cfg.job.system.eta_c == 20.0
