import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from atominterface.core import RateSet, kappa_from_Q
from atominterface.storage import (
    StorageParams, cooperativity, eit_width, feasibility_report, group_velocity,
    max_bandwidth, optical_depth, optimal_control, polariton_mix, retrieval_efficiency,
)

TWO_PI = 2.0 * math.pi
G = TWO_PI * 70.0
N = 8000
GAMMA = 20.0
KAPPA = kappa_from_Q(TWO_PI * 6.8e9, 1e6)


def device(**kw):
    rates = RateSet(g=kw.pop("g", G), N=N, gamma=GAMMA, kappa=KAPPA)
    base = dict(mode="resonator", branching=0.05)
    base.update(kw)
    return StorageParams(rates=rates, **base)


pos = st.floats(1e-3, 1e6)


# -- polariton ---------------------------------------------------------------

def test_polariton_equal_mix():
    m = polariton_mix(3.0, 1.5, 4.0)
    assert m.cos_theta == pytest.approx(1 / math.sqrt(2), abs=1e-15)
    assert m.sin_theta == pytest.approx(1 / math.sqrt(2), abs=1e-15)
    assert m.eta == 1.0


def test_polariton_stored_spin_wave():
    m = polariton_mix(0.0, G, N)
    assert (m.cos_theta, m.sin_theta) == (0.0, 1.0)
    assert m.stored and m.eta == math.inf


def test_polariton_device_numbers():
    m = polariton_mix(TWO_PI * 6.3e3, G, N)
    assert m.eta == pytest.approx(0.9938, abs=1e-3)
    assert abs(m.cos_theta - m.sin_theta) / m.sin_theta < 0.01


def test_polariton_undefined():
    with pytest.raises(ValueError):
        polariton_mix(0.0, 0.0, 10)


def test_polariton_normalization_million_samples():
    rng = np.random.default_rng(2024)
    omegas = 10.0 ** rng.uniform(-6, 6, 10 ** 6)
    gs = 10.0 ** rng.uniform(-6, 6, 10 ** 6)
    ns = rng.integers(1, 10 ** 6, 10 ** 6)
    worst = 0.0
    for w, g, n in zip(omegas.tolist(), gs.tolist(), ns.tolist()):
        m = polariton_mix(w, g, n)
        worst = max(worst, abs(m.cos_theta ** 2 + m.sin_theta ** 2 - 1.0))
    assert worst <= 1e-12


# -- group velocity and EIT window --------------------------------------------

def test_group_velocity_examples():
    c = 3e8
    assert group_velocity(0.0, c, "A") == c and group_velocity(0.0, c, "B") == c
    assert group_velocity(10.0, c, "A") == c / 101
    assert group_velocity(10.0, c, "B") == c / math.sqrt(101)
    with pytest.raises(ValueError):
        group_velocity(1.0, c, "C")
    with pytest.raises(ValueError):
        group_velocity(-1.0, c, "A")


def test_eit_width_scalings():
    w = eit_width(5.0, 2.0, 1.0, 100, 3.0)
    assert eit_width(10.0, 2.0, 1.0, 100, 3.0) == pytest.approx(4 * w, rel=1e-14)
    assert eit_width(5.0, 8.0, 1.0, 100, 3.0) == pytest.approx(w / 2, rel=1e-14)
    assert eit_width(5.0, 0.0, 1.0, 100, 3.0) == math.inf


def test_eit_width_device_numbers_exceed_pulse_bandwidth():
    w = eit_width(TWO_PI * 6.3e3, GAMMA, G, N, KAPPA)
    ref = (TWO_PI * 6.3e3) ** 2 / GAMMA * math.sqrt(GAMMA * KAPPA / (G * G * N))
    assert w == pytest.approx(ref, rel=1e-14)
    assert w > KAPPA


def test_eit_width_rejects_nonpositive():
    with pytest.raises(ValueError):
        eit_width(0.0, 1.0, 1.0, 1, 1.0)


# -- bounds and figures of merit ------------------------------------------------

def test_max_bandwidth_examples():
    bw = max_bandwidth(G, N, KAPPA)
    assert bw == pytest.approx(3.63e4, rel=5e-3)
    assert bw < KAPPA
    assert max_bandwidth(0.0, N, KAPPA) == 0.0
    assert max_bandwidth(G, 4 * N, KAPPA) == pytest.approx(4 * bw, rel=1e-14)


def test_cooperativity_examples():
    C = cooperativity(G, N, GAMMA, KAPPA)
    assert C == pytest.approx(1700, rel=0.15)
    assert C == pytest.approx(1811.04, rel=1e-5)
    assert cooperativity(0.0, N, GAMMA, KAPPA) == 0.0
    assert cooperativity(G, N, GAMMA / 2, KAPPA) == pytest.approx(2 * C, rel=1e-14)


def test_optical_depth_examples():
    assert optical_depth(8000, 0.05) == pytest.approx(400.0, rel=1e-14)
    assert optical_depth(8000, 0.0) == 0.0
    assert optical_depth(1, 1.0) == 1.0
    with pytest.raises(ValueError):
        optical_depth(10, 1.5)


def test_retrieval_efficiency_examples():
    assert retrieval_efficiency(1700) == pytest.approx(0.99941, abs=1e-5)
    assert retrieval_efficiency(1.0) == 0.0
    assert retrieval_efficiency(2.0) == 0.5
    assert retrieval_efficiency(0.3) == 0.0


def test_optimal_control_examples():
    w = optimal_control(1 / KAPPA, KAPPA, G, N)
    assert w == pytest.approx(G * math.sqrt(N), rel=1e-14)
    assert w / TWO_PI == pytest.approx(6.3e3, rel=0.01)
    assert w / TWO_PI == pytest.approx(6.26e3, rel=1e-3)
    assert optimal_control(1.0, 4.0, 1.0, 1) == pytest.approx(0.5 * optimal_control(1.0, 1.0, 1.0, 1))
    assert optimal_control(4.0, 1.0, 1.0, 1) == pytest.approx(0.5 * optimal_control(1.0, 1.0, 1.0, 1))


@settings(max_examples=300, deadline=None)
@given(st.floats(1e-6, 1e6))
def test_retrieval_efficiency_range(C):
    e = retrieval_efficiency(C)
    assert 0.0 <= e <= 1.0
    if C >= 1.0:
        assert e == 1.0 - 1.0 / C


@settings(max_examples=300, deadline=None)
@given(pos, st.integers(1, 10 ** 6), pos, pos, st.floats(1.01, 10.0))
def test_monotonicity(g, n, gamma, decay, f):
    C = cooperativity(g, n, gamma, decay)
    bw = max_bandwidth(g, n, decay)
    assert cooperativity(g * f, n, gamma, decay) > C
    assert cooperativity(g, n + 1, gamma, decay) > C
    assert cooperativity(g, n, gamma * f, decay) < C
    assert cooperativity(g, n, gamma, decay * f) < C
    assert max_bandwidth(g * f, n, decay) > bw
    assert max_bandwidth(g, n + 1, decay) > bw
    assert max_bandwidth(g, n, decay * f) < bw


# -- feasibility report -----------------------------------------------------------

def test_report_device_numbers():
    rep = feasibility_report(device(), vg_variant="A")
    assert rep.cooperativity == pytest.approx(1700, rel=0.15)
    assert rep.retrieval_efficiency == pytest.approx(0.999, abs=1e-3)
    assert rep.recommended_omega_over_2pi_hz == pytest.approx(6.3e3, rel=0.01)
    assert rep.optical_depth == pytest.approx(400.0)
    assert rep.cooperativity_ok and rep.transparency_ok
    assert not rep.bandwidth_ok
    assert rep.bandwidth_margin == pytest.approx(0.8478, abs=1e-4)
    assert rep.pulse_fits_ok is None
    assert not rep.efficiency_clamped


def test_report_zero_coupling_fails_everything():
    rep = feasibility_report(device(g=0.0), vg_variant="A")
    assert rep.retrieval_efficiency == 0.0 and rep.efficiency_clamped
    assert not (rep.cooperativity_ok or rep.bandwidth_ok or rep.transparency_ok)
    assert any("g = 0" in n for n in rep.notes)


def test_report_free_space_checks_pulse_fit():
    rates = RateSet(g=G, N=N, gamma=GAMMA, L=1e-3)
    rep = feasibility_report(StorageParams(rates, mode="free_space"), vg_variant="A")
    assert rep.decay_rate_per_s == pytest.approx(rates.c / rates.L)
    assert rep.pulse_fits_ok is not None and rep.group_velocity_m_per_s is not None
    rep_b = feasibility_report(StorageParams(rates, mode="free_space"), vg_variant="B")
    assert rep_b.group_velocity_m_per_s > rep.group_velocity_m_per_s


def test_report_control_off_is_noted():
    rep = feasibility_report(device(omega=0.0), vg_variant="A")
    assert not rep.transparency_ok
    assert any("control field is off" in n for n in rep.notes)


def test_report_is_pure():
    a = feasibility_report(device(), vg_variant="A").to_dict()
    b = feasibility_report(device(), vg_variant="A").to_dict()
    assert a == b and list(a) == list(b)


@pytest.mark.parametrize("kw", [dict(branching=1.5), dict(T_p=0.0), dict(omega=-1.0),
                                dict(mode="cavity")])
def test_storage_params_invariants(kw):
    with pytest.raises(ValueError):
        device(**kw)
