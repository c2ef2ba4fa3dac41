"""EIT storage and retrieval figures of merit for an atomic ensemble.

Free-space and resonator cases share one set of formulas: the resonator
linewidth ``kappa`` plays the role of the free-space escape rate ``c/L``.
Couplings and Rabi frequencies are angular frequencies (rad/s).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Literal

from .core import RateSet

Mode = Literal["free_space", "resonator"]
VgVariant = Literal["A", "B"]


@dataclass(frozen=True)
class PolaritonMix:
    """Photonic (``cos_theta``) and spin-wave (``sin_theta``) amplitudes."""

    eta: float
    cos_theta: float
    sin_theta: float

    @property
    def stored(self) -> bool:
        # control field off: eta is infinite and the excitation is a pure spin wave
        return self.cos_theta == 0.0


def polariton_mix(omega: float, g: float, N: float) -> PolaritonMix:
    gsn = g * math.sqrt(N)
    norm = math.hypot(omega, gsn)
    if norm == 0.0:
        raise ValueError("polariton undefined: both control field and coupling vanish")
    eta = math.inf if omega == 0.0 else gsn / omega
    return PolaritonMix(eta, omega / norm, gsn / norm)


def group_velocity(eta: float, c: float, variant: VgVariant) -> float:
    """Slow-light group velocity.

    variant "A": ``c / (1 + eta**2)`` (free-space ensemble, used by the CLI).
    variant "B": ``c / sqrt(1 + eta**2)`` (single-mode resonator picture).
    The two readings disagree; callers must pick one explicitly.
    """
    if eta < 0:
        raise ValueError("eta must be >= 0")
    if variant == "A":
        return c / (1.0 + eta * eta)
    if variant == "B":
        return c / math.sqrt(1.0 + eta * eta)
    raise ValueError(f"unknown group-velocity variant {variant!r} (expected 'A' or 'B')")


def eit_width(omega: float, gamma: float, g: float, N: float, decay_rate: float) -> float:
    """Transparency window ``(omega**2/gamma) * sqrt(gamma*decay_rate/(g**2 N))``.

    Returns ``inf`` for ``gamma == 0`` (no ground-state dephasing).
    """
    if omega <= 0 or g <= 0 or N <= 0 or decay_rate <= 0 or gamma < 0:
        raise ValueError("eit_width needs omega, g, N, decay_rate > 0 and gamma >= 0")
    if gamma == 0:
        return math.inf
    return omega * omega / gamma * math.sqrt(gamma * decay_rate / (g * g * N))


def max_bandwidth(g: float, N: float, decay_rate: float) -> float:
    """Largest storable pulse bandwidth ``g**2 N / decay_rate`` (1/s)."""
    if decay_rate <= 0:
        raise ValueError("decay_rate must be > 0")
    return g * g * N / decay_rate


def cooperativity(g: float, N: float, gamma: float, decay_rate: float) -> float:
    if gamma <= 0 or decay_rate <= 0:
        raise ValueError("gamma and decay_rate must be > 0")
    return g * g * N / (gamma * decay_rate)


def optical_depth(N: float, branching: float) -> float:
    """``N * Gamma_wg / Gamma_tot``."""
    if not 0.0 <= branching <= 1.0:
        raise ValueError("branching ratio must lie in [0, 1]")
    return N * branching


def retrieval_efficiency(C: float) -> float:
    """``1 - 1/C``, clamped to 0 below C = 1."""
    if C < 0:
        raise ValueError("cooperativity must be >= 0")
    if C <= 1.0:
        return 0.0
    return 1.0 - 1.0 / C


def optimal_control(T_p: float, kappa: float, g: float, N: float) -> float:
    """Control Rabi frequency matching the slowed linewidth to ``1/T_p``."""
    if T_p <= 0 or kappa <= 0 or g <= 0 or N <= 0:
        raise ValueError("optimal_control needs positive arguments")
    return math.sqrt(g * g * N / (T_p * kappa))


@dataclass(frozen=True)
class StorageParams:
    """Inputs of a feasibility study.

    ``omega=None`` uses the recommended control field; ``T_p=None`` takes a
    decay-limited pulse, ``T_p = 1/decay_rate``.
    """

    rates: RateSet
    mode: Mode = "resonator"
    omega: float | None = None
    T_p: float | None = None
    branching: float = 0.0

    def __post_init__(self):
        if self.mode not in ("free_space", "resonator"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if not 0.0 <= self.branching <= 1.0:
            raise ValueError("branching ratio must lie in [0, 1]")
        if self.T_p is not None and self.T_p <= 0:
            raise ValueError("T_p must be > 0")
        if self.omega is not None and self.omega < 0:
            raise ValueError("omega must be >= 0")

    @property
    def decay_rate(self) -> float:
        r = self.rates
        return r.kappa if self.mode == "resonator" else r.c / r.L


@dataclass(frozen=True)
class FeasibilityReport:
    mode: str
    decay_rate_per_s: float
    pulse_duration_s: float | None
    cooperativity: float
    optical_depth: float
    retrieval_efficiency: float
    efficiency_clamped: bool
    max_bandwidth_per_s: float
    recommended_omega_rad_per_s: float | None
    omega_rad_per_s: float | None
    eta: float | None
    eit_width_rad_per_s: float | None
    group_velocity_m_per_s: float | None
    cooperativity_ok: bool
    cooperativity_margin: float
    bandwidth_ok: bool
    bandwidth_margin: float | None
    transparency_ok: bool
    transparency_margin: float | None
    pulse_fits_ok: bool | None
    pulse_fits_margin: float | None
    notes: list[str] = field(default_factory=list)

    @property
    def recommended_omega_over_2pi_hz(self) -> float | None:
        w = self.recommended_omega_rad_per_s
        return None if w is None else w / (2.0 * math.pi)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["recommended_omega_over_2pi_hz"] = self.recommended_omega_over_2pi_hz
        return d


def feasibility_report(
    p: StorageParams,
    *,
    vg_variant: VgVariant,
    c_min: float = 10.0,
    window_factor: float = 10.0,
) -> FeasibilityReport:
    """Evaluate every storage condition for one parameter set.

    Conditions: cooperativity ``C >= c_min``; pulse bandwidth within
    ``max_bandwidth``; ``window_factor / T_p <= eit_width``; and in free
    space the compressed pulse ``T_p * v_g`` fitting in ``L``.  Problems
    with the inputs become ``notes`` rather than exceptions.
    """
    r = p.rates
    notes: list[str] = []
    decay = p.decay_rate
    gsq_n = r.g * r.g * r.N
    od = optical_depth(r.N, p.branching)

    if decay <= 0:
        notes.append(f"{p.mode} mode needs a positive decay rate; got {decay!r}")
    if r.gamma <= 0:
        notes.append("gamma = 0: cooperativity unbounded")
    if gsq_n == 0:
        notes.append("no atomic coupling (g = 0): nothing can be stored")

    if decay > 0 and r.gamma > 0:
        C = cooperativity(r.g, r.N, r.gamma, decay)
    elif gsq_n > 0 and decay > 0:
        C = math.inf
    else:
        C = 0.0
    eff = retrieval_efficiency(C) if math.isfinite(C) else 1.0
    clamped = C < 1.0

    T_p = p.T_p
    if T_p is None and decay > 0:
        T_p = 1.0 / decay
    max_bw = max_bandwidth(r.g, r.N, decay) if decay > 0 else 0.0

    recommended = None
    if T_p is not None and decay > 0 and gsq_n > 0:
        recommended = optimal_control(T_p, decay, r.g, r.N)
    omega = p.omega if p.omega is not None else recommended

    eta = None
    width = None
    vg = None
    if omega is not None and omega > 0 and gsq_n > 0:
        eta = math.sqrt(gsq_n) / omega
        if decay > 0:
            width = eit_width(omega, r.gamma, r.g, r.N, decay)
        if p.mode == "free_space":
            vg = group_velocity(eta, r.c, vg_variant)
    elif omega == 0:
        notes.append("control field is off: no transparency window")

    usable = gsq_n > 0 and decay > 0 and T_p is not None
    c_ok = usable and C >= c_min
    bw_margin = max_bw * T_p if T_p is not None else None
    bw_ok = usable and bw_margin >= 1.0
    tr_margin = None
    if width is not None and T_p is not None:
        tr_margin = width * T_p / window_factor
    tr_ok = usable and tr_margin is not None and tr_margin >= 1.0

    fits_ok = None
    fits_margin = None
    if p.mode == "free_space":
        if vg is not None and T_p is not None:
            fits_margin = r.L / (T_p * vg)
        fits_ok = usable and fits_margin is not None and fits_margin >= 1.0

    return FeasibilityReport(
        mode=p.mode,
        decay_rate_per_s=decay,
        pulse_duration_s=T_p,
        cooperativity=C,
        optical_depth=od,
        retrieval_efficiency=eff,
        efficiency_clamped=clamped,
        max_bandwidth_per_s=max_bw,
        recommended_omega_rad_per_s=recommended,
        omega_rad_per_s=omega,
        eta=eta,
        eit_width_rad_per_s=width,
        group_velocity_m_per_s=vg,
        cooperativity_ok=c_ok,
        cooperativity_margin=C / c_min,
        bandwidth_ok=bw_ok,
        bandwidth_margin=bw_margin,
        transparency_ok=tr_ok,
        transparency_margin=tr_margin,
        pulse_fits_ok=fits_ok,
        pulse_fits_margin=fits_margin,
        notes=notes,
    )
