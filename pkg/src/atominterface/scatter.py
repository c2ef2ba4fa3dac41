"""Light scattering from a driven three-level atomic lattice along a waveguide.

Every site holds ``atoms_per_site`` Lambda-type atoms driven by a control
field.  A site is described by a complex scattering strength ``zeta``; a
lattice cell is free propagation over one spacing times the site scattering
matrix, and a uniform lattice of ``n_sites`` cells is the matrix power of the
cell.  All rates and detunings are in units of the total spontaneous
emission rate ``gamma_1d + gamma_out``.

Field convention: ``(E_fwd, E_bwd)`` at the left edge of cell ``n+1`` is the
cell matrix times the same pair at cell ``n``.  For the full stack
``t = 1/M22`` and ``r = M12/M22``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import LN2, mat2, mat2_mul, mat2_power
from .errors import SingularityError

SINGULAR_EPS = 1e-30
_NORM_TOL = 1e-12


@dataclass(frozen=True)
class ScatterParams:
    """Per-site scattering configuration.

    gamma_1d, gamma_out
        Emission rates into the guide and into free space; they must sum
        to one since everything is measured in units of their sum.
    omega, delta_c
        Control Rabi frequency and one-photon control detuning.
    a
        Lattice spacing in metres (informational; enters via ``c_over_a``
        and ``bragg_ratio``).
    c_over_a
        Guide group velocity over lattice spacing.
    bragg_ratio
        Atomic transition frequency over lattice frequency ``2 pi c / a``.
    """

    gamma_1d: float
    gamma_out: float
    omega: float
    delta_c: float = 0.0
    a: float = 500e-9
    c_over_a: float = 1e7
    bragg_ratio: float = 1.0
    n_sites: int = 1
    atoms_per_site: int = 1

    def __post_init__(self):
        if self.gamma_1d < 0 or self.gamma_out < 0:
            raise ValueError("emission rates must be non-negative")
        if abs(self.gamma_1d + self.gamma_out - 1.0) > _NORM_TOL:
            raise ValueError(
                "gamma_1d + gamma_out must equal 1 (rates are in units of the total "
                f"emission rate); got {self.gamma_1d + self.gamma_out!r}"
            )
        if self.omega < 0:
            raise ValueError("omega must be >= 0")
        if self.c_over_a <= 0:
            raise ValueError("c_over_a must be > 0")
        if self.a <= 0:
            raise ValueError("lattice spacing must be > 0")
        if int(self.n_sites) != self.n_sites or self.n_sites < 1:
            raise ValueError("n_sites must be an integer >= 1")
        if int(self.atoms_per_site) != self.atoms_per_site or self.atoms_per_site < 1:
            raise ValueError("atoms_per_site must be an integer >= 1")


@dataclass(frozen=True)
class SpectrumPoint:
    delta: float
    T: float
    R: float
    t: complex
    r: complex
    ln_T: float = math.nan
    error: str | None = None


# --------------------------------------------------------------------------
# single site
# --------------------------------------------------------------------------

def _zeta_array(delta, p: ScatterParams):
    """Vectorized zeta; returns (zeta, singular_mask)."""
    delta = np.asarray(delta, dtype=float)
    detuning = delta + p.delta_c
    omega2 = p.omega * p.omega
    if p.omega == 0.0:
        # delta cancels between numerator and denominator
        den = 1j * p.gamma_out + 2.0 * detuning
        num = np.full_like(den, -p.gamma_1d)
    else:
        den = delta * (1j * p.gamma_out + 2.0 * detuning) - 2.0 * omega2
        num = -p.gamma_1d * delta + 0j
    singular = np.abs(den) <= SINGULAR_EPS
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(singular, np.nan + 0j, num / np.where(singular, 1.0, den))
    return z, singular


def zeta(delta: float, p: ScatterParams) -> complex:
    """Complex scattering strength of one driven atom at probe detuning delta.

    Vanishes at two-photon resonance when the control field is on.  With the
    control off the removable ``0/0`` at ``delta = 0`` is cancelled; a true
    pole (a lossless atom driven exactly on a dressed resonance) raises
    :class:`SingularityError`.
    """
    z, singular = _zeta_array(delta, p)
    if bool(singular):
        raise SingularityError(f"zeta is singular at delta={delta!r}")
    return complex(z)


def _r_closed_form(delta, p: ScatterParams):
    delta = np.asarray(delta, dtype=float)
    detuning = delta + p.delta_c
    gtot = p.gamma_1d + p.gamma_out
    if p.omega == 0.0:
        return -p.gamma_1d / (gtot - 2j * detuning)
    num = -p.gamma_1d * delta
    den = delta * (gtot - 2j * detuning) + 2j * p.omega * p.omega
    return num / den


def single_atom_rt(delta: float, p: ScatterParams) -> tuple[complex, complex]:
    """Reflection and transmission amplitudes ``(r_a, t_a)`` of one atom.

    Computed from zeta as ``i zeta / (1 - i zeta)`` and ``1 / (1 - i zeta)``.
    At a pole of zeta the atom is a perfect mirror and the closed form
    ``r_a -> -gamma_1d / (...)`` is used instead.
    """
    z, singular = _zeta_array(delta, p)
    if bool(singular):
        r = complex(_r_closed_form(delta, p))
        return r, 1.0 + r
    z = complex(z)
    t = 1.0 / (1.0 - 1j * z)
    return 1j * z * t, t


# --------------------------------------------------------------------------
# cell and stack
# --------------------------------------------------------------------------

def bragg_phase(delta, p: ScatterParams):
    """Probe phase accumulated over one lattice spacing (radians, unreduced)."""
    return (np.asarray(delta, dtype=float) + p.delta_c) / p.c_over_a + 2.0 * math.pi * p.bragg_ratio


def _phase_factor(delta, p: ScatterParams):
    # exp(i k_p a), reducing the commensurate part mod 2pi before exponentiating
    detuning = np.asarray(delta, dtype=float) + p.delta_c
    frac = p.bragg_ratio % 1.0
    lattice = 1.0 + 0j if frac == 0.0 else np.exp(2j * math.pi * frac)
    return np.exp(1j * detuning / p.c_over_a) * lattice


def free_matrix(delta, p: ScatterParams) -> np.ndarray:
    ph = _phase_factor(delta, p)
    zero = np.zeros_like(ph)
    return mat2(ph, zero, zero, 1.0 / ph)


def atom_matrix(z) -> np.ndarray:
    iz = 1j * np.asarray(z, dtype=complex)
    return mat2(1.0 + iz, iz, -iz, 1.0 - iz)


def cell_matrix(delta, p: ScatterParams) -> np.ndarray:
    """Transfer matrix of one cell: free propagation times site scattering.

    ``m`` atoms on one site act as a single scatterer of strength ``m*zeta``.
    """
    z, singular = _zeta_array(delta, p)
    if np.any(singular):
        raise SingularityError("zeta is singular; the cell transfer matrix is undefined")
    return mat2_mul(free_matrix(delta, p), atom_matrix(p.atoms_per_site * z))


def _stack_arrays(delta: np.ndarray, p: ScatterParams):
    delta = np.asarray(delta, dtype=float)
    z, singular = _zeta_array(delta, p)
    z = np.where(singular, 0.0, z) * p.atoms_per_site
    cell = mat2_mul(free_matrix(delta, p), atom_matrix(z))
    mant, expo = mat2_power(cell, int(p.n_sites))
    m12 = mant[..., 0, 1]
    m22 = mant[..., 1, 1]

    abs22 = np.abs(m22)
    with np.errstate(divide="ignore"):
        ln_abs22 = np.log(abs22) + expo * LN2
    stack_singular = ~singular & (ln_abs22 < math.log(SINGULAR_EPS))
    bad = singular | stack_singular
    safe22 = np.where(bad, 1.0, m22)

    inv = 1.0 / safe22
    t = np.ldexp(inv.real, -expo) + 1j * np.ldexp(inv.imag, -expo)
    r = m12 / safe22
    T = t.real * t.real + t.imag * t.imag
    R = r.real * r.real + r.imag * r.imag
    ln_T = -2.0 * ln_abs22

    # Transparent sites (zeta == 0): the stack is a pure phase, |t| = 1 exactly.
    clear = (z == 0) & ~bad
    if np.any(clear):
        n = int(p.n_sites)
        detuning = delta + p.delta_c
        lattice_turns = (n * (p.bragg_ratio % 1.0)) % 1.0
        t_clear = np.exp(1j * n * detuning / p.c_over_a) * np.exp(2j * math.pi * lattice_turns)
        t = np.where(clear, t_clear, t)
        r = np.where(clear, 0.0, r)
        T = np.where(clear, 1.0, T)
        R = np.where(clear, 0.0, R)
        ln_T = np.where(clear, 0.0, ln_T)

    nan = math.nan
    t = np.where(bad, nan, t)
    r = np.where(bad, nan, r)
    T = np.where(bad, nan, T)
    R = np.where(bad, nan, R)
    ln_T = np.where(bad, nan, ln_T)
    errors = np.where(singular, "singular_zeta", np.where(stack_singular, "singular_stack", ""))
    return t, r, T, R, ln_T, errors


def _points(delta, t, r, T, R, ln_T, errors) -> list[SpectrumPoint]:
    return [
        SpectrumPoint(float(d), float(TT), float(RR), complex(tt), complex(rr), float(ll), e or None)
        for d, tt, rr, TT, RR, ll, e in zip(delta, t, r, T, R, ln_T, errors)
    ]


def stack_rt(delta: float, p: ScatterParams) -> SpectrumPoint:
    """Transmission/reflection of the uniform ``n_sites`` lattice at one detuning."""
    d = np.array([float(delta)])
    t, r, T, R, ln_T, errors = _stack_arrays(d, p)
    if errors[0] == "singular_zeta":
        raise SingularityError(f"zeta is singular at delta={delta!r}")
    if errors[0] == "singular_stack":
        raise SingularityError(f"|M22| < {SINGULAR_EPS:g} at delta={delta!r}")
    return _points(d, t, r, T, R, ln_T, errors)[0]


def spectrum_sweep(
    delta_min: float,
    delta_max: float,
    n_points: int,
    p: ScatterParams,
    workers: int = 1,
    chunk: int = 512,
) -> list[SpectrumPoint]:
    """Uniform detuning sweep of :func:`stack_rt`.

    Points are independent, so the sweep is split into chunks that may run on
    a thread pool; output order always follows the detuning grid.  A point
    that hits a singularity carries ``error`` and NaN values instead of
    aborting the sweep.
    """
    if int(n_points) != n_points or n_points < 2:
        raise ValueError("n_points must be an integer >= 2")
    if not delta_min < delta_max:
        raise ValueError("delta_min must be < delta_max")
    deltas = np.linspace(delta_min, delta_max, int(n_points))
    pieces = [deltas[i:i + chunk] for i in range(0, deltas.size, chunk)]

    def run(piece):
        return _points(piece, *_stack_arrays(piece, p))

    if workers and workers > 1 and len(pieces) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, pieces))
    else:
        results = [run(piece) for piece in pieces]
    return [pt for chunk_points in results for pt in chunk_points]
