"""Adiabatic dark-state transfer between two resonator + ensemble cells.

Each cell is a microwave mode ``E`` coupled to a collective spin wave ``S``
through an excited-state polarization ``P``.  Energies are in units of
``g*sqrt(N)``.  The two-cell state vector is ordered
``(E1, S1, P1, E2, S2, P2)`` and the resonators are coupled through their
fields at rate ``kappa``.  The control fields follow
``eta2 = eta_c**2 / eta1``, so sweeping ``eta1`` upward moves a spin
excitation from cell 2 to cell 1 along the dark branch ``e4``.

Everything below is vectorized over a batch of systems; the public
single-system functions are thin wrappers.  Per-system results never depend
on what else shares a batch, which is what makes parallel grid evaluation
reproducible bit for bit.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import jacobi_eigh
from .errors import TrackingLossError

E1, S1, P1, E2, S2, P2 = range(6)
TRACKING_MIN_OVERLAP = 0.5
DEGENERATE_GAP = 1e-10
DEFAULT_PURITY = 0.99


# --------------------------------------------------------------------------
# parameters
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class TwoCellSystem:
    """Dimensionless two-cell parameters (units of g*sqrt(N))."""

    kappa: float
    kappa_in: float = 0.0
    gamma: float = 0.0
    delta2: float = 0.0
    eta_c: float = 1.0

    def __post_init__(self):
        for name in ("kappa", "kappa_in", "gamma"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if not self.eta_c > 0:
            raise ValueError("eta_c must be > 0")

    def eta2(self, eta1):
        return self.eta_c ** 2 / np.asarray(eta1, dtype=float)


@dataclass(frozen=True)
class SweepSchedule:
    """Strictly increasing, positive grid of ``eta1`` values."""

    eta1: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.eta1, dtype=float)
        if grid.ndim != 1 or grid.size < 2:
            raise ValueError("a sweep needs at least two eta1 values")
        if not np.all(grid > 0):
            raise ValueError("eta1 values must be > 0")
        if not np.all(np.diff(grid) > 0):
            raise ValueError("eta1 values must be strictly increasing")
        object.__setattr__(self, "eta1", grid)

    @classmethod
    def log(cls, lo: float, hi: float, n_steps: int = 400) -> SweepSchedule:
        if not 0 < lo < hi:
            raise ValueError("need 0 < lo < hi")
        return cls(np.logspace(math.log10(lo), math.log10(hi), int(n_steps)))

    @classmethod
    def fixed(cls, eta_c: float, n_steps: int = 400, lo_factor: float = 1e-2,
              hi_factor: float = 1e2) -> SweepSchedule:
        """Log grid from ``eta_c*lo_factor`` to ``eta_c*hi_factor``."""
        return cls.log(eta_c * lo_factor, eta_c * hi_factor, n_steps)

    @property
    def n_steps(self) -> int:
        return self.eta1.size


# --------------------------------------------------------------------------
# Hamiltonians
# --------------------------------------------------------------------------

def single_cell_h(eta: float, delta2: float) -> np.ndarray:
    """3x3 single-cell coupling matrix over ``(E, S, P)``."""
    if not eta > 0:
        raise ValueError("eta must be > 0 (take a small eta for the photonic limit)")
    inv = 1.0 / eta
    return -np.array([
        [0.0, 0.0, 1.0],
        [0.0, 0.0, inv],
        [1.0, inv, delta2],
    ])


def _two_cell_batch(eta1, eta2, delta2, kappa) -> np.ndarray:
    eta1, eta2, delta2, kappa = np.broadcast_arrays(
        *(np.asarray(x, dtype=float) for x in (eta1, eta2, delta2, kappa))
    )
    h = np.zeros(eta1.shape + (6, 6))
    for e, s, pp, eta in ((E1, S1, P1, eta1), (E2, S2, P2, eta2)):
        h[..., e, pp] = h[..., pp, e] = -1.0
        inv = -1.0 / eta
        h[..., s, pp] = inv
        h[..., pp, s] = inv
        h[..., pp, pp] = -delta2
    h[..., E1, E2] = h[..., E2, E1] = -kappa
    return h


def two_cell_h(eta1: float, eta2: float, delta2: float, kappa: float) -> np.ndarray:
    """6x6 coupled-cell matrix: two single-cell blocks joined through E1-E2."""
    if not (eta1 > 0 and eta2 > 0):
        raise ValueError("eta1 and eta2 must be > 0")
    return _two_cell_batch(eta1, eta2, delta2, kappa)


def dark_state(eta: float) -> np.ndarray:
    """Zero-energy single-cell eigenvector ``(E - eta S)/sqrt(1 + eta**2)``."""
    return np.array([1.0, -eta, 0.0]) / math.sqrt(1.0 + eta * eta)


def dark_coupling(eta1: float, eta2: float, kappa: float) -> float:
    """Matrix element between the two cells' uncoupled dark states."""
    if eta1 < 0 or eta2 < 0:
        raise ValueError("eta must be >= 0")
    return -kappa / math.sqrt((1.0 + eta1 * eta1) * (1.0 + eta2 * eta2))


@dataclass(frozen=True)
class PerturbativeShift:
    e3: float
    e4: float
    regime: str  # "small", "large" or "intermediate" (approximation not valid)


def perturbative_shift(eta1: float, sys: TwoCellSystem) -> PerturbativeShift:
    """Second-order dark-state energies far from the crossing: ``(-delta2*kappa**2, 0)``."""
    if eta1 <= 0.1 * sys.eta_c:
        regime = "small"
    elif eta1 >= 10.0 * sys.eta_c:
        regime = "large"
    else:
        regime = "intermediate"
    return PerturbativeShift(-sys.delta2 * sys.kappa ** 2, 0.0, regime)


# --------------------------------------------------------------------------
# tracking (batched)
# --------------------------------------------------------------------------

def _dot6(a, b):
    # fixed summation order over the six components
    out = a[..., 0] * b[..., 0]
    for k in range(1, 6):
        out = out + a[..., k] * b[..., k]
    return out


def _seq_sum(x):
    # strictly sequential sum along the last axis
    return np.cumsum(x, axis=-1)[..., -1]


@dataclass
class _Tracked:
    eta1: np.ndarray          # (B, n)
    energies: np.ndarray      # (B, n, 6)
    vectors: np.ndarray       # (B, n, 6, 6), columns are eigenvectors
    index: np.ndarray         # (B, n)
    dark: np.ndarray          # (B, n, 6) tracked, sign-continuous
    lost_step: np.ndarray     # (B,), -1 when tracking held


def _track_batch(eta1, eta_c, delta2, kappa) -> _Tracked:
    eta1 = np.asarray(eta1, dtype=float)
    B, n = eta1.shape
    eta_c = np.asarray(eta_c, dtype=float).reshape(B, 1)
    delta2 = np.asarray(delta2, dtype=float).reshape(B, 1)
    kappa = np.broadcast_to(np.asarray(kappa, dtype=float), (B,)).reshape(B, 1)
    h = _two_cell_batch(eta1, eta_c ** 2 / eta1, delta2, kappa)
    energies, vectors = jacobi_eigh(h)

    # start on the branch with the largest |S2| weight
    idx0 = np.argmax(vectors[:, 0, S2, :] ** 2, axis=-1)
    index = np.empty((B, n), dtype=np.int64)
    dark = np.empty((B, n, 6))
    lost = np.full(B, -1, dtype=np.int64)
    rows = np.arange(B)
    prev = vectors[rows, 0, :, idx0]
    prev = prev * np.where(prev[:, S2] < 0, -1.0, 1.0)[:, None]
    index[:, 0] = idx0
    dark[:, 0] = prev
    for s in range(1, n):
        cand = np.swapaxes(vectors[:, s], 1, 2)            # (B, 6 branches, 6)
        ov = _dot6(prev[:, None, :], cand)                 # (B, 6)
        best = np.argmax(np.abs(ov), axis=-1)
        o = ov[rows, best]
        newly_lost = (np.abs(o) < TRACKING_MIN_OVERLAP) & (lost < 0)
        lost = np.where(newly_lost, s, lost)
        cur = cand[rows, best] * np.where(o < 0, -1.0, 1.0)[:, None]
        index[:, s] = best
        dark[:, s] = cur
        prev = cur
    return _Tracked(eta1, energies, vectors, index, dark, lost)


def _d_h_entries(eta1, eta_c):
    # dH/deta1 has only the S-P entries: +1/eta1**2 in cell 1, -1/eta_c**2 in cell 2
    return 1.0 / (eta1 * eta1), -1.0 / (eta_c * eta_c) * np.ones_like(eta1)


def _coupling_elements(dark, vectors, d1, d2):
    """<e4| dH/deta1 |e_i> for every branch i; shapes (..., 6)."""
    v = np.swapaxes(vectors, -1, -2)   # (..., branch, component)
    e = dark[..., None, :]
    return (d1[..., None] * (e[..., S1] * v[..., P1] + e[..., P1] * v[..., S1])
            + d2[..., None] * (e[..., S2] * v[..., P2] + e[..., P2] * v[..., S2]))


def _eps1_hf(tr: _Tracked, eta_c):
    """Pointwise sum_{i != 4} |<e4|dH|e_i>| / (e_i - e4)**2 and divergence mask."""
    B, n = tr.eta1.shape
    eta_c = np.asarray(eta_c, dtype=float).reshape(B, 1)
    d1, d2 = _d_h_entries(tr.eta1, eta_c)
    m = _coupling_elements(tr.dark, tr.vectors, d1, d2)
    e4 = np.take_along_axis(tr.energies, tr.index[..., None], axis=-1)
    gap = tr.energies - e4
    others = np.arange(6) != tr.index[..., None]
    degenerate = others & (np.abs(gap) < DEGENERATE_GAP) & (m != 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(others & (m != 0.0), np.abs(m) / (gap * gap), 0.0)
    terms = np.where(degenerate, np.inf, terms)
    total = terms[..., 0]
    for k in range(1, 6):
        total = total + terms[..., k]
    return total, degenerate.any(axis=-1)


def _loss_density(dark, kappa_in, gamma):
    pe = dark[..., E1] ** 2 + dark[..., E2] ** 2
    ps = dark[..., S1] ** 2 + dark[..., S2] ** 2
    return kappa_in * pe + gamma * ps


def _trapezoid(y, x):
    return _seq_sum(0.5 * (y[..., 1:] + y[..., :-1]) * np.diff(x, axis=-1))


# --------------------------------------------------------------------------
# public single-sweep API
# --------------------------------------------------------------------------

@dataclass
class TransferDiagnostics:
    """Per-step record of a tracked sweep plus the two functionals."""

    eta1: np.ndarray
    energies: np.ndarray          # (n, 6), ascending
    dark_index: np.ndarray        # (n,)
    dark_vector: np.ndarray       # (n, 6), sign-continuous
    eps1_pointwise: np.ndarray    # (n,)
    eps1: float
    eps1_step: int                # step where the maximum occurs
    eps2: float
    warnings: list[str] = field(default_factory=list)

    @property
    def product(self) -> float:
        return self.eps1 * self.eps2

    def populations(self) -> dict[str, np.ndarray]:
        v = self.dark_vector
        names = ("E1", "S1", "P1", "E2", "S2", "P2")
        return {name: v[:, k] ** 2 for k, name in enumerate(names)}


def track_dark_state(schedule: SweepSchedule, sys: TwoCellSystem):
    """Follow the dark branch that starts as the cell-2 spin wave.

    Returns ``(index, vectors)``: the eigen-branch index (ascending energy
    order) and the sign-continuous eigenvector at every step.  Raises
    :class:`TrackingLossError` if consecutive steps overlap by less than 0.5.
    """
    tr = _track(schedule, sys)
    return tr.index[0], tr.dark[0]


def _track(schedule: SweepSchedule, sys: TwoCellSystem) -> _Tracked:
    tr = _track_batch(schedule.eta1[None, :], [sys.eta_c], [sys.delta2], sys.kappa)
    s = int(tr.lost_step[0])
    if s >= 0:
        raise TrackingLossError(
            f"dark-state tracking lost at step {s} (eta1={schedule.eta1[s]:.6g}); "
            "refine the sweep grid",
            step=s, eta1=float(schedule.eta1[s]),
        )
    return tr


def _endpoint_warnings(dark, purity=DEFAULT_PURITY) -> list[str]:
    out = []
    start, end = dark[0, S2] ** 2, dark[-1, S1] ** 2
    if start < purity:
        out.append(f"sweep starts with |<S2|e4>|^2 = {start:.4f} < {purity}")
    if end < purity:
        out.append(f"sweep ends with |<S1|e4>|^2 = {end:.4f} < {purity}")
    return out


def sweep_diagnostics(schedule: SweepSchedule, sys: TwoCellSystem) -> TransferDiagnostics:
    """Track the dark state and evaluate both functionals on one sweep."""
    tr = _track(schedule, sys)
    pointwise, _ = _eps1_hf(tr, [sys.eta_c])
    pointwise = pointwise[0]
    step = int(np.argmax(pointwise))
    eps2 = float(_trapezoid(_loss_density(tr.dark[0], sys.kappa_in, sys.gamma), schedule.eta1))
    warn = _endpoint_warnings(tr.dark[0])
    for w in warn:
        warnings.warn(w, RuntimeWarning, stacklevel=2)
    return TransferDiagnostics(
        eta1=schedule.eta1,
        energies=tr.energies[0],
        dark_index=tr.index[0],
        dark_vector=tr.dark[0],
        eps1_pointwise=pointwise,
        eps1=float(pointwise[step]),
        eps1_step=step,
        eps2=eps2,
        warnings=warn,
    )


def epsilon1(schedule: SweepSchedule, sys: TwoCellSystem) -> float:
    """Adiabaticity functional: worst pointwise non-adiabatic coupling.

    Evaluated in Hellmann-Feynman form, ``|<e4|dH|e_i>| / (e_i - e4)**2``
    summed over the other five branches; ``inf`` if a branch with non-zero
    coupling becomes degenerate with the dark state.
    """
    tr = _track(schedule, sys)
    pointwise, _ = _eps1_hf(tr, [sys.eta_c])
    return float(pointwise[0].max())


def epsilon1_pointwise_fd(schedule: SweepSchedule, sys: TwoCellSystem,
                          rel_step: float = 1e-4) -> np.ndarray:
    """Cross-check of the pointwise adiabaticity sum by finite differences.

    ``<e4|d e_i/deta1>`` is taken from central differences of eigenvectors
    whose signs are aligned to the unperturbed ones, then divided by the
    absolute gap.
    """
    tr = _track(schedule, sys)
    eta1 = schedule.eta1
    h = rel_step * eta1
    out = []
    for shift in (+1.0, -1.0):
        x = eta1 + shift * h
        _, vec = jacobi_eigh(_two_cell_batch(x, sys.eta_c ** 2 / x, sys.delta2, sys.kappa))
        sign = np.where(np.einsum("sij,sij->sj", vec, tr.vectors[0]) < 0, -1.0, 1.0)
        out.append(vec * sign[:, None, :])
    dv = (out[0] - out[1]) / (2.0 * h)[:, None, None]
    e4_vec = tr.dark[0]
    proj = np.einsum("si,sij->sj", e4_vec, dv)
    e4 = np.take_along_axis(tr.energies[0], tr.index[0][:, None], axis=1)
    gap = np.abs(tr.energies[0] - e4)
    others = np.arange(6)[None, :] != tr.index[0][:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(others, np.abs(proj) / gap, 0.0)
    return terms.sum(axis=1)


def epsilon2(schedule: SweepSchedule, sys: TwoCellSystem) -> float:
    """Loss functional: trapezoidal integral over eta1 of
    ``kappa_in (|E1|^2 + |E2|^2) + gamma (|S1|^2 + |S2|^2)`` on the dark state.
    The polarization weight is left out (it stays negligible on the dark
    branch; see the P populations in :class:`TransferDiagnostics`).
    """
    tr = _track(schedule, sys)
    return float(_trapezoid(_loss_density(tr.dark[0], sys.kappa_in, sys.gamma), schedule.eta1))


# --------------------------------------------------------------------------
# transfer window
# --------------------------------------------------------------------------

def _window_batch(eta_c, delta2, kappa, purity, probe_steps, bisect_iter,
                  lo_factor=1e-2, hi_factor=1e2):
    eta_c = np.asarray(eta_c, dtype=float)
    delta2 = np.asarray(delta2, dtype=float)
    B = eta_c.size
    u = np.linspace(math.log10(lo_factor), math.log10(hi_factor), probe_steps)
    probe = eta_c[:, None] * 10.0 ** u[None, :]
    tr = _track_batch(probe, eta_c, delta2, kappa)
    rows = np.arange(B)
    s2 = tr.dark[..., S2] ** 2
    s1 = tr.dark[..., S1] ** 2
    below2 = s2 < purity
    below1 = s1 < purity
    # lo: last pure-S2 point before the first impure one; hi: first pure-S1 after the last impure
    first_impure = np.where(below2.any(axis=1), np.argmax(below2, axis=1), probe_steps - 1)
    last_impure = np.where(below1.any(axis=1), probe_steps - 1 - np.argmax(below1[:, ::-1], axis=1), 0)
    lo_open = first_impure == 0
    hi_open = last_impure == probe_steps - 1

    def bisect(i_pure, i_impure, comp):
        # bracket in log10(eta1); "pure" side keeps purity >= threshold
        a = np.log10(probe[rows, i_pure])
        b = np.log10(probe[rows, i_impure])
        ref = tr.dark[rows, i_pure]
        for _ in range(bisect_iter):
            mid = 0.5 * (a + b)
            x = 10.0 ** mid
            _, vec = jacobi_eigh(_two_cell_batch(x, eta_c ** 2 / x, delta2, kappa))
            cand = np.swapaxes(vec, 1, 2)
            ov = _dot6(ref[:, None, :], cand)
            best = np.argmax(np.abs(ov), axis=-1)
            weight = cand[rows, best, comp] ** 2
            pure = weight >= purity
            a = np.where(pure, mid, a)
            b = np.where(pure, b, mid)
        return 10.0 ** a

    i_lo = np.maximum(first_impure - 1, 0)
    lo = np.where(lo_open, probe[:, 0], bisect(i_lo, np.maximum(first_impure, 1), S2))
    i_hi = np.minimum(last_impure + 1, probe_steps - 1)
    hi = np.where(hi_open, probe[:, -1],
                  bisect(i_hi, np.minimum(last_impure, probe_steps - 2), S1))
    lost = tr.lost_step >= 0
    return lo, hi, lo_open | hi_open, lost


def transfer_window(sys: TwoCellSystem, purity: float = DEFAULT_PURITY,
                    probe_steps: int = 200, bisect_iter: int = 30) -> tuple[float, float]:
    """The stretch of ``eta1`` over which the excitation is in transit.

    Lower end: where the dark state stops being at least ``purity`` cell-2
    spin wave; upper end: where it becomes at least ``purity`` cell-1 spin
    wave.  Both are located by bisection in ``log(eta1)`` after a wide probe
    sweep over ``eta_c * [1e-2, 1e2]``; if a threshold is never crossed the
    probe bound is returned with a warning.
    """
    lo, hi, open_, lost = _window_batch([sys.eta_c], [sys.delta2], sys.kappa,
                                        purity, probe_steps, bisect_iter)
    if lost[0]:
        raise TrackingLossError("dark-state tracking lost during the window probe")
    if open_[0]:
        warnings.warn("purity threshold not crossed inside the probe range; "
                      "using the probe bound", RuntimeWarning, stacklevel=2)
    return float(lo[0]), float(hi[0])


# --------------------------------------------------------------------------
# optimization over (eta_c, delta2)
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepSpec:
    """How each grid point builds its sweep.

    bounds="transfer": log grid over :func:`transfer_window`;
    bounds="fixed": log grid over ``eta_c * [lo_factor, hi_factor]``.
    """

    bounds: str = "fixed"
    n_steps: int = 400
    lo_factor: float = 1e-2
    hi_factor: float = 1e2
    purity: float = DEFAULT_PURITY
    probe_steps: int = 200
    bisect_iter: int = 30

    def __post_init__(self):
        if self.bounds not in ("transfer", "fixed"):
            raise ValueError(f"unknown sweep bounds {self.bounds!r}")
        if self.n_steps < 2:
            raise ValueError("n_steps must be >= 2")
        if not 0 < self.lo_factor < self.hi_factor:
            raise ValueError("need 0 < lo_factor < hi_factor")


def schedule_for(sys: TwoCellSystem, spec: SweepSpec) -> SweepSchedule:
    if spec.bounds == "fixed":
        return SweepSchedule.fixed(sys.eta_c, spec.n_steps, spec.lo_factor, spec.hi_factor)
    lo, hi = transfer_window(sys, spec.purity, spec.probe_steps, spec.bisect_iter)
    return SweepSchedule.log(lo, hi, spec.n_steps)


@dataclass(frozen=True)
class GridPoint:
    eta_c: float
    delta2: float
    eps1: float
    eps2: float
    product: float
    eta1_lo: float
    eta1_hi: float
    status: str = "ok"


def _evaluate_batch(eta_c, delta2, kappa, kappa_in, gamma, spec: SweepSpec):
    eta_c = np.asarray(eta_c, dtype=float)
    delta2 = np.asarray(delta2, dtype=float)
    status = np.array(["ok"] * eta_c.size, dtype=object)
    if spec.bounds == "fixed":
        lo = eta_c * spec.lo_factor
        hi = eta_c * spec.hi_factor
    else:
        lo, hi, open_, lost = _window_batch(eta_c, delta2, kappa, spec.purity,
                                            spec.probe_steps, spec.bisect_iter,
                                            spec.lo_factor, spec.hi_factor)
        status[open_] = "open_window"
        status[lost] = "tracking_loss"
    u = np.linspace(0.0, 1.0, spec.n_steps)
    eta1 = 10.0 ** (np.log10(lo)[:, None] + u[None, :] * (np.log10(hi) - np.log10(lo))[:, None])
    tr = _track_batch(eta1, eta_c, delta2, kappa)
    pointwise, _ = _eps1_hf(tr, eta_c)
    eps1 = pointwise.max(axis=1)
    eps2 = _trapezoid(_loss_density(tr.dark, kappa_in, gamma), eta1)
    status[tr.lost_step >= 0] = "tracking_loss"
    status[np.isinf(eps1) & (status == "ok")] = "divergent"
    with np.errstate(invalid="ignore"):
        product = eps1 * eps2
    bad = status == "tracking_loss"
    eps1 = np.where(bad, np.inf, eps1)
    product = np.where(bad | np.isinf(eps1) | np.isnan(product), np.inf, product)
    return [
        GridPoint(float(a), float(b), float(c), float(d), float(e), float(f), float(g), str(s))
        for a, b, c, d, e, f, g, s in zip(eta_c, delta2, eps1, eps2, product, lo, hi, status)
    ]


def _evaluate_chunk(args):
    return _evaluate_batch(*args)


@dataclass
class OptimizationResult:
    points: list[GridPoint]
    best: GridPoint
    eta_c_grid: np.ndarray
    delta2_grid: np.ndarray

    def surface(self) -> np.ndarray:
        """Products on the (eta_c, delta2) grid, shape (n_eta_c, n_delta2)."""
        return np.array([p.product for p in self.points]).reshape(
            self.eta_c_grid.size, self.delta2_grid.size)


def optimize(template: TwoCellSystem, eta_c_grid, delta2_grid,
             spec: SweepSpec | None = None, workers: int = 1) -> OptimizationResult:
    """Evaluate ``eps1 * eps2`` on a rectangular (eta_c, delta2) grid.

    ``template`` supplies ``kappa``, ``kappa_in`` and ``gamma``.  Rows of the
    grid (one eta_c each) are independent work items; with ``workers > 1``
    they run in a process pool.  The best point minimizes the product, ties
    going to the smaller eta_c and then the smaller delta2; divergent points
    are stored as ``inf`` and never win.
    """
    spec = spec or SweepSpec()
    eta_c_grid = np.asarray(eta_c_grid, dtype=float).ravel()
    delta2_grid = np.asarray(delta2_grid, dtype=float).ravel()
    if eta_c_grid.size == 0 or delta2_grid.size == 0:
        raise ValueError("optimization grid is empty")
    if np.any(eta_c_grid <= 0):
        raise ValueError("eta_c grid values must be > 0")
    jobs = [
        (np.full(delta2_grid.size, ec), delta2_grid, template.kappa,
         template.kappa_in, template.gamma, spec)
        for ec in eta_c_grid
    ]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_evaluate_chunk, jobs))
    else:
        rows = [_evaluate_chunk(job) for job in jobs]
    points = [p for row in rows for p in row]
    finite = [p for p in points if math.isfinite(p.product)]
    if not finite:
        raise ValueError("every grid point diverged; no optimum")
    best = min(finite, key=lambda p: (p.product, p.eta_c, p.delta2))
    return OptimizationResult(points, best, eta_c_grid, delta2_grid)


def evaluate_point(sys: TwoCellSystem, spec: SweepSpec | None = None) -> GridPoint:
    spec = spec or SweepSpec()
    return _evaluate_batch([sys.eta_c], [sys.delta2], sys.kappa, sys.kappa_in,
                           sys.gamma, spec)[0]


# --------------------------------------------------------------------------
# time-domain cross-check (extension)
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class EvolutionResult:
    final_state: np.ndarray
    survival: float           # total remaining population
    dark_fidelity: float      # |<e4(end)|psi(end)>|^2
    s1_population: float


def simulate_transfer(sys: TwoCellSystem, schedule: SweepSchedule, duration: float,
                      n_steps: int = 20000) -> EvolutionResult:
    """Integrate ``i dX/dt = (H - i L/2) X`` with fixed-step RK4.

    ``L`` is diagonal with ``kappa_in`` on the field and ``gamma`` on the spin
    components.  ``log(eta1)`` ramps linearly in time across the schedule's
    range and the state starts on the tracked dark vector.  This goes beyond
    the adiabatic functionals; it only serves to cross-validate them.
    """
    if duration <= 0 or n_steps < 1:
        raise ValueError("need duration > 0 and n_steps >= 1")
    lo, hi = math.log(schedule.eta1[0]), math.log(schedule.eta1[-1])
    _, dark = track_dark_state(schedule, sys)
    loss = np.array([sys.kappa_in, sys.gamma, 0.0, sys.kappa_in, sys.gamma, 0.0])

    def generator(t):
        x = math.exp(lo + (hi - lo) * t / duration)
        h = _two_cell_batch(x, sys.eta_c ** 2 / x, sys.delta2, sys.kappa)
        return -1j * (h - 0.5j * np.diag(loss))

    psi = dark[0].astype(complex)
    dt = duration / n_steps
    for k in range(n_steps):
        t = k * dt
        a = generator(t)
        b = generator(t + 0.5 * dt)
        c = generator(t + dt)
        k1 = a @ psi
        k2 = b @ (psi + 0.5 * dt * k1)
        k3 = b @ (psi + 0.5 * dt * k2)
        k4 = c @ (psi + dt * k3)
        psi = psi + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    survival = float(np.vdot(psi, psi).real)
    fid = float(abs(np.vdot(dark[-1], psi)) ** 2)
    return EvolutionResult(psi, survival, fid, float(abs(psi[S1]) ** 2))
