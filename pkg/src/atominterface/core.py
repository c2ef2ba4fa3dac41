"""Numeric primitives: 2x2 complex algebra, a Jacobi eigensolver for small
real-symmetric matrices, and the rate bookkeeping used by the other modules.

2x2 matrices are numpy arrays of shape ``(..., 2, 2)``; every product is
written out entry by entry so that a stacked evaluation gives bit-identical
results to evaluating each matrix alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import ConvergenceError

LN2 = math.log(2.0)


# --------------------------------------------------------------------------
# 2x2 complex matrices
# --------------------------------------------------------------------------

def mat2(m11, m12, m21, m22) -> np.ndarray:
    """Assemble a (stack of) 2x2 complex matrices from broadcastable entries."""
    m11, m12, m21, m22 = np.broadcast_arrays(
        *(np.asarray(x, dtype=complex) for x in (m11, m12, m21, m22))
    )
    out = np.empty(m11.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = m11
    out[..., 0, 1] = m12
    out[..., 1, 0] = m21
    out[..., 1, 1] = m22
    return out


def identity2(shape=()) -> np.ndarray:
    out = np.zeros(tuple(shape) + (2, 2), dtype=complex)
    out[..., 0, 0] = 1.0
    out[..., 1, 1] = 1.0
    return out


def mat2_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product ``a @ b`` of (stacks of) 2x2 complex matrices."""
    a11, a12, a21, a22 = a[..., 0, 0], a[..., 0, 1], a[..., 1, 0], a[..., 1, 1]
    b11, b12, b21, b22 = b[..., 0, 0], b[..., 0, 1], b[..., 1, 0], b[..., 1, 1]
    return mat2(
        a11 * b11 + a12 * b21,
        a11 * b12 + a12 * b22,
        a21 * b11 + a22 * b21,
        a21 * b12 + a22 * b22,
    )


def mat2_det(a: np.ndarray) -> np.ndarray:
    return a[..., 0, 0] * a[..., 1, 1] - a[..., 0, 1] * a[..., 1, 0]


def _pow2_normalize(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Scaling by an exact power of two keeps the mantissas untouched.
    biggest = np.abs(m).max(axis=(-1, -2))
    _, exponent = np.frexp(np.where(biggest > 0, biggest, 1.0))
    scaled = m * np.ldexp(1.0, -exponent)[..., None, None]
    return scaled, exponent.astype(np.int64)


def mat2_power(m: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(p, e)`` with ``m**n == p * 2**e`` for a stack of matrices.

    Binary exponentiation with renormalization after every product, so the
    result never overflows even when the entries of ``m**n`` grow like
    ``exp(alpha * n)``.  ``e`` is an integer array (one exponent per matrix).
    """
    if n < 0:
        raise ValueError("negative matrix power")
    result = identity2(m.shape[:-2])
    res_exp = np.zeros(m.shape[:-2], dtype=np.int64)
    base, base_exp = _pow2_normalize(m)
    while n:
        if n & 1:
            result, e = _pow2_normalize(mat2_mul(result, base))
            res_exp = res_exp + base_exp + e
        n >>= 1
        if n:
            base, e = _pow2_normalize(mat2_mul(base, base))
            base_exp = 2 * base_exp + e
    return result, res_exp


# --------------------------------------------------------------------------
# Real-symmetric eigenproblems
# --------------------------------------------------------------------------

JACOBI_TOL = 1e-14
DEGENERACY_TOL = 1e-10


@dataclass(frozen=True)
class EigenSystem:
    """Ascending energies and gauge-fixed orthonormal eigenvectors (columns)."""

    energies: np.ndarray
    vectors: np.ndarray

    @property
    def n(self) -> int:
        return self.energies.shape[0]

    def vector(self, i: int) -> np.ndarray:
        return self.vectors[:, i]


def jacobi_eigh(h: np.ndarray, tol: float = JACOBI_TOL, max_sweeps: int = 60):
    """Cyclic Jacobi diagonalization of a stack of real symmetric matrices.

    Parameters
    ----------
    h : ndarray, shape (..., n, n)
        Symmetric matrices.
    tol : float
        A matrix is converged once its off-diagonal Frobenius norm drops
        below ``tol * ||h||_F``.  Converged matrices are frozen, so each
        result is independent of whatever else shares the stack.

    Returns
    -------
    energies : ndarray, shape (..., n), ascending
    vectors : ndarray, shape (..., n, n), eigenvectors in columns, gauge
        fixed by :func:`fix_gauge`.
    """
    h = np.asarray(h, dtype=float)
    lead = h.shape[:-2]
    n = h.shape[-1]
    # component-major layout: a[i, j] is a contiguous vector over the stack
    a_all = np.moveaxis(h.reshape((-1, n, n)), 0, -1).copy()  # never write into the input
    size = a_all.shape[-1]
    v_all = np.zeros((n, n, size))
    for i in range(n):
        v_all[i, i] = 1.0
    pairs = list(combinations(range(n), 2))

    def off(x):
        acc = np.zeros(x.shape[-1])
        for p, q in pairs:
            acc = acc + x[p, q] * x[p, q]
        return np.sqrt(2.0 * acc)

    frob = np.zeros(size)
    for i in range(n):
        for j in range(n):
            frob = frob + a_all[i, j] * a_all[i, j]
    threshold_all = tol * np.sqrt(frob)
    idx = np.flatnonzero(off(a_all) > threshold_all)
    sweeps = 0
    while idx.size:
        if sweeps >= max_sweeps:
            raise ConvergenceError(
                f"Jacobi iteration did not converge in {max_sweeps} sweeps "
                f"({idx.size} matrices left)"
            )
        # work on the unconverged matrices only; the arithmetic is elementwise
        a = a_all[:, :, idx]
        v = v_all[:, :, idx]
        for p, q in pairs:
            apq = a[p, q].copy()
            rot = apq != 0.0
            if not rot.any():
                continue
            app = a[p, p].copy()
            aqq = a[q, q].copy()
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                theta = np.where(rot, (aqq - app) / (2.0 * np.where(rot, apq, 1.0)), 0.0)
                t = np.where(theta >= 0.0, 1.0, -1.0) / (np.abs(theta) + np.hypot(theta, 1.0))
            t = np.where(rot, t, 0.0)
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c

            rp = a[p].copy()
            rq = a[q].copy()
            new_p = c * rp - s * rq
            new_q = s * rp + c * rq
            a[p] = new_p
            a[:, p] = new_p
            a[q] = new_q
            a[:, q] = new_q
            a[p, p] = app - t * apq
            a[q, q] = aqq + t * apq
            kept = np.where(rot, 0.0, apq)
            a[p, q] = kept
            a[q, p] = kept

            vp = v[:, p].copy()
            vq = v[:, q].copy()
            v[:, p] = c * vp - s * vq
            v[:, q] = s * vp + c * vq
        a_all[:, :, idx] = a
        v_all[:, :, idx] = v
        sweeps += 1
        idx = idx[off(a) > threshold_all[idx]]

    energies = np.stack([a_all[i, i] for i in range(n)], axis=-1)
    vecs = np.moveaxis(v_all, -1, 0)
    order = np.argsort(energies, axis=1, kind="stable")
    energies = np.take_along_axis(energies, order, axis=1)
    vecs = np.take_along_axis(vecs, order[:, None, :], axis=2)
    vecs = fix_gauge(vecs)
    return energies.reshape(lead + (n,)), vecs.reshape(lead + (n, n))


def fix_gauge(vectors: np.ndarray) -> np.ndarray:
    """Sign convention: the leading near-maximal entry of each column is > 0.

    "Leading" means the lowest index whose magnitude is within a relative
    1e-9 of the column maximum, which makes ties (exchange-symmetric
    vectors) resolve the same way every time.
    """
    mag = np.abs(vectors)
    peak = mag.max(axis=-2, keepdims=True)
    lead = np.argmax(mag >= peak * (1.0 - 1e-9), axis=-2)
    pivot = np.take_along_axis(vectors, lead[..., None, :], axis=-2)
    sign = np.where(pivot < 0.0, -1.0, 1.0)
    return vectors * sign


def _align_to_reference(energies, vectors, ref: EigenSystem, scale: float):
    out = vectors.copy()
    n = energies.shape[0]
    i = 0
    while i < n:
        j = i + 1
        while j < n and energies[j] - energies[j - 1] < DEGENERACY_TOL * scale:
            j += 1
        block = vectors[:, i:j]
        target = ref.vectors[:, i:j]
        if j - i == 1:
            if float(block[:, 0] @ target[:, 0]) < 0.0:
                out[:, i] = -block[:, 0]
        else:
            # closest orthonormal basis of the cluster to the reference
            u, _, wt = np.linalg.svd(block.T @ target)
            out[:, i:j] = block @ (u @ wt)
        i = j
    return out


def check_symmetric(h: np.ndarray) -> np.ndarray:
    h = np.asarray(h, dtype=float)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {h.shape}")
    if not np.array_equal(h, h.T):
        raise ValueError("matrix is not exactly symmetric")
    return h


def eig_sym(h: np.ndarray, reference: EigenSystem | None = None) -> EigenSystem:
    """Diagonalize one real symmetric matrix (n <= 16).

    With a ``reference`` (typically the solution at a neighbouring parameter
    value) eigenvector signs follow the reference; inside degenerate clusters
    the basis is rotated to best overlap the reference basis.
    """
    h = check_symmetric(h)
    if h.shape[0] > 16:
        raise ValueError("eig_sym is meant for n <= 16")
    energies, vectors = jacobi_eigh(h[None])
    energies, vectors = energies[0], vectors[0]
    if reference is not None:
        scale = float(np.linalg.norm(h)) or 1.0
        vectors = _align_to_reference(energies, vectors, reference, scale)
    return EigenSystem(energies, vectors)


# --------------------------------------------------------------------------
# Rates and units
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class RateSet:
    """Laboratory rates.  Angular frequencies in rad/s, lengths in m."""

    g: float
    N: int
    gamma: float = 0.0
    kappa: float = 0.0
    kappa_in: float = 0.0
    c: float = 299_792_458.0
    L: float = 1.0

    def __post_init__(self):
        for name in ("g", "gamma", "kappa", "kappa_in"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if self.c <= 0 or self.L <= 0:
            raise ValueError("c and L must be > 0")

    @property
    def collective_coupling(self) -> float:
        """g * sqrt(N), the natural energy unit of the two-cell problem."""
        return self.g * math.sqrt(self.N)


def kappa_from_Q(omega: float, Q: float) -> float:
    """Resonator energy decay rate omega / Q (1/s)."""
    if omega <= 0 or Q <= 0:
        raise ValueError("omega and Q must be positive")
    return omega / Q


def dimensionless(rates: RateSet) -> tuple[float, float, float]:
    """(kappa, kappa_in, gamma) in units of g*sqrt(N)."""
    unit = rates.collective_coupling
    if unit <= 0:
        raise ValueError("g*sqrt(N) must be positive to serve as the energy unit")
    return rates.kappa / unit, rates.kappa_in / unit, rates.gamma / unit
