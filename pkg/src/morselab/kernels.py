"""Batched signature kernels with a compiled fast path.

Every Monge-Ampere style integral in the package reduces, node by node, the
pair of Hermitian matrices (omega, u) to the generalized eigenvalues of u
relative to the positive definite omega.  This module provides that
reduction for whole grids at once.  A Cython extension is used when it was
built; otherwise a vectorised NumPy path produces identical results.  Set
``MORSELAB_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from . import _speedups
except ImportError:  # extension not built
    _speedups = None

DEFAULT_TAU0 = 1e-8


def backend_name() -> str:
    """Name of the backend ``signature_data`` will dispatch to."""
    if _speedups is not None and not os.environ.get("MORSELAB_PURE_PYTHON"):
        return "compiled"
    return "pure-python"


def _reduce_pairs_numpy(omega, u, tau0):
    n = omega.shape[-1]
    if n == 1:
        eigs = (u[:, 0, 0].real / omega[:, 0, 0].real)[:, None]
    else:
        chol = np.linalg.cholesky(omega)
        cinv = np.linalg.inv(chol)
        mid = cinv @ u @ cinv.conj().transpose(0, 2, 1)
        mid = 0.5 * (mid + mid.conj().transpose(0, 2, 1))
        eigs = np.linalg.eigvalsh(mid)
    amax = np.abs(eigs).max(axis=1)
    thresh = tau0 * amax
    zero = np.abs(eigs) <= thresh[:, None]
    zero |= amax[:, None] == 0.0
    npos = np.sum((eigs > 0) & ~zero, axis=1)
    nneg = np.sum((eigs < 0) & ~zero, axis=1)
    counts = np.stack([npos, nneg, eigs.shape[1] - npos - nneg], axis=1)
    density = np.prod(eigs, axis=1)
    return eigs, counts.astype(np.int64), density


def signature_data(omega: np.ndarray, u: np.ndarray, tau0: float = DEFAULT_TAU0):
    """Generalized eigenvalues, inertia counts, and densities per node.

    Parameters
    ----------
    omega : (N, n, n) complex
        Positive definite Hermitian matrices of the base metric.
    u : (N, n, n) complex
        Hermitian matrices of the form being classified.
    tau0 : float
        Relative degeneracy threshold: an eigenvalue counts as zero when
        its magnitude is at most ``tau0`` times the largest magnitude at
        the same node.

    Returns
    -------
    eigs : (N, n) float, ascending per node
    counts : (N, 3) int, columns (n_plus, n_minus, n_zero)
    density : (N,) float, product of the generalized eigenvalues
    """
    omega = np.ascontiguousarray(omega, dtype=np.complex128)
    u = np.ascontiguousarray(u, dtype=np.complex128)
    if omega.shape != u.shape or omega.ndim != 3 or omega.shape[1] != omega.shape[2]:
        raise ValueError("omega and u must be matching (N, n, n) stacks")
    if tau0 <= 0:
        raise ValueError("tau0 must be positive")
    if backend_name() == "compiled":
        return _speedups.reduce_pairs(omega, u, tau0)
    return _reduce_pairs_numpy(omega, u, tau0)
