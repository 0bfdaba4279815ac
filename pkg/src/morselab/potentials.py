"""Finite potential bases with closed-form complex Hessians.

Varying a form inside its class means adding the complex Hessian of a
globally smooth real function.  On tori the basis consists of lattice-
periodic trigonometric modes; on the projective models it consists of
monomials in the moment-map coordinates, which are smooth on the whole
manifold and torus-invariant (so the angular quadrature reduction stays
exact).  All Hessians are evaluated analytically, never by finite
differences.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import models
from .models import KIND_F1, KIND_PRODUCT, KIND_TORUS, F1_DELTA, ModelManifold


@dataclass(frozen=True, eq=False)
class PotentialBasis:
    """Basis of smooth real potentials for one model.

    ``exponents`` lists moment-monomial exponent vectors on projective
    models; ``modes`` lists ``(m, parity)`` pairs on tori, where ``m`` is a
    lattice mode vector and parity 0/1 selects cosine/sine.
    """

    model: ModelManifold
    labels: tuple
    exponents: tuple = ()
    modes: tuple = ()

    @property
    def size(self) -> int:
        return len(self.labels)

    def hessian_stack(self, grid) -> np.ndarray:
        """Per-element node-matrix contributions, shape (size, N, n, n).

        The output is in the grid's matrix convention: adding
        ``coeff * stack[k]`` to a field's matrices realizes the potential
        ``coeff * basis[k]`` added inside the class.
        """
        if grid.model.kind != self.model.kind:
            raise ValueError("basis and grid belong to different models")
        if self.model.kind == KIND_TORUS:
            return _torus_stack(self, grid)
        return _moment_stack(self, grid)

    def consistency_check(self, grid) -> float:
        """Max violation of global smoothness proxies at sample points.

        Checks Hermiticity and finiteness of every Hessian on the grid, and
        lattice periodicity of the torus modes.  Returns the largest
        discrepancy found.
        """
        stack = self.hessian_stack(grid)
        if not np.all(np.isfinite(stack)):
            return np.inf
        worst = float(np.max(np.abs(stack - stack.conj().transpose(0, 1, 3, 2))))
        if self.model.kind == KIND_TORUS:
            for m, parity in self.modes:
                theta0 = 2 * np.pi * (grid.frac_coords @ np.asarray(m, dtype=float))
                theta1 = theta0 + 2 * np.pi * sum(m)
                fn = np.cos if parity == 0 else np.sin
                worst = max(worst, float(np.max(np.abs(fn(theta0) - fn(theta1)))))
        return worst


def default_basis(model: ModelManifold, degree: int | None = None) -> PotentialBasis:
    """The standard basis shipped with each model."""
    if model.kind == KIND_TORUS:
        if degree is None:
            degree = 2 if model.n == 1 else 1
        return trig_basis(model, degree)
    if degree is None:
        degree = 2
    return moment_basis(model, degree)


def moment_basis(model: ModelManifold, degree: int) -> PotentialBasis:
    """Monomials of the moment coordinates up to the given total degree."""
    if model.kind not in (KIND_PRODUCT, KIND_F1):
        raise ValueError("moment bases exist on product and F1 models")
    nvars = model.n
    exps, labels = [], []
    for total in range(1, degree + 1):
        for exp in itertools.combinations_with_replacement(range(nvars), total):
            alpha = [0] * nvars
            for e in exp:
                alpha[e] += 1
            exps.append(tuple(alpha))
            labels.append("*".join(f"t{i + 1}^{a}" if a > 1 else f"t{i + 1}"
                                   for i, a in enumerate(alpha) if a))
    return PotentialBasis(model, tuple(labels), exponents=tuple(exps))


def trig_basis(model: ModelManifold, degree: int) -> PotentialBasis:
    """Real trigonometric polynomials of L1 mode degree at most ``degree``."""
    if model.kind != KIND_TORUS:
        raise ValueError("trigonometric bases exist on torus models")
    dim = 2 * model.n
    modes, labels = [], []
    for m in itertools.product(range(-degree, degree + 1), repeat=dim):
        if sum(abs(c) for c in m) == 0 or sum(abs(c) for c in m) > degree:
            continue
        first = next(c for c in m if c != 0)
        if first < 0:  # canonical half-lattice, avoids duplicate pairs
            continue
        for parity, name in ((0, "cos"), (1, "sin")):
            modes.append((m, parity))
            labels.append(f"{name}(2pi {m}.y)")
    return PotentialBasis(model, tuple(labels), modes=tuple(modes))


# ---------------------------------------------------------------------------
# torus modes


def _torus_stack(basis, grid):
    model = basis.model
    n = model.n
    binv_t = np.linalg.inv(model.lattice).T
    frac = grid.frac_coords
    out = np.empty((basis.size, grid.size, n, n), dtype=complex)
    for k, (m, parity) in enumerate(basis.modes):
        mvec = np.asarray(m, dtype=float)
        theta = 2 * np.pi * (frac @ mvec)
        avec = binv_t @ mvec
        cvec = 0.5 * (avec[:n] - 1j * avec[n:])
        trig = np.cos(theta) if parity == 0 else np.sin(theta)
        rank1 = np.outer(cvec, cvec.conj())
        # node matrix convention on tori carries a factor 2 per Hessian
        out[k] = (-2.0 * (2 * np.pi) ** 2) * trig[:, None, None] * rank1[None]
    return out


# ---------------------------------------------------------------------------
# moment monomials on projective models


def _rational_moment_data(coords, offset):
    """Values, gradients, Hessians of |w_a|^2 / (offset + |w|^2).

    coords: (N, m) complex block.  Returns (vals (m,N), grads (m,N,m),
    hessians (m,N,m,m)) indexed by the coordinate ``a`` the function tracks.
    """
    nblock = coords.shape[1]
    absq = np.abs(coords) ** 2
    s = absq.sum(axis=1)
    d = offset + s
    wbar = coords.conj()
    eye = np.eye(nblock)

    vals = (absq / d[:, None]).T
    grads = np.empty((nblock, coords.shape[0], nblock), dtype=complex)
    hess = np.empty((nblock, coords.shape[0], nblock, nblock), dtype=complex)
    for a in range(nblock):
        ga = -absq[:, [a]] * wbar / d[:, None] ** 2
        ga[:, a] += wbar[:, a] / d
        grads[a] = ga
        outer = wbar[:, :, None] * coords[:, None, :]
        ha = (-eye[None] * absq[:, a, None, None]
              + 2.0 * absq[:, a, None, None] * outer / d[:, None, None]) / d[:, None, None] ** 2
        ha[:, a, :] -= wbar[:, [a]] * coords / d[:, None] ** 2
        ha[:, :, a] -= wbar * coords[:, [a]] / d[:, None] ** 2
        ha[:, a, a] += 1.0 / d
        hess[a] = ha
    return vals, grads, hess


def _moment_coordinate_data(model, coords):
    """Moment coordinates with gradients/Hessians embedded in C^n."""
    count, n = coords.shape
    if model.kind == KIND_F1:
        v1, g1, h1 = _rational_moment_data(coords, 1.0)
        v0, g0, h0 = _rational_moment_data(coords, 0.0)
        vals = (1 - F1_DELTA) * v1 + F1_DELTA * v0
        grads = (1 - F1_DELTA) * g1 + F1_DELTA * g0
        hess = (1 - F1_DELTA) * h1 + F1_DELTA * h0
        return vals, grads, hess
    vals = np.empty((n, count))
    grads = np.zeros((n, count, n), dtype=complex)
    hess = np.zeros((n, count, n, n), dtype=complex)
    off = 0
    for ni in model.factors:
        blk = slice(off, off + ni)
        v, g, h = _rational_moment_data(coords[:, blk], 1.0)
        vals[blk] = v
        grads[blk, :, blk] = g
        hess[blk, :, blk, blk] = h
        off += ni
    return vals, grads, hess


def _moment_stack(basis, grid):
    model = basis.model
    coords = grid.coords
    vals, grads, hess = _moment_coordinate_data(model, coords)
    count, n = coords.shape
    out = np.empty((basis.size, count, n, n), dtype=complex)

    def monomial(alpha):
        out_v = np.ones(count)
        for a, e in enumerate(alpha):
            if e:
                out_v = out_v * vals[a] ** e
        return out_v

    for k, alpha in enumerate(basis.exponents):
        acc = np.zeros((count, n, n), dtype=complex)
        for a, ea in enumerate(alpha):
            if ea == 0:
                continue
            lower = list(alpha)
            lower[a] -= 1
            acc += ea * monomial(lower)[:, None, None] * hess[a]
            for b, eb in enumerate(alpha):
                coeff = ea * (eb - (1 if a == b else 0))
                if coeff == 0:
                    continue
                lower2 = list(alpha)
                lower2[a] -= 1
                lower2[b] -= 1
                rank1 = grads[a][:, :, None] * grads[b].conj()[:, None, :]
                acc += coeff * monomial(lower2)[:, None, None] * rank1
        # (i/2pi) matrix convention: i ddbar phi carries a factor 2pi
        out[k] = 2 * np.pi * acc
    return out
