"""Smooth (1,1)-form fields, signature classification, and Morse integrals.

A field is a closed form in a fixed class, represented by its Hermitian
node matrices on a quadrature grid.  Fields are either canonical
representatives of their class or such a representative plus the complex
Hessian of a smooth potential, so closedness and the class are exact by
construction.  Classification relative to the base metric happens through
the batched kernel in :mod:`morselab.kernels`; all reductions run in fixed
node order, so results are deterministic and safe to parallelize over
nodes.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from . import kernels, models, potentials
from .models import NSClass, QuadratureGrid

DEFAULT_TAU0 = kernels.DEFAULT_TAU0


@dataclass(frozen=True, eq=False)
class HermitianFormField:
    """A smooth closed form in ``ns_class`` sampled on ``grid``."""

    ns_class: NSClass
    grid: QuadratureGrid
    matrices: np.ndarray            # (N, n, n) complex Hermitian
    potential_coeffs: tuple = ()

    @property
    def model(self):
        return self.ns_class.model


@dataclass(frozen=True, eq=False)
class SignatureProfile:
    """Pointwise inertia data of a field relative to the base metric."""

    counts: np.ndarray       # (N, 3) columns (n_plus, n_minus, n_zero)
    eigenvalues: np.ndarray  # (N, n) ascending generalized eigenvalues
    density: np.ndarray      # (N,) det of u relative to omega
    tau0: float
    degenerate_weight: float


@dataclass(frozen=True)
class MorseIntegral:
    value: float
    degenerate_weight: float
    q: int


def reference_form(ns_class: NSClass, grid: QuadratureGrid) -> HermitianFormField:
    """Canonical smooth representative of a class on a grid."""
    if ns_class.model.kind != grid.model.kind:
        raise ValueError("class and grid belong to different models")
    return HermitianFormField(ns_class, grid,
                              models.reference_matrices(ns_class, grid.coords))


def hessian_form(ns_class: NSClass, coeffs, grid: QuadratureGrid,
                 basis: potentials.PotentialBasis | None = None) -> HermitianFormField:
    """Reference form plus the Hessian of a potential in the given basis."""
    if basis is None:
        basis = potentials.default_basis(ns_class.model)
    coeffs = tuple(float(c) for c in coeffs)
    if len(coeffs) != basis.size:
        raise ValueError(f"expected {basis.size} coefficients, got {len(coeffs)}")
    mats = models.reference_matrices(ns_class, grid.coords)
    if any(coeffs):
        stack = basis.hessian_stack(grid)
        mats = mats + np.tensordot(np.asarray(coeffs), stack, axes=1)
    return HermitianFormField(ns_class, grid, mats, potential_coeffs=coeffs)


def field_from_matrices(ns_class: NSClass, grid: QuadratureGrid, matrices,
                        potential_coeffs=()) -> HermitianFormField:
    matrices = np.asarray(matrices, dtype=complex)
    if matrices.shape != (grid.size, grid.model.n, grid.model.n):
        raise ValueError("matrix stack does not match the grid")
    return HermitianFormField(ns_class, grid, matrices,
                              potential_coeffs=tuple(potential_coeffs))


def signature_profile(field: HermitianFormField, tau0: float = DEFAULT_TAU0) -> SignatureProfile:
    """Classify the field pointwise relative to the base metric.

    Eigenvalues with magnitude at most ``tau0`` times the largest magnitude
    at the same node count as zero; the total weight of such degenerate
    nodes is reported and never silently assigned to a signature region.
    """
    eigs, counts, density = kernels.signature_data(field.grid.omega,
                                                   field.matrices, tau0)
    degw = float(np.sum(field.grid.weights[counts[:, 2] > 0]))
    return SignatureProfile(counts, eigs, density, tau0, degw)


def morse_integral(field: HermitianFormField, q: int,
                   tau0: float = DEFAULT_TAU0,
                   profile: SignatureProfile | None = None) -> MorseIntegral:
    """Signed volume of the field over its exact-signature region.

    Integrates ``(-1)^q det`` over the nodes where the field has exactly
    ``q`` negative and ``n - q`` positive eigenvalues; the result is
    nonnegative by construction.  Degenerate nodes are excluded and their
    total weight reported.
    """
    n = field.model.n
    if not 0 <= q <= n:
        raise ValueError(f"q must lie in [0, {n}]")
    if profile is None:
        profile = signature_profile(field, tau0)
    counts = profile.counts
    mask = (counts[:, 0] == n - q) & (counts[:, 1] == q) & (counts[:, 2] == 0)
    value = (-1.0) ** q * float(np.sum(profile.density[mask] * field.grid.weights[mask]))
    return MorseIntegral(value, profile.degenerate_weight, q)


def chern_number(field: HermitianFormField) -> float:
    """Quadrature value of the top self-power of the field.

    Matches the exact intersection number of its class, independently of
    the potential coefficients, up to quadrature error.
    """
    _, _, density = kernels.signature_data(field.grid.omega, field.matrices)
    return float(np.sum(density * field.grid.weights))


def mixed_mass(field_a: HermitianFormField, field_b: HermitianFormField) -> float:
    """Quadrature value of the mixed wedge mass of two surface fields."""
    if field_a.grid is not field_b.grid:
        raise ValueError("fields must share a grid")
    if field_a.model.n != 2:
        raise ValueError("mixed mass is implemented for surfaces")
    total = HermitianFormField(field_a.ns_class, field_a.grid,
                               field_a.matrices + field_b.matrices)
    return 0.5 * (chern_number(total) - chern_number(field_a) - chern_number(field_b))


def dump_field_csv(field: HermitianFormField, path, tau0: float = DEFAULT_TAU0) -> None:
    """Columnar dump (node, chart, coordinates, eigenvalues, signature, density)."""
    profile = signature_profile(field, tau0)
    n = field.model.n
    header = (["node", "chart"]
              + [f"re_w{j + 1}" for j in range(n)] + [f"im_w{j + 1}" for j in range(n)]
              + [f"eig{j + 1}" for j in range(n)]
              + ["n_plus", "n_minus", "n_zero", "density", "weight"])
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for i in range(field.grid.size):
            row = [i, int(field.grid.chart[i])]
            row += [f"{field.grid.coords[i, j].real:.12g}" for j in range(n)]
            row += [f"{field.grid.coords[i, j].imag:.12g}" for j in range(n)]
            row += [f"{profile.eigenvalues[i, j]:.12g}" for j in range(n)]
            row += [int(profile.counts[i, 0]), int(profile.counts[i, 1]),
                    int(profile.counts[i, 2])]
            row += [f"{profile.density[i]:.12g}", f"{field.grid.weights[i]:.12g}"]
            writer.writerow(row)
