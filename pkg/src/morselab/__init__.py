"""Numerical laboratory for curvature-signature integrals on model manifolds.

The package computes, on three concrete families of compact complex
manifolds (products of projective spaces, flat tori, and the first
Hirzebruch surface):

* exact cohomology dimension tables and their Hilbert polynomials,
* normalized growth limits of cohomology along tensor powers,
* Monge-Ampere integrals restricted to pointwise signature regions,
* volumes of (1,1)-classes through Zariski decompositions and toric
  polytopes,
* smoothing families concentrating curvature along the exceptional curve,
* magnetic Laplacian spectra and low-eigenvalue counts on tori,
* derivative-free minimization of signature integrals over potentials.

Numerical integrals run over exact action-angle quadrature grids and a
batched Hermitian-pair kernel (compiled when available, NumPy otherwise);
every numerical quantity is tested against an exact combinatorial oracle.
"""

__version__ = "0.1.0"

from . import (asymptotics, cohomology, forms, kernels, models, optimizer,
               potentials, regularization, spectral, volume)

__all__ = [
    "__version__",
    "asymptotics",
    "cohomology",
    "forms",
    "kernels",
    "models",
    "optimizer",
    "potentials",
    "regularization",
    "spectral",
    "volume",
]
