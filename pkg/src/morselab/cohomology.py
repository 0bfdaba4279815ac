"""Exact cohomology oracles for the three model families.

Each family has a combinatorial rule that produces the dimensions
``h^q(X, kL)`` as exact integers: the classical vanishing pattern on
projective space combined factorwise on products, lattice-point counts
plus surface Riemann-Roch and duality on the Hirzebruch surface, and the
Pfaffian index count for nondegenerate constant classes on tori.  These
integers are the ground truth every numerical module is tested against.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import models
from .models import KIND_F1, KIND_PRODUCT, KIND_TORUS, ModelManifold, NSClass

F1_CANONICAL = (-3, -1)  # K = -3H + E in the (a, b) -> aH - bE convention


def hq_projspace(n: int, d: int, q: int) -> int:
    """Dimension of H^q(P^n, O(d)).

    Sections exist only in degree 0 for d >= 0 and, dually, in degree n for
    d <= -n-1; everything in between vanishes.
    """
    if n < 1 or not 0 <= q <= n:
        raise ValueError("need n >= 1 and 0 <= q <= n")
    if q == 0 and d >= 0:
        return math.comb(n + d, n)
    if q == n and d <= -n - 1:
        return math.comb(-d - 1, n)
    return 0


def hq_product(factors, multidegree, q: int) -> int:
    """Kuenneth sum over factor degree splittings."""
    factors = tuple(int(f) for f in factors)
    multidegree = tuple(int(d) for d in multidegree)
    if len(factors) != len(multidegree):
        raise ValueError("factors and multidegree lengths differ")

    def rec(i, qleft):
        if i == len(factors):
            return 1 if qleft == 0 else 0
        total = 0
        for qi in range(0, min(qleft, factors[i]) + 1):
            hi = hq_projspace(factors[i], multidegree[i], qi)
            if hi:
                total += hi * rec(i + 1, qleft - qi)
        return total

    return rec(0, q)


def pfaffian(mat) -> int:
    """Exact Pfaffian of an integer antisymmetric matrix."""
    arr = np.asarray(mat)
    rounded = np.rint(arr).astype(object)
    if np.max(np.abs(arr - rounded.astype(float))) > 1e-9:
        raise ValueError("matrix entries are not integers")
    if np.any(rounded + rounded.T != 0):
        raise ValueError("matrix is not antisymmetric")
    idx = list(range(rounded.shape[0]))

    def pf(active):
        if not active:
            return 1
        i0 = active[0]
        rest = active[1:]
        total = 0
        for pos, j in enumerate(rest):
            aij = rounded[i0, j]
            if aij:
                remaining = rest[:pos] + rest[pos + 1:]
                total += (-1) ** pos * int(aij) * pf(remaining)
        return total

    if len(idx) % 2:
        return 0
    return pf(idx)


def hq_torus_constant(model: ModelManifold, hermitian, q: int) -> int:
    """Index count for a nondegenerate constant class on a torus.

    The dimension is concentrated in the degree equal to the number of
    negative eigenvalues, where it equals the Pfaffian of the integral
    lattice pairing.  Degenerate classes are refused.
    """
    hermitian = np.asarray(hermitian, dtype=complex)
    eigs = np.linalg.eigvalsh(hermitian)
    if np.min(np.abs(eigs)) <= 1e-9 * max(np.max(np.abs(eigs)), 1e-30):
        raise ValueError("degenerate constant class refused")
    pairing = models.lattice_pairing(model, hermitian)
    rounded = np.rint(pairing)
    if np.max(np.abs(pairing - rounded)) > 1e-6:
        raise ValueError("class does not pair integrally on the lattice")
    if q != int(np.sum(eigs < 0)):
        return 0
    return abs(pfaffian(rounded.astype(np.int64)))


def _f1_sections(a: int, b: int) -> int:
    """Lattice points of the divisor polytope {m >= 0, b <= m1+m2 <= a}."""
    if a < 0 or b > a:
        return 0

    def tri(x):
        return math.comb(x + 2, 2) if x >= 0 else 0

    return tri(a) - tri(b - 1)


def hq_f1(a: int, b: int, q: int) -> int:
    """Cohomology of a*H - b*E on the Hirzebruch surface.

    h^0 is a polytope lattice count, h^2 comes from duality against the
    canonical class, and h^1 closes the Euler characteristic given by
    surface Riemann-Roch.  A negative h^1 would mean an oracle bug and
    raises instead of being clamped.
    """
    a, b = int(a), int(b)
    if q not in (0, 1, 2):
        raise ValueError("q must be 0, 1, or 2 on a surface")
    h0 = _f1_sections(a, b)
    ka, kb = F1_CANONICAL
    h2 = _f1_sections(ka - a, kb - b)
    chi2 = 2 + a * (a + 3) - b * (b + 1)
    if chi2 % 2:
        raise RuntimeError("non-integral Euler characteristic")
    h1 = h0 + h2 - chi2 // 2
    if h1 < 0:
        raise RuntimeError(f"negative h^1 computed for ({a}, {b}); oracle bug")
    return (h0, h1, h2)[q]


def hq(ns_class: NSClass, q: int, k: int = 1) -> int:
    """Dimension ``h^q(X, kL)`` for an integral class, by family oracle."""
    model = ns_class.model
    if not ns_class.is_integral:
        raise ValueError("cohomology oracles need an integral class")
    if model.kind == KIND_PRODUCT:
        degrees = [k * round(c) for c in ns_class.coeffs]
        return hq_product(model.factors, degrees, q)
    if model.kind == KIND_F1:
        a, b = (round(c) for c in ns_class.coeffs)
        return hq_f1(k * a, k * b, q)
    return hq_torus_constant(model, k * ns_class.matrix, q)


def euler_char(ns_class: NSClass, k: int = 1) -> int:
    """Euler characteristic of ``kL``, the alternating sum of the oracles."""
    model = ns_class.model
    return sum((-1) ** q * hq(ns_class, q, k) for q in range(model.n + 1))


@dataclass(frozen=True, eq=False)
class CohomologyTable:
    """Exact integers h^q(X, kL) for q = 0..n and k = 0..kmax."""

    ns_class: NSClass
    kmax: int
    entries: np.ndarray  # (n + 1, kmax + 1) int64

    def h(self, q: int, k: int) -> int:
        return int(self.entries[q, k])

    def euler(self, k: int) -> int:
        signs = (-1) ** np.arange(self.entries.shape[0])
        return int(signs @ self.entries[:, k])


def hq_table(ns_class: NSClass, kmax: int) -> CohomologyTable:
    model = ns_class.model
    if kmax < 1:
        raise ValueError("kmax must be positive")
    entries = np.zeros((model.n + 1, kmax + 1), dtype=np.int64)
    if model.kind == KIND_TORUS:
        # k = 0 is the trivial bundle: Hodge numbers C(n, q)
        for q in range(model.n + 1):
            entries[q, 0] = math.comb(model.n, q)
    else:
        for q in range(model.n + 1):
            entries[q, 0] = hq(ns_class, q, 0)
    for k in range(1, kmax + 1):
        for q in range(model.n + 1):
            entries[q, k] = hq(ns_class, q, k)
    return CohomologyTable(ns_class, kmax, entries)


def hilbert_fit(table: CohomologyTable) -> tuple:
    """Exact coefficients (ascending) of the Euler characteristic polynomial.

    Interpolates the alternating sums at k = 0..n in rational arithmetic
    and verifies the polynomial against every tabulated k; inconsistent
    data raises, since it would mean the oracles are broken.
    """
    model = table.ns_class.model
    n = model.n
    if table.kmax < n + 1:
        raise ValueError("need kmax >= n + 1 to pin a degree-n polynomial")
    xs = list(range(n + 1))
    ys = [Fraction(table.euler(k)) for k in xs]
    # Newton divided differences
    coef = list(ys)
    for j in range(1, n + 1):
        for i in range(n, j - 1, -1):
            coef[i] = (coef[i] - coef[i - 1]) / (xs[i] - xs[i - j])
    poly = [Fraction(0)] * (n + 1)
    acc = [Fraction(1)]
    for i in range(n + 1):
        for p, c in enumerate(acc):
            poly[p] += coef[i] * c
        newacc = [Fraction(0)] * (len(acc) + 1)
        for p, c in enumerate(acc):
            newacc[p] -= c * xs[i]
            newacc[p + 1] += c
        acc = newacc

    def horner(k):
        val = Fraction(0)
        for c in reversed(poly):
            val = val * k + c
        return val

    for k in range(table.kmax + 1):
        if horner(k) != table.euler(k):
            raise RuntimeError("tabulated Euler characteristics are not polynomial")
    return tuple(poly)


def hilbert_leading_intersection(table: CohomologyTable):
    """n! times the leading coefficient: the exact top self-intersection."""
    poly = hilbert_fit(table)
    value = poly[-1] * math.factorial(table.ns_class.model.n)
    return int(value) if value.denominator == 1 else value


def table_to_csv(table: CohomologyTable, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["q", "k", "hq"])
        for q in range(table.entries.shape[0]):
            for k in range(table.kmax + 1):
                writer.writerow([q, k, int(table.entries[q, k])])


def _class_payload(ns_class: NSClass):
    if ns_class.model.kind == KIND_TORUS:
        return {"matrix_re": np.real(ns_class.matrix).tolist(),
                "matrix_im": np.imag(ns_class.matrix).tolist()}
    return {"coeffs": [float(c) for c in ns_class.coeffs]}


def table_to_json(table: CohomologyTable, path) -> None:
    model = table.ns_class.model
    doc = {
        "model": {"kind": model.kind, "n": model.n,
                  "factors": list(model.factors)},
        "class": _class_payload(table.ns_class),
        "kmax": table.kmax,
        "entries": [{"q": q, "k": k, "hq": int(table.entries[q, k])}
                    for q in range(table.entries.shape[0])
                    for k in range(table.kmax + 1)],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, sort_keys=True, indent=1)
        fh.write("\n")
