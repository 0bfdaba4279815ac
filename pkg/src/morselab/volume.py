"""Volumes of (1,1)-classes: Zariski decompositions and toric polytopes.

On the surface models the volume of a pseudoeffective class is the
self-intersection of the nef part of its Zariski decomposition, computed
here in exact rational arithmetic against a hardcoded catalog of negative
curves (only the exceptional curve on the Hirzebruch surface; none on
products).  On toric models the same number is reached combinatorially:
the section polytope of the divisor has ``n!`` times its Euclidean volume
equal to the volume of the class, and its scaled lattice counts reproduce
the section counts exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import cohomology, models
from .models import KIND_F1, KIND_PRODUCT, KIND_TORUS, ModelManifold, NSClass


def _frac_coeffs(ns_class: NSClass):
    return tuple(Fraction(c) for c in ns_class.coeffs)


def negative_curve_catalog(model: ModelManifold) -> tuple:
    """Irreducible curves of negative self-intersection (complete per model)."""
    if model.kind == KIND_F1:
        return (models.ns_class(model, (0, -1)),)  # the exceptional curve E
    if model.kind == KIND_PRODUCT and model.n == 2:
        return ()
    raise ValueError("negative-curve catalogs exist for the surface models")


def nef_test_curves(model: ModelManifold) -> tuple:
    """Generators of the curve cone used for nef testing."""
    if model.kind == KIND_F1:
        # exceptional curve and a ruling fiber H - E
        return (models.ns_class(model, (0, -1)), models.ns_class(model, (1, 1)))
    if model.factors == (1, 1):
        return (models.ns_class(model, (1, 0)), models.ns_class(model, (0, 1)))
    if model.factors == (2,):
        return (models.ns_class(model, (1,)),)
    raise ValueError("nef test curves exist for the surface models")


@dataclass(frozen=True, eq=False)
class ZariskiDecomposition:
    """Nef part, negative part, and Gram data of a surface class."""

    ns_class: NSClass
    positive: NSClass            # exact rational coefficients
    curves: tuple                # support of the negative part
    multipliers: tuple           # Fractions, one per curve
    gram: tuple                  # intersection matrix of the support curves

    @property
    def volume(self):
        return models.surface_pairing(self.positive, self.positive)

    def negative(self) -> NSClass:
        model = self.ns_class.model
        coeffs = [Fraction(0)] * model.ns_rank
        for curve, t in zip(self.curves, self.multipliers):
            for i, c in enumerate(curve.coeffs):
                coeffs[i] += t * Fraction(c)
        return models.ns_class(model, tuple(coeffs))


def zariski(ns_class: NSClass) -> ZariskiDecomposition:
    """Exact Zariski decomposition of a pseudoeffective surface class.

    Iteratively moves every catalog curve the class meets negatively into
    the negative part and re-solves the orthogonality system in rational
    arithmetic; terminates because each model has finitely many negative
    curves.
    """
    model = ns_class.model
    if model.n != 2 or model.kind == KIND_TORUS:
        raise ValueError("Zariski decompositions are computed on the surface models")
    if not models.pseudoeffective(ns_class):
        raise ValueError(f"class {ns_class.coeffs} is not pseudoeffective")
    target = models.ns_class(model, _frac_coeffs(ns_class))
    catalog = negative_curve_catalog(model)
    support: list = []

    def solve(curves):
        if not curves:
            return []
        size = len(curves)
        gram = [[Fraction(models.surface_pairing(curves[i], curves[j]))
                 for j in range(size)] for i in range(size)]
        rhs = [Fraction(models.surface_pairing(target, curves[i])) for i in range(size)]
        # Gaussian elimination over Fractions
        mat = [row[:] + [rhs[i]] for i, row in enumerate(gram)]
        for col in range(size):
            piv = next(r for r in range(col, size) if mat[r][col] != 0)
            mat[col], mat[piv] = mat[piv], mat[col]
            inv = Fraction(1) / mat[col][col]
            mat[col] = [x * inv for x in mat[col]]
            for r in range(size):
                if r != col and mat[r][col] != 0:
                    factor = mat[r][col]
                    mat[r] = [x - factor * y for x, y in zip(mat[r], mat[col])]
        return [mat[i][size] for i in range(size)]

    while True:
        ts = solve(support)
        current = target
        for curve, t in zip(support, ts):
            current = current.plus(curve.scaled(-t))
        worst = None
        for curve in catalog:
            if curve in support:
                continue
            if models.surface_pairing(current, curve) < 0:
                worst = curve
                break
        if worst is None:
            break
        support.append(worst)

    positive = current
    gram = tuple(tuple(models.surface_pairing(ci, cj) for cj in support)
                 for ci in support)
    return ZariskiDecomposition(ns_class, positive, tuple(support),
                                tuple(Fraction(t) for t in ts), gram)


def volume_class(ns_class: NSClass):
    """Volume of a class: zero outside the pseudoeffective cone, else the
    self-intersection of the nef part."""
    model = ns_class.model
    if model.kind == KIND_TORUS:
        eigs = np.linalg.eigvalsh(ns_class.matrix)
        if np.min(eigs) <= 0:
            return 0.0
        return models.top_self_intersection(ns_class)
    if not models.pseudoeffective(ns_class):
        return 0
    if model.n == 2:
        return zariski(ns_class).volume
    # higher-dimensional products: the pseudoeffective cone equals the nef cone
    return models.top_self_intersection(ns_class)


# ---------------------------------------------------------------------------
# toric polytopes


@dataclass(frozen=True, eq=False)
class ToricEnvelope:
    """Section polytope of a divisor class with exact rational data."""

    ns_class: NSClass
    rays: tuple
    offsets: tuple               # inequality <m, ray_i> >= -offset_i
    vertices: tuple              # rational vertex list (possibly empty)
    euclidean_volume: Fraction
    volume: Fraction             # n! * euclidean volume

    def lattice_count(self, k: int) -> int:
        return _lattice_count(self.rays, self.offsets, k)


def _surface_rays_offsets(ns_class: NSClass):
    model = ns_class.model
    coeffs = _frac_coeffs(ns_class)
    if model.kind == KIND_F1:
        a, b = coeffs
        return models.F1_RAYS, (Fraction(0), Fraction(0), a, -b)
    if model.factors == (1, 1):
        a, b = coeffs
        return ((1, 0), (-1, 0), (0, 1), (0, -1)), (Fraction(0), a, Fraction(0), b)
    if model.factors == (2,):
        a, = coeffs
        return ((1, 0), (0, 1), (-1, -1)), (Fraction(0), Fraction(0), a)
    raise ValueError("toric polytopes are enumerated on the 2D toric models")


def _vertex_enum_2d(rays, offsets):
    npl = len(rays)
    verts = set()
    for i in range(npl):
        for j in range(i + 1, npl):
            a11, a12 = (Fraction(x) for x in rays[i])
            a21, a22 = (Fraction(x) for x in rays[j])
            det = a11 * a22 - a12 * a21
            if det == 0:
                continue
            b1, b2 = -offsets[i], -offsets[j]
            m1 = (b1 * a22 - b2 * a12) / det
            m2 = (a11 * b2 - a21 * b1) / det
            if all(Fraction(r[0]) * m1 + Fraction(r[1]) * m2 >= -off
                   for r, off in zip(rays, offsets)):
                verts.add((m1, m2))
    if not verts:
        return ()
    verts = list(verts)
    cx = sum(v[0] for v in verts) / len(verts)
    cy = sum(v[1] for v in verts) / len(verts)
    verts.sort(key=lambda v: math.atan2(float(v[1] - cy), float(v[0] - cx)))
    return tuple(verts)


def _shoelace(verts) -> Fraction:
    if len(verts) < 3:
        return Fraction(0)
    area = Fraction(0)
    for i in range(len(verts)):
        x1, y1 = verts[i]
        x2, y2 = verts[(i + 1) % len(verts)]
        area += x1 * y2 - x2 * y1
    return abs(area) / 2


def _lattice_count(rays, offsets, k: int) -> int:
    verts = _vertex_enum_2d(rays, [k * o for o in offsets])
    if not verts:
        return 0
    xs = [v[0] for v in verts]
    ys = [v[1] for v in verts]
    count = 0
    for mx in range(math.floor(min(xs)), math.floor(max(xs)) + 1):
        for my in range(math.floor(min(ys)), math.floor(max(ys)) + 1):
            if all(r[0] * mx + r[1] * my >= -k * off
                   for r, off in zip(rays, offsets)):
                count += 1
    return count


def toric_envelope(ns_class: NSClass, check_kmax: int = 20) -> ToricEnvelope:
    """Exact section polytope of a class on a 2D toric model.

    The scaled lattice counts are verified against the cohomology oracle up
    to ``check_kmax`` when the class is integral; a mismatch raises since
    the polytope and the oracle must agree exactly.
    """
    model = ns_class.model
    if model.kind not in (KIND_F1, KIND_PRODUCT):
        raise ValueError("toric envelopes exist on the toric models")
    rays, offsets = _surface_rays_offsets(ns_class)
    verts = _vertex_enum_2d(rays, offsets)
    area = _shoelace(verts)
    envelope = ToricEnvelope(ns_class, rays, offsets, verts, area,
                             math.factorial(model.n) * area)
    if ns_class.is_integral and check_kmax:
        for k in range(1, check_kmax + 1):
            if envelope.lattice_count(k) != cohomology.hq(ns_class, 0, k):
                raise RuntimeError(
                    f"lattice count disagrees with the section oracle at k={k}")
    return envelope


def orthogonality_check(ns_class: NSClass, deltas, ample=None) -> dict:
    """Orthogonality trend of perturbed decompositions of a big class.

    For each perturbation ``delta`` the class ``alpha + delta * A`` is
    decomposed exactly; removing ``delta * A`` from its nef part leaves an
    approximate decomposition of ``alpha`` whose smooth and negative parts
    meet with mass O(delta), while the volume defect of the smooth part
    opens up at rate O(delta): the ratio against the square root of the
    defect stays bounded.  The exact decomposition itself is orthogonal and
    that is asserted.
    """
    model = ns_class.model
    if ample is None:
        ample = models.ns_class(model, (2, 1) if model.kind == KIND_F1
                                else (1,) * model.ns_rank)
    exact = zariski(ns_class)
    exact_cross = models.surface_pairing(exact.positive, exact.negative())
    if exact_cross != 0:
        raise RuntimeError("exact Zariski decomposition lost orthogonality")
    vol_alpha = exact.volume
    rows = []
    for delta in deltas:
        delta = Fraction(delta)
        perturbed = ns_class.plus(ample.scaled(delta))
        zar = zariski(perturbed)
        beta = zar.positive.plus(ample.scaled(-delta))
        left = abs(models.surface_pairing(zar.negative(), beta))
        defect = zar.volume - models.surface_pairing(beta, beta)
        right = math.sqrt(float(defect)) if defect > 0 else 0.0
        rows.append({
            "delta": float(delta),
            "left": float(left),
            "right": right,
            "ratio": float(left) / right if right > 0 else 0.0,
        })
    return {
        "volume": float(vol_alpha),
        "exact_left": float(exact_cross),
        "rows": rows,
        "C": max((r["ratio"] for r in rows), default=0.0),
    }


# ---------------------------------------------------------------------------
# JSON export with rational coordinates


def _frac_pair(x) -> list:
    f = Fraction(x)
    return [f.numerator, f.denominator]


def decomposition_to_json(decomp: ZariskiDecomposition, path) -> None:
    doc = {
        "class": [_frac_pair(c) for c in decomp.ns_class.coeffs],
        "positive": [_frac_pair(c) for c in decomp.positive.coeffs],
        "curves": [[_frac_pair(c) for c in curve.coeffs] for curve in decomp.curves],
        "multipliers": [_frac_pair(t) for t in decomp.multipliers],
        "gram": [[_frac_pair(g) for g in row] for row in decomp.gram],
        "volume": _frac_pair(decomp.volume),
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, sort_keys=True, indent=1)
        fh.write("\n")


def envelope_to_json(env: ToricEnvelope, path) -> None:
    doc = {
        "class": [_frac_pair(c) for c in env.ns_class.coeffs],
        "rays": [list(r) for r in env.rays],
        "offsets": [_frac_pair(o) for o in env.offsets],
        "vertices": [[_frac_pair(v[0]), _frac_pair(v[1])] for v in env.vertices],
        "euclidean_volume": _frac_pair(env.euclidean_volume),
        "volume": _frac_pair(env.volume),
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, sort_keys=True, indent=1)
        fh.write("\n")
