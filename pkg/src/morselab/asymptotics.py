"""Normalized cohomology growth and its continuity properties.

The scaled dimensions ``n! h^q(X, kL) / k^n`` converge on every model
family here (they are eventually polynomial in k), so the growth function
is estimated from a single-bundle sequence with a ``a + b/k`` tail fit.
Rational classes are handled exactly by clearing denominators through the
degree-n homogeneity of the limit.  The module also measures the twist and
difference bounds that make the growth function Lipschitz, reporting
empirical constants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import cohomology, models
from .models import KIND_F1, KIND_PRODUCT, KIND_TORUS, ModelManifold, NSClass


@dataclass(frozen=True, eq=False)
class AsymEstimate:
    """Scaled growth sequence of one (class, q) pair and its limit."""

    ns_class: NSClass
    q: int
    ks: np.ndarray
    values: np.ndarray      # n! h^q(kL) / k^n
    limit: float
    slope: float            # coefficient of 1/k in the tail fit
    diagnostic: float       # max tail residual of the fit


@dataclass(frozen=True, eq=False)
class DivisorLattice:
    """Finitely generated group of divisor classes with an L1 norm table."""

    model: ModelManifold
    generators: tuple
    masses: tuple

    def norm(self, ipart) -> float:
        return float(sum(abs(p) * m for p, m in zip(ipart, self.masses)))


def divisor_lattice(model: ModelManifold, generators=None) -> DivisorLattice:
    if generators is None:
        rank = model.ns_rank
        generators = tuple(
            models.ns_class(model, tuple(1 if i == j else 0 for j in range(rank)))
            for i in range(rank))
    masses = tuple(ns_norm(g) for g in generators)
    return DivisorLattice(model, generators, masses)


def ns_norm(ns_class: NSClass) -> float:
    """Weighted L1 norm on NS coordinates.

    Weights are calibrated so each generator has norm equal to the mass of
    a representative divisor with respect to the base metric (1 for the
    hyperplane generators, 1/4 for the exceptional curve, the fundamental
    domain volume per unit entry on tori).
    """
    model = ns_class.model
    if model.kind == KIND_TORUS:
        leb = models.torus_lebesgue(model)
        return float(leb * np.sum(np.abs(ns_class.matrix)))
    masses = models.generator_masses(model)
    return float(sum(abs(c) * float(m) for c, m in zip(ns_class.coeffs, masses)))


def _integral_rescale(ns_class: NSClass):
    """Smallest positive r with r * class integral, and the scaled class."""
    if ns_class.is_integral:
        return 1, ns_class
    if ns_class.model.kind == KIND_TORUS:
        raise ValueError("torus growth estimates need an integral class")
    fracs = [Fraction(c) if isinstance(c, (int, Fraction)) else None
             for c in ns_class.coeffs]
    if any(f is None for f in fracs):
        raise ValueError("rational growth estimates need exact coefficients")
    r = math.lcm(*(f.denominator for f in fracs))
    return r, ns_class.scaled(r)


def asym_hq(ns_class: NSClass, q: int, kmax: int) -> AsymEstimate:
    """Estimate the scaled growth limit of ``h^q(kL)``.

    The last third of the sequence is fitted with ``a + b/k`` (exact for
    the polynomial dimension counts of these families up to a 1/k^2
    remainder); the reported diagnostic is the largest tail residual.
    Rational classes are scaled integral first and the estimate divided by
    the degree-n homogeneity factor, so ``values[k-1]`` then refers to the
    multiple ``k * r`` of the original class.
    """
    if kmax < 10:
        raise ValueError("kmax must be at least 10")
    r, scaled = _integral_rescale(ns_class)
    model = ns_class.model
    n = model.n
    ks = np.arange(1, kmax + 1)
    values = np.array([math.factorial(n) * cohomology.hq(scaled, q, int(k)) / k**n
                       for k in ks], dtype=float)
    tail = ks >= max(2, math.ceil(2 * kmax / 3))
    design = np.stack([np.ones(tail.sum()), 1.0 / ks[tail]], axis=1)
    (a, b), *_ = np.linalg.lstsq(design, values[tail], rcond=None)
    resid = values[tail] - design @ np.array([a, b])
    scale = 1.0 / r**n
    return AsymEstimate(ns_class, q, ks, values * scale,
                        float(a) * scale, float(b) * scale,
                        float(np.max(np.abs(resid))) * scale)


def homogeneity_check(ns_class: NSClass, q: int, lam, kmax: int) -> dict:
    """Degree-n homogeneity of the growth limit under positive scaling.

    For integer multipliers the scaled-class table must reproduce the
    subsampled base table entry for entry, which makes the homogeneity
    factor exact; estimates are reported alongside.
    """
    model = ns_class.model
    n = model.n
    lam = Fraction(lam) if not isinstance(lam, Fraction) else lam
    scaled = ns_class.scaled(lam if lam.denominator > 1 else int(lam))
    r, scaled_int = _integral_rescale(scaled)
    exact = None
    if lam.denominator == 1 and ns_class.is_integral:
        m = int(lam)
        upto = kmax // max(m, 1)
        exact = all(
            cohomology.hq(scaled_int, q, k) == cohomology.hq(ns_class, q, k * m)
            for k in range(1, max(upto, 2)))
    base = asym_hq(ns_class, q, kmax)
    rescaled = asym_hq(scaled, q, kmax)
    factor = float(lam) ** n
    return {
        "lambda": float(lam),
        "expected_factor": factor,
        "table_identity_exact": exact,
        "limit_base": base.limit,
        "limit_scaled": rescaled.limit,
        "factor_estimate": rescaled.limit / base.limit if base.limit else None,
    }


def twist_bound_check(ns_class: NSClass, twist: NSClass, q: int, kmax: int,
                      lattice: DivisorLattice | None = None) -> dict:
    """Growth of |h^q(kL + D) - h^q(kL)| against the norm bound.

    Reports the empirical constant of the bound
    ``(|c1(kL)| + |D|)^(n-1) |D|`` and the log-log slope of the
    difference, which must not exceed n - 1 for the growth function to be
    Lipschitz.
    """
    model = ns_class.model
    n = model.n
    norm_l = ns_norm(ns_class)
    norm_d = ns_norm(twist)
    ks, diffs, bounds = [], [], []
    for k in range(1, kmax + 1):
        twisted = ns_class.scaled(k).plus(twist)
        base = cohomology.hq(ns_class, q, k)
        other = (cohomology.hq(twisted, q, 1))
        diffs.append(abs(other - base))
        bounds.append((k * norm_l + norm_d) ** (n - 1) * norm_d)
        ks.append(k)
    diffs = np.array(diffs, dtype=float)
    bounds = np.array(bounds, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(bounds > 0, diffs / bounds, 0.0)
    cemp = float(np.max(ratios)) if len(ratios) else 0.0
    tail = np.array(ks) >= max(2, kmax // 2)
    positive = tail & (diffs > 0)
    slope = None
    if positive.sum() >= 2:
        slope = float(np.polyfit(np.log(np.array(ks)[positive]),
                                 np.log(diffs[positive]), 1)[0])
    return {
        "C": cemp,
        "slope": slope,
        "order_limit": n - 1,
        "max_difference": float(diffs.max()) if len(diffs) else 0.0,
        "zero_difference": bool(np.all(diffs == 0)),
    }


def lipschitz_check(alpha: NSClass, beta: NSClass, q: int, kmax: int) -> dict:
    """Difference of two growth limits against the two-point norm bound."""
    n = alpha.model.n
    ea = asym_hq(alpha, q, kmax)
    eb = asym_hq(beta, q, kmax)
    na, nb = ns_norm(alpha), ns_norm(beta)
    sep = ns_norm(beta.plus(alpha.scaled(-1)))
    bound_scale = (na + nb) ** (n - 1) * sep
    diff = abs(eb.limit - ea.limit)
    return {
        "limit_alpha": ea.limit,
        "limit_beta": eb.limit,
        "difference": diff,
        "norm_separation": sep,
        "bound_scale": bound_scale,
        "ratio": diff / bound_scale if bound_scale > 0 else 0.0,
        "diagnostic": max(ea.diagnostic, eb.diagnostic),
    }


def lipschitz_sweep(model: ModelManifold, class_coeffs, q: int, kmax: int) -> dict:
    """Max empirical Lipschitz ratio over a mesh of class pairs."""
    classes = [models.ns_class(model, c) for c in class_coeffs]
    worst, reports = 0.0, []
    for i in range(len(classes)):
        for j in range(i + 1, len(classes)):
            rep = lipschitz_check(classes[i], classes[j], q, kmax)
            reports.append(rep)
            worst = max(worst, rep["ratio"])
    return {"C_prime": worst, "pairs": len(reports), "reports": reports}
