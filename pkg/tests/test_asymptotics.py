import math
from fractions import Fraction

import numpy as np
import pytest

from morselab import asymptotics as asym
from morselab import models


def test_asym_limits_kuenneth(p1p1):
    est = asym.asym_hq(models.ns_class(p1p1, (2, 3)), 0, 100)
    assert abs(est.limit - 12.0) < 0.12
    assert est.diagnostic < 1e-3
    est1 = asym.asym_hq(models.ns_class(p1p1, (2, -3)), 1, 100)
    assert abs(est1.limit - 12.0) < 0.12
    # values are the scaled dimensions themselves
    assert est.values[0] == 2 * 3 * 4  # 2! * h^0(L) = 2 * 12


def test_asym_constant_on_torus(torus2):
    cls = models.ns_class(torus2, np.diag([1.0, -1.0]))
    est = asym.asym_hq(cls, 1, 20)
    assert est.limit == pytest.approx(2.0, abs=1e-12)
    assert est.diagnostic < 1e-12


def test_asym_rational_class_via_homogeneity(p1p1):
    cls = models.ns_class(p1p1, (Fraction(1, 2), Fraction(3, 2)))
    est = asym.asym_hq(cls, 0, 60)
    # 2 * (1/2) * (3/2) = 3/2
    assert abs(est.limit - 1.5) < 0.02


def test_asym_guards(p1p1):
    with pytest.raises(ValueError):
        asym.asym_hq(models.ns_class(p1p1, (1, 1)), 0, 5)
    with pytest.raises(ValueError):
        asym.asym_hq(models.ns_class(p1p1, (0.3, 1.0)), 0, 20)


def test_homogeneity_integer_factor(p1p1):
    rep = asym.homogeneity_check(models.ns_class(p1p1, (2, 3)), 0, 2, 100)
    assert rep["table_identity_exact"] is True
    assert rep["expected_factor"] == 4.0
    assert abs(rep["factor_estimate"] - 4.0) < 0.01
    rep1 = asym.homogeneity_check(models.ns_class(p1p1, (2, 3)), 0, 1, 40)
    assert rep1["factor_estimate"] == pytest.approx(1.0, abs=1e-12)


def test_homogeneity_limits_scale(p1p1):
    e1 = asym.asym_hq(models.ns_class(p1p1, (1, 1)), 0, 80)
    e3 = asym.asym_hq(models.ns_class(p1p1, (3, 3)), 0, 80)
    assert abs(e1.limit - 2.0) < 0.03
    assert abs(e3.limit - 18.0) < 0.2


def test_twist_bound_products(p1p1):
    L = models.ns_class(p1p1, (2, 3))
    D = models.ns_class(p1p1, (1, 0))
    rep = asym.twist_bound_check(L, D, 0, 100)
    # difference (2k+2)(3k+1) - (2k+1)(3k+1) = 3k+1: slope 1 = n-1
    assert abs(rep["slope"] - 1.0) <= 0.1
    assert rep["C"] < 2.0
    zero = asym.twist_bound_check(L, models.ns_class(p1p1, (0, 0)), 0, 40)
    assert zero["zero_difference"]


def test_twist_bound_f1(f1):
    L = models.ns_class(f1, (3, 1))
    D = models.ns_class(f1, (0, -1))  # the exceptional curve
    rep = asym.twist_bound_check(L, D, 0, 80)
    assert rep["slope"] is not None and abs(rep["slope"] - 1.0) <= 0.1
    assert np.isfinite(rep["C"])


def test_lipschitz_pairs(p1p1):
    a = models.ns_class(p1p1, (2, 3))
    b = models.ns_class(p1p1, (2, 4))
    rep = asym.lipschitz_check(a, b, 0, 100)
    assert abs(rep["difference"] - 4.0) < 0.1
    assert rep["ratio"] <= 1.0
    same = asym.lipschitz_check(a, a, 0, 60)
    assert same["difference"] < 1e-9


def test_lipschitz_piecewise_linear_path(p1p1):
    # growth at q=1 along (2, t): 4 * max(-t, 0), piecewise linear
    limits = {}
    for t in range(-3, 4):
        est = asym.asym_hq(models.ns_class(p1p1, (2, t)), 1, 80)
        limits[t] = est.limit
        assert abs(est.limit - 4 * max(-t, 0)) < 0.15
    slopes = [abs(limits[t + 1] - limits[t]) for t in range(-3, 3)]
    assert max(slopes) <= 4.0 + 0.2


def test_lipschitz_sweep_bounded(p1p1):
    mesh = [(a, b) for a in (1, 2, 3) for b in (1, 2, 3)]
    rep = asym.lipschitz_sweep(p1p1, mesh, 0, 60)
    assert rep["C_prime"] <= 1.5
    assert rep["pairs"] == len(mesh) * (len(mesh) - 1) // 2


def test_upper_semicontinuity_surrogate(p1p1):
    # rational classes approaching (2, 3) from below and above
    target = asym.asym_hq(models.ns_class(p1p1, (2, 3)), 0, 80).limit
    for m in (2, 4, 8):
        approx = models.ns_class(p1p1, (2 - Fraction(1, m), 3 + Fraction(1, m)))
        value = asym.asym_hq(approx, 0, 80).limit
        slack = 12.0 * (2.0 / m) + 0.1
        assert value <= target + slack


def test_ns_norm_calibration(p1p1, f1, torus1):
    assert asym.ns_norm(models.ns_class(p1p1, (1, 0))) == 1.0
    assert asym.ns_norm(models.ns_class(p1p1, (0, 0))) == 0.0
    assert asym.ns_norm(models.ns_class(f1, (0, -1))) == 0.25  # mass of E
    assert asym.ns_norm(models.ns_class(f1, (1, 0))) == 1.0
    assert asym.ns_norm(models.ns_class(torus1, [[2.0]])) == 2.0


def test_divisor_lattice_triangle_inequality(f1):
    lat = asym.divisor_lattice(f1)
    assert lat.masses == (1.0, 0.25)
    for p in ((1, 0), (0, 2), (3, -1), (-2, 5)):
        for r in ((1, 1), (-1, 0), (2, -3)):
            s = tuple(x + y for x, y in zip(p, r))
            assert lat.norm(s) <= lat.norm(p) + lat.norm(r) + 1e-12
