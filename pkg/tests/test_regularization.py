import numpy as np
import pytest

from morselab import forms, models, potentials, regularization as reg


@pytest.fixture(scope="module")
def family_2hpe(f1):
    cls = models.ns_class(f1, (2, -1))  # 2H + E
    return reg.build_family(cls, (1e-1, 3e-2, 1e-2, 3e-3, 1e-3), resolution=16)


def test_metric_on_e_checks(f1):
    data = reg.metric_on_E(f1)
    assert abs(data["restricted_degree"] + 1.0) < 1e-3   # degree = E^2 = -1
    assert data["restricted_max"] < 0                    # negative along E
    assert data["transition_gap"] < 1e-9
    assert abs(data["mixed_with_H"]) < 1e-3              # H.E = 0
    assert abs(data["theta_self"] + 1.0) < 1e-3          # E^2 = -1


def test_sigma_vanishes_only_near_e(f1):
    grid = models.build_grid(f1, 16, cluster_levels=12)
    psi = models.f1_sigma_sq(grid.coords)
    assert np.all(psi > 0)  # nodes never sit exactly on E
    s = grid.coords  # the moment coordinate s tracks psi linearly
    # psi = (4s - 1)/3 along the grid parametrization
    svals = (1.0 + 3.0 * psi) / 4.0
    assert np.all(svals > 0.25) and np.all(svals < 1.0)


def test_family_smooth_part_from_decomposition(f1, family_2hpe):
    assert family_2hpe.smooth_part.coeffs == (2, 0)
    assert family_2hpe.exceptional_coefficient == 1.0
    nef = reg.build_family(models.ns_class(f1, (3, 1)), (1e-1, 1e-2, 1e-3),
                           resolution=12)
    assert nef.exceptional_coefficient == 0.0


def test_class_invariance_along_epsilon(family_2hpe):
    target = 3.0  # (2H + E)^2
    for eps in family_2hpe.epsilons:
        total = forms.chern_number(reg.u_epsilon(family_2hpe, eps))
        assert abs(total - target) <= 0.005 * abs(target)


def test_u_epsilon_far_field(family_2hpe):
    # far from E the member approaches the smooth part beta
    field = reg.u_epsilon(family_2hpe, 1e-3)
    beta = models.reference_matrices(family_2hpe.smooth_part,
                                     family_2hpe.grid.coords)
    far = family_2hpe.sigma_sq > 0.5
    gap = np.max(np.abs(field.matrices[far] - beta[far]))
    scale = np.max(np.abs(beta[far]))
    assert gap <= 0.01 * scale


def test_mass_split_limits(family_2hpe):
    rep = reg.limit_measure_check(family_2hpe)
    assert rep["class_square"] == 3.0
    assert rep["max_total_error"] <= 0.015
    assert abs(rep["tube_limit"] + 1.0) <= 0.1
    assert abs(rep["complement_limit"] - 4.0) <= 0.1
    assert rep["converged"]


def test_mass_split_no_singular_part(f1):
    # nef class: the family is constant and the tube mass follows the
    # shrinking tube weight to zero
    fam = reg.build_family(models.ns_class(f1, (3, 1)), (1e-1, 1e-2, 1e-3),
                           resolution=12)
    tubes = [abs(reg.mass_split(fam, eps)["tube"]) for eps in fam.epsilons]
    assert tubes == sorted(tubes, reverse=True)
    assert tubes[-1] <= 0.05


def test_epsilon_schedule_guards(f1):
    cls = models.ns_class(f1, (2, -1))
    with pytest.raises(ValueError):
        reg.build_family(cls, (1e-1, -1e-2))
    fam = reg.build_family(cls, (1e-1, 5e-2), resolution=8)
    with pytest.raises(ValueError):
        reg.limit_measure_check(fam)  # needs >= 3 epsilons over 2 decades
    with pytest.raises(ValueError):
        reg.u_epsilon(fam, 0.0)


def test_morse_vs_volume_descends(f1):
    rep = reg.morse_vs_volume(models.ns_class(f1, (2, -1)),
                              epsilons=(1e-1, 1e-2, 1e-3),
                              resolutions=(12, 20))
    assert rep["volume"] == 4.0
    assert rep["lower_bound_ok"] and rep["converged"]
    assert abs(rep["relative_gap"]) <= 0.05

    nef = reg.morse_vs_volume(models.ns_class(f1, (3, 1)),
                              epsilons=(1e-1, 1e-2, 1e-3), resolutions=(16,))
    assert abs(rep["volume"] - 4.0) < 1e-12
    assert abs(nef["finest_value"] - 8.0) <= 0.05 * 8.0


def test_morse_vs_volume_needs_big_class(f1):
    with pytest.raises(ValueError):
        reg.morse_vs_volume(models.ns_class(f1, (1, 1)))  # volume zero


def test_signature_localization(family_2hpe):
    # nodes with a negative eigenvalue concentrate in shrinking tubes
    weights = family_2hpe.grid.weights
    psi = family_2hpe.sigma_sq
    neg_weight = {}
    for eps in (1e-1, 1e-2, 1e-3):
        field = reg.u_epsilon(family_2hpe, eps)
        prof = forms.signature_profile(field)
        has_neg = prof.counts[:, 1] > 0
        neg_weight[eps] = float(np.sum(weights[has_neg]))
        if np.any(has_neg):
            assert np.max(psi[has_neg]) < 60 * eps
    assert neg_weight[1e-3] <= neg_weight[1e-1] + 1e-12


def test_conjecture_bound_examples(f1, family_2hpe, rng):
    # ample-like class on the surface: positive form realizes the volume
    cls = models.ns_class(f1, (3, 1))
    grid = models.build_grid(f1, 24)
    ref = forms.reference_form(cls, grid)
    rep = reg.conjecture_lower_bound_check(cls, [ref])
    assert rep["violations"] == 0
    assert abs(rep["max_rhs"] - rep["volume"]) <= 0.01 * rep["volume"]

    # u_eps family stays below the volume of 2H + E
    samples = [reg.u_epsilon(family_2hpe, eps) for eps in family_2hpe.epsilons]
    rep2 = reg.conjecture_lower_bound_check(models.ns_class(f1, (2, -1)), samples)
    assert rep2["violations"] == 0
    assert rep2["max_rhs"] <= rep2["volume"] + 0.05 * rep2["volume"]

    # boundary class of volume zero: signed masses stay near zero
    cls0 = models.ns_class(f1, (1, 1))
    basis = potentials.default_basis(f1)
    fields = [forms.reference_form(cls0, grid)]
    fields += [forms.hessian_form(cls0, 0.002 * rng.standard_normal(basis.size),
                                  grid, basis) for _ in range(5)]
    rep3 = reg.conjecture_lower_bound_check(cls0, fields, tol=0.05)
    assert rep3["volume"] == 0.0
    assert rep3["violations"] == 0
    assert rep3["max_rhs"] <= 0.05
