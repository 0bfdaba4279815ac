import math

import numpy as np
import pytest

from morselab import cohomology, models, spectral


def sqrt2_convergent_denominators(bound):
    """Continued-fraction oracle: denominators of convergents of sqrt(2)."""
    denoms = [1, 2]
    while True:
        nxt = 2 * denoms[-1] + denoms[-2]
        if nxt > bound:
            return denoms
        denoms.append(nxt)


def test_dioph_integral_target_is_exact(torus1):
    A = np.array([[0.0, 3.0], [-3.0, 0.0]])
    seq = spectral.dioph_approx(torus1, A, 50)
    assert np.all(seq.errors <= 1e-12)
    assert seq.dirichlet_constant == 0.0


def test_dioph_sqrt2_records_are_convergents(torus1):
    gamma = math.sqrt(2.0)
    A = np.array([[0.0, gamma], [-gamma, 0.0]])
    seq = spectral.dioph_approx(torus1, A, 250)
    assert seq.b2 == 1
    expected = set(sqrt2_convergent_denominators(250))
    assert expected.issubset(set(seq.records.tolist()))
    # classical quality at convergent denominators: error <= 1/k
    for k in seq.records:
        err = seq.errors[k - 1]
        assert err * k <= math.sqrt(2.0) + 1e-9  # frobenius carries sqrt(2)


def test_dioph_random_targets_certify_rate(torus2, rng):
    for _ in range(5):
        h = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        h = 0.5 * (h + h.conj().T)
        A = models.lattice_pairing(torus2, h)
        seq = spectral.dioph_approx(torus2, A, 150)
        assert seq.b2 == 6
        assert np.isfinite(seq.dirichlet_constant)
        assert seq.dirichlet_constant < 4.0
        # the (0,2) part is controlled by the full error for (1,1) targets
        assert np.all(seq.n02 <= seq.errors + 1e-12)


def test_curvature_split_reconstruction(torus2, rng):
    m = np.rint(5 * rng.standard_normal((4, 4)))
    m = np.triu(m, 1) - np.triu(m, 1).T
    parts = spectral.type_split(torus2, m)
    coords_form = models.coords_form_from_pairing(torus2, m)
    assert np.allclose(parts["invariant"] + parts["anti"], coords_form,
                       atol=1e-12)
    assert parts["norm20"] == parts["norm02"]
    # type-pure input has no mixed component
    h = np.diag([2.0, -1.0]).astype(complex)
    pure = spectral.type_split(torus2, models.lattice_pairing(torus2, h))
    assert pure["norm02"] < 1e-12


def test_analytic_zero_level_matches_index(torus1, torus2):
    for d in (1, 2, 3, -2):
        q = 0 if d > 0 else 1
        spec = spectral.laplacian_spectrum(torus1, np.array([[float(d)]]),
                                           1, q, cutoff=10.0)
        assert spec.counting(1e-9) == cohomology.hq_torus_constant(
            torus1, [[float(d)]], q)
    H = np.diag([1.0, -1.0])
    spec2 = spectral.laplacian_spectrum(torus2, H, 1, 1, cutoff=1.0)
    assert spec2.counting(1e-9) == 1
    spec0 = spectral.laplacian_spectrum(torus2, H, 1, 0, cutoff=1.0)
    assert spec0.counting(1e-9) == 0


def test_analytic_levels_and_gap(torus1):
    spec = spectral.laplacian_spectrum(torus1, np.array([[3.0]]), 1, 0,
                                       cutoff=7 * math.pi)
    assert np.allclose(spec.eigenvalues, [0.0, 3 * math.pi, 6 * math.pi])
    assert np.all(spec.multiplicities == 3)
    # counting function is nondecreasing
    lams = np.linspace(0, 7 * math.pi, 40)
    counts = [spec.counting(l) for l in lams]
    assert all(a <= b for a, b in zip(counts, counts[1:]))


def test_level_formula_validation_cases(torus1):
    for degrees, q in (([3], 0), ([3], 1), ([-2], 1), ([2], 0)):
        rep = spectral.validate_level_formula(torus1, degrees, q)
        assert rep["level_error_in_gaps"] <= 0.2
    t2 = models.flat_torus(2)
    rep2 = spectral.validate_level_formula(t2, [1, -1], 1)
    assert rep2["cluster_multiplicity"] == 1


def test_degenerate_and_bad_inputs(torus2):
    with pytest.raises(ValueError):
        spectral.laplacian_spectrum(torus2, np.diag([1.0, 0.0]), 1, 0, 1.0)
    with pytest.raises(ValueError):
        spectral.laplacian_spectrum(torus2, np.diag([0.5, 1.0]), 1, 0, 1.0)
    with pytest.raises(ValueError):
        spectral.laplacian_spectrum(torus2, np.diag([1.0, 1.0]), 1, 5, 1.0)
    with pytest.raises(ValueError):
        spectral.dioph_approx(torus2, np.eye(4), 10)


def test_counting_convergence_signature_cases(torus2):
    H = np.diag([1.0, -1.0])
    rep = spectral.counting_convergence(torus2, H, 1, ks=[4, 8, 12, 16, 20])
    assert rep["target"] == 2.0
    assert rep["final_error"] <= 0.05 * rep["target"]
    rep0 = spectral.counting_convergence(torus2, H, 0, ks=[4, 8, 12, 16, 20])
    assert rep0["target"] == 0.0
    assert rep0["final_scaled_count"] == 0.0


def test_counting_convergence_elliptic(torus1):
    rep = spectral.counting_convergence(torus1, np.array([[2.0]]), 0,
                                        ks=[2, 4, 8, 16])
    assert rep["target"] == 2.0
    assert rep["final_error"] <= 1e-9  # integral data: exact at every k


def test_scaled_counts_bounded_in_k(torus2):
    H = np.diag([1.0, -1.0])
    eps = spectral.default_epsilons(H)[0]
    values = []
    for k in (2, 5, 10, 20, 40):
        mk = spectral._round_alternating(k * models.lattice_pairing(torus2, H))
        spec = spectral.laplacian_spectrum(torus2, mk, k, 1, k * eps)
        values.append(math.factorial(2) / k**2 * spec.counting(k * eps))
    assert max(values) <= 2.0 + 1e-9


def test_metric_rescaling_leaves_limits_unchanged(torus1):
    # doubling the base metric halves eigenvalues but not zero-level counts
    spec1 = spectral.laplacian_spectrum(torus1, np.array([[3.0]]), 1, 0, 40.0)
    spec2 = spectral.laplacian_spectrum(torus1, np.array([[3.0]]), 1, 0, 20.0,
                                        metric_scale=2.0)
    assert np.allclose(spec2.eigenvalues, spec1.eigenvalues / 2.0)
    assert spec1.counting(1e-9) == spec2.counting(1e-9) == 3


def test_spectral_symmetry_swap(torus2):
    for q in (0, 1, 2):
        a = spectral.laplacian_spectrum(torus2, np.diag([2.0, 3.0]), 1, q, 25.0)
        b = spectral.laplacian_spectrum(torus2, np.diag([-2.0, -3.0]), 1,
                                        2 - q, 25.0)
        assert np.allclose(a.eigenvalues, b.eigenvalues)
        assert np.array_equal(a.multiplicities, b.multiplicities)


def test_transcendental_pipeline(torus1, torus2):
    rep = spectral.transcendental_hq(torus1, np.array([[math.sqrt(2.0)]]), 0, 120)
    assert abs(rep["estimate"] - math.sqrt(2.0)) <= 0.05 * math.sqrt(2.0)
    # integral data reproduces the index oracle exactly
    rep2 = spectral.transcendental_hq(torus2, np.diag([1.0, -1.0]), 1, 40)
    assert rep2["estimate"] == pytest.approx(2.0, abs=1e-9)
    # sign-flipped target at complementary degree
    rep3 = spectral.transcendental_hq(torus2, np.diag([-1.0, 1.0]), 1, 40)
    assert rep3["estimate"] == pytest.approx(rep2["estimate"], abs=1e-9)


def test_spectrum_csv(tmp_path, torus1):
    spec = spectral.laplacian_spectrum(torus1, np.array([[2.0]]), 1, 0, 20.0)
    path = tmp_path / "spec.csv"
    spectral.spectrum_to_csv([spec], path)
    lines = path.read_text().splitlines()
    assert lines[0] == "k,q,eigenvalue,multiplicity"
    assert len(lines) == 1 + len(spec.eigenvalues)
