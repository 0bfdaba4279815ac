"""Smoothing families replacing the exceptional curve by curvature bumps.

A big class ``a H + c E`` on the Hirzebruch surface contains the singular
positive current ``c [E] + beta`` with smooth part ``beta`` proportional to
the pulled-back plane metric.  The family built here replaces ``c [E]`` by
smooth forms concentrated in an epsilon-tube around E: the global potential
``log(|s_E|_h^2 + eps^2)`` regularizes the logarithmic pole of the
canonical section, so every member stays exactly in the class.  As the
width shrinks, mass splits into a complement part carrying ``beta^2`` and a
tube part carrying the exceptional intersection numbers, and the
positive-signature Morse integral descends to the volume of the class.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import forms, models, volume
from .models import KIND_F1, ModelManifold, NSClass, QuadratureGrid


def _singular_decomposition(ns_class: NSClass):
    """Nef part and exceptional multiplier of the class's singular current.

    The positive current being smoothed is ``c [E] + beta`` with ``beta`` a
    smooth semipositive form in the nef part of the Zariski decomposition;
    nef classes have ``c = 0`` and the family is constant.
    """
    decomp = volume.zariski(ns_class)
    c = float(sum(decomp.multipliers))
    return decomp.positive, c


def metric_on_E(model: ModelManifold, resolution: int = 256) -> dict:
    """Explicit smooth metric data on O(E) with negative curvature along E.

    Returns the squared norm of the canonical section as a callable of the
    chart coordinates together with curvature checks: the degree of the
    restricted curvature (must equal the self-intersection -1), the
    pairing with the pulled-back plane metric (must vanish), and the
    transition consistency of the restricted curvature between the two
    ruling charts.
    """
    if model.kind != KIND_F1:
        raise ValueError("the exceptional metric lives on the F1 model")

    # restriction of the curvature to E, evaluated along the degenerating
    # parameter x -> 0 of the blow-up chart w = (x, x y)
    xsmall = 1e-5

    def restricted(yvals):
        coords = np.stack([np.full(len(yvals), xsmall, dtype=complex),
                           xsmall * yvals], axis=1)
        theta = models.f1_theta_e_matrix(coords)
        tangent = np.array([0.0, xsmall], dtype=complex)
        return np.real(np.einsum("i,nij,j->n", tangent.conj(), theta, tangent))

    tgrid = (np.arange(resolution) + 0.5) / resolution
    rr = np.sqrt(tgrid / (1.0 - tgrid))
    vals = restricted(rr.astype(complex))
    jac = (1.0 + rr**2) ** 2  # (i/2pi) dy dybar measure in moment coordinates
    degree = float(np.sum(vals * jac) / resolution)

    # transition between the ruling charts y and y' = 1/y on |y| = 1
    phases = np.exp(1j * 2 * np.pi * (np.arange(16) + 0.3) / 16)
    va = restricted(phases)
    vb = restricted(1.0 / phases)
    transition_gap = float(np.max(np.abs(va - vb)))  # |dy/dy'| = 1 there
    if transition_gap > 1e-6 * max(np.max(np.abs(va)), 1e-30):
        raise RuntimeError("chart transition inconsistency in the E-metric")

    grid = models.build_grid(model, min(resolution, 128))
    theta_field = forms.field_from_matrices(
        models.ns_class(model, (0, -1)), grid,
        models.f1_theta_e_matrix(grid.coords))
    fs_field = forms.reference_form(models.ns_class(model, (1, 0)), grid)
    mixed_with_h = forms.mixed_mass(theta_field, fs_field)

    return {
        "sigma_sq": models.f1_sigma_sq,
        "restricted_degree": degree,
        "restricted_max": float(np.max(vals)),
        "transition_gap": transition_gap,
        "mixed_with_H": mixed_with_h,
        "theta_self": forms.chern_number(theta_field),
    }


@dataclass(frozen=True, eq=False)
class RegularizationFamily:
    """Per-epsilon smoothings of ``c[E] + beta`` in a fixed class."""

    ns_class: NSClass
    grid: QuadratureGrid
    epsilons: tuple
    smooth_part: NSClass            # nef part carrying beta
    exceptional_coefficient: float  # c

    @property
    def sigma_sq(self) -> np.ndarray:
        return models.f1_sigma_sq(self.grid.coords)

    @property
    def smooth_square(self) -> float:
        return float(models.surface_pairing(self.smooth_part, self.smooth_part))


def default_family_grid(model: ModelManifold, resolution: int, eps_min: float) -> QuadratureGrid:
    """Grid whose geometric bands resolve the eps^2-wide curvature peak."""
    levels = max(4, int(math.ceil(2.0 * math.log2(1.0 / eps_min))) + 2)
    return models.build_grid(model, resolution, cluster_levels=levels)


def build_family(ns_class: NSClass, epsilons, grid: QuadratureGrid | None = None,
                 resolution: int = 24) -> RegularizationFamily:
    model = ns_class.model
    if model.kind != KIND_F1:
        raise ValueError("regularization families live on the F1 model")
    epsilons = tuple(sorted((float(e) for e in epsilons), reverse=True))
    if any(e <= 0 for e in epsilons):
        raise ValueError("epsilon values must be positive")
    if grid is None:
        grid = default_family_grid(model, resolution, epsilons[-1])
    smooth, c = _singular_decomposition(ns_class)
    return RegularizationFamily(ns_class, grid, epsilons, smooth, c)


def u_epsilon(family: RegularizationFamily, eps: float) -> forms.HermitianFormField:
    """The member of the family at width ``eps``.

    In the dense chart ``log(|s_E|^2_h + eps^2)`` differs from
    ``log((1+eps^2) S + eps^2) - log(1 + S)`` by a constant, so the member
    has the closed form ``a M_H + c Q_eps - c M_R`` with Q the Hessian of
    the first logarithm.  This evaluates the rank-one derivative peak and
    the damped curvature term without near-E cancellation.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    coords = family.grid.coords
    c = family.exceptional_coefficient
    mats = models.reference_matrices(family.smooth_part, coords)
    if c:
        s = np.sum(np.abs(coords) ** 2, axis=1)
        alpha, beta = 1.0 + eps**2, eps**2
        denom = alpha * s + beta
        outer = coords.conj()[:, :, None] * coords[:, None, :]
        q_eps = (alpha * np.eye(2)[None] / denom[:, None, None]
                 - alpha**2 * outer / (denom**2)[:, None, None])
        mats = mats + c * (q_eps - models.f1_ruling_matrix(coords))
    return forms.field_from_matrices(family.ns_class, family.grid, mats)


def mass_split(family: RegularizationFamily, eps: float,
               field: forms.HermitianFormField | None = None) -> dict:
    """Total, tube, and complement masses of ``u_eps^2``.

    The tube is ``{|s_E|_h < sqrt(eps)}``, wide enough to contain the
    eps^2-scale rank-one peak and narrow enough that the damped curvature
    tail outside it carries no limiting mass.
    """
    if field is None:
        field = u_epsilon(family, eps)
    profile = forms.signature_profile(field)
    contrib = profile.density * family.grid.weights
    tube = family.sigma_sq < eps
    return {
        "eps": eps,
        "total": float(np.sum(contrib)),
        "tube": float(np.sum(contrib[tube])),
        "complement": float(np.sum(contrib[~tube])),
        "tube_weight": float(np.sum(family.grid.weights[tube])),
    }


def limit_measure_check(family: RegularizationFamily) -> dict:
    """Mass identities of the family along its epsilon schedule.

    Checks (i) constancy of the total mass (class invariance), (ii)
    convergence of the tube/complement split to the exceptional and smooth
    intersection numbers, and (iii) the signed two-dimensional splitting of
    the limit into smooth, cross, and exceptional-curvature terms.
    """
    if len(family.epsilons) < 3:
        raise ValueError("need at least three epsilon values")
    span = math.log10(family.epsilons[0] / family.epsilons[-1])
    if span < 2.0 - 1e-9:
        raise ValueError("epsilon schedule must span at least two decades")
    c = family.exceptional_coefficient
    beta_sq = family.smooth_square
    total_target = float(models.top_self_intersection(family.ns_class))
    rows = [mass_split(family, eps) for eps in family.epsilons]
    finest = rows[-1]
    # smooth beta^2, cross 2 c E.beta (Zariski-orthogonal: 0), exceptional
    # c^2 E.Theta restricted = -c^2
    targets = {"complement": beta_sq, "tube": -c * c,
               "smooth_term": beta_sq, "cross_term": 0.0,
               "exceptional_term": -c * c}
    total_errors = [abs(r["total"] - total_target) for r in rows]
    return {
        "class_square": total_target,
        "rows": rows,
        "max_total_error": max(total_errors),
        "tube_limit": finest["tube"],
        "complement_limit": finest["complement"],
        "targets": targets,
        "tube_error": abs(finest["tube"] - targets["tube"]),
        "complement_error": abs(finest["complement"] - targets["complement"]),
        "converged": (abs(finest["tube"] - targets["tube"])
                      <= 0.1 * max(abs(c * c), 1.0)
                      and abs(finest["complement"] - targets["complement"])
                      <= 0.1 * max(abs(beta_sq), 1.0)),
    }


def morse_vs_volume(ns_class: NSClass, epsilons=None, resolutions=(16, 24),
                    tol: float = 0.05) -> dict:
    """Positive-signature masses of the family against the class volume.

    Every member must stay above the volume (up to quadrature tolerance)
    and the schedule must descend to it within ``tol`` at the finest pair.
    """
    model = ns_class.model
    vol = float(volume.volume_class(ns_class))
    if vol <= 0:
        raise ValueError("the experiment needs a big class")
    if epsilons is None:
        epsilons = (1e-1, 1e-2, 1e-3)
    rows = []
    for res in resolutions:
        family = build_family(ns_class, epsilons, resolution=res)
        for eps in family.epsilons:
            field = u_epsilon(family, eps)
            morse0 = forms.morse_integral(field, 0)
            rows.append({"resolution": res, "eps": eps,
                         "value": morse0.value,
                         "degenerate_weight": morse0.degenerate_weight})
    finest = rows[-1]
    lower_ok = all(r["value"] >= vol - tol * max(vol, 1.0) for r in rows)
    return {
        "volume": vol,
        "rows": rows,
        "finest_value": finest["value"],
        "relative_gap": (finest["value"] - vol) / vol,
        "lower_bound_ok": lower_ok,
        "converged": abs(finest["value"] - vol) <= tol * vol,
    }


def conjecture_lower_bound_check(ns_class: NSClass, sample_fields,
                                 tol: float = 0.05) -> dict:
    """Volume as an upper bound for mixed-signature masses of samples.

    For each sample ``u`` in the class the signed mass over the union of
    the 0- and 1-index regions must stay below the volume (a lower-bound
    certificate for the volume, never a disproof claim: quadrature and
    basis truncation caveats apply).
    """
    vol = float(volume.volume_class(ns_class))
    rows = []
    for field in sample_fields:
        m0 = forms.morse_integral(field, 0)
        m1 = forms.morse_integral(field, 1)
        rhs = m0.value - m1.value  # signed mass over X(u,0) and X(u,1)
        rows.append({"rhs": rhs, "q0": m0.value, "q1": m1.value,
                     "degenerate_weight": m0.degenerate_weight})
    max_rhs = max((r["rhs"] for r in rows), default=0.0)
    slack = tol * max(vol, 1.0)
    return {
        "volume": vol,
        "samples": len(rows),
        "max_rhs": max_rhs,
        "violations": sum(1 for r in rows if r["rhs"] > vol + slack),
        "rows": rows,
    }
