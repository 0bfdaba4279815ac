"""Model manifolds, quadrature grids, and (1,1)-class bookkeeping.

Three families of compact complex n-folds are supported:

* products of projective spaces with the product Fubini-Study metric,
  normalized so each factor has unit volume;
* flat tori ``C^n / Lambda`` for an arbitrary nonsingular real lattice
  basis, with the standard flat metric;
* the first Hirzebruch surface (the projective plane blown up in one
  point), with a fixed Kaehler metric that stays positive on the
  exceptional curve.

Quadrature runs in action-angle (moment map) coordinates.  The pushforward
of the metric volume ``omega^n`` under the moment map is exactly Lebesgue
measure on the moment polytope, so cell weights are closed-form and sum to
the exact total volume at every resolution.  On the projective models all
fields handled by the package are torus-invariant, which lets the angular
directions integrate out exactly; tori keep a full real grid because
trigonometric potentials are angle-dependent.

Matrix conventions: on projective models a (1,1)-form with matrix ``M`` in
chart coordinates means ``(i/2pi) sum M_jk dw_j dw_k-bar`` (so integrals of
powers reproduce integer intersection numbers); on tori the constant class
matrix ``H`` means ``(i/2) sum H_jk dz_j dz_k-bar`` (so the lattice pairing
of ``H`` has integer entries exactly for integral classes).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

KIND_PRODUCT = "proj_product"
KIND_TORUS = "flat_torus"
KIND_F1 = "hirzebruch_f1"

# Weight of the exceptional correction in the F1 base metric; the metric is
# (1 - delta) * (pullback FS from P^2) + delta * (pullback FS from the
# ruling P^1), a positive form in the class H - delta * E.
F1_DELTA = 0.25

# Fan rays of the dense-torus description of F1; the last ray is the
# exceptional curve E, the third the pulled-back line at infinity.
F1_RAYS = ((1, 0), (0, 1), (-1, -1), (1, 1))

_INT_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class ModelManifold:
    """One of the three concrete model families."""

    kind: str
    n: int
    ns_rank: int
    base_metric_tag: str
    factors: tuple[int, ...] = ()
    lattice: np.ndarray | None = None  # (2n, 2n) real basis, columns generate

    def __repr__(self):
        if self.kind == KIND_PRODUCT:
            return f"ModelManifold(product P^{list(self.factors)})"
        if self.kind == KIND_TORUS:
            return f"ModelManifold(torus n={self.n})"
        return "ModelManifold(F1)"


@dataclass(frozen=True, eq=False)
class NSClass:
    """A (1,1)-class in the model's NS coordinates.

    ``coeffs`` holds factor coefficients for products and the pair
    ``(a, b)`` meaning ``a*H - b*E`` on the Hirzebruch surface; torus
    classes are constant Hermitian matrices stored in ``matrix``.
    """

    model: ModelManifold
    coeffs: tuple | None = None
    matrix: np.ndarray | None = None

    @property
    def is_integral(self) -> bool:
        if self.model.kind == KIND_TORUS:
            pairing = lattice_pairing(self.model, self.matrix)
            return bool(np.max(np.abs(pairing - np.round(pairing))) <= _INT_TOL)
        return all(abs(c - round(c)) <= _INT_TOL for c in self.coeffs)

    def scaled(self, factor) -> "NSClass":
        if self.model.kind == KIND_TORUS:
            return NSClass(self.model, matrix=float(factor) * self.matrix)
        return NSClass(self.model, coeffs=tuple(factor * c for c in self.coeffs))

    def plus(self, other: "NSClass") -> "NSClass":
        if self.model is not other.model and self.model.kind != other.model.kind:
            raise ValueError("classes live on different models")
        if self.model.kind == KIND_TORUS:
            return NSClass(self.model, matrix=self.matrix + other.matrix)
        return NSClass(self.model, coeffs=tuple(
            a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __repr__(self):
        if self.model.kind == KIND_TORUS:
            return f"NSClass(torus, H={np.array2string(self.matrix, precision=3)})"
        return f"NSClass({self.model.kind}, {self.coeffs})"


# ---------------------------------------------------------------------------
# model constructors


def proj_product(factors) -> ModelManifold:
    factors = tuple(int(f) for f in factors)
    if not factors or any(f <= 0 for f in factors):
        raise ValueError("factor dimensions must be positive integers")
    return ModelManifold(
        kind=KIND_PRODUCT,
        n=sum(factors),
        ns_rank=len(factors),
        base_metric_tag="product-fubini-study",
        factors=factors,
    )


def flat_torus(n: int, lattice=None) -> ModelManifold:
    n = int(n)
    if n <= 0:
        raise ValueError("complex dimension must be positive")
    if lattice is None:
        lattice = np.eye(2 * n)
    lattice = np.asarray(lattice, dtype=float)
    if lattice.shape != (2 * n, 2 * n):
        raise ValueError(f"lattice basis must be {2 * n}x{2 * n}")
    if abs(np.linalg.det(lattice)) < 1e-12:
        raise ValueError("lattice basis matrix is singular")
    return ModelManifold(
        kind=KIND_TORUS,
        n=n,
        ns_rank=n * n,
        base_metric_tag="flat",
        lattice=lattice,
    )


def hirzebruch_f1() -> ModelManifold:
    return ModelManifold(
        kind=KIND_F1,
        n=2,
        ns_rank=2,
        base_metric_tag="pullback-fs-plus-exceptional-correction",
    )


def build_model(spec) -> ModelManifold:
    """Build a model from a descriptor mapping.

    ``spec["kind"]`` selects the family; parameters are ``factors`` for
    products and ``n``/``lattice`` for tori.
    """
    if isinstance(spec, ModelManifold):
        return spec
    kind = spec.get("kind")
    if kind == KIND_PRODUCT:
        return proj_product(spec["factors"])
    if kind == KIND_TORUS:
        return flat_torus(spec["n"], spec.get("lattice"))
    if kind == KIND_F1:
        return hirzebruch_f1()
    raise ValueError(f"unknown model kind: {kind!r}")


def ns_class(model: ModelManifold, data) -> NSClass:
    """Validate NS coordinates against the model and wrap them."""
    if model.kind == KIND_TORUS:
        mat = np.asarray(data, dtype=complex)
        if mat.shape != (model.n, model.n):
            raise ValueError(f"torus class must be a {model.n}x{model.n} matrix")
        if np.max(np.abs(mat - mat.conj().T)) > 1e-12:
            raise ValueError("torus class matrix must be Hermitian")
        return NSClass(model, matrix=mat)
    coeffs = tuple(data)
    if len(coeffs) != model.ns_rank:
        raise ValueError(
            f"expected {model.ns_rank} coefficients, got {len(coeffs)}")
    return NSClass(model, coeffs=coeffs)


def f1_class_he(a, c) -> tuple:
    """Coefficients of a*H + c*E in the stored (a, b) = a*H - b*E convention."""
    return (a, -c)


# ---------------------------------------------------------------------------
# volumes and intersection arithmetic


def torus_lebesgue(model: ModelManifold) -> float:
    """Euclidean volume of the fundamental domain."""
    return abs(np.linalg.det(model.lattice))


def vol_omega(model: ModelManifold) -> float:
    """Total mass of omega^n, the quadrature measure."""
    if model.kind == KIND_PRODUCT:
        return top_self_intersection(omega_class(model))
    if model.kind == KIND_TORUS:
        return math.factorial(model.n) * torus_lebesgue(model)
    return float(top_self_intersection(omega_class(model)))  # F1: 15/16


def omega_class(model: ModelManifold) -> NSClass:
    """NS class of the base metric."""
    if model.kind == KIND_PRODUCT:
        return NSClass(model, coeffs=(1,) * model.ns_rank)
    if model.kind == KIND_TORUS:
        return NSClass(model, matrix=np.eye(model.n, dtype=complex))
    return NSClass(model, coeffs=(1, Fraction(1, 4)))  # H - E/4


def torus_columns_complex(model: ModelManifold) -> np.ndarray:
    """Lattice generators as complex column vectors in C^n."""
    basis = model.lattice
    n = model.n
    return basis[:n, :] + 1j * basis[n:, :]


def lattice_pairing(model: ModelManifold, hermitian) -> np.ndarray:
    """Alternating pairing Im h(lambda_j, lambda_k) of a constant form.

    Integral classes are exactly the Hermitian matrices whose pairing has
    integer entries.
    """
    hermitian = np.asarray(hermitian, dtype=complex)
    cols = torus_columns_complex(model)
    gram = cols.conj().T @ hermitian @ cols
    return np.imag(gram)


def hermitian_from_pairing(model: ModelManifold, pairing) -> np.ndarray:
    """Hermitian matrix of the (1,1) part of a lattice 2-form.

    The 2-form is given by its alternating matrix in the lattice basis; it
    is transported to standard coordinates, projected onto the part that
    commutes with the complex structure, and converted to a Hermitian
    matrix.  For a pairing coming from :func:`lattice_pairing` this inverts
    it exactly.
    """
    pairing = np.asarray(pairing, dtype=float)
    n = model.n
    binv = np.linalg.inv(model.lattice)
    f_coords = binv.T @ pairing @ binv
    jmat = np.zeros((2 * n, 2 * n))
    jmat[:n, n:] = -np.eye(n)
    jmat[n:, :n] = np.eye(n)
    f11 = 0.5 * (f_coords + jmat.T @ f_coords @ jmat)
    # h(v, w) = u(v, i w) + i u(v, w) on the (1,1) part
    herm = f11[:n, n:] + 1j * f11[:n, :n]
    return 0.5 * (herm + herm.conj().T)


def coords_form_from_pairing(model: ModelManifold, pairing) -> np.ndarray:
    """Transport a lattice 2-form matrix to standard real coordinates."""
    binv = np.linalg.inv(model.lattice)
    return binv.T @ np.asarray(pairing, dtype=float) @ binv


def top_self_intersection(cls: NSClass):
    """Exact top self-intersection number of a class.

    Integer (or Fraction) for exact input coefficients on product / F1
    models, float for torus classes.
    """
    model = cls.model
    if model.kind == KIND_PRODUCT:
        n = model.n
        if all(isinstance(a, (int, Fraction)) for a in cls.coeffs):
            value = Fraction(math.factorial(n))
            for a, ni in zip(cls.coeffs, model.factors):
                value *= Fraction(a) ** ni / math.factorial(ni)
            return int(value) if value.denominator == 1 else value
        value = float(math.factorial(n))
        for a, ni in zip(cls.coeffs, model.factors):
            value *= float(a) ** ni / math.factorial(ni)
        return value
    if model.kind == KIND_F1:
        a, b = cls.coeffs
        return a * a - b * b
    det = np.linalg.det(cls.matrix).real
    return math.factorial(model.n) * det * torus_lebesgue(model)


def surface_pairing(c1: NSClass, c2: NSClass):
    """Intersection pairing on the two-dimensional models."""
    model = c1.model
    if model.n != 2 or model.kind == KIND_TORUS:
        raise ValueError("surface pairing requires a 2-dimensional algebraic model")
    if model.kind == KIND_F1:
        a1, b1 = c1.coeffs
        a2, b2 = c2.coeffs
        return a1 * a2 - b1 * b2
    if model.factors == (1, 1):
        a1, b1 = c1.coeffs
        a2, b2 = c2.coeffs
        return a1 * b2 + a2 * b1
    if model.factors == (2,):
        return c1.coeffs[0] * c2.coeffs[0]
    raise ValueError(f"unsupported surface factors {model.factors}")


def generator_masses(model: ModelManifold) -> tuple:
    """Mass of a representative divisor of each NS generator w.r.t. omega."""
    if model.kind == KIND_PRODUCT:
        # normalized FS: every hyperplane generator has unit mass
        return (Fraction(1, 1),) * model.ns_rank
    if model.kind == KIND_F1:
        # D . [omega] for D in (H, E) with [omega] = H - E/4
        return (Fraction(1, 1), Fraction(1, 4))
    raise ValueError("generator masses are defined for product and F1 models")


def pseudoeffective(cls: NSClass) -> bool:
    """Membership in the pseudoeffective cone (closed-form per model)."""
    model = cls.model
    if model.kind == KIND_PRODUCT:
        return all(a >= 0 for a in cls.coeffs)
    if model.kind == KIND_F1:
        a, b = cls.coeffs
        return a >= 0 and b <= a
    raise ValueError("pseudoeffective test is defined for product and F1 models")


def is_nef(cls: NSClass) -> bool:
    model = cls.model
    if model.kind == KIND_PRODUCT:
        return all(a >= 0 for a in cls.coeffs)
    if model.kind == KIND_F1:
        a, b = cls.coeffs
        return 0 <= b <= a
    raise ValueError("nef test is defined for product and F1 models")


# ---------------------------------------------------------------------------
# quadrature grids


@dataclass(frozen=True, eq=False)
class QuadratureGrid:
    """Nodes, weights, and base-metric matrices for one model.

    Weights carry the measure ``omega^n``; their sum is the exact total
    volume.  ``coords`` are chart coordinates (dense-torus coordinates on
    projective models, complex coordinates of the fundamental domain on
    tori).
    """

    model: ModelManifold
    resolution: int
    coords: np.ndarray       # (N, n) complex
    weights: np.ndarray      # (N,)
    omega: np.ndarray        # (N, n, n) complex
    chart: np.ndarray        # (N,) int
    frac_coords: np.ndarray | None = None  # torus fractional coordinates
    cluster_levels: int = 0

    @property
    def size(self) -> int:
        return self.weights.shape[0]


def _p1_cells(res):
    mids = (np.arange(res) + 0.5) / res
    lebs = np.full(res, 1.0 / res)
    return mids[:, None], lebs


def _p2_cells(res):
    """Uniform triangulation of the standard 2-simplex; centroid nodes."""
    pts = []
    for i in range(res):
        for j in range(res - i):
            pts.append(((i + 1 / 3) / res, (j + 1 / 3) / res))
            if i + j < res - 1:
                pts.append(((i + 2 / 3) / res, (j + 2 / 3) / res))
    pts = np.array(pts)
    lebs = np.full(len(pts), 0.5 / res**2)
    return pts, lebs


def _factor_coords(tvals):
    """Chart coordinates of a projective factor from moment coordinates."""
    rest = 1.0 - tvals.sum(axis=1)
    return np.sqrt(tvals / rest[:, None]).astype(complex)


def fs_matrices(coords: np.ndarray) -> np.ndarray:
    """Fubini-Study matrices of one factor at chart coordinates (N, m)."""
    s = np.sum(np.abs(coords) ** 2, axis=1)
    m = coords.shape[1]
    eye = np.eye(m)
    outer = coords.conj()[:, :, None] * coords[:, None, :]
    return eye[None] / (1.0 + s)[:, None, None] - outer / ((1.0 + s) ** 2)[:, None, None]


def f1_fs_matrix(coords: np.ndarray) -> np.ndarray:
    """Pullback of the plane Fubini-Study form (class H)."""
    return fs_matrices(coords)


def f1_ruling_matrix(coords: np.ndarray) -> np.ndarray:
    """Pullback of the base P^1 Fubini-Study form under the ruling (class H - E)."""
    s = np.sum(np.abs(coords) ** 2, axis=1)
    outer = coords.conj()[:, :, None] * coords[:, None, :]
    return np.eye(2)[None] / s[:, None, None] - outer / (s ** 2)[:, None, None]


def f1_theta_e_matrix(coords: np.ndarray) -> np.ndarray:
    """Curvature of the fixed metric on O(E); restricts negatively to E."""
    return f1_fs_matrix(coords) - f1_ruling_matrix(coords)


def f1_sigma_sq(coords: np.ndarray) -> np.ndarray:
    """Squared norm of the canonical section of O(E); vanishes exactly on E."""
    s = np.sum(np.abs(coords) ** 2, axis=1)
    return s / (1.0 + s)


def f1_omega_matrix(coords: np.ndarray) -> np.ndarray:
    return (1.0 - F1_DELTA) * f1_fs_matrix(coords) + F1_DELTA * f1_ruling_matrix(coords)


def _f1_band_edges(levels):
    """s-range band edges refining geometrically toward the E facet s=1/4."""
    lo, span = 0.25, 0.75
    edges = [lo + span * 0.5**k for k in range(levels, 0, -1)]
    return [lo] + edges + [1.0] if levels else [lo, 1.0]


def _build_f1_grid(model, res, cluster_levels):
    smin = 0.25
    edges = _f1_band_edges(cluster_levels)
    xi = (np.arange(res) + 0.5) / res
    dxi = 1.0 / res
    s_mids, s_masses = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        bounds = np.linspace(lo, hi, res + 1)
        s_mids.append(0.5 * (bounds[:-1] + bounds[1:]))
        s_masses.append(bounds[1:] ** 2 - bounds[:-1] ** 2)
    s_mids = np.concatenate(s_mids)
    s_masses = np.concatenate(s_masses)

    ss, xx = np.meshgrid(s_mids, xi, indexing="ij")
    mm, _ = np.meshgrid(s_masses, xi, indexing="ij")
    ss, xx, mm = ss.ravel(), xx.ravel(), mm.ravel()
    t1 = ss * (1.0 - xx)
    t2 = ss * xx
    # closed-form inverse moment map of the fixed metric
    rtot = (4.0 * ss - 1.0) / (4.0 * (1.0 - ss))
    r1 = rtot * t1 / ss
    r2 = rtot * t2 / ss
    coords = np.stack([np.sqrt(r1), np.sqrt(r2)], axis=1).astype(complex)
    weights = mm * dxi
    return coords, weights


def build_grid(model: ModelManifold, resolution: int, cluster_levels: int = 0) -> QuadratureGrid:
    """Quadrature grid at the given refinement level.

    ``resolution`` counts cells per moment-coordinate direction on the
    projective models and nodes per real dimension on tori.
    ``cluster_levels`` adds geometric refinement bands toward the
    exceptional curve on the Hirzebruch surface (ratio 2 per level).
    """
    if resolution < 4:
        raise ValueError("resolution must be at least 4")
    if cluster_levels and model.kind != KIND_F1:
        raise ValueError("cluster_levels is only meaningful on the F1 model")

    if model.kind == KIND_PRODUCT:
        cells = []
        for ni in model.factors:
            if ni == 1:
                cells.append(_p1_cells(resolution))
            elif ni == 2:
                cells.append(_p2_cells(resolution))
            else:
                raise NotImplementedError(
                    "quadrature grids are implemented for factor dimensions 1 and 2")
        idx_grids = np.meshgrid(*[np.arange(len(c[0])) for c in cells], indexing="ij")
        idx = [g.ravel() for g in idx_grids]
        coord_blocks, leb = [], 1.0
        for (tvals, lebs), ix in zip(cells, idx):
            coord_blocks.append(_factor_coords(tvals[ix]))
            leb = leb * lebs[ix]
        coords = np.concatenate(coord_blocks, axis=1)
        weights = math.factorial(model.n) * leb
        omega = _product_omega(model, coords)
    elif model.kind == KIND_TORUS:
        dim = 2 * model.n
        axes = [(np.arange(resolution) + 0.5) / resolution] * dim
        mesh = np.meshgrid(*axes, indexing="ij")
        frac = np.stack([m.ravel() for m in mesh], axis=1)
        xreal = frac @ model.lattice.T
        coords = xreal[:, : model.n] + 1j * xreal[:, model.n:]
        count = resolution**dim
        weights = np.full(count, vol_omega(model) / count)
        omega = np.broadcast_to(
            np.eye(model.n, dtype=complex), (count, model.n, model.n)).copy()
        return QuadratureGrid(model, resolution, coords, weights, omega,
                              np.zeros(count, dtype=np.int32), frac_coords=frac)
    else:
        coords, weights = _build_f1_grid(model, resolution, cluster_levels)
        omega = f1_omega_matrix(coords)

    chart = np.zeros(len(weights), dtype=np.int32)
    return QuadratureGrid(model, resolution, coords, np.asarray(weights, dtype=float),
                          omega, chart, cluster_levels=cluster_levels)


def _product_omega(model, coords):
    n = model.n
    count = coords.shape[0]
    omega = np.zeros((count, n, n), dtype=complex)
    off = 0
    for ni in model.factors:
        block = fs_matrices(coords[:, off:off + ni])
        omega[:, off:off + ni, off:off + ni] = block
        off += ni
    return omega


def reference_matrices(cls: NSClass, coords: np.ndarray) -> np.ndarray:
    """Node matrices of the canonical smooth representative of a class."""
    model = cls.model
    if model.kind == KIND_PRODUCT:
        n = model.n
        out = np.zeros((coords.shape[0], n, n), dtype=complex)
        off = 0
        for a, ni in zip(cls.coeffs, model.factors):
            out[:, off:off + ni, off:off + ni] = float(a) * fs_matrices(coords[:, off:off + ni])
            off += ni
        return out
    if model.kind == KIND_TORUS:
        count = coords.shape[0]
        return np.broadcast_to(cls.matrix, (count, model.n, model.n)).copy()
    a, b = (float(c) for c in cls.coeffs)
    # a*H - b*E realized as (a - b) * (FS pullback) + b * (ruling pullback)
    return (a - b) * f1_fs_matrix(coords) + b * f1_ruling_matrix(coords)
