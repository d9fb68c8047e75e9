"""Finite elements for the negative Robin spectrum on star-shaped domains.

The mesh is structured: rings of nodes following the boundary inward through a
geometrically graded layer (the eigenfunctions decay like exp(-beta*u)), then
coarser rings shrinking onto the centroid with a final triangle fan.  Elements
are P1 or P2; P2 places midside nodes of boundary edges on the true curve and
integrates the boundary mass with exact arc lengths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sparse
import scipy.sparse.linalg as spla

from .errors import (
    AssemblyError,
    IterationError,
    ParameterError,
    UnsupportedGeometryError,
)
from .geometry import (
    ArcLengthCurve,
    resample_periodic,
    signed_curvature,
    tubular_halfwidth,
)

# Boundary-layer defaults: first layer ~ FIRST_LAYER_FACTOR/beta (never above
# 0.2/beta), geometric growth by LAYER_RATIO.  The mild ratio keeps the deep
# layers fine enough for the P2 eigenvalue error to stay near the remainder
# scale of the large-beta estimates.
FIRST_LAYER_FACTOR = 0.05
LAYER_RATIO = 1.08
INTERIOR_RATIO = 1.7


@dataclass(frozen=True)
class Mesh2D:
    """Conforming triangle mesh with boundary metadata."""

    nodes: np.ndarray            # (n, 2)
    triangles: np.ndarray        # (m, 3), positively oriented
    boundary_edges: np.ndarray   # (b, 2) node pairs, ordered around the cycle
    boundary_edge_s: np.ndarray  # (b, 2) arc-length coordinates of the ends
    boundary_edge_len: np.ndarray  # (b,) exact arc lengths
    boundary_edge_mid: np.ndarray  # (b, 2) on-curve midpoints
    # midside placements that keep boundary-layer elements isoparametric with
    # the normal-offset map: (E, 2) sorted node pairs and their (E, 2) coords
    curved_edge_nodes: np.ndarray = field(default_factory=lambda: np.zeros((0, 2), int))
    curved_edge_mid: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))
    grading: dict = field(default_factory=dict)

    @property
    def node_count(self) -> int:
        return self.nodes.shape[0]

    def triangle_areas(self) -> np.ndarray:
        p = self.nodes[self.triangles]
        return 0.5 * ((p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
                      - (p[:, 2, 0] - p[:, 0, 0]) * (p[:, 1, 1] - p[:, 0, 1]))

    def audit(self) -> None:
        areas = self.triangle_areas()
        if float(np.min(areas)) <= 0.0:
            raise AssemblyError(
                f"{int(np.sum(areas <= 0))} non-positively-oriented triangles"
            )
        heads = self.boundary_edges[:, 0]
        tails = np.roll(self.boundary_edges[:, 1], 1)
        if not np.array_equal(np.sort(heads), np.unique(heads)) or np.any(heads != tails):
            raise AssemblyError("boundary edges do not form a single closed cycle")
        if np.any(np.diff(self.boundary_edge_s[:, 0]) <= 0):
            raise AssemblyError("boundary arc coordinates must increase around the cycle")

    def triangle_of_boundary_edge(self) -> np.ndarray:
        """Index of the unique triangle adjacent to each boundary edge."""
        owner = {}
        for t_idx, tri in enumerate(self.triangles):
            for k in range(3):
                key = (min(tri[k], tri[(k + 1) % 3]), max(tri[k], tri[(k + 1) % 3]))
                owner.setdefault(key, []).append(t_idx)
        out = np.empty(self.boundary_edges.shape[0], dtype=int)
        for i, (a, b) in enumerate(self.boundary_edges):
            tris = owner[(min(a, b), max(a, b))]
            if len(tris) != 1:
                raise AssemblyError("boundary edge shared by multiple triangles")
            out[i] = tris[0]
        return out


@dataclass(frozen=True)
class AssembledForms:
    """Stiffness, domain mass, and boundary mass with their dof layout."""

    stiffness: sparse.csr_matrix
    domain_mass: sparse.csr_matrix
    boundary_mass: sparse.csr_matrix
    dof_count: int
    order: int
    dof_coords: np.ndarray
    boundary_dofs: np.ndarray
    element_dofs: np.ndarray  # (m, 3) for P1 or (m, 6) for P2

    def validate(self, boundary_length: float) -> None:
        ones = np.ones(self.dof_count)
        k_scale = float(np.max(np.abs(self.stiffness.data))) or 1.0
        if float(np.max(np.abs(self.stiffness @ ones))) > 1e-8 * k_scale:
            raise AssemblyError("constants are not in the kernel of the stiffness form")
        total = float(ones @ (self.boundary_mass @ ones))
        if abs(total - boundary_length) > 1e-6:
            raise AssemblyError(
                f"boundary mass total {total:.12g} != boundary length {boundary_length:.12g}"
            )


@dataclass(frozen=True)
class EigenResult:
    """Computed eigenvalues for one beta, ascending, with error estimates."""

    beta: float
    eigenvalues: np.ndarray
    mesh_id: str
    discretization_error_estimate: np.ndarray | None = None

    @property
    def negative_eigenvalues(self) -> np.ndarray:
        return self.eigenvalues[self.eigenvalues < 0.0]


# ---------------------------------------------------------------------------
# meshing
# ---------------------------------------------------------------------------

def _polygon_centroid(points: np.ndarray) -> np.ndarray:
    x, y = points[:, 0], points[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    area = 0.5 * np.sum(cross)
    cx = np.sum((x + xn) * cross) / (6.0 * area)
    cy = np.sum((y + yn) * cross) / (6.0 * area)
    return np.array([cx, cy])


def _layer_depths(first: float, ratio: float, depth: float) -> np.ndarray:
    depths = [0.0]
    step = first
    while depths[-1] < depth:
        nxt = depths[-1] + step
        if nxt >= depth - 0.25 * step:
            nxt = depth
        depths.append(nxt)
        step *= ratio
    return np.asarray(depths)


def mesh_domain(alc: ArcLengthCurve, beta: float, target_h: float,
                first_layer: float | None = None, ratio: float | None = None,
                depth: float | None = None) -> Mesh2D:
    """Boundary-layer-graded structured mesh of a star-shaped domain.

    The boundary layer reaches depth min(a1, (6/beta)*max(1, log beta)); its
    first layer is never thicker than 0.2/beta.  The interior is filled by
    rings shrinking onto the centroid plus a final fan.
    """
    if beta < 0:
        raise ParameterError("beta must be nonnegative")
    length = alc.length_L
    if target_h >= length / 16.0:
        raise ParameterError("target_h must be below L/16")

    cp = signed_curvature(alc)
    a1 = tubular_halfwidth(alc, cp)

    n_s = int(max(48, round(length / target_h)))
    n_s += n_s % 2
    bx = resample_periodic(alc.gamma_pos[:, 0], n_s)
    by = resample_periodic(alc.gamma_pos[:, 1], n_s)
    tx = resample_periodic(alc.gamma_d1[:, 0], n_s)
    ty = resample_periodic(alc.gamma_d1[:, 1], n_s)
    boundary = np.stack([bx, by], axis=1)
    inward = np.stack([ty, -tx], axis=1)

    centroid = _polygon_centroid(boundary)
    angles = np.arctan2(boundary[:, 1] - centroid[1], boundary[:, 0] - centroid[0])
    turns = np.diff(np.unwrap(angles))
    if not (np.all(turns < 0) or np.all(turns > 0)):
        raise UnsupportedGeometryError("domain is not star-shaped about its centroid")

    beta_eff = max(beta, 1.0)
    if first_layer is None:
        first_layer = FIRST_LAYER_FACTOR / beta_eff
    first_layer = min(first_layer, 0.2 / beta_eff)
    if ratio is None:
        ratio = LAYER_RATIO
    radial = np.linalg.norm(boundary - centroid, axis=1)
    depth_cap = min(a1, 0.8 * float(np.min(radial)))
    if depth is None:
        depth = min((6.0 / beta_eff) * max(1.0, math.log(beta_eff)), depth_cap)
    else:
        depth = min(depth, depth_cap)
    if depth <= 2 * first_layer:
        raise ParameterError("boundary-layer depth collapsed; reduce first_layer")

    depths = _layer_depths(first_layer, ratio, depth)
    rings = [boundary + d * inward for d in depths]

    inner = rings[-1]
    inner_radial = np.linalg.norm(inner - centroid, axis=1)
    r_med = float(np.median(inner_radial))
    step = (depths[-1] - depths[-2]) * INTERIOR_RATIO
    fractions = [1.0]
    while fractions[-1] * r_med > 2.2 * step:
        fractions.append(fractions[-1] - step / r_med)
        step = min(step * INTERIOR_RATIO, 0.45 * r_med)
    for frac in fractions[1:]:
        rings.append(centroid + frac * (inner - centroid))

    nodes = np.concatenate(rings + [centroid[None, :]], axis=0)
    center_idx = nodes.shape[0] - 1
    n_rings = len(rings)

    def idx(ring, i):
        return ring * n_s + (i % n_s)

    tris = []
    for r in range(n_rings - 1):
        for i in range(n_s):
            a0, a1_, b0, b1 = idx(r, i), idx(r, i + 1), idx(r + 1, i), idx(r + 1, i + 1)
            if i % 2 == 0:
                tris.append((a0, a1_, b1))
                tris.append((a0, b1, b0))
            else:
                tris.append((a0, a1_, b0))
                tris.append((a1_, b1, b0))
    for i in range(n_s):
        tris.append((idx(n_rings - 1, i), idx(n_rings - 1, i + 1), center_idx))
    triangles = np.asarray(tris, dtype=int)

    p = nodes[triangles]
    areas = 0.5 * ((p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
                   - (p[:, 2, 0] - p[:, 0, 0]) * (p[:, 1, 1] - p[:, 0, 1]))
    flip = areas < 0
    triangles[flip] = triangles[flip][:, [0, 2, 1]]

    ds = length / n_s
    edge_nodes = np.stack([np.arange(n_s), (np.arange(n_s) + 1) % n_s], axis=1)
    edge_s = np.stack([np.arange(n_s) * ds, (np.arange(n_s) + 1) * ds], axis=1)
    mid_x = resample_periodic(alc.gamma_pos[:, 0], n_s, shift=0.5)
    mid_y = resample_periodic(alc.gamma_pos[:, 1], n_s, shift=0.5)
    half_b = np.stack([mid_x, mid_y], axis=1)
    half_tx = resample_periodic(alc.gamma_d1[:, 0], n_s, shift=0.5)
    half_ty = resample_periodic(alc.gamma_d1[:, 1], n_s, shift=0.5)
    half_inward = np.stack([half_ty, -half_tx], axis=1)

    # Boundary-layer elements follow the normal-offset map: tangential edge
    # midpoints sit on the offset ring at their depth, diagonal midpoints on
    # the intermediate ring at the half arc (radial edges are already exact).
    i_arr = np.arange(n_s)
    n_layer_rings = len(depths)
    curved_nodes = []
    curved_mid = []
    for r in range(n_layer_rings):
        a = i_arr + r * n_s
        b = (i_arr + 1) % n_s + r * n_s
        curved_nodes.append(np.stack([np.minimum(a, b), np.maximum(a, b)], axis=1))
        curved_mid.append(half_b + depths[r] * half_inward)
    for r in range(n_layer_rings - 1):
        d_half = 0.5 * (depths[r] + depths[r + 1])
        outer = np.where(i_arr % 2 == 0, i_arr, (i_arr + 1) % n_s) + r * n_s
        inner = np.where(i_arr % 2 == 0, (i_arr + 1) % n_s, i_arr) + (r + 1) * n_s
        curved_nodes.append(np.stack([np.minimum(outer, inner),
                                      np.maximum(outer, inner)], axis=1))
        curved_mid.append(half_b + d_half * half_inward)

    mesh = Mesh2D(
        nodes=nodes,
        triangles=triangles,
        boundary_edges=edge_nodes,
        boundary_edge_s=edge_s,
        boundary_edge_len=np.full(n_s, ds),
        boundary_edge_mid=half_b,
        curved_edge_nodes=np.concatenate(curved_nodes, axis=0),
        curved_edge_mid=np.concatenate(curved_mid, axis=0),
        grading={
            "n_boundary": n_s,
            "first_layer": first_layer,
            "ratio": ratio,
            "depth": float(depth),
            "layers": len(depths) - 1,
            "target_h": target_h,
        },
    )
    mesh.audit()
    return mesh


# ---------------------------------------------------------------------------
# assembly
# ---------------------------------------------------------------------------

_S15 = math.sqrt(15.0)
_TRI_QP = np.array([
    [1.0 / 3.0, 1.0 / 3.0],
    [(6.0 - _S15) / 21.0, (6.0 - _S15) / 21.0],
    [(9.0 + 2.0 * _S15) / 21.0, (6.0 - _S15) / 21.0],
    [(6.0 - _S15) / 21.0, (9.0 + 2.0 * _S15) / 21.0],
    [(6.0 + _S15) / 21.0, (6.0 + _S15) / 21.0],
    [(9.0 - 2.0 * _S15) / 21.0, (6.0 + _S15) / 21.0],
    [(6.0 + _S15) / 21.0, (9.0 - 2.0 * _S15) / 21.0],
])
_TRI_QW = 0.5 * np.array(
    [9.0 / 40.0]
    + [(155.0 - _S15) / 1200.0] * 3
    + [(155.0 + _S15) / 1200.0] * 3
)


def _shape_tables(order: int):
    """Shape function values and reference gradients at the quadrature points."""
    xi, eta = _TRI_QP[:, 0], _TRI_QP[:, 1]
    lam = np.stack([1.0 - xi - eta, xi, eta], axis=1)           # (q, 3)
    dlam = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])      # (3, 2)
    if order == 1:
        n = lam
        dn = np.broadcast_to(dlam, (lam.shape[0], 3, 2)).copy()
        return n, dn
    n = np.empty((lam.shape[0], 6))
    dn = np.empty((lam.shape[0], 6, 2))
    for c in range(3):
        n[:, c] = lam[:, c] * (2.0 * lam[:, c] - 1.0)
        dn[:, c, :] = (4.0 * lam[:, c, None] - 1.0) * dlam[c]
    for e, (i, j) in enumerate(((0, 1), (1, 2), (2, 0))):
        n[:, 3 + e] = 4.0 * lam[:, i] * lam[:, j]
        dn[:, 3 + e, :] = 4.0 * (lam[:, i, None] * dlam[j] + lam[:, j, None] * dlam[i])
    return n, dn


def _edge_midpoint_table(mesh: Mesh2D):
    """Unique-edge numbering and midside coordinates (curved in the layer)."""
    tris = mesh.triangles
    pairs = np.concatenate([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]], axis=0)
    keys = np.sort(pairs, axis=1)
    uniq, inverse = np.unique(keys, axis=0, return_inverse=True)
    midpoints = 0.5 * (mesh.nodes[uniq[:, 0]] + mesh.nodes[uniq[:, 1]])
    lookup = {(int(a), int(b)): i for i, (a, b) in enumerate(uniq)}
    for (a, b), xy in zip(mesh.curved_edge_nodes, mesh.curved_edge_mid):
        e = lookup.get((int(a), int(b)))
        if e is not None:
            midpoints[e] = xy
    boundary_mid_index = np.empty(mesh.boundary_edges.shape[0], dtype=int)
    for i, (a, b) in enumerate(mesh.boundary_edges):
        e = lookup[(min(int(a), int(b)), max(int(a), int(b)))]
        midpoints[e] = mesh.boundary_edge_mid[i]
        boundary_mid_index[i] = e
    m = tris.shape[0]
    edge_of_tri = inverse.reshape(3, m).T  # columns: edges (01), (12), (20)
    return uniq, midpoints, edge_of_tri, boundary_mid_index


def assemble(mesh: Mesh2D, order: int = 2) -> AssembledForms:
    """Stiffness, domain mass, and boundary mass for P1 or P2 elements.

    Elements are isoparametric; midside nodes of boundary edges sit on the
    true curve.  The boundary mass uses the exact arc length of each edge, so
    row sums of B add up to the boundary length for any order.
    """
    if order not in (1, 2):
        raise ParameterError("order must be 1 or 2")
    tris = mesh.triangles
    nv = mesh.node_count

    if order == 1:
        elem_dofs = tris
        dof_coords = mesh.nodes
        boundary_edge_dofs = [mesh.boundary_edges]
    else:
        uniq, midpoints, edge_of_tri, boundary_mid = _edge_midpoint_table(mesh)
        elem_dofs = np.concatenate([tris, nv + edge_of_tri], axis=1)
        dof_coords = np.concatenate([mesh.nodes, midpoints], axis=0)
        boundary_edge_dofs = [mesh.boundary_edges, (nv + boundary_mid)[:, None]]

    ndof = dof_coords.shape[0]
    n_tab, dn_tab = _shape_tables(order)
    coords = dof_coords[elem_dofs]  # (m, nn, 2)

    jac = np.einsum("qak,eaj->eqkj", dn_tab, coords)
    det = jac[..., 0, 0] * jac[..., 1, 1] - jac[..., 0, 1] * jac[..., 1, 0]
    if float(np.min(det)) <= 0.0:
        raise AssemblyError("non-positive Jacobian in an element (degenerate triangle)")
    inv = np.empty_like(jac)
    inv[..., 0, 0] = jac[..., 1, 1]
    inv[..., 1, 1] = jac[..., 0, 0]
    inv[..., 0, 1] = -jac[..., 0, 1]
    inv[..., 1, 0] = -jac[..., 1, 0]
    inv /= det[..., None, None]
    # d(N_a)/dx_j = dN_a/dxi_k * (J^{-T})_{kj} with J_{kj} = dx_j/dxi_k
    grads = np.einsum("qak,eqjk->eqaj", dn_tab, inv)

    wdet = _TRI_QW[None, :] * det
    k_loc = np.einsum("eq,eqaj,eqbj->eab", wdet, grads, grads)
    m_loc = np.einsum("eq,qa,qb->eab", wdet, n_tab, n_tab)

    nn = elem_dofs.shape[1]
    rows = np.repeat(elem_dofs, nn, axis=1).ravel()
    cols = np.tile(elem_dofs, (1, nn)).ravel()
    stiffness = sparse.coo_matrix((k_loc.ravel(), (rows, cols)), shape=(ndof, ndof)).tocsr()
    domain_mass = sparse.coo_matrix((m_loc.ravel(), (rows, cols)), shape=(ndof, ndof)).tocsr()

    if order == 1:
        b_dofs = mesh.boundary_edges
        base = np.array([[1.0 / 3.0, 1.0 / 6.0], [1.0 / 6.0, 1.0 / 3.0]])
    else:
        b_dofs = np.concatenate(boundary_edge_dofs, axis=1)
        base = np.array([
            [2.0 / 15.0, -1.0 / 30.0, 1.0 / 15.0],
            [-1.0 / 30.0, 2.0 / 15.0, 1.0 / 15.0],
            [1.0 / 15.0, 1.0 / 15.0, 8.0 / 15.0],
        ])
    nb = b_dofs.shape[1]
    b_loc = mesh.boundary_edge_len[:, None, None] * base[None, :, :]
    brows = np.repeat(b_dofs, nb, axis=1).ravel()
    bcols = np.tile(b_dofs, (1, nb)).ravel()
    boundary_mass = sparse.coo_matrix(
        (b_loc.ravel(), (brows, bcols)), shape=(ndof, ndof)
    ).tocsr()

    forms = AssembledForms(
        stiffness=stiffness,
        domain_mass=domain_mass,
        boundary_mass=boundary_mass,
        dof_count=ndof,
        order=order,
        dof_coords=dof_coords,
        boundary_dofs=np.unique(b_dofs.ravel()),
        element_dofs=elem_dofs,
    )
    forms.validate(float(np.sum(mesh.boundary_edge_len)))
    return forms


# ---------------------------------------------------------------------------
# eigenvalue solves
# ---------------------------------------------------------------------------

def solve_negative_spectrum(forms: AssembledForms, beta: float, n: int,
                            gamma_star: float, mesh_id: str = "mesh") -> EigenResult:
    """Lowest n eigenvalues of (K - beta B) v = lambda M v by shift-invert.

    The shift sits at -(beta + gamma_star/2)^2, just below the essential
    cluster of negative eigenvalues; converged pairs must satisfy
    ||A v - lambda M v|| <= 1e-9 * max(|lambda|, 1) * ||v||_M.
    """
    if n < 1 or n > 12:
        raise ParameterError("requested mode count must lie in 1..12")
    a_mat = (forms.stiffness - beta * forms.boundary_mass).tocsc()
    m_mat = forms.domain_mass.tocsc()
    sigma = -((beta + 0.5 * gamma_star) ** 2)
    vals = vecs = None
    last_exc: Exception | None = None
    for attempt in range(3):
        try:
            vals, vecs = spla.eigsh(a_mat, k=n, M=m_mat, sigma=sigma, which="LM",
                                    maxiter=2000, tol=0)
            break
        except RuntimeError as exc:  # factorization hit an eigenvalue: nudge
            sigma *= 1.0 + 1e-3
            last_exc = exc
        except spla.ArpackNoConvergence as exc:
            last_exc = exc
            sigma *= 1.0 + 1e-3
    if vals is None:
        raise IterationError(f"shift-invert iteration failed: {last_exc}")

    order_idx = np.argsort(vals)
    vals = vals[order_idx]
    vecs = vecs[:, order_idx]
    for i in range(n):
        v = vecs[:, i]
        resid = np.linalg.norm(a_mat @ v - vals[i] * (m_mat @ v))
        norm_m = math.sqrt(abs(float(v @ (m_mat @ v))))
        if resid > 1e-9 * max(abs(vals[i]), 1.0) * norm_m:
            raise IterationError(
                f"eigenpair {i} residual {resid:.3e} above tolerance"
            )
    floor = -((beta + 0.5 * gamma_star) ** 2) - 1.0
    if vals[0] < floor:
        raise IterationError(
            f"ground state {vals[0]:.6g} below the variational corridor {floor:.6g}"
        )
    return EigenResult(beta=beta, eigenvalues=vals, mesh_id=mesh_id,
                       discretization_error_estimate=None)


def compute_spectrum(alc: ArcLengthCurve, beta: float, n: int, order: int = 2,
                     target_h: float | None = None, refine: bool = True,
                     first_layer: float | None = None,
                     ratio: float | None = None) -> EigenResult:
    """Mesh, assemble, and solve; error estimates from one uniform refinement.

    The refined solve halves both the tangential spacing and the first layer;
    the returned eigenvalues are the refined ones when refine is set, with
    per-mode estimates |lambda_fine - lambda_coarse|.
    """
    cp = signed_curvature(alc)
    if target_h is None:
        # higher modes sharpen along the boundary as beta grows
        n_tangential = max(256, int(math.ceil(38.0 * math.sqrt(max(beta, 1.0)))))
        target_h = alc.length_L / n_tangential
    beta_eff = max(beta, 1.0)
    if first_layer is None:
        first_layer = FIRST_LAYER_FACTOR / beta_eff

    if ratio is None:
        ratio = LAYER_RATIO
    mesh = mesh_domain(alc, beta, target_h, first_layer=first_layer, ratio=ratio)
    forms = assemble(mesh, order)
    tag = f"h={target_h:.4g},t1={first_layer:.4g},p{order}"
    coarse = solve_negative_spectrum(forms, beta, n, cp.gamma_star, mesh_id=tag)
    if not refine:
        return coarse

    # Uniform refinement: halve the tangential spacing, the first layer, and
    # the grading increment so every error component shrinks with it.
    mesh_f = mesh_domain(alc, beta, 0.5 * target_h,
                         first_layer=0.5 * first_layer,
                         ratio=1.0 + 0.5 * (ratio - 1.0))
    forms_f = assemble(mesh_f, order)
    fine = solve_negative_spectrum(forms_f, beta, n, cp.gamma_star,
                                   mesh_id=tag + ",refined")
    est = np.abs(fine.eigenvalues - coarse.eigenvalues)
    return EigenResult(beta=beta, eigenvalues=fine.eigenvalues,
                       mesh_id=fine.mesh_id, discretization_error_estimate=est)


def convergence_study(alc: ArcLengthCurve, beta: float, n: int, h_list,
                      order: int = 2):
    """Eigenvalues across a refinement sequence plus observed orders.

    Every mesh scale follows h: the first boundary layer and the grading
    increment shrink proportionally to h/h_max, so the levels form a uniform
    refinement family; observed orders come from consecutive triplets.
    """
    h_list = sorted((float(h) for h in h_list), reverse=True)
    h_max = h_list[0]
    f0 = min(0.2 / max(beta, 1.0), 0.25 * h_max)
    results = []
    for h in h_list:
        scale = h / h_max
        results.append(compute_spectrum(
            alc, beta, n, order=order, target_h=h, refine=False,
            first_layer=f0 * scale, ratio=1.0 + (LAYER_RATIO - 1.0) * scale))
    orders = []
    for i in range(len(results) - 2):
        lam0 = results[i].eigenvalues
        lam1 = results[i + 1].eigenvalues
        lam2 = results[i + 2].eigenvalues
        diff01 = np.abs(lam0 - lam1)
        diff12 = np.abs(lam1 - lam2)
        with np.errstate(divide="ignore", invalid="ignore"):
            p = np.log2(diff01 / np.maximum(diff12, 1e-300))
        orders.append(p)
    return results, orders


def boundary_flux_residual(forms: AssembledForms, mesh: Mesh2D, vector: np.ndarray,
                           beta: float, alc: ArcLengthCurve) -> float:
    """L2(boundary) norm of the discrete Robin residual d_n u - beta u.

    Gradients are taken from the adjacent element at the edge endpoints and
    midpoint; the outward normal comes from the true curve tangent.
    """
    from .geometry import trig_interpolate

    order = forms.order
    tri_of_edge = mesh.triangle_of_boundary_edge()
    n_tabpoints = {
        1: np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]),
        2: np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0],
                     [0.5, 0.0], [0.5, 0.5], [0.0, 0.5]]),
    }[order]

    def ref_gradients(pt):
        xi, eta = pt
        lam = np.array([1.0 - xi - eta, xi, eta])
        dlam = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])
        if order == 1:
            return dlam
        dn = np.empty((6, 2))
        for c in range(3):
            dn[c] = (4.0 * lam[c] - 1.0) * dlam[c]
        for e, (i, j) in enumerate(((0, 1), (1, 2), (2, 0))):
            dn[3 + e] = 4.0 * (lam[i] * dlam[j] + lam[j] * dlam[i])
        return dn

    total = 0.0
    length = alc.length_L
    for e_idx in range(mesh.boundary_edges.shape[0]):
        t_idx = tri_of_edge[e_idx]
        dofs = forms.element_dofs[t_idx]
        coords = forms.dof_coords[dofs]
        if order == 1:
            edge_dofs = mesh.boundary_edges[e_idx]
            s_pts = mesh.boundary_edge_s[e_idx]
        else:
            edge_dofs = np.concatenate([
                mesh.boundary_edges[e_idx],
                [forms.element_dofs[t_idx][3 + _local_edge(mesh.triangles[t_idx],
                                                           mesh.boundary_edges[e_idx])]],
            ])
            s_pts = np.concatenate([mesh.boundary_edge_s[e_idx],
                                    [np.mean(mesh.boundary_edge_s[e_idx])]])
        res_sq = []
        for dof, s in zip(edge_dofs, s_pts):
            local = int(np.where(dofs == dof)[0][0])
            pt = n_tabpoints[local]
            dn = ref_gradients(pt)
            jac = np.einsum("ak,aj->kj", dn, coords)
            inv = np.linalg.inv(jac)
            grads = dn @ inv.T
            grad_u = vector[dofs] @ grads
            txv = trig_interpolate(alc.gamma_d1[:, 0], length, np.mod(s, length))
            tyv = trig_interpolate(alc.gamma_d1[:, 1], length, np.mod(s, length))
            outward = np.array([-float(tyv), float(txv)])
            res = grad_u @ outward - beta * vector[dof]
            res_sq.append(res * res)
        if order == 1:
            total += 0.5 * mesh.boundary_edge_len[e_idx] * (res_sq[0] + res_sq[1])
        else:
            total += mesh.boundary_edge_len[e_idx] * (
                (res_sq[0] + res_sq[1]) / 6.0 + 2.0 * res_sq[2] / 3.0
            )
    return math.sqrt(total)


def _local_edge(tri, edge) -> int:
    pairs = ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0]))
    target = (min(edge), max(edge))
    for i, (a, b) in enumerate(pairs):
        if (min(a, b), max(a, b)) == target:
            return i
    raise AssemblyError("edge not found in its triangle")


# ---------------------------------------------------------------------------
# exports
# ---------------------------------------------------------------------------

def mesh_to_csv(mesh: Mesh2D, node_path, triangle_path) -> None:
    with open(node_path, "w", encoding="utf-8") as fh:
        fh.write("node,x,y\n")
        for i, (x, y) in enumerate(mesh.nodes):
            fh.write(f"{i},{x:.16e},{y:.16e}\n")
    with open(triangle_path, "w", encoding="utf-8") as fh:
        fh.write("triangle,v0,v1,v2\n")
        for i, (a, b, c) in enumerate(mesh.triangles):
            fh.write(f"{i},{a},{b},{c}\n")


def spectrum_to_csv(results, path) -> None:
    """Rows (beta, n, lambda_n, err_est) over a list of EigenResult."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("beta,n,lambda_n,err_est\n")
        for res in results:
            est = res.discretization_error_estimate
            for i, lam in enumerate(res.eigenvalues, start=1):
                e = est[i - 1] if est is not None else float("nan")
                fh.write(f"{res.beta:.16e},{i},{lam:.16e},{e:.16e}\n")
