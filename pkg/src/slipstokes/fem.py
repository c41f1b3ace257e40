"""Taylor-Hood (P2 velocity / P1 pressure) spaces on triangle meshes.

Degrees of freedom
------------------
Velocity nodes are the mesh vertices followed by the edge midpoints; with
``N = num_vertices + num_edges`` the velocity vector stores all x components
first, then all y components, so component ``c`` of node ``i`` lives at
``c * N + i``.  Pressure nodes are the vertices.

Quadrature rules are symmetric Gauss rules on the reference triangle paired
with Gauss-Legendre rules on the unit segment of matching polynomial
exactness (orders 2, 4 and 6).
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument, NumericalError

# Local velocity node order on a triangle (a, b, c):
#   0, 1, 2   -> vertices a, b, c
#   3, 4, 5   -> midpoints of edges (a,b), (b,c), (c,a)
_EDGE_LOCAL = ((0, 1), (1, 2), (2, 0))


@dataclass(frozen=True)
class QuadratureRule:
    """Paired triangle and boundary-segment quadrature of one exactness order."""

    order: int
    tri_points: np.ndarray      # (nq, 3) barycentric coordinates
    tri_weights: np.ndarray     # (nq,), sums to 1/2 (reference area)
    seg_points: np.ndarray      # (ns,) on [0, 1]
    seg_weights: np.ndarray     # (ns,), sums to 1


def _dunavant(order):
    if order == 2:
        pts = [(0.5, 0.5, 0.0), (0.0, 0.5, 0.5), (0.5, 0.0, 0.5)]
        wts = [1.0 / 3.0] * 3
    elif order == 4:
        a1, w1 = 0.445948490915965, 0.223381589678011
        a2, w2 = 0.091576213509771, 0.109951743655322
        pts, wts = [], []
        for a, w in ((a1, w1), (a2, w2)):
            for perm in ((1 - 2 * a, a, a), (a, 1 - 2 * a, a), (a, a, 1 - 2 * a)):
                pts.append(perm)
                wts.append(w)
    elif order == 6:
        a1, w1 = 0.249286745170910, 0.116786275726379
        a2, w2 = 0.063089014491502, 0.050844906370207
        a3, b3 = 0.310352451033785, 0.053145049844816
        w3 = 0.082851075618374
        pts, wts = [], []
        for a, w in ((a1, w1), (a2, w2)):
            for perm in ((1 - 2 * a, a, a), (a, 1 - 2 * a, a), (a, a, 1 - 2 * a)):
                pts.append(perm)
                wts.append(w)
        c3 = 1.0 - a3 - b3
        for perm in ((a3, b3, c3), (b3, c3, a3), (c3, a3, b3),
                     (a3, c3, b3), (c3, b3, a3), (b3, a3, c3)):
            pts.append(perm)
            wts.append(w3)
    else:
        raise InvalidArgument(f"quadrature order must be one of 2, 4, 6, got {order!r}")
    return np.array(pts), 0.5 * np.array(wts)


def quadrature(order):
    """Return the paired triangle/segment rule of the given exactness order."""
    tri_pts, tri_wts = _dunavant(order)
    npts = order // 2 + 1
    x, w = np.polynomial.legendre.leggauss(npts)
    return QuadratureRule(order, tri_pts, tri_wts,
                          0.5 * (x + 1.0), 0.5 * w)


def p2_values(bary):
    """P2 shape function values at barycentric points, shape (nq, 6)."""
    l0, l1, l2 = bary[:, 0], bary[:, 1], bary[:, 2]
    return np.column_stack([
        l0 * (2 * l0 - 1), l1 * (2 * l1 - 1), l2 * (2 * l2 - 1),
        4 * l0 * l1, 4 * l1 * l2, 4 * l2 * l0,
    ])


def p2_ref_grads(bary):
    """P2 gradients w.r.t. reference coordinates, shape (nq, 6, 2)."""
    grads_l = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])
    nq = bary.shape[0]
    g = np.zeros((nq, 6, 2))
    for i in range(3):
        g[:, i] = (4 * bary[:, i] - 1)[:, None] * grads_l[i]
    for k, (i, j) in enumerate(_EDGE_LOCAL):
        g[:, 3 + k] = 4 * (bary[:, j][:, None] * grads_l[i]
                           + bary[:, i][:, None] * grads_l[j])
    return g


def p1_values(bary):
    return bary.copy()


def p1_ref_grads():
    return np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])


def segment_p2_values(t):
    """Quadratic trace shapes on a boundary edge at parameters t in [0, 1].

    Node order: start vertex, end vertex, midpoint.
    """
    t = np.asarray(t)
    return np.column_stack([(1 - t) * (1 - 2 * t), t * (2 * t - 1), 4 * t * (1 - t)])


class FeSystem:
    """Assembled geometric tables for one Taylor-Hood space.

    Built by :func:`build_taylor_hood`; holds the edge enumeration, per
    triangle DOF maps and affine element geometry that the assembly and
    evaluation routines share.
    """

    def __init__(self, mesh):
        self.mesh = mesh
        nv = mesh.num_vertices
        edge_of = {}
        tri_edges = np.empty((mesh.num_triangles, 3), dtype=np.int64)
        edges = []
        for ti, (a, b, c) in enumerate(mesh.triangles):
            for k, (i, j) in enumerate(((a, b), (b, c), (c, a))):
                key = (min(i, j), max(i, j))
                eid = edge_of.get(key)
                if eid is None:
                    eid = len(edges)
                    edge_of[key] = eid
                    edges.append(key)
                tri_edges[ti, k] = eid
        self.edges = np.array(edges, dtype=np.int64)
        self.tri_edges = tri_edges
        self.num_edges = len(edges)
        self.num_velocity_nodes = nv + self.num_edges
        self.num_velocity_dofs = 2 * self.num_velocity_nodes
        self.num_pressure_dofs = nv

        self.velocity_coords = np.vstack([
            mesh.vertices,
            0.5 * (mesh.vertices[self.edges[:, 0]] + mesh.vertices[self.edges[:, 1]]),
        ])
        # (nt, 6) global velocity node ids in local order
        self.tri_vnodes = np.hstack([mesh.triangles, nv + tri_edges])
        self.tri_pnodes = mesh.triangles

        p = mesh.vertices[mesh.triangles]
        jac = np.empty((mesh.num_triangles, 2, 2))
        jac[:, :, 0] = p[:, 1] - p[:, 0]
        jac[:, :, 1] = p[:, 2] - p[:, 0]
        self.jac = jac
        self.det = jac[:, 0, 0] * jac[:, 1, 1] - jac[:, 0, 1] * jac[:, 1, 0]
        inv = np.empty_like(jac)
        inv[:, 0, 0] = jac[:, 1, 1]
        inv[:, 0, 1] = -jac[:, 1, 0]
        inv[:, 1, 0] = -jac[:, 0, 1]
        inv[:, 1, 1] = jac[:, 0, 0]
        self.inv_jac_t = inv / self.det[:, None, None]

        # Boundary edge -> mesh edge id and midpoint velocity node.
        lut = edge_of
        self.boundary_edge_ids = np.array(
            [lut[(min(a, b), max(a, b))] for a, b in mesh.boundary_edges],
            dtype=np.int64)
        self.boundary_mid_nodes = nv + self.boundary_edge_ids
        self._grad_cache = {}

    def dof(self, component, node):
        return component * self.num_velocity_nodes + node

    def physical_grads(self, rule):
        """Physical P2 gradients per element: array (nq, nt, 6, 2), cached."""
        key = rule.order
        if key not in self._grad_cache:
            ref = p2_ref_grads(rule.tri_points)          # (nq, 6, 2)
            # grad_phys = invJ^T grad_ref
            g = np.einsum("tab,qib->qtia", self.inv_jac_t, ref)
            self._grad_cache[key] = g
        return self._grad_cache[key]

    def quad_coords(self, rule):
        """Physical coordinates of triangle quadrature points, (nq, nt, 2)."""
        p = self.mesh.vertices[self.mesh.triangles]      # (nt, 3, 2)
        return np.einsum("qk,tka->qta", rule.tri_points, p)

    def boundary_quad_coords(self, rule):
        """Physical coordinates of boundary quadrature points, (nb, ns, 2)."""
        mesh = self.mesh
        p1 = mesh.vertices[mesh.boundary_edges[:, 0]]
        p2 = mesh.vertices[mesh.boundary_edges[:, 1]]
        t = rule.seg_points
        return p1[:, None, :] + t[None, :, None] * (p2 - p1)[:, None, :]

    def boundary_trace_nodes(self):
        """Velocity node triples (start, end, midpoint) per boundary edge."""
        mesh = self.mesh
        return np.column_stack([mesh.boundary_edges, self.boundary_mid_nodes])


def build_taylor_hood(mesh):
    """Enumerate the P2/P1 Taylor-Hood system on a mesh."""
    return FeSystem(mesh)


def split_components(fe, coeffs):
    coeffs = np.asarray(coeffs, dtype=float)
    n = fe.num_velocity_nodes
    if coeffs.shape != (2 * n,):
        raise InvalidArgument(
            f"velocity vector must have length {2 * n}, got {coeffs.shape}")
    return coeffs[:n], coeffs[n:]


def interpolate(fe, field, space="velocity"):
    """Nodal interpolation of a callable (or constant) field.

    Velocity fields map (k, 2) coordinate arrays to (k, 2) values;
    pressure fields map (k, 2) to (k,).  Non-finite nodal values raise
    ``NumericalError``.
    """
    if space == "velocity":
        pts = fe.velocity_coords
        vals = _eval_vector(field, pts)
        out = np.concatenate([vals[:, 0], vals[:, 1]])
    elif space == "pressure":
        pts = fe.mesh.vertices
        out = _eval_scalar(field, pts)
    else:
        raise InvalidArgument(f"unknown space {space!r}")
    if not np.isfinite(out).all():
        raise NumericalError(f"non-finite values interpolating {space} field")
    return out


def _eval_vector(field, pts):
    if field is None:
        return np.zeros_like(pts)
    if callable(field):
        vals = np.asarray(field(pts), dtype=float)
    else:
        vals = np.broadcast_to(np.asarray(field, dtype=float), pts.shape).copy()
    if vals.shape != pts.shape:
        raise InvalidArgument(f"vector field returned shape {vals.shape}, "
                              f"expected {pts.shape}")
    return vals


def _eval_scalar(field, pts):
    if field is None:
        return np.zeros(pts.shape[0])
    if callable(field):
        vals = np.asarray(field(pts), dtype=float)
    else:
        vals = np.full(pts.shape[0], float(field))
    if vals.shape != (pts.shape[0],):
        raise InvalidArgument(f"scalar field returned shape {vals.shape}, "
                              f"expected {(pts.shape[0],)}")
    return vals


@dataclass
class NormReport:
    """Quadrature-exact norms of a discrete field.

    ``vorticity_field`` samples ``curl u = d(u_y)/dx - d(u_x)/dy`` at the
    triangle quadrature points, shape (nq, nt); it is None for pressures,
    as are the boundary and divergence entries.
    """

    l2: float
    h1_semi: float
    boundary_l2_tangential: float | None = None
    divergence_l2: float | None = None
    vorticity_field: np.ndarray | None = None

    @property
    def h1(self):
        return float(np.hypot(self.l2, self.h1_semi))


def norms(fe, coeffs, quad_order=4):
    """Norms of a velocity (length ``2N``) or pressure (length ``nv``) vector."""
    coeffs = np.asarray(coeffs, dtype=float)
    if quad_order < 4:
        raise InvalidArgument("norms require quadrature order >= 4")
    rule = quadrature(quad_order)
    if coeffs.shape == (fe.num_velocity_dofs,):
        return _velocity_norms(fe, coeffs, rule)
    if coeffs.shape == (fe.num_pressure_dofs,):
        return _pressure_norms(fe, coeffs, rule)
    raise InvalidArgument(f"coefficient vector of length {coeffs.shape} matches "
                          "neither velocity nor pressure space")


def _velocity_norms(fe, coeffs, rule):
    ux, uy = split_components(fe, coeffs)
    vals = p2_values(rule.tri_points)                    # (nq, 6)
    grads = fe.physical_grads(rule)                      # (nq, nt, 6, 2)
    ex = ux[fe.tri_vnodes]                               # (nt, 6)
    ey = uy[fe.tri_vnodes]
    w = rule.tri_weights[:, None] * fe.det[None, :]      # (nq, nt)

    vx = np.einsum("qk,tk->qt", vals, ex)
    vy = np.einsum("qk,tk->qt", vals, ey)
    l2sq = float(np.sum(w * (vx ** 2 + vy ** 2)))

    gx = np.einsum("qtka,tk->qta", grads, ex)            # grad of u_x
    gy = np.einsum("qtka,tk->qta", grads, ey)
    h1sq = float(np.sum(w * (gx[..., 0] ** 2 + gx[..., 1] ** 2
                             + gy[..., 0] ** 2 + gy[..., 1] ** 2)))
    divsq = float(np.sum(w * (gx[..., 0] + gy[..., 1]) ** 2))
    vorticity = gy[..., 0] - gx[..., 1]

    mesh = fe.mesh
    tn = fe.boundary_trace_nodes()
    shapes = segment_p2_values(rule.seg_points)          # (ns, 3)
    lengths = mesh.boundary_lengths()
    tx = np.einsum("sk,bk->bs", shapes, ux[tn])
    ty = np.einsum("sk,bk->bs", shapes, uy[tn])
    tang = (tx * mesh.boundary_tangents[:, 0:1]
            + ty * mesh.boundary_tangents[:, 1:2])
    btansq = float(np.sum(lengths[:, None] * rule.seg_weights[None, :] * tang ** 2))

    return NormReport(np.sqrt(l2sq), np.sqrt(h1sq), np.sqrt(btansq),
                      np.sqrt(divsq), vorticity)


def _pressure_norms(fe, coeffs, rule):
    vals = p1_values(rule.tri_points)                    # (nq, 3)
    e = coeffs[fe.tri_pnodes]                            # (nt, 3)
    w = rule.tri_weights[:, None] * fe.det[None, :]
    v = np.einsum("qk,tk->qt", vals, e)
    l2sq = float(np.sum(w * v ** 2))
    g = np.einsum("tab,kb->tka", fe.inv_jac_t, p1_ref_grads())   # (nt, 3, 2)
    ge = np.einsum("tka,tk->ta", g, e)
    h1sq = float(np.sum(0.5 * fe.det * (ge[:, 0] ** 2 + ge[:, 1] ** 2)))
    return NormReport(np.sqrt(l2sq), np.sqrt(h1sq))


def pressure_mean(fe, coeffs):
    """Integral of a P1 pressure over the domain."""
    e = np.asarray(coeffs)[fe.tri_pnodes]
    return float(np.sum(fe.det / 6.0 * e.sum(axis=1)))


def velocity_error_h1(fe, coeffs, exact, exact_grad, quad_order=6):
    """L2 and H1 errors of a velocity vector against closed forms.

    ``exact`` maps (k, 2) points to (k, 2) values; ``exact_grad`` maps
    (k, 2) points to (k, 2, 2) Jacobians with entry [i, j] = d(u_i)/d(x_j).
    Returns ``(l2_error, h1_error)`` with the full H1 norm.
    """
    rule = quadrature(quad_order)
    ux, uy = split_components(fe, coeffs)
    vals = p2_values(rule.tri_points)
    grads = fe.physical_grads(rule)
    ex, ey = ux[fe.tri_vnodes], uy[fe.tri_vnodes]
    w = rule.tri_weights[:, None] * fe.det[None, :]
    pts = fe.quad_coords(rule)
    flat = pts.reshape(-1, 2)
    uex = np.asarray(exact(flat), dtype=float).reshape(pts.shape[0], pts.shape[1], 2)
    gex = np.asarray(exact_grad(flat), dtype=float).reshape(
        pts.shape[0], pts.shape[1], 2, 2)

    dx = np.einsum("qk,tk->qt", vals, ex) - uex[..., 0]
    dy = np.einsum("qk,tk->qt", vals, ey) - uex[..., 1]
    l2sq = float(np.sum(w * (dx ** 2 + dy ** 2)))

    gxh = np.einsum("qtka,tk->qta", grads, ex)
    gyh = np.einsum("qtka,tk->qta", grads, ey)
    dgx = gxh - gex[..., 0, :]
    dgy = gyh - gex[..., 1, :]
    h1semisq = float(np.sum(w * (dgx ** 2).sum(axis=-1))
                     + np.sum(w * (dgy ** 2).sum(axis=-1)))
    return np.sqrt(l2sq), np.sqrt(l2sq + h1semisq)


def pressure_error_l2(fe, coeffs, exact, quad_order=6):
    """L2 error of a P1 pressure against a closed form."""
    rule = quadrature(quad_order)
    vals = p1_values(rule.tri_points)
    e = np.asarray(coeffs)[fe.tri_pnodes]
    w = rule.tri_weights[:, None] * fe.det[None, :]
    pts = fe.quad_coords(rule)
    pex = np.asarray(exact(pts.reshape(-1, 2)), dtype=float).reshape(pts.shape[:2])
    d = np.einsum("qk,tk->qt", vals, e) - pex
    return float(np.sqrt(np.sum(w * d ** 2)))
