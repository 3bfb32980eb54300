"""Connections, gauge maps, curvature and holonomy.

A connection is a degree-1 FormField. Gauge maps act on the right,
g.A = g^-1 dg + g^-1 A g, so (gf).A = f.(g.A).
"""
from __future__ import annotations

import logging

import numpy as np

from .forms import FormField, exterior_d, hodge_star, l2_inner, wedge, zeros
from .lie import GROUP_ATOL, dagger, group_defect, project_alg, su_exponential
from .mesh import INTERVAL, Mesh

log = logging.getLogger(__name__)


class GaugeMap:
    """SU(n)-valued node field. `based` records g(node0) = I."""

    __slots__ = ("mesh", "values", "based")

    def __init__(self, mesh: Mesh, values: np.ndarray, based: bool = False, check: bool = True):
        values = np.asarray(values, dtype=complex)
        if values.shape[:-2] != mesh.shape or values.shape[-1] != values.shape[-2]:
            raise ValueError(f"gauge values {values.shape} do not fit mesh {mesh.shape}")
        if check:
            err = group_defect(values)
            if err > GROUP_ATOL:
                raise ValueError(f"not SU(n)-valued: defect {err:.2e}")
            if based:
                node0 = values[(0,) * mesh.dim]
                if np.max(np.abs(node0 - np.eye(values.shape[-1]))) > GROUP_ATOL:
                    raise ValueError("based gauge map must be I at node 0")
        self.mesh = mesh
        self.values = values
        self.based = based

    @property
    def n(self) -> int:
        return self.values.shape[-1]

    @classmethod
    def identity(cls, mesh: Mesh, n: int) -> "GaugeMap":
        return cls(mesh, np.broadcast_to(np.eye(n, dtype=complex), mesh.shape + (n, n)).copy(),
                   based=True, check=False)

    @classmethod
    def exp(cls, xi: FormField) -> "GaugeMap":
        """Pointwise exp of a 0-form."""
        if xi.degree != 0:
            raise ValueError("exp needs a 0-form")
        return cls(xi.mesh, su_exponential(xi.values[0]))

    def inverse(self) -> "GaugeMap":
        return GaugeMap(self.mesh, dagger(self.values), self.based, check=False)

    def compose(self, other: "GaugeMap") -> "GaugeMap":
        """Pointwise product (self * other)."""
        if other.mesh != self.mesh:
            raise ValueError("mesh mismatch")
        return GaugeMap(self.mesh, self.values @ other.values, self.based and other.based,
                        check=False)

    __matmul__ = compose


def _reproject(vals: np.ndarray, what: str) -> np.ndarray:
    P = project_alg(vals)
    if log.isEnabledFor(logging.DEBUG):
        log.debug("%s: projection distance %.2e", what, float(np.max(np.abs(P - vals))))
    return P


def curvature(A: FormField) -> FormField:
    """F = dA + A^A."""
    if A.degree != 1:
        raise ValueError("connection must be a 1-form")
    F = exterior_d(A)
    F.values += wedge(A, A).values
    F.values[:] = _reproject(F.values, "curvature")
    return F


def covariant_d(A: FormField, w: FormField) -> FormField:
    """d_A w = dw + A^w - (-1)^p w^A."""
    out = exterior_d(w)
    out.values += wedge(A, w).values
    if w.degree % 2 == 0:
        out.values -= wedge(w, A).values
    else:
        out.values += wedge(w, A).values
    return out


def covariant_codifferential(A: FormField, w: FormField) -> FormField:
    m, p = w.mesh.dim, w.degree
    if p == 0:
        raise ValueError("codifferential of a 0-form")
    return (-1) ** (m * (p + 1) + 1) * hodge_star(covariant_d(A, hodge_star(w)))


def infinitesimal_action(A: FormField, xi: FormField) -> FormField:
    """Fundamental vector field d_A xi of the gauge action at A."""
    if xi.degree != 0:
        raise ValueError("generator must be a 0-form")
    return covariant_d(A, xi)


def _group_derivatives(g: GaugeMap) -> np.ndarray:
    """Stack of g^-1 dg components (unprojected)."""
    gi = dagger(g.values)
    return np.stack([gi @ g.mesh.diff(g.values, k) for k in range(g.mesh.dim)])


def pure_gauge(g: GaugeMap) -> FormField:
    """g^-1 dg, projected to su(n)."""
    return FormField(g.mesh, 1, _reproject(_group_derivatives(g), "pure_gauge"))


def gauge_transform(A: FormField, g: GaugeMap) -> FormField:
    if A.mesh != g.mesh:
        raise ValueError("mesh mismatch")
    gi = dagger(g.values)
    vals = _group_derivatives(g) + gi @ A.values @ g.values
    return FormField(A.mesh, 1, _reproject(vals, "gauge_transform"))


def flatness_residual(A: FormField) -> float:
    F = curvature(A)
    return float(np.sqrt(max(l2_inner(F, F).real, 0.0)))


def smoothstep(t):
    """Quintic ramp with vanishing first and second derivatives at 0 and 1."""
    t = np.asarray(t, dtype=float)
    return t ** 3 * (10 - 15 * t + 6 * t ** 2)


def linear_ramp(t):
    return np.asarray(t, dtype=float)


def flat_extend_exp(xi: FormField, profile=smoothstep, mesh: Mesh | None = None,
                    t_count: int | None = None) -> FormField:
    """A = G^-1 dG for G(t, x) = exp(profile(t) xi(x)) on [0,1] x (mesh of xi).

    `mesh` may be a cylinder (or a slab of one) whose slice is xi's mesh.
    """
    if xi.degree != 0 or not xi.mesh.closed:
        raise ValueError("xi must be a 0-form on a closed mesh")
    base = xi.mesh
    if mesh is None:
        tc = base.counts[0] if t_count is None else t_count
        mesh = Mesh((tc,) + base.counts, (1.0,) + base.extents,
                    (INTERVAL,) + base.topology)
    if mesh.interval_axis != 0 or mesh.slice_mesh() != base:
        raise ValueError("target must be a cylinder over the mesh of xi")
    phi = profile(mesh.axis_coords(0))
    X = xi.values[0]
    G = su_exponential(phi.reshape((-1,) + (1,) * base.dim + (1, 1)) * X[None])
    return pure_gauge(GaugeMap(mesh, G, check=False))


def _edge_transport(A: FormField, node, axis: int, forward: bool) -> np.ndarray:
    shape = A.mesh.shape
    nxt = list(node)
    nxt[axis] += 1 if forward else -1
    nxt = _wrap(A.mesh, nxt)
    Abar = 0.5 * (A.values[(axis,) + tuple(node)] + A.values[(axis,) + tuple(nxt)])
    h = A.mesh.spacing[axis]
    return su_exponential((-h if forward else h) * Abar), nxt


def _wrap(mesh: Mesh, node):
    out = []
    for a, (i, s) in enumerate(zip(node, mesh.shape)):
        if mesh.wraps(a):
            i %= s
        elif not 0 <= i < s:
            raise IndexError(f"loop leaves the mesh along axis {a}")
        out.append(i)
    return out


def loop_holonomy(A: FormField, node, axes, size: int = 1) -> np.ndarray:
    """Ordered product of edge transports exp(-h A_mid) around a size x size
    square in the (i, j) plane starting at `node`; later edges multiply on
    the left. Approximates exp(-area * F_ij)."""
    i, j = axes
    if i == j or not (0 <= i < A.mesh.dim and 0 <= j < A.mesh.dim):
        raise ValueError(f"bad axis pair {axes}")
    node = _wrap(A.mesh, list(node))
    U = np.eye(A.n, dtype=complex)
    for axis, fwd in ((i, True), (j, True), (i, False), (j, False)):
        for _ in range(size):
            T, node = _edge_transport(A, node, axis, fwd)
            U = T @ U
    return U


def plaquette_holonomy(A: FormField, node, axes) -> np.ndarray:
    return loop_holonomy(A, node, axes, 1)
