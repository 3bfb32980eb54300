"""su(n)-valued p-forms sampled at mesh nodes.

A FormField stores `values` of shape (ncomp, *mesh.shape, n, n); component
c corresponds to the c-th increasing index tuple of
itertools.combinations(range(dim), p). The metric is the flat one in the
physical coordinates of the mesh, so dx^1..dx^m is orthonormal and the Hodge
star is a signed index complement.
"""
from __future__ import annotations

from functools import lru_cache
from itertools import combinations
from typing import Callable, NamedTuple

import numpy as np

from .lie import alg_defect, project_alg, trace, trace_pair
from .mesh import Mesh


@lru_cache(maxsize=None)
def index_sets(dim: int, p: int) -> tuple:
    return tuple(combinations(range(dim), p))


@lru_cache(maxsize=None)
def index_of(dim: int, p: int) -> dict:
    return {I: c for c, I in enumerate(index_sets(dim, p))}


def perm_sign(seq) -> int:
    """Sign of the permutation that sorts `seq` (distinct entries)."""
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


def complement(I, dim: int) -> tuple:
    return tuple(i for i in range(dim) if i not in I)


class FormField:
    """An su(n)-valued p-form on a mesh (values need not lie in su(n) for
    products such as a^b - b^a)."""

    __slots__ = ("mesh", "degree", "values")

    def __init__(self, mesh: Mesh, degree: int, values: np.ndarray):
        values = np.asarray(values)
        if not np.iscomplexobj(values):
            values = values.astype(complex)
        if not 0 <= degree <= mesh.dim:
            raise ValueError(f"degree {degree} outside 0..{mesh.dim}")
        ncomp = len(index_sets(mesh.dim, degree))
        if values.ndim != mesh.dim + 3 or values.shape[0] != ncomp \
                or values.shape[1:-2] != mesh.shape or values.shape[-1] != values.shape[-2]:
            raise ValueError(f"values {values.shape} do not fit a {degree}-form on {mesh.shape}")
        self.mesh = mesh
        self.degree = degree
        self.values = values

    @property
    def n(self) -> int:
        return self.values.shape[-1]

    @property
    def components(self) -> tuple:
        return index_sets(self.mesh.dim, self.degree)

    def __getitem__(self, I) -> np.ndarray:
        return self.values[index_of(self.mesh.dim, self.degree)[tuple(I)]]

    def like(self, values) -> "FormField":
        return FormField(self.mesh, self.degree, values)

    def _coerce(self, other):
        if isinstance(other, FormField):
            if other.mesh != self.mesh or other.degree != self.degree:
                raise ValueError("mesh or degree mismatch")
            return other.values
        return NotImplemented

    def __add__(self, other):
        v = self._coerce(other)
        return NotImplemented if v is NotImplemented else self.like(self.values + v)

    def __sub__(self, other):
        v = self._coerce(other)
        return NotImplemented if v is NotImplemented else self.like(self.values - v)

    def __mul__(self, s):
        if np.ndim(s) != 0:
            return NotImplemented
        return self.like(self.values * s)

    __rmul__ = __mul__

    def __truediv__(self, s):
        return self.like(self.values / s)

    def __neg__(self):
        return self.like(-self.values)

    def __repr__(self):
        return f"FormField(degree={self.degree}, n={self.n}, mesh={self.mesh.shape})"

    def project(self) -> "FormField":
        return self.like(project_alg(self.values))

    def alg_defect(self) -> float:
        return alg_defect(self.values)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    def conjugate_by(self, g: np.ndarray) -> "FormField":
        """g^-1 w g, pointwise, for a unitary node field g of shape (*nodes,n,n)."""
        gi = np.conj(np.swapaxes(g, -1, -2))
        return self.like(gi @ self.values @ g)

    def norm(self) -> float:
        return float(np.sqrt(max(l2_inner(self, self).real, 0.0)))


def zeros(mesh: Mesh, degree: int, n: int) -> FormField:
    ncomp = len(index_sets(mesh.dim, degree))
    return FormField(mesh, degree, np.zeros((ncomp,) + mesh.shape + (n, n), complex))


def constant_form(mesh: Mesh, degree: int, comps: dict, n: int | None = None) -> FormField:
    """Constant-coefficient form from {index tuple: matrix}."""
    if n is None:
        n = np.asarray(next(iter(comps.values()))).shape[-1]
    w = zeros(mesh, degree, n)
    idx = index_of(mesh.dim, degree)
    for I, X in comps.items():
        w.values[idx[tuple(I)]] = np.asarray(X)
    return w


def sample(expr: Callable, mesh: Mesh, degree: int) -> FormField:
    """Evaluate an analytic expression at the nodes of `mesh`.

    `expr(coords)` receives the sparse coordinate arrays of the mesh and
    returns an array broadcastable to (ncomp, *mesh.shape, n, n).
    """
    vals = np.asarray(expr(mesh.coords()))
    ncomp = len(index_sets(mesh.dim, degree))
    shape = (ncomp,) + mesh.shape + vals.shape[-2:]
    return FormField(mesh, degree, np.array(np.broadcast_to(vals, shape), dtype=complex))


def _check_pair(a: FormField, b: FormField):
    if a.mesh != b.mesh:
        raise ValueError("fields live on different meshes")
    if a.n != b.n:
        raise ValueError("rank mismatch")


@lru_cache(maxsize=None)
def _d_plan(dim: int, p: int) -> tuple:
    """For each (p+1)-index K: ((sign, axis, index of K without axis), ...)."""
    src = index_of(dim, p)
    plan = []
    for K in index_sets(dim, p + 1):
        terms = []
        for j, k in enumerate(K):
            J = K[:j] + K[j + 1:]
            terms.append(((-1) ** j, k, src[J]))
        plan.append(tuple(terms))
    return tuple(plan)


def exterior_d(w: FormField) -> FormField:
    mesh, p = w.mesh, w.degree
    if p >= mesh.dim:
        raise ValueError("exterior derivative of a top form")
    plan = _d_plan(mesh.dim, p)
    out = np.zeros((len(plan),) + w.values.shape[1:], complex)
    for c, terms in enumerate(plan):
        for sign, axis, j in terms:
            dj = mesh.diff(w.values[j], axis)
            if sign > 0:
                out[c] += dj
            else:
                out[c] -= dj
    return FormField(mesh, p + 1, out)


@lru_cache(maxsize=None)
def _wedge_plan(dim: int, p: int, q: int) -> tuple:
    ia, ib = index_of(dim, p), index_of(dim, q)
    plan = []
    for K in index_sets(dim, p + q):
        terms = []
        for I in combinations(K, p):
            J = tuple(k for k in K if k not in I)
            terms.append((perm_sign(I + J), ia[I], ib[J]))
        plan.append(tuple(terms))
    return tuple(plan)


def wedge(a: FormField, b: FormField) -> FormField:
    """Pointwise a^b with matrix products a_I b_J (order kept)."""
    _check_pair(a, b)
    dim = a.mesh.dim
    if a.degree + b.degree > dim:
        raise ValueError("wedge degree exceeds dimension")
    plan = _wedge_plan(dim, a.degree, b.degree)
    out = np.zeros((len(plan),) + a.values.shape[1:], complex)
    tmp = np.empty(a.values.shape[1:], complex)
    for c, terms in enumerate(plan):
        for sign, i, j in terms:
            np.matmul(a.values[i], b.values[j], out=tmp)
            if sign > 0:
                out[c] += tmp
            else:
                out[c] -= tmp
    return FormField(a.mesh, a.degree + b.degree, out)


def graded_commutator(a: FormField, b: FormField) -> FormField:
    """[a^b] = a^b - (-1)^(pq) b^a."""
    s = (-1) ** (a.degree * b.degree)
    return wedge(a, b) - s * wedge(b, a)


def hodge_star(w: FormField) -> FormField:
    dim, p = w.mesh.dim, w.degree
    out_idx = index_of(dim, dim - p)
    out = np.empty((len(out_idx),) + w.values.shape[1:], complex)
    for c, I in enumerate(index_sets(dim, p)):
        Ic = complement(I, dim)
        out[out_idx[Ic]] = perm_sign(I + Ic) * w.values[c]
    return FormField(w.mesh, dim - p, out)


def codifferential(w: FormField) -> FormField:
    """delta = (-1)^(m(p+1)+1) * d *, the adjoint of d for l2_inner."""
    m, p = w.mesh.dim, w.degree
    if p == 0:
        raise ValueError("codifferential of a 0-form")
    sign = (-1) ** (m * (p + 1) + 1)
    return sign * hodge_star(exterior_d(hodge_star(w)))


def integrate_trace(w: FormField):
    if w.degree != w.mesh.dim:
        raise ValueError(f"need a top-degree form, got degree {w.degree}")
    return w.mesh.integrate(trace(w.values[0]))


def integrate_trace_product(a: FormField, b: FormField):
    """integrate_trace(a^b) for complementary degrees without storing a^b."""
    _check_pair(a, b)
    dim = a.mesh.dim
    if a.degree + b.degree != dim:
        raise ValueError("degrees must add up to the dimension")
    (terms,) = _wedge_plan(dim, a.degree, b.degree)
    total = 0j
    for sign, i, j in terms:
        total += sign * a.mesh.integrate(trace_pair(a.values[i], b.values[j]))
    return total


def l2_inner(a: FormField, b: FormField):
    """-integral of tr(a ^ *b); positive definite on su(n)-valued forms."""
    _check_pair(a, b)
    if a.degree != b.degree:
        raise ValueError("degree mismatch")
    total = 0j
    for c in range(a.values.shape[0]):
        total += a.mesh.integrate(trace_pair(a.values[c], b.values[c]))
    return -total


class BoundarySlice(NamedTuple):
    mesh: Mesh
    sign: int
    field: FormField
    side: int  # 0 for t=0, 1 for t=1


def boundary_restrict(w: FormField) -> list:
    """Tangential parts of w on the two ends of the interval axis.

    Signs are chosen so that integrate(dw) = sum(sign * integrate(restriction))
    for (dim-1)-forms, i.e. outward orientation with the interval axis at
    position k contributing (-1)^k. Closed meshes give an empty list, and a
    slab only reports the ends it owns.
    """
    mesh = w.mesh
    k = mesh.interval_axis
    if k is None:
        return []
    dim, p = mesh.dim, w.degree
    smesh = mesh.slice_mesh()
    tangential = [(c, I) for c, I in enumerate(index_sets(dim, p)) if k not in I]
    sub = index_of(dim - 1, p)
    out = []
    for side, row, sign in ((0, 0, -1), (1, -1, 1)):
        if not mesh.boundary_side_present(side):
            continue
        vals = np.empty((len(sub),) + smesh.shape + (w.n, w.n), complex)
        for c, I in tangential:
            J = tuple(i if i < k else i - 1 for i in I)
            vals[sub[J]] = np.take(w.values[c], row, axis=k)
        out.append(BoundarySlice(smesh, sign * (-1) ** k, FormField(smesh, p, vals), side))
    return out
