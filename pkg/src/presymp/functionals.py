"""Scalar functionals: Chern-Simons, mapping degree, second Chern integral,
sector charge, the cs 3-form and the canonical 1-form it induces."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .forms import FormField, integrate_trace, integrate_trace_product, l2_inner, wedge
from .gauge import GaugeMap, curvature
from .lie import dagger, pauli, project_alg


@dataclass(frozen=True)
class NormalizationConstants:
    q: float = 1.0 / (24 * np.pi ** 3)
    cs3_norm: float = 1.0 / (8 * np.pi ** 2)
    deg_norm: float = 1.0 / (24 * np.pi ** 2)
    sector_norm: float = 1.0 / (24 * np.pi ** 2)

    def as_dict(self) -> dict:
        return asdict(self)


NORM = NormalizationConstants()


class NotFlatError(ValueError):
    """Raised when a flat connection is required; carries the residual."""

    def __init__(self, residual: float, threshold: float):
        super().__init__(f"flatness residual {residual:.3e} exceeds threshold {threshold:.3e}")
        self.residual = residual
        self.threshold = threshold


def _need_dim(A: FormField, dim: int):
    if A.mesh.dim != dim:
        raise ValueError(f"needs a {dim}-dimensional mesh, got {A.mesh.dim}")


def chern_simons3(A: FormField) -> complex:
    """cs3_norm * integral of tr(A^F - A^A^A/3)."""
    _need_dim(A, 3)
    F = curvature(A)
    AA = wedge(A, A)
    return NORM.cs3_norm * (integrate_trace_product(A, F)
                            - integrate_trace_product(A, AA) / 3.0)


def right_currents(g: GaugeMap) -> FormField:
    """dg g^-1 as a 1-form (projected)."""
    gi = dagger(g.values)
    vals = np.stack([g.mesh.diff(g.values, k) @ gi for k in range(g.mesh.dim)])
    return FormField(g.mesh, 1, project_alg(vals))


def map_degree(g: GaugeMap) -> complex:
    """deg_norm * integral of tr((dg g^-1)^3)."""
    if g.mesh.dim != 3:
        raise ValueError("degree needs a 3-mesh")
    R = right_currents(g)
    return NORM.deg_norm * integrate_trace_product(R, wedge(R, R))


def second_chern(A: FormField) -> complex:
    """Unnormalized integral of tr(F^F) over a 4-mesh."""
    _need_dim(A, 4)
    F = curvature(A)
    return integrate_trace_product(F, F)


def default_flat_threshold(A: FormField, factor: float = 10.0) -> float:
    """factor * h^2 * (field scale), with the scale taken as max|A| + max|A|^2."""
    h = max(A.mesh.spacing)
    s = A.max_abs()
    vol = float(np.prod(A.mesh.extents))
    return factor * h * h * (s + s * s + 1e-300) * np.sqrt(vol) * A.n


def sector_charge(A: FormField, threshold: float | None = None) -> complex:
    """sector_norm * integral of tr(A^A^A), for flat A only."""
    _need_dim(A, 3)
    F = curvature(A)
    res = float(np.sqrt(max(l2_inner(F, F).real, 0.0)))
    thr = default_flat_threshold(A) if threshold is None else threshold
    if res > thr:
        raise NotFlatError(res, thr)
    return NORM.sector_norm * integrate_trace_product(A, wedge(A, A))


def cs_form(A: FormField) -> FormField:
    """q (A^F + F^A - A^A^A / 2), a 3-form on a 4-mesh."""
    _need_dim(A, 4)
    F = curvature(A)
    AAA = wedge(A, wedge(A, A))
    return NORM.q * (wedge(A, F) + wedge(F, A) - 0.5 * AAA)


def theta_cs(A: FormField, a: FormField) -> complex:
    if a.mesh != A.mesh:
        raise ValueError("mesh mismatch")
    return integrate_trace_product(cs_form(A), a)


def d_cs3_flat(A: FormField, a: FormField) -> complex:
    """cs3_norm * integral tr(A^A^a): the variation of CS3 along a at flat A."""
    _need_dim(A, 3)
    return NORM.cs3_norm * integrate_trace_product(wedge(A, A), a)


# -- preimage-count degree oracle -----------------------------------------

def _chart(M2: np.ndarray) -> np.ndarray:
    """Coordinates u of M = a0 I + i u.sigma in SU(2)."""
    return np.stack([np.imag(np.trace(M2 @ s, axis1=-2, axis2=-1)) / 2 for s in pauli()],
                    axis=-1)


def preimage_degree(gfunc, target=None, extents=(1.0, 1.0, 1.0), seed_count: int = 40,
                    fd: float = 1e-6, tol: float = 1e-12) -> dict:
    """Degree of an analytic map T^3 -> SU(2) (upper-left block of SU(n)) by
    counting oriented preimages of a regular value.

    The orientation of SU(2) is the one of the chart u with
    y^-1 g = a0 + i (u1 s1 + u2 s2 + u3 s3) near the target y.
    Returns {"degree", "points", "signs"}.
    """
    s1, s2, s3 = pauli()
    if target is None:
        # a generic point, away from +-I and from the coordinate axes
        u = np.array([0.31, -0.47, 0.22])
        target = np.cos(np.linalg.norm(u)) * np.eye(2) + 1j * np.sin(np.linalg.norm(u)) / \
            np.linalg.norm(u) * (u[0] * s1 + u[1] * s2 + u[2] * s3)
    yinv = dagger(np.asarray(target))
    L = np.asarray(extents, float)

    def u_of(x):
        g = gfunc(np.atleast_2d(x))[..., :2, :2]
        M = yinv @ g
        return _chart(M), np.real(np.trace(M, axis1=-2, axis2=-1)) / 2

    axes = [np.arange(seed_count) * L[a] / seed_count for a in range(3)]
    X = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, 3)
    u, a0 = u_of(X)
    dist = np.linalg.norm(u, axis=-1)
    cand = X[(dist < 0.35) & (a0 > 0)]
    roots, signs = [], []
    for x in cand:
        x = x.copy()
        for _ in range(60):
            ux, _ = u_of(x)
            J = _jacobian(u_of, x, fd)
            try:
                step = np.linalg.solve(J, ux[0])
            except np.linalg.LinAlgError:
                break
            x = x - step
            if np.linalg.norm(step) < 1e-14:
                break
        ux, ax = u_of(x)
        if np.linalg.norm(ux) > tol * 1e3 or ax[0] <= 0:
            continue
        x = x % L
        if any(np.linalg.norm((x - r + 0.5 * L) % L - 0.5 * L) < 1e-7 for r in roots):
            continue
        det = np.linalg.det(_jacobian(u_of, x, fd))
        if abs(det) < 1e-8:
            raise ValueError("target is not a regular value")
        roots.append(x)
        signs.append(int(np.sign(det)))
    return {"degree": int(sum(signs)), "points": np.array(roots), "signs": signs}


def _jacobian(u_of, x, fd):
    J = np.empty((3, 3))
    for k in range(3):
        e = np.zeros(3)
        e[k] = fd
        J[:, k] = (u_of(x + e)[0][0] - u_of(x - e)[0][0]) / (2 * fd)
    return J
