"""Canonical structure on the cotangent bundle of the space of connections.

A point is (A, lam) with lam an (m-1)-form; tangent vectors are (a, alpha).
theta(a, alpha) = int tr(a ^ lam) and sigma = d theta.
"""
from __future__ import annotations

from dataclasses import dataclass

from .forms import FormField, hodge_star, integrate_trace_product
from .gauge import covariant_d, curvature
from .lie import commutator


@dataclass(frozen=True)
class CotangentPoint:
    A: FormField
    lam: FormField

    def __post_init__(self):
        m = self.A.mesh.dim
        if self.A.degree != 1 or self.lam.degree != m - 1:
            raise ValueError("need a 1-form A and an (m-1)-form lambda")
        if self.lam.mesh != self.A.mesh:
            raise ValueError("mesh mismatch")

    def shifted(self, v: "CotangentTangent", t: float) -> "CotangentPoint":
        return CotangentPoint(self.A + t * v.a, self.lam + t * v.alpha)


@dataclass(frozen=True)
class CotangentTangent:
    a: FormField
    alpha: FormField

    def __post_init__(self):
        m = self.a.mesh.dim
        if self.a.degree != 1 or self.alpha.degree != m - 1:
            raise ValueError("need a 1-form and an (m-1)-form")
        if self.alpha.mesh != self.a.mesh:
            raise ValueError("mesh mismatch")


def _check(pt: CotangentPoint, *vs: CotangentTangent):
    for v in vs:
        if v.a.mesh != pt.A.mesh:
            raise ValueError("tangent vector lives on another mesh")


def theta_eval(pt: CotangentPoint, v: CotangentTangent) -> complex:
    _check(pt, v)
    return integrate_trace_product(v.a, pt.lam)


def sigma_eval(pt: CotangentPoint, v1: CotangentTangent, v2: CotangentTangent) -> complex:
    """int tr(b ^ alpha - a ^ beta) for v1 = (a, alpha), v2 = (b, beta)."""
    _check(pt, v1, v2)
    return integrate_trace_product(v2.a, v1.alpha) - integrate_trace_product(v1.a, v2.alpha)


def sigma_is_dtheta_check(pt: CotangentPoint, v1: CotangentTangent, v2: CotangentTangent,
                          step: float = 1e-3) -> float:
    """|d theta(v1, v2) - sigma(v1, v2)| with d theta by central differences
    along constant vector fields (their bracket vanishes)."""
    def deriv(v, w):
        up = theta_eval(pt.shifted(v, step), w)
        dn = theta_eval(pt.shifted(v, -step), w)
        return (up - dn) / (2 * step)

    dtheta = deriv(v1, v2) - deriv(v2, v1)
    return abs(dtheta - sigma_eval(pt, v1, v2))


def ym_hamiltonian(pt: CotangentPoint) -> complex:
    """1/2 int tr(F ^ *F) + 1/2 int tr(lam ^ *lam), literal trace (so <= 0)."""
    F = curvature(pt.A)
    return 0.5 * (integrate_trace_product(F, hodge_star(F))
                  + integrate_trace_product(pt.lam, hodge_star(pt.lam)))


def ym_energy(pt: CotangentPoint) -> float:
    return float(-ym_hamiltonian(pt).real)


def ym_ham_vector_field(pt: CotangentPoint) -> CotangentTangent:
    """X_H = (-*lam, d_A *F)."""
    F = curvature(pt.A)
    return CotangentTangent(-hodge_star(pt.lam), covariant_d(pt.A, hodge_star(F)))


def d_ym_hamiltonian(pt: CotangentPoint, v: CotangentTangent) -> complex:
    """Analytic directional derivative of ym_hamiltonian along v."""
    F = curvature(pt.A)
    dF = covariant_d(pt.A, v.a)
    return (integrate_trace_product(dF, hodge_star(F))
            + integrate_trace_product(v.alpha, hodge_star(pt.lam)))


def moment_J(pt: CotangentPoint, xi: FormField) -> complex:
    """J^xi = int tr(d_A xi ^ lam)."""
    if xi.degree != 0 or xi.mesh != pt.A.mesh:
        raise ValueError("xi must be a 0-form on the same mesh")
    return integrate_trace_product(covariant_d(pt.A, xi), pt.lam)


def d_moment_J(pt: CotangentPoint, xi: FormField, v: CotangentTangent) -> complex:
    """Analytic derivative of J^xi along v: int tr([a, xi] ^ lam + d_A xi ^ alpha)."""
    axi = v.a.like(commutator(v.a.values, xi.values[0]))
    return (integrate_trace_product(axi, pt.lam)
            + integrate_trace_product(covariant_d(pt.A, xi), v.alpha))


def fundamental_field(pt: CotangentPoint, xi: FormField, convention: str = "stated") -> CotangentTangent:
    """Generator of the gauge action on (A, lam).

    "stated": (d_A xi, [xi, lam]), the pairing used by the moment-map claim.
    "action": (d_A xi, [lam, xi]), the derivative of (g.A, g^-1 lam g) at
    g = exp(t xi); this is the one the right action actually produces.
    """
    dxi = covariant_d(pt.A, xi)
    if convention == "stated":
        return CotangentTangent(dxi, pt.lam.like(commutator(xi.values[0], pt.lam.values)))
    if convention == "action":
        return CotangentTangent(dxi, pt.lam.like(commutator(pt.lam.values, xi.values[0])))
    raise ValueError(f"unknown convention {convention!r}")


def moment_J0(pt: CotangentPoint) -> FormField:
    """J_0 = d_A lam, an m-form."""
    return covariant_d(pt.A, pt.lam)


def moment_J0_pairing(pt: CotangentPoint, xi: FormField) -> complex:
    """-int tr(xi J_0); equals J^xi when xi vanishes on the boundary."""
    return -integrate_trace_product(xi, moment_J0(pt))


def atiyah_bott_omega(a: FormField, b: FormField) -> complex:
    """2 int tr(b ^ a) on a surface."""
    if a.mesh.dim != 2:
        raise ValueError("needs a 2-mesh")
    return 2.0 * integrate_trace_product(b, a)
