"""sigma^cs on connections over a 4-manifold, omega and kappa over its
boundary 3-manifold, and the identities linking them.

All three are built from the 2-form P(a, b) = a^b - b^a, whose values are
anticommutators of anti-Hermitian matrices, so the scalars come out purely
imaginary for su(n) inputs and vanish identically for su(2).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .forms import FormField, boundary_restrict, integrate_trace_product, wedge
from .functionals import NORM, NotFlatError, default_flat_threshold
from .gauge import covariant_d, curvature
from .lie import commutator


@dataclass(frozen=True)
class TangentTriple:
    a: FormField
    b: FormField
    c: FormField

    def __post_init__(self):
        if not (self.a.mesh == self.b.mesh == self.c.mesh):
            raise ValueError("triple must share a mesh")
        if not (self.a.degree == self.b.degree == self.c.degree == 1):
            raise ValueError("tangent vectors are 1-forms")


def anti_wedge(a: FormField, b: FormField) -> FormField:
    """a^b - b^a."""
    return wedge(a, b) - wedge(b, a)


def _same_mesh(*fs):
    m = fs[0].mesh
    if any(f.mesh != m for f in fs[1:]):
        raise ValueError("mesh mismatch")


def sigma_cs_bulk(A: FormField, a: FormField, b: FormField) -> complex:
    return 3 * NORM.q * integrate_trace_product(anti_wedge(a, b), curvature(A))


def sigma_cs_boundary(A: FormField, a: FormField, b: FormField) -> complex:
    """Sum over oriented boundary slices of omega(restrictions)."""
    total = 0j
    for sA, sa, sb in zip(boundary_restrict(A), boundary_restrict(a), boundary_restrict(b)):
        total += sA.sign * omega(sA.field, sa.field, sb.field)
    return total


def sigma_cs(A: FormField, a: FormField, b: FormField) -> complex:
    """3q int_X tr((ab - ba) F) - q int_dX tr((ab - ba) A)."""
    _same_mesh(A, a, b)
    if A.mesh.dim != 4:
        raise ValueError("sigma_cs needs a 4-mesh")
    return sigma_cs_bulk(A, a, b) + sigma_cs_boundary(A, a, b)


def d_sigma_cs_analytic(A: FormField, a: FormField, b: FormField, c: FormField) -> complex:
    """Cyclic sum of the exact A-derivatives of sigma_cs. F moves by d_A u
    to first order and the boundary term is affine in A."""
    _same_mesh(A, a, b, c)
    total = 0j
    for u, v, w in ((a, b, c), (b, c, a), (c, a, b)):
        total += 3 * NORM.q * integrate_trace_product(anti_wedge(v, w), covariant_d(A, u))
        for su, sv, sw in zip(boundary_restrict(u), boundary_restrict(v), boundary_restrict(w)):
            total += su.sign * -NORM.q * integrate_trace_product(anti_wedge(sv.field, sw.field),
                                                                 su.field)
    return total


def omega(A: FormField, a: FormField, b: FormField) -> complex:
    """-q int_M tr((ab - ba) A)."""
    _same_mesh(A, a, b)
    if A.mesh.dim != 3:
        raise ValueError("omega needs a 3-mesh")
    return -NORM.q * integrate_trace_product(anti_wedge(a, b), A)


def kappa(a: FormField, b: FormField, c: FormField) -> complex:
    """-3q int_M tr((ab - ba) c)."""
    _same_mesh(a, b, c)
    if a.mesh.dim != 3:
        raise ValueError("kappa needs a 3-mesh")
    return -3 * NORM.q * integrate_trace_product(anti_wedge(a, b), c)


def d_omega_analytic(A: FormField, a: FormField, b: FormField, c: FormField) -> complex:
    """Cyclic sum of the A-derivatives of omega; omega is affine in A, so
    (d_A omega(b, c)) a = -q int tr((bc - cb) a)."""
    q = NORM.q
    return -q * (integrate_trace_product(anti_wedge(b, c), a)
                 + integrate_trace_product(anti_wedge(c, a), b)
                 + integrate_trace_product(anti_wedge(a, b), c))


def _central(f: Callable[[float], complex], t: float) -> complex:
    return (f(t) - f(-t)) / (2 * t)


def directional_fd(f: Callable[[float], complex], step: float = 1e-3) -> tuple:
    """(raw central difference at `step`, one-level Richardson value)."""
    d1 = _central(f, step)
    d2 = _central(f, step / 2)
    return d1, (4 * d2 - d1) / 3


def variational_d2_parts(phi: Callable, A: FormField, a: FormField, b: FormField,
                         c: FormField, step: float = 1e-3) -> tuple:
    """Raw and extrapolated finite-difference values of
    (d phi)(a,b,c) = (d_A phi(b,c)) a + (d_A phi(c,a)) b + (d_A phi(a,b)) c."""
    raw = ext = 0j
    for u, v, w in ((a, b, c), (b, c, a), (c, a, b)):
        r, e = directional_fd(lambda t: phi(A + t * u, v, w), step)
        raw += r
        ext += e
    return raw, ext


def variational_d2(phi: Callable, A: FormField, a: FormField, b: FormField, c: FormField,
                   step: float = 1e-3, richardson: bool = True) -> complex:
    raw, ext = variational_d2_parts(phi, A, a, b, c, step)
    return ext if richardson else raw


def flat_direction_threshold(A: FormField, a: FormField, factor: float = 10.0) -> float:
    h = max(A.mesh.spacing)
    return factor * h * h * a.norm()


def require_flat(A: FormField, *dirs: FormField, threshold: float | None = None,
                 dir_factor: float = 10.0):
    """Raise NotFlatError unless A is flat and every direction has d_A a ~ 0."""
    F = curvature(A)
    res = F.norm()
    thr = default_flat_threshold(A) if threshold is None else threshold
    if res > thr:
        raise NotFlatError(res, thr)
    for u in dirs:
        r = covariant_d(A, u).norm()
        t = flat_direction_threshold(A, u, dir_factor)
        if r > t:
            raise NotFlatError(r, t)


def inner_kappa(A: FormField, xi: FormField, a: FormField, b: FormField,
                check: bool = True) -> complex:
    """kappa(d_A xi, a, b) at flat A with flat a, b."""
    if check:
        require_flat(A, a, b)
    return kappa(covariant_d(A, xi), a, b)


def omega_xi_variation(A: FormField, xi: FormField, a: FormField, b: FormField) -> complex:
    """omega([a, xi], b) - omega([b, xi], a): the part of d(i_X omega) that
    comes from X = d_A xi moving with A."""
    axi = a.like(commutator(a.values, xi.values[0]))
    bxi = b.like(commutator(b.values, xi.values[0]))
    return omega(A, axi, b) - omega(A, bxi, a)


def lie_derivative_omega(A: FormField, xi: FormField, a: FormField, b: FormField,
                         check: bool = True, include_field_variation: bool = False) -> complex:
    """(L_X omega)(a, b) for X = d_A xi at flat A.

    Default: the expansion d(i_X omega)(a, b) with X held fixed while
    differentiating in A, i.e. (d_A omega(X, b)) a - (d_A omega(X, a)) b,
    plus i_X kappa. With include_field_variation the A-dependence of X is
    differentiated too, which gives the true Lie derivative of omega along
    the gauge vector field.
    """
    if check:
        require_flat(A, a, b)
    X = covariant_d(A, xi)
    q = NORM.q
    frozen = (-q * integrate_trace_product(anti_wedge(X, b), a)
              + q * integrate_trace_product(anti_wedge(X, a), b))
    value = frozen + kappa(X, a, b)
    if include_field_variation:
        value += omega_xi_variation(A, xi, a, b)
    return value


def lie_derivative_omega_fd(A: FormField, xi: FormField, a: FormField, b: FormField,
                            step: float = 1e-3) -> complex:
    """Cartan-formula cross-check: finite-difference d of the 1-form
    u -> omega_A(X, u) (X frozen) plus kappa(X, a, b)."""
    X = covariant_d(A, xi)

    def beta(Ash, u):
        return omega(Ash, X, u)

    da = directional_fd(lambda t: beta(A + t * a, b), step)[1]
    db = directional_fd(lambda t: beta(A + t * b, a), step)[1]
    return da - db + kappa(X, a, b)


def kappa_flat_sector_check(A: FormField, a: FormField, b: FormField, c: FormField,
                            check: bool = True) -> float:
    if check:
        require_flat(A, a, b, c)
    return abs(kappa(a, b, c))


def _boundary_max(xi: FormField) -> float:
    return max((s.field.max_abs() for s in boundary_restrict(xi)), default=0.0)


def moment_phi(A: FormField, xi: FormField, check: bool = True) -> complex:
    """Phi^xi = 3q int_X tr(F ^ F xi), xi vanishing on the boundary."""
    _same_mesh(A, xi)
    if check:
        bmax = _boundary_max(xi)
        if bmax > 1e-12:
            raise ValueError(f"xi must vanish on the boundary (max {bmax:.2e})")
    F = curvature(A)
    return 3 * NORM.q * integrate_trace_product(wedge(F, F), xi)


def d_moment_phi(A: FormField, xi: FormField, a: FormField) -> complex:
    """Analytic derivative of Phi^xi along a: 3q int tr((d_A a ^ F + F ^ d_A a) xi)."""
    F = curvature(A)
    dF = covariant_d(A, a)
    return 3 * NORM.q * integrate_trace_product(wedge(dF, F) + wedge(F, dF), xi)


def boundary_omega_match(A: FormField, a: FormField, b: FormField, check: bool = True) -> float:
    """|sigma_cs(A; a, b) - sum of signed omega over the boundary restrictions|."""
    if check:
        require_flat(A)
    return abs(sigma_cs(A, a, b) - sigma_cs_boundary(A, a, b))


def real_normalization(value: complex) -> float:
    """value / i, the real number the purely imaginary scalars stand for."""
    return float((value / 1j).real)
