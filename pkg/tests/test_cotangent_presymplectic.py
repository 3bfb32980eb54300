import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import presymp.cotangent as ct
import presymp.presymplectic as ps
from presymp.families import ExpMap, random_fourier
from presymp.forms import FormField, hodge_star, zeros
from presymp.functionals import NotFlatError
from presymp.gauge import covariant_d, pure_gauge
from presymp.lie import embed
from presymp.mesh import Mesh


def _pt(m, n, seed):
    return ct.CotangentPoint(random_fourier(m, 1, n, seed).on(m),
                             random_fourier(m, m.dim - 1, n, seed + 1).on(m))


def _tan(m, n, seed):
    return ct.CotangentTangent(random_fourier(m, 1, n, seed).on(m),
                               random_fourier(m, m.dim - 1, n, seed + 1).on(m))


def test_cotangent_validation():
    m = Mesh.torus(3, 4)
    with pytest.raises(ValueError):
        ct.CotangentPoint(zeros(m, 1, 2), zeros(m, 1, 2))
    with pytest.raises(ValueError):
        ct.CotangentTangent(zeros(m, 2, 2), zeros(m, 2, 2))


@settings(max_examples=10)
@given(st.integers(0, 10_000))
def test_sigma_antisymmetric_and_is_dtheta(seed):
    m = Mesh.torus(3, 4)
    pt, v, w = _pt(m, 3, seed), _tan(m, 3, seed + 2), _tan(m, 3, seed + 4)
    assert abs(ct.sigma_eval(pt, v, w) + ct.sigma_eval(pt, w, v)) <= 1e-13
    assert ct.sigma_is_dtheta_check(pt, v, w) <= 1e-10


def test_ym_vector_field_is_hamiltonian_on_average():
    m = Mesh.torus(3, 8)
    pt, v = _pt(m, 2, 1), _tan(m, 2, 3)
    X = ct.ym_ham_vector_field(pt)
    dH = ct.d_ym_hamiltonian(pt, v)
    fd = (ct.ym_hamiltonian(pt.shifted(v, 1e-4)) - ct.ym_hamiltonian(pt.shifted(v, -1e-4))) / 2e-4
    assert abs(fd - dH) <= 1e-7 * max(1.0, abs(dH))
    # i_X sigma = dH, up to the sign convention of sigma
    s = ct.sigma_eval(pt, X, v)
    assert min(abs(s - dH), abs(s + dH)) <= 1e-10 * max(1.0, abs(dH))
    assert ct.ym_energy(pt) >= 0


def test_moment_J_action_convention():
    m = Mesh.torus(3, 6)
    pt, v = _pt(m, 2, 5), _tan(m, 2, 7)
    xi = random_fourier(m, 0, 2, 9).on(m)
    vt = ct.fundamental_field(pt, xi, "action")
    assert abs(ct.d_moment_J(pt, xi, v) + ct.sigma_eval(pt, vt, v)) <= 1e-12
    with pytest.raises(ValueError):
        ct.fundamental_field(pt, xi, "other")


def test_moment_J0_pairing_on_torus():
    m = Mesh.torus(3, 6)
    pt = _pt(m, 2, 11)
    xi = random_fourier(m, 0, 2, 12).on(m)
    assert abs(ct.moment_J0_pairing(pt, xi) - ct.moment_J(pt, xi)) <= 1e-12


def test_atiyah_bott_antisymmetric():
    m = Mesh.torus(2, 6)
    a, b = random_fourier(m, 1, 2, 1).on(m), random_fourier(m, 1, 2, 2).on(m)
    assert abs(ct.atiyah_bott_omega(a, b) + ct.atiyah_bott_omega(b, a)) <= 1e-13
    with pytest.raises(ValueError):
        ct.atiyah_bott_omega(*(random_fourier(Mesh.torus(3, 4), 1, 2, k).on(Mesh.torus(3, 4))
                               for k in (1, 2)))


# -- presymplectic forms ---------------------------------------------------

def test_triple_validation():
    m = Mesh.torus(3, 4)
    with pytest.raises(ValueError):
        ps.TangentTriple(zeros(m, 1, 2), zeros(m, 1, 2), zeros(m, 2, 2))


def test_su2_inputs_give_zero():
    m = Mesh.torus(3, 6)
    A, a, b, c = (random_fourier(m, 1, 2, k).on(m) for k in range(4))
    assert abs(ps.omega(A, a, b)) <= 1e-15
    assert abs(ps.kappa(a, b, c)) <= 1e-15


def test_su3_values_are_imaginary_and_alternating():
    m = Mesh.torus(3, 6)
    A, a, b, c = (random_fourier(m, 1, 3, k, aligned=False).on(m) for k in range(4))
    k = ps.kappa(a, b, c)
    assert abs(k) > 1e-8 and abs(k.real) <= 1e-15
    assert abs(ps.kappa(b, a, c) + k) <= 1e-15 and abs(ps.kappa(b, c, a) - k) <= 1e-15
    assert abs(ps.omega(A, a, b) + ps.omega(A, b, a)) <= 1e-15
    assert ps.real_normalization(k) == pytest.approx((k / 1j).real)


def test_omega_differential_is_kappa():
    m = Mesh.torus(3, 6)
    A, a, b, c = (random_fourier(m, 1, 3, k).on(m) for k in range(4))
    d = ps.variational_d2(ps.omega, A, a, b, c)
    assert abs(d - ps.d_omega_analytic(A, a, b, c)) <= 1e-12
    assert abs(d - ps.kappa(a, b, c)) <= 1e-12


def test_sigma_cs_differential_routes_agree_on_cylinder():
    m = Mesh.cylinder(4, 3)
    A, a, b, c = (random_fourier(m, 1, 3, k, aligned=False).on(m) for k in range(4))
    fd = ps.variational_d2(ps.sigma_cs, A, a, b, c)
    assert abs(fd - ps.d_sigma_cs_analytic(A, a, b, c)) <= 1e-12


def test_sigma_cs_closed_on_small_torus():
    m = Mesh.torus(4, 4)
    A, a, b, c = (random_fourier(m, 1, 3, k, aligned=False).on(m) for k in range(4))
    assert abs(ps.d_sigma_cs_analytic(A, a, b, c)) <= 1e-14


def test_dimension_checks():
    m = Mesh.torus(3, 4)
    A = zeros(m, 1, 3)
    with pytest.raises(ValueError):
        ps.sigma_cs(A, A, A)
    with pytest.raises(ValueError):
        ps.omega(zeros(Mesh.torus(4, 4), 1, 3), zeros(Mesh.torus(4, 4), 1, 3),
                 zeros(Mesh.torus(4, 4), 1, 3))


def test_require_flat_rejects_generic_connection():
    m = Mesh.torus(3, 8)
    A = random_fourier(m, 1, 3, 1).on(m)
    with pytest.raises(NotFlatError):
        ps.require_flat(A)
    with pytest.raises(NotFlatError):
        ps.inner_kappa(A, random_fourier(m, 0, 3, 2).on(m), A, A)


def test_flat_sector_quantities_small():
    m = Mesh.torus(3, 16)
    A = pure_gauge(ExpMap(random_fourier(m, 0, 3, 1)).on(m))
    xis = [random_fourier(m, 0, 3, k).on(m) for k in (2, 3, 4)]
    a, b, c = (covariant_d(A, x) for x in xis)
    assert abs(ps.kappa_flat_sector_check(A, a, b, c)) <= 1e-6


def test_lie_derivative_matches_cartan_fd():
    m = Mesh.torus(3, 8)
    A = pure_gauge(ExpMap(random_fourier(m, 0, 3, 1)).on(m))
    xi, xa, xb = (random_fourier(m, 0, 3, k).on(m) for k in (2, 3, 4))
    a, b = covariant_d(A, xa), covariant_d(A, xb)
    ana = ps.lie_derivative_omega(A, xi, a, b, check=False)
    fd = ps.lie_derivative_omega_fd(A, xi, a, b)
    assert abs(ana - fd) <= 1e-12


def test_moment_phi_requires_vanishing_boundary():
    m = Mesh.cylinder(4, 3)
    A = random_fourier(m, 1, 3, 1).on(m)
    xi = random_fourier(m, 0, 3, 2).on(m)
    with pytest.raises(ValueError):
        ps.moment_phi(A, xi)
    fd = (ps.moment_phi(A + 1e-4 * A, xi, check=False) - ps.moment_phi(A - 1e-4 * A, xi, check=False)) / 2e-4
    assert abs(fd - ps.d_moment_phi(A, xi, A)) <= 1e-8 * max(1.0, abs(fd))
