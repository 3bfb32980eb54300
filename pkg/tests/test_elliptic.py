import numpy as np
import pytest

import presymp.elliptic as el
from presymp.families import random_fourier
from presymp.forms import FormField, constant_form
from presymp.functionals import NotFlatError
from presymp.gauge import covariant_codifferential, covariant_d
from presymp.harness.report import estimate_order
from presymp.lie import random_alg
from presymp.mesh import Mesh

CFG = el.SolverConfig(tol=1e-12)


def _mesh3(count=6, tc=4):
    return Mesh((tc, count, count), topology=("interval", "periodic", "periodic"))


def test_solver_config_validation():
    with pytest.raises(ValueError):
        el.SolverConfig(tol=0)
    with pytest.raises(ValueError):
        el.SolverConfig(max_iter=0)


def test_cylinder_required():
    m = Mesh.torus(2, 4)
    with pytest.raises(ValueError):
        el.dirichlet_green(FormField(m, 1, np.zeros((2,) + m.shape + (2, 2))),
                           FormField(m, 0, np.zeros((1,) + m.shape + (2, 2))))


def test_solver_error_on_tiny_budget():
    m = _mesh3()
    A = random_fourier(m, 1, 2, 1, aligned=False).on(m)
    f = random_fourier(m, 0, 2, 2).on(m)
    with pytest.raises(el.SolverError) as exc:
        el.dirichlet_green(A, f, el.SolverConfig(tol=1e-14, max_iter=1, preconditioner=False))
    assert exc.value.iterations == 1


def test_weighted_adjoint_is_transpose_of_d_A():
    m = _mesh3()
    A = random_fourier(m, 1, 3, 1, aligned=False).on(m)
    u = random_fourier(m, 0, 3, 2, aligned=False).on(m)
    v = random_fourier(m, 1, 3, 3, aligned=False).on(m)
    W = m.full_weights()[..., None, None]
    lhs = np.vdot(covariant_d(A, u).values, W * v.values).real
    rhs = np.vdot(u.values[0], el.weighted_d_adjoint(A, v).values[0]).real
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))


def test_dirichlet_matches_dense_oracle():
    m = _mesh3()
    A = random_fourier(m, 1, 2, 4, aligned=False).on(m)
    f = random_fourier(m, 0, 2, 5).on(m)
    u = el.dirichlet_green(A, f, CFG)
    ref = el.dense_dirichlet_oracle(A, f)
    assert (u - ref).max_abs() <= 1e-8 * max(1.0, ref.max_abs())
    mask = el.interior_mask(m)
    assert np.all(u.values[0][mask == 0] == 0)


def test_dirichlet_mms_second_order_2d():
    counts, errs = [8, 16, 32], []
    X = random_alg(2, 3)
    for N in counts:
        m = Mesh.cylinder(N, 1)
        t, x = m.coords()
        s = np.sin(np.pi * t) * np.cos(2 * np.pi * x)
        u = FormField(m, 0, (s[..., None, None] * X)[None])
        f = u * (np.pi ** 2 + 4 * np.pi ** 2)
        A = FormField(m, 1, np.zeros((2,) + m.shape + (2, 2)))
        errs.append((el.dirichlet_green(A, f, CFG) - u).norm() / u.norm())
    assert estimate_order(errs, counts) >= 1.9


def test_neumann_kernel_dimensions():
    m = _mesh3()
    zero = FormField(m, 1, np.zeros((3,) + m.shape + (2, 2)))
    # constants and checkerboards along the two periodic axes, times su(2)
    assert len(el.neumann_kernel(zero)) == 4 * 3
    A = random_fourier(m, 1, 2, 6, aligned=False).on(m)
    assert len(el.neumann_kernel(A)) == 0


def test_neumann_rejects_incompatible_source():
    m = _mesh3()
    zero = FormField(m, 1, np.zeros((3,) + m.shape + (2, 2)))
    f = FormField(m, 0, np.broadcast_to(random_alg(2, 1), (1,) + m.shape + (2, 2)).copy())
    with pytest.raises(el.IncompatibleDataError):
        el.neumann_green(zero, f=f, cfg=CFG)
    with pytest.raises(ValueError):
        el.neumann_green(zero, cfg=CFG)


def test_neumann_gauge_fix_generic_connection():
    m = _mesh3()
    A = random_fourier(m, 1, 2, 7, aligned=False).on(m)
    b = random_fourier(m, 1, 2, 8, aligned=False).on(m)
    eta, c = el.neumann_gauge_fix(A, b, CFG)
    # c is W-orthogonal to every gradient, which is the weak Neumann condition
    assert np.max(np.abs(el.weighted_d_adjoint(A, c).values)) <= 1e-9 * np.max(np.abs(b.values))
    assert ((c + covariant_d(A, eta)) - b).max_abs() <= 1e-13


def test_coulomb_projection():
    m = _mesh3(8, 6)
    A = random_fourier(m, 1, 2, 9, aligned=False).on(m)
    a = random_fourier(m, 1, 2, 10, aligned=False).on(m)
    dec = el.coulomb_project(A, a, CFG)
    assert dec.residual <= 1e-9
    assert ((covariant_d(A, dec.xi) + dec.b) - a).max_abs() <= 1e-13
    assert el.horizontal_residual(A, dec.b) == pytest.approx(dec.residual)


def test_orbit_curvature_antisymmetric_and_checks_horizontality():
    m = _mesh3(8, 6)
    A = random_fourier(m, 1, 2, 11, aligned=False).on(m)
    a = el.coulomb_project(A, random_fourier(m, 1, 2, 12).on(m), CFG).b
    b = el.coulomb_project(A, random_fourier(m, 1, 2, 13).on(m), CFG).b
    ab = el.orbit_curvature(A, a, b, CFG)
    ba = el.orbit_curvature(A, b, a, CFG)
    assert (ab + ba).max_abs() <= 1e-9 * max(1.0, ab.max_abs())
    with pytest.raises(ValueError):
        el.orbit_curvature(A, random_fourier(m, 1, 2, 14, aligned=False).on(m), b, CFG)


def test_green_p_inverts_hodge_laplacian_inside():
    m = _mesh3(6, 6)
    A = random_fourier(m, 1, 2, 15, aligned=False).on(m)
    s = random_fourier(m, 2, 2, 16).on(m)
    G = el.green_p(A, s, CFG)
    mask = el.interior_mask(m)[..., None, None]
    r = (el.hodge_laplacian_apply(A, G).values - s.values) * mask
    assert np.max(np.abs(r)) <= 1e-8 * s.max_abs()


def test_kuranishi_abelian_direction_is_fixed():
    m = _mesh3()
    zero = FormField(m, 1, np.zeros((3,) + m.shape + (2, 2)))
    X = random_alg(2, 3)
    t, x, y = m.coords()
    vals = np.zeros((3,) + m.shape + (2, 2), complex)
    vals[1] = (np.cos(2 * np.pi * x) + 0 * t + 0 * y)[..., None, None] * X
    vals[2] = (np.sin(2 * np.pi * y) + 0 * t + 0 * x)[..., None, None] * X
    alpha = FormField(m, 1, vals)
    assert (el.kuranishi(zero, alpha, CFG) - alpha).max_abs() <= 1e-14


def test_kuranishi_requires_flat():
    m = _mesh3(8, 6)
    A = random_fourier(m, 1, 2, 17, amplitude=2.0).on(m)
    with pytest.raises(NotFlatError):
        el.kuranishi(A, A, CFG)


def test_laplacian_apply_matches_operator_definition():
    m = _mesh3()
    A = random_fourier(m, 1, 2, 18, aligned=False).on(m)
    u = random_fourier(m, 0, 2, 19).on(m)
    ref = covariant_codifferential(A, covariant_d(A, u))
    assert (el.laplacian0_apply(A, u) - ref).max_abs() == 0
