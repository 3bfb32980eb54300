"""Covariant Laplacian solves on the cylinder, Coulomb projection, Neumann
gauge fixing and the forward Kuranishi map.

The operators are applied matrix-free and solved by conjugate gradients on
the real vector space underlying the complex node arrays; the Frobenius
pairing Re tr(X^dagger Y) makes ad(A) skew and the weighted energy forms
symmetric.

Dirichlet problems keep the t=0 and t=1 rows at zero and solve
(d_A)^T W d_A u = W f on the interior rows; with the summation-by-parts
closure these rows equal W * delta_A d_A u exactly. Neumann problems use all
rows, i.e. the weak form whose natural boundary condition is the flux
condition.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, cg, splu

from .forms import FormField, boundary_restrict, l2_inner, wedge, zeros
from .gauge import covariant_codifferential, covariant_d, curvature
from .lie import commutator, su_basis
from .mesh import INTERVAL, Mesh

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-10
    max_iter: int = 20_000
    preconditioner: bool = True  # sparse LU of the A-free scalar operator

    def __post_init__(self):
        if not self.tol > 0 or self.max_iter < 1:
            raise ValueError("need tol > 0 and max_iter >= 1")


class SolverError(RuntimeError):
    def __init__(self, msg, residual=None, iterations=None):
        super().__init__(msg)
        self.residual = residual
        self.iterations = iterations


class IncompatibleDataError(ValueError):
    """Neumann data with a component along the kernel beyond tolerance."""


@dataclass
class SolveInfo:
    iterations: int
    residual: float


@dataclass
class DecompositionResult:
    xi: FormField
    b: FormField
    residual: float
    iterations: int


def _need_cylinder(mesh: Mesh):
    if mesh.interval_axis is None or mesh.is_slab:
        raise ValueError("needs a (whole) cylinder mesh")


def interior_mask(mesh: Mesh) -> np.ndarray:
    """1 on nodes off the t=0 and t=1 slices, 0 on them."""
    k = mesh.interval_axis
    m = np.ones(mesh.shape)
    idx = [slice(None)] * mesh.dim
    for row in (0, -1):
        idx[k] = row
        m[tuple(idx)] = 0.0
    return m


def weighted_d_adjoint(A: FormField, v: FormField) -> FormField:
    """(d_A)^T W v for a 1-form v: the exact transpose of u -> d_A u under the
    quadrature pairing, W delta_A v plus the interval-end flux terms."""
    mesh = A.mesh
    W = mesh.full_weights()[..., None, None]
    out = W * covariant_codifferential(A, v).values
    k = mesh.interval_axis
    if k is not None:
        # tangential weights of the end slices; the SBP boundary matrix is
        # diag(-1, 0, ..., 0, +1) along the interval axis
        h = mesh.spacing[k]
        idx = [slice(None)] * mesh.dim
        for row, sign in ((0, -1.0), (-1, 1.0)):
            idx[k] = row
            wt = np.take(mesh.full_weights(), row, axis=k) / (0.5 * h)
            out[(0,) + tuple(idx)] += sign * wt[..., None, None] * v.values[(k,) + tuple(idx)]
    return FormField(mesh, 0, out)


def _apply_energy0(A: FormField, u: np.ndarray, mask=None) -> np.ndarray:
    mesh = A.mesh
    uu = u if mask is None else u * mask[..., None, None]
    du = covariant_d(A, FormField(mesh, 0, uu[None]))
    out = weighted_d_adjoint(A, du).values[0]
    return out if mask is None else out * mask[..., None, None]


def _kron_axes(mesh: Mesh, axis: int, M) -> sp.csr_matrix:
    mats = [sp.identity(mesh.shape[a], format="csr") for a in range(mesh.dim)]
    mats[axis] = M
    out = mats[0]
    for X in mats[1:]:
        out = sp.kron(out, X, format="csr")
    return out


_PRECOND_CACHE: dict = {}


def _scalar_factor(mesh: Mesh, dirichlet: bool):
    """LU factor of sum_k D_k^T W D_k + W for scalar fields (A = 0, shifted
    so the Neumann version is invertible). With `dirichlet` the end rows are
    replaced by identity rows. Cached per mesh."""
    key = (mesh, dirichlet)
    if key not in _PRECOND_CACHE:
        w = np.asarray(mesh.full_weights()).reshape(-1)
        W = sp.diags(w)
        K = W.copy()
        for k in range(mesh.dim):
            Dk = _kron_axes(mesh, k, _d1_matrix(mesh, k))
            K = K + Dk.T @ W @ Dk
        K = K.tocsr()
        if dirichlet:
            keep = sp.diags(interior_mask(mesh).reshape(-1))
            drop = sp.identity(len(w)) - keep
            K = keep @ K @ keep + drop
        if len(_PRECOND_CACHE) > 8:
            _PRECOND_CACHE.clear()
        _PRECOND_CACHE[key] = splu(K.tocsc())
    return _PRECOND_CACHE[key]


def _scalar_precond(mesh: Mesh, dirichlet: bool, shape: tuple):
    """z (complex, `shape` = (ncomp, *mesh.shape, n, n)) -> K0^-1 z per entry."""
    lu = _scalar_factor(mesh, dirichlet)
    nodes = mesh.num_nodes
    ncomp = shape[0]
    nn = shape[-1] * shape[-2]

    def apply(z):
        z = z.reshape(ncomp, nodes, nn).transpose(1, 0, 2).reshape(nodes, -1)
        rhs = np.ascontiguousarray(z).view(float)
        y = np.ascontiguousarray(lu.solve(rhs)).view(complex)
        return y.reshape(nodes, ncomp, nn).transpose(1, 0, 2).reshape(shape)
    return apply


def _cg(apply, rhs: np.ndarray, precond, cfg: SolverConfig, project=None):
    """CG over the float view of a complex array of any shape."""
    shape = rhs.shape
    N = rhs.size * 2

    def to_c(x):
        return np.asarray(x, float).view(complex).reshape(shape)

    def to_r(z):
        return np.ascontiguousarray(z).reshape(-1).view(float)

    def mv(x):
        z = to_c(x)
        if project is not None:
            z = project(z)
        y = apply(z)
        if project is not None:
            y = project(y)
        return to_r(y)

    op = LinearOperator((N, N), matvec=mv, dtype=float)
    M = None
    if cfg.preconditioner and precond is not None:
        def pv(x):
            y = precond(to_c(x))
            return to_r(project(y) if project is not None else y)
        M = LinearOperator((N, N), matvec=pv, dtype=float)
    b = to_r(rhs)
    bnorm = np.linalg.norm(b)
    if bnorm == 0:
        return np.zeros(shape, complex), SolveInfo(0, 0.0)
    it = [0]

    def cb(_):
        it[0] += 1

    x, info = cg(op, b, rtol=cfg.tol, atol=0.0, maxiter=cfg.max_iter, M=M, callback=cb)
    res = float(np.linalg.norm(b - op.matvec(x)) / bnorm)
    if info != 0 and res > cfg.tol * 10:
        raise SolverError(f"CG did not converge: residual {res:.2e} after {it[0]} iterations",
                          res, it[0])
    log.debug("cg: %d iterations, residual %.2e", it[0], res)
    return to_c(x).copy(), SolveInfo(it[0], res)


def laplacian0_apply(A: FormField, u: FormField) -> FormField:
    """delta_A d_A u."""
    if u.degree != 0 or u.mesh != A.mesh:
        raise ValueError("u must be a 0-form on the mesh of A")
    return covariant_codifferential(A, covariant_d(A, u))


def hodge_laplacian_apply(A: FormField, w: FormField) -> FormField:
    """(d_A delta_A + delta_A d_A) w for p-forms (missing terms at the ends of
    the degree range are dropped)."""
    out = None
    m, p = w.mesh.dim, w.degree
    if p < m:
        out = covariant_codifferential(A, covariant_d(A, w))
    if p > 0:
        t = covariant_d(A, covariant_codifferential(A, w))
        out = t if out is None else out + t
    return out


def dirichlet_green(A: FormField, f: FormField, cfg: SolverConfig = SolverConfig(),
                    info: list | None = None) -> FormField:
    """Solve delta_A d_A u = f with u = 0 on both ends of the cylinder."""
    mesh = A.mesh
    _need_cylinder(mesh)
    if f.degree != 0 or f.mesh != mesh:
        raise ValueError("f must be a 0-form on the mesh of A")
    mask = interior_mask(mesh)
    W = mesh.full_weights()[..., None, None]
    rhs = W * f.values[0] * mask[..., None, None]
    pre = _scalar_precond(mesh, True, (1,) + rhs.shape)
    u, si = _cg(lambda z: _apply_energy0(A, z, mask), rhs, lambda z: pre(z[None])[0], cfg)
    u *= mask[..., None, None]
    if info is not None:
        info.append(si)
    return FormField(mesh, 0, u[None])


def green_p(A: FormField, s: FormField, cfg: SolverConfig = SolverConfig(),
            info: list | None = None) -> FormField:
    """Hodge-Laplacian Green operator on p-forms with every component zero on
    the two ends of the cylinder."""
    mesh = A.mesh
    _need_cylinder(mesh)
    mask = interior_mask(mesh)
    W = mesh.full_weights()[..., None, None]
    mk = mask[..., None, None]
    p = s.degree

    def apply(z):
        w = FormField(mesh, p, z * mk)
        return W * hodge_laplacian_apply(A, w).values * mk

    rhs = W * s.values * mk
    u, si = _cg(apply, rhs, _scalar_precond(mesh, True, rhs.shape), cfg)
    if info is not None:
        info.append(si)
    return FormField(mesh, p, u * mk)


def _interior_norm(w: FormField) -> float:
    mask = interior_mask(w.mesh)
    v = w.values * mask[..., None, None]
    return FormField(w.mesh, w.degree, v).norm()


def coulomb_project(A: FormField, a: FormField, cfg: SolverConfig = SolverConfig()) -> DecompositionResult:
    """a = d_A xi + b with xi = G_A(delta_A a) and delta_A b = 0 inside."""
    info = []
    xi = dirichlet_green(A, covariant_codifferential(A, a), cfg, info)
    b = a - covariant_d(A, xi)
    res = _interior_norm(covariant_codifferential(A, b)) / max(a.norm(), 1e-300)
    return DecompositionResult(xi, b, res, info[0].iterations)


def horizontal_residual(A: FormField, a: FormField) -> float:
    """||delta_A a|| over interior nodes, relative to ||a||."""
    return _interior_norm(covariant_codifferential(A, a)) / max(a.norm(), 1e-300)


def orbit_curvature(A: FormField, a: FormField, b: FormField, cfg: SolverConfig = SolverConfig(),
                    threshold: float | None = None) -> FormField:
    """G_A(*[a ^ *b]); the source is sum_k [a_k, b_k]."""
    thr = 100 * cfg.tol if threshold is None else threshold
    for u in (a, b):
        r = horizontal_residual(A, u)
        if r > thr:
            raise ValueError(f"direction is not horizontal: residual {r:.2e}")
    src = commutator(a.values, b.values).sum(axis=0)
    return dirichlet_green(A, FormField(A.mesh, 0, src[None]), cfg)


# -- Neumann ----------------------------------------------------------------

def _checker_patterns(mesh: Mesh) -> list:
    """Node patterns killed by the centered stencil: products of 1 and
    (-1)^i over periodic axes with an even node count."""
    pats = [np.ones(mesh.shape)]
    for a in range(mesh.dim):
        if mesh.topology[a] == INTERVAL or mesh.shape[a] % 2:
            continue
        alt = (-1.0) ** np.arange(mesh.shape[a])
        shp = [1] * mesh.dim
        shp[a] = -1
        pats = pats + [p * alt.reshape(shp) for p in pats]
    return pats


def neumann_kernel(A: FormField, tol: float = 1e-9) -> np.ndarray:
    """Orthonormal (Frobenius) basis of the kernel of d_A among pattern x
    su(n) fields; shape (k, *mesh.shape, n, n). Empty for irreducible A."""
    mesh, n = A.mesh, A.n
    cands = []
    for p in _checker_patterns(mesh):
        for E in su_basis(n):
            cands.append(p[..., None, None] * E)
    C = np.array(cands)
    images = np.array([covariant_d(A, FormField(mesh, 0, c[None])).values.ravel() for c in C])
    scale = np.sqrt(sum(1.0 / h ** 2 for h in mesh.spacing)) * np.sqrt(mesh.num_nodes)
    G = images.conj() @ images.T
    w, V = np.linalg.eigh(G.real)
    keep = V[:, w <= (tol * scale) ** 2]
    if keep.shape[1] == 0:
        return np.zeros((0,) + mesh.shape + (n, n), complex)
    K = np.tensordot(keep.T, C, axes=1)
    # Frobenius orthonormalization
    flat = K.reshape(len(K), -1)
    Q, _ = np.linalg.qr(np.concatenate([flat.real, flat.imag], axis=1).T)
    Q = Q.T
    half = flat.shape[1]
    return (Q[:, :half] + 1j * Q[:, half:]).reshape(K.shape)


def _frob(x, y) -> float:
    return float(np.vdot(x, y).real)


def neumann_green(A: FormField, f: FormField | None = None, v: FormField | None = None,
                  cfg: SolverConfig = SolverConfig(), info: list | None = None,
                  kernel: np.ndarray | None = None) -> FormField:
    """Neumann solve on the cylinder, on all rows (weak form).

    v given: delta_A d_A g = delta_A v inside with flux *d_A g = *v on the
    ends, i.e. the Hodge projection of v onto gradients.
    f given: delta_A d_A g = f with zero flux; f must be compatible with the
    kernel. Kernel components are removed from the solution.

    The kernel is found by probing constant and checkerboard candidates, so
    it is exact for A = 0 and abelian-constant A. Near-reducible A, such as
    a pure gauge whose discrete curvature is only O(h^2), leaves an O(h^4)
    near-kernel and an ill-conditioned solve.
    """
    mesh = A.mesh
    _need_cylinder(mesh)
    if (f is None) == (v is None):
        raise ValueError("give exactly one of f and v")
    K = neumann_kernel(A) if kernel is None else kernel
    W = mesh.full_weights()[..., None, None]
    if v is not None:
        rhs = weighted_d_adjoint(A, v).values[0]
    else:
        rhs = W * f.values[0]
    if len(K):
        coef = np.array([_frob(k, rhs) for k in K])
        rnorm = np.linalg.norm(rhs)
        if v is None and np.max(np.abs(coef)) > max(cfg.tol, 1e-12) * max(rnorm, 1e-300) * 10:
            raise IncompatibleDataError(f"source has kernel component {np.max(np.abs(coef)):.2e}")
        rhs = rhs - np.tensordot(coef, K, axes=1)

    def project(z):
        if not len(K):
            return z
        c = np.array([_frob(k, z) for k in K])
        return z - np.tensordot(c, K, axes=1)

    pre = _scalar_precond(mesh, False, (1,) + rhs.shape)
    g, si = _cg(lambda z: _apply_energy0(A, z), rhs, lambda z: pre(z[None])[0], cfg,
                project if len(K) else None)
    if len(K):
        # fix the free kernel part by W-orthogonality (zero quadrature mean)
        Wk = [W * k for k in K]
        Gm = np.array([[_frob(x, y) for y in K] for x in Wk])
        c = np.linalg.solve(Gm, np.array([_frob(x, g) for x in Wk]))
        g = g - np.tensordot(c, K, axes=1)
    if info is not None:
        info.append(si)
    return FormField(mesh, 0, g[None])


def boundary_flux_residual(A: FormField, g: FormField, v: FormField) -> float:
    """max over end slices of |(d_A g - v)_t|, the normal-flux mismatch."""
    k = A.mesh.interval_axis
    diff = covariant_d(A, g) - v
    idx = [slice(None)] * A.mesh.dim
    out = 0.0
    for row in (0, -1):
        idx[k] = row
        out = max(out, float(np.max(np.abs(diff.values[(k,) + tuple(idx)]))))
    return out


def neumann_gauge_fix(A: FormField, b: FormField, cfg: SolverConfig = SolverConfig()):
    """(eta, c) with eta = neumann_green(A, v=b) and c = b - d_A eta."""
    eta = neumann_green(A, v=b, cfg=cfg)
    return eta, b - covariant_d(A, eta)


def gauge_decompose(A: FormField, a: FormField, cfg: SolverConfig = SolverConfig()):
    """Full pipeline a = d_A(xi + eta) + c (Coulomb, then Neumann)."""
    dec = coulomb_project(A, a, cfg)
    eta, c = neumann_gauge_fix(A, dec.b, cfg)
    return dec.xi + eta, c


def kuranishi(A: FormField, alpha: FormField, cfg: SolverConfig = SolverConfig(),
              check_flat: bool = True) -> FormField:
    """K_A(alpha) = alpha + delta_A G_A(alpha ^ alpha)."""
    if check_flat:
        from .functionals import NotFlatError, default_flat_threshold
        res = curvature(A).norm()
        thr = default_flat_threshold(A)
        if res > thr:
            raise NotFlatError(res, thr)
    s = wedge(alpha, alpha)
    if not np.any(s.values):
        return alpha.like(alpha.values.copy())
    G = green_p(A, s, cfg)
    return alpha + covariant_codifferential(A, G)


# -- dense oracle -------------------------------------------------------------

def _d1_matrix(mesh: Mesh, axis: int) -> sp.csr_matrix:
    """1D difference matrix for one axis, assembled independently of
    Mesh.diff: centered inside, periodic wrap or one-sided ends."""
    N = mesh.shape[axis]
    h = mesh.spacing[axis]
    D = sp.lil_matrix((N, N))
    for i in range(N):
        if mesh.topology[axis] == INTERVAL and i == 0:
            D[0, 0], D[0, 1] = -1 / h, 1 / h
        elif mesh.topology[axis] == INTERVAL and i == N - 1:
            D[i, i - 1], D[i, i] = -1 / h, 1 / h
        else:
            D[i, (i + 1) % N] += 0.5 / h
            D[i, (i - 1) % N] -= 0.5 / h
    return D.tocsr()


def _axis_weights_1d(mesh: Mesh, axis: int) -> np.ndarray:
    N = mesh.shape[axis]
    w = np.full(N, mesh.spacing[axis])
    if mesh.topology[axis] == INTERVAL:
        w[[0, -1]] *= 0.5
    return w


def dense_dirichlet_oracle(A: FormField, f: FormField) -> FormField:
    """Assemble (d_A)^T W d_A on interior nodes in real su(n) coordinates from
    Kronecker products and solve it densely. Interior unknowns number
    (nodes off the ends) * (n^2 - 1); keep that below ~6000."""
    mesh, n = A.mesh, A.n
    B = su_basis(n)
    r = len(B)
    N = mesh.num_nodes
    # structure constants of ad(A_k) per node: C[k, node, i, j] = <E_i, [A_k, E_j]>
    blocks = []
    for k in range(mesh.dim):
        Ak = A.values[k].reshape(N, n, n)
        comm = np.einsum("xab,jbc->xjac", Ak, B) - np.einsum("jab,xbc->xjac", B, Ak)
        C = -np.einsum("iab,xjba->xij", B, comm).real
        blocks.append(sp.block_diag(list(C), format="csr"))
    ops = []
    for k in range(mesh.dim):
        mats = [sp.identity(mesh.shape[a]) for a in range(mesh.dim)]
        mats[k] = _d1_matrix(mesh, k)
        Dk = mats[0]
        for M in mats[1:]:
            Dk = sp.kron(Dk, M)
        ops.append(sp.kron(Dk, sp.identity(r)) + blocks[k])
    w = _axis_weights_1d(mesh, 0)
    for a in range(1, mesh.dim):
        w = np.kron(w, _axis_weights_1d(mesh, a))
    Wd = sp.diags(np.repeat(w, r))
    K = sum(D.T @ Wd @ D for D in ops).tocsr()
    mask = np.repeat(interior_mask(mesh).reshape(-1), r) > 0
    fc = -np.einsum("kab,xba->xk", B, f.values[0].reshape(N, n, n)).real.reshape(-1)
    rhs = (Wd @ fc)[mask]
    u = np.zeros(N * r)
    u[mask] = np.linalg.solve(K[mask][:, mask].toarray(), rhs)
    vals = np.tensordot(u.reshape(N, r), B, axes=1).reshape(mesh.shape + (n, n))
    return FormField(mesh, 0, vals[None])


def dense_scalar_hodge_oracle(mesh: Mesh, b: np.ndarray) -> np.ndarray:
    """c = b - d eta for a real scalar 1-form b (shape (dim, *mesh.shape)),
    eta the minimum-norm least-squares solution of the weak Neumann system
    sum_k D_k^T W D_k eta = sum_k D_k^T W b_k, by a dense solve. c does not
    depend on the kernel part of eta."""
    w = np.asarray(mesh.full_weights()).reshape(-1)
    W = sp.diags(w)
    Ds = [_kron_axes(mesh, k, _d1_matrix(mesh, k)) for k in range(mesh.dim)]
    K = sum(D.T @ W @ D for D in Ds).toarray()
    rhs = sum(D.T @ (w * b[k].reshape(-1)) for k, D in enumerate(Ds))
    eta = np.linalg.lstsq(K, rhs, rcond=1e-10)[0]
    return np.array([b[k] - (D @ eta).reshape(mesh.shape) for k, D in enumerate(Ds)])
