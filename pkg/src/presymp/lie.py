"""su(n) and SU(n) matrix algebra on batched arrays.

Every function accepts arrays of shape (..., n, n) and works pointwise over
the leading axes, so the same code serves single matrices and whole fields.
"""
from __future__ import annotations

import logging
from functools import lru_cache

import numpy as np

log = logging.getLogger(__name__)

ALG_ATOL = 1e-12
GROUP_ATOL = 1e-10
# polar re-projection kicks in above this unitarity drift
DRIFT_TOL = 1e-12


def _same_n(X, Y):
    if X.shape[-2:] != Y.shape[-2:]:
        raise ValueError(f"rank mismatch: {X.shape[-2:]} vs {Y.shape[-2:]}")


def dagger(X: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(X, -1, -2))


def commutator(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    X, Y = np.asarray(X), np.asarray(Y)
    _same_n(X, Y)
    return X @ Y - Y @ X


def trace_pair(X: np.ndarray, Y: np.ndarray):
    """tr(XY), batched. Only the n^2 products on the diagonal are formed."""
    X, Y = np.asarray(X), np.asarray(Y)
    _same_n(X, Y)
    return np.einsum("...ij,...ji->...", X, Y)


def trace(X: np.ndarray):
    return np.trace(X, axis1=-2, axis2=-1)


def project_alg(M: np.ndarray) -> np.ndarray:
    """Orthogonal projection onto su(n): anti-Hermitian part minus trace part."""
    M = np.asarray(M, dtype=complex)
    n = M.shape[-1]
    A = 0.5 * (M - dagger(M))
    tr = trace(A)
    return A - tr[..., None, None] * np.eye(n) / n


def alg_defect(X: np.ndarray) -> float:
    """Largest entrywise deviation from su(n) (anti-Hermitian, traceless)."""
    X = np.asarray(X)
    if X.size == 0:
        return 0.0
    herm = np.max(np.abs(X + dagger(X)))
    tr = np.max(np.abs(trace(X)))
    return float(max(herm, tr))


def group_defect(U: np.ndarray) -> float:
    U = np.asarray(U)
    if U.size == 0:
        return 0.0
    n = U.shape[-1]
    unit = np.max(np.abs(dagger(U) @ U - np.eye(n)))
    det = np.max(np.abs(np.linalg.det(U) - 1.0))
    return float(max(unit, det))


def is_alg(X, atol=ALG_ATOL) -> bool:
    return alg_defect(X) <= atol


def is_group(U, atol=GROUP_ATOL) -> bool:
    return group_defect(U) <= atol


def unitarize(U: np.ndarray) -> np.ndarray:
    """Nearest special unitary matrix (polar factor, then det phase removed)."""
    W, _, Vh = np.linalg.svd(U)
    P = W @ Vh
    n = U.shape[-1]
    det = np.linalg.det(P)
    return P * (det ** (-1.0 / n))[..., None, None]


def su_exponential(X: np.ndarray) -> np.ndarray:
    """exp(X) for X in su(n), via the eigendecomposition of the Hermitian iX."""
    X = project_alg(X)
    w, V = np.linalg.eigh(1j * X)
    U = (V * np.exp(-1j * w)[..., None, :]) @ dagger(V)
    # det is exp(tr X) = 1 up to rounding; unitarity is the part that drifts
    drift = _unit_drift(U) if U.size else 0.0
    if drift > DRIFT_TOL:
        log.debug("su_exponential: polar correction, drift %.2e", drift)
        U = unitarize(U)
    return U


def _unit_drift(U):
    n = U.shape[-1]
    return float(np.max(np.abs(dagger(U) @ U - np.eye(n))))


def random_alg(n: int, seed, scale: float = 1.0, size=()) -> np.ndarray:
    """Gaussian su(n) element(s); `seed` is an int or a numpy Generator."""
    if n < 2:
        raise ValueError("n must be >= 2")
    rng = np.random.default_rng(seed)
    size = tuple(np.atleast_1d(size)) if size != () else ()
    shape = size + (n, n)
    M = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return scale * project_alg(M)


# -- fixed bases ---------------------------------------------------------

def pauli():
    s1 = np.array([[0, 1], [1, 0]], dtype=complex)
    s2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
    s3 = np.array([[1, 0], [0, -1]], dtype=complex)
    return s1, s2, s3


def embed(M: np.ndarray, n: int) -> np.ndarray:
    """Put a 2x2 block in the upper-left corner of an n x n identity-padded
    matrix (group elements) or zero-padded matrix (algebra elements)."""
    M = np.asarray(M)
    if n == M.shape[-1]:
        return M
    out = np.zeros(M.shape[:-2] + (n, n), dtype=complex)
    out[..., :2, :2] = M
    return out


def embed_group(U: np.ndarray, n: int) -> np.ndarray:
    out = embed(U, n)
    if n > 2:
        idx = np.arange(2, n)
        out[..., idx, idx] = 1.0
    return out


@lru_cache(maxsize=None)
def su_basis(n: int) -> np.ndarray:
    """Basis of su(n), orthonormal for the real pairing -tr(XY).

    i/sqrt(2) times the generalized Gell-Mann matrices; shape (n^2-1, n, n).
    """
    mats = []
    for j in range(n):
        for k in range(j + 1, n):
            S = np.zeros((n, n), complex)
            S[j, k] = S[k, j] = 1
            mats.append(S)
            Asym = np.zeros((n, n), complex)
            Asym[j, k], Asym[k, j] = -1j, 1j
            mats.append(Asym)
    for l in range(1, n):
        D = np.zeros((n, n), complex)
        D[np.arange(l), np.arange(l)] = 1
        D[l, l] = -l
        mats.append(D * np.sqrt(2.0 / (l * (l + 1))))
    B = 1j * np.array(mats) / np.sqrt(2.0)
    B.setflags(write=False)
    return B


def alg_coords(X: np.ndarray) -> np.ndarray:
    """Real coordinates of X in su_basis(n)."""
    B = su_basis(X.shape[-1])
    return -np.einsum("kij,...ji->...k", B, X).real


def from_coords(c: np.ndarray, n: int) -> np.ndarray:
    return np.tensordot(c, su_basis(n), axes=([-1], [0]))
