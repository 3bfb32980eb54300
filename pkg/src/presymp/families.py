"""Analytic test fields: truncated Fourier forms and degree-one bump maps.

These are expressions, not sampled fields: each can be evaluated on any mesh
or slab, which is what refinement studies and slab-wise 4D checks need.
"""
from __future__ import annotations

import numpy as np

from .forms import FormField, index_sets, sample
from .gauge import GaugeMap
from .lie import dagger, embed, embed_group, pauli, random_alg
from .mesh import INTERVAL, Mesh


class FourierForm:
    """sum over terms of X * cos(w . x + phase), per form component.

    terms[c] is a list of (w, phase, X) with w the angular frequency vector.
    Closed under differentiation, so derivative oracles are exact.
    """

    def __init__(self, dim: int, degree: int, n: int, terms: list):
        if len(terms) != len(index_sets(dim, degree)):
            raise ValueError("one term list per component")
        self.dim, self.degree, self.n = dim, degree, n
        self.terms = terms

    def __call__(self, coords):
        shape = np.broadcast_shapes(*(np.shape(c) for c in coords))
        out = np.zeros((len(self.terms),) + shape + (self.n, self.n), complex)
        for c, terms in enumerate(self.terms):
            for w, phase, X in terms:
                theta = phase + sum(wa * xa for wa, xa in zip(w, coords) if wa != 0.0)
                out[c] += np.cos(np.broadcast_to(theta, shape))[..., None, None] * X
        return out

    def on(self, mesh: Mesh) -> FormField:
        return sample(self, mesh, self.degree)

    def derivative(self, axis: int) -> "FourierForm":
        terms = [[(w, phase + np.pi / 2, w[axis] * X) for w, phase, X in ts if w[axis] != 0.0]
                 for ts in self.terms]
        return FourierForm(self.dim, self.degree, self.n, terms)

    def __add__(self, other: "FourierForm") -> "FourierForm":
        return FourierForm(self.dim, self.degree, self.n,
                           [a + b for a, b in zip(self.terms, other.terms)])

    def scaled(self, s: float) -> "FourierForm":
        return FourierForm(self.dim, self.degree, self.n,
                           [[(w, ph, s * X) for w, ph, X in ts] for ts in self.terms])


def frequencies(mesh: Mesh, axis: int, k) -> float:
    if mesh.topology[axis] == INTERVAL:
        return 0.5 * np.pi * k / mesh.extents[axis]
    return 2 * np.pi * k / mesh.extents[axis]


def random_fourier(mesh: Mesh, degree: int, n: int, seed, amplitude: float = 0.5,
                   terms: int = 3, max_k: int = 1, aligned: bool = True) -> FourierForm:
    """Smooth random su(n)-valued form with |k| <= max_k per axis.

    Each term carries a matrix of Frobenius norm amplitude/sqrt(terms), so a
    component has pointwise size about `amplitude`. With `aligned` every term
    varies along a single axis, which keeps the highest grid frequency of
    products low; otherwise wavevectors are drawn per axis. On the interval
    axis frequencies are multiples of pi/2, so data is not periodic in t.
    Only mesh geometry is used, not its resolution.
    """
    rng = np.random.default_rng(seed)
    out = []
    for _ in index_sets(mesh.dim, degree):
        ts = []
        for _ in range(terms):
            w = [0.0] * mesh.dim
            axes = [int(rng.integers(mesh.dim))] if aligned else range(mesh.dim)
            for a in axes:
                if mesh.topology[a] == INTERVAL:
                    k = int(rng.integers(1 if aligned else 0, 2 * max_k + 1))
                else:
                    k = int(rng.choice([-1, 1]) * rng.integers(1, max_k + 1)) if aligned \
                        else int(rng.integers(-max_k, max_k + 1))
                w[a] = frequencies(mesh, a, k)
            X = random_alg(n, rng)
            X *= amplitude / (np.sqrt(terms) * np.linalg.norm(X))
            ts.append((tuple(w), rng.uniform(0, 2 * np.pi), X))
        out.append(ts)
    return FourierForm(mesh.dim, degree, n, out)


def constant_fourier(dim: int, degree: int, comps: dict, n: int) -> FourierForm:
    terms = [[] for _ in index_sets(dim, degree)]
    idx = {I: c for c, I in enumerate(index_sets(dim, degree))}
    for I, X in comps.items():
        terms[idx[tuple(I)]].append(((0.0,) * dim, 0.0, np.asarray(X)))
    return FourierForm(dim, degree, n, terms)


# -- degree-one bump maps T^3 -> SU(2) -------------------------------------

def _bump_profile_coeffs(tail=(-9.28006589, 3.32313165)) -> tuple:
    """Odd degree-9 polynomial h with h(1)=1, h'(1)=h''(1)=0.

    The two highest coefficients are free; the defaults were tuned to spread
    the Jacobian of the bump map over the ball, which roughly halves the
    discretization error of its degree compared with the flattest profile.
    """
    powers = np.arange(1, 11, 2)
    rows = [np.ones(5), powers * 1.0, powers * (powers - 1.0), np.eye(5)[3], np.eye(5)[4]]
    coef = np.linalg.solve(np.array(rows), np.r_[1.0, 0.0, 0.0, tail])
    return powers, coef


_POW, _COEF = _bump_profile_coeffs()


def bump_profile(rho):
    rho = np.clip(rho, 0.0, 1.0)
    return sum(c * rho ** p for p, c in zip(_POW, _COEF))


class BumpMap:
    """g(x) = cos f + i sin f (n.sigma) inside a ball, identity outside.

    f(r) = pi (1 - h(r/r0)) runs from pi at the center to 0 on the sphere, so
    the ball is wrapped once around SU(2) = S^3. `orientation=-1` reflects one
    coordinate, which flips the degree. `rotation` conjugates by a fixed SU(2)
    element. Works on periodic coordinates via minimal-image displacements.
    """

    def __init__(self, center=(0.5, 0.5, 0.5), radius: float = 0.5, n: int = 2,
                 orientation: int = 1, rotation=None, extents=(1.0, 1.0, 1.0)):
        self.center = np.asarray(center, float)
        self.radius = float(radius)
        self.n = n
        self.orientation = orientation
        self.rotation = None if rotation is None else np.asarray(rotation, complex)
        self.extents = np.asarray(extents, float)

    def su2_values(self, disp: list, shape) -> np.ndarray:
        d = [np.broadcast_to(x, shape) for x in disp]
        if self.orientation < 0:
            d[0] = -d[0]
        r = np.sqrt(sum(x * x for x in d))
        f = np.pi * (1.0 - bump_profile(r / self.radius))
        f = np.where(r < self.radius, f, 0.0)
        with np.errstate(invalid="ignore", divide="ignore"):
            s = np.where(r > 0, np.sin(f) / np.where(r > 0, r, 1.0), 0.0)
        s1, s2, s3 = pauli()
        g = np.cos(f)[..., None, None] * np.eye(2) + 1j * (
            (s * d[0])[..., None, None] * s1 + (s * d[1])[..., None, None] * s2
            + (s * d[2])[..., None, None] * s3)
        if self.rotation is not None:
            g = dagger(self.rotation) @ g @ self.rotation
        return g

    def displacement(self, coords):
        out = []
        for x, c, L in zip(coords, self.center, self.extents):
            out.append((np.asarray(x) - c + 0.5 * L) % L - 0.5 * L)
        return out

    def __call__(self, coords) -> np.ndarray:
        shape = np.broadcast_shapes(*(np.shape(c) for c in coords))
        return embed_group(self.su2_values(self.displacement(coords), shape), self.n)

    def points(self, x: np.ndarray) -> np.ndarray:
        """Evaluate at an (k, 3) array of points."""
        return self([x[:, 0], x[:, 1], x[:, 2]])

    def on(self, mesh: Mesh) -> GaugeMap:
        return GaugeMap(mesh, self(mesh.coords()))


class ProductMap:
    """Pointwise product of analytic gauge maps (first factor on the left)."""

    def __init__(self, *maps):
        self.maps = maps
        self.n = maps[0].n

    def __call__(self, coords):
        out = self.maps[0](coords)
        for m in self.maps[1:]:
            out = out @ m(coords)
        return out

    def points(self, x):
        return self([x[:, 0], x[:, 1], x[:, 2]])

    def on(self, mesh: Mesh) -> GaugeMap:
        return GaugeMap(mesh, self(mesh.coords()))


class ExpMap:
    """g = exp(xi) for an analytic 0-form expression xi."""

    def __init__(self, xi: FourierForm):
        self.xi = xi
        self.n = xi.n

    def __call__(self, coords):
        from .lie import su_exponential
        return su_exponential(self.xi(coords)[0])

    def on(self, mesh: Mesh) -> GaugeMap:
        return GaugeMap(mesh, self(mesh.coords()))
