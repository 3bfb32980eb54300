"""Flat structured meshes: tori T^d and cylinders [0,1] x T^(d-1).

Counts are cells per axis. A periodic axis carries `count` nodes with
spacing extent/count; the interval axis carries count+1 nodes including both
ends. Derivatives are centered in the interior; at the two ends of the
interval axis the first-order summation-by-parts closure is used, which pairs
with the trapezoid rule so that the discrete operator is exactly
skew-adjoint up to the boundary term.

Large 4D fields are processed in slabs along axis 0: a slab is a `Mesh` with
a node window (the materialized rows, including halo) and an owned range (the
rows that contribute to integrals). Derivatives at a window edge that is not
a true boundary come out as NaN so a too-thin halo cannot go unnoticed.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterator

import numpy as np

PERIODIC = "periodic"
INTERVAL = "interval"
MAX_NODES = 1 << 22


@dataclass(frozen=True)
class Mesh:
    counts: tuple
    extents: tuple | None = None
    topology: tuple | None = None
    window: tuple | None = None
    owned: tuple | None = None

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        dim = len(counts)
        if not 1 <= dim <= 4:
            raise ValueError(f"dimension {dim} not supported")
        if min(counts) < 4:
            raise ValueError("need at least 4 cells per axis")
        extents = tuple(float(e) for e in (self.extents or (1.0,) * dim))
        topology = tuple(self.topology or (PERIODIC,) * dim)
        if len(extents) != dim or len(topology) != dim:
            raise ValueError("counts, extents and topology must have equal length")
        if any(t not in (PERIODIC, INTERVAL) for t in topology):
            raise ValueError(f"bad topology {topology}")
        if topology.count(INTERVAL) > 1:
            raise ValueError("at most one interval axis")
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "extents", extents)
        object.__setattr__(self, "topology", topology)
        full = self.full_shape
        if int(np.prod(full, dtype=np.int64)) > MAX_NODES:
            raise ValueError(f"mesh with {full} nodes exceeds MAX_NODES={MAX_NODES}")
        if self.window is not None:
            lo, hi = (int(v) for v in self.window)
            if hi - lo < 3:
                raise ValueError("window must hold at least 3 rows")
            if topology[0] == INTERVAL and (lo < 0 or hi > full[0]):
                raise ValueError("window leaves the interval")
            object.__setattr__(self, "window", (lo, hi))
            own = self.owned if self.owned is not None else (lo, hi)
            own = (int(own[0]), int(own[1]))
            if not lo <= own[0] < own[1] <= hi:
                raise ValueError("owned range must sit inside the window")
            object.__setattr__(self, "owned", own)
        elif self.owned is not None:
            raise ValueError("owned range needs a window")

    # -- constructors ----------------------------------------------------
    @classmethod
    def torus(cls, dim: int, count: int, extent: float = 1.0) -> "Mesh":
        return cls((count,) * dim, (extent,) * dim)

    @classmethod
    def cylinder(cls, count: int, spatial_dim: int = 3, space_count: int | None = None) -> "Mesh":
        """[0,1] x T^spatial_dim with the interval on axis 0."""
        sc = count if space_count is None else space_count
        return cls((count,) + (sc,) * spatial_dim, None,
                   (INTERVAL,) + (PERIODIC,) * spatial_dim)

    # -- geometry --------------------------------------------------------
    @property
    def dim(self) -> int:
        return len(self.counts)

    @property
    def spacing(self) -> tuple:
        return tuple(e / c for e, c in zip(self.extents, self.counts))

    @property
    def interval_axis(self):
        return self.topology.index(INTERVAL) if INTERVAL in self.topology else None

    @property
    def closed(self) -> bool:
        return self.interval_axis is None

    @property
    def full_shape(self) -> tuple:
        return tuple(c + (t == INTERVAL) for c, t in zip(self.counts, self.topology))

    @property
    def is_slab(self) -> bool:
        return self.window is not None

    def node_range(self, axis: int) -> tuple:
        if axis == 0 and self.window is not None:
            return self.window
        return (0, self.full_shape[axis])

    @property
    def shape(self) -> tuple:
        return tuple(hi - lo for lo, hi in (self.node_range(a) for a in range(self.dim)))

    @property
    def num_nodes(self) -> int:
        return int(np.prod(self.shape))

    def axis_coords(self, axis: int) -> np.ndarray:
        lo, hi = self.node_range(axis)
        return np.arange(lo, hi) * self.spacing[axis]

    def coords(self) -> list:
        """Sparse, broadcastable coordinate arrays, one per axis."""
        return np.meshgrid(*(self.axis_coords(a) for a in range(self.dim)),
                           indexing="ij", sparse=True)

    def parent(self) -> "Mesh":
        return Mesh(self.counts, self.extents, self.topology)

    def refine(self, factor: int) -> "Mesh":
        if factor < 2:
            raise ValueError("refinement factor must be >= 2")
        return Mesh(tuple(c * factor for c in self.counts), self.extents, self.topology)

    def with_counts(self, count: int) -> "Mesh":
        return Mesh((count,) * self.dim, self.extents, self.topology)

    def boundary_side_present(self, side: int) -> bool:
        """Is the t=0 (side 0) or t=1 (side 1) slice an owned row of this mesh?"""
        k = self.interval_axis
        if k is None:
            return False
        last = self.full_shape[k] - 1
        if k != 0 or self.window is None:
            return True
        row = 0 if side == 0 else last
        return self.owned[0] <= row < self.owned[1]

    def slice_mesh(self) -> "Mesh":
        """The closed mesh of one boundary slice of a cylinder."""
        k = self.interval_axis
        keep = [a for a in range(self.dim) if a != k]
        return Mesh(tuple(self.counts[a] for a in keep), tuple(self.extents[a] for a in keep))

    # -- stencils --------------------------------------------------------
    def _true_edges(self, axis: int) -> tuple:
        """(low edge is a real boundary, high edge is a real boundary) for a
        non-wrapping axis."""
        lo, hi = self.node_range(axis)
        if self.topology[axis] == PERIODIC:
            return False, False
        return lo == 0, hi == self.full_shape[axis]

    def wraps(self, axis: int) -> bool:
        return self.topology[axis] == PERIODIC and not (axis == 0 and self.window is not None)

    def diff(self, u: np.ndarray, axis: int) -> np.ndarray:
        """d/dx_axis of a node array whose leading `dim` axes are the nodes."""
        h = self.spacing[axis]
        out = np.empty(u.shape, dtype=np.result_type(u, float))

        def sl(s):
            idx = [slice(None)] * u.ndim
            idx[axis] = s
            return tuple(idx)

        inv2h = 0.5 / h
        np.subtract(u[sl(slice(2, None))], u[sl(slice(None, -2))], out=out[sl(slice(1, -1))])
        out[sl(slice(1, -1))] *= inv2h
        if self.wraps(axis):
            out[sl(0)] = (u[sl(1)] - u[sl(-1)]) * inv2h
            out[sl(-1)] = (u[sl(0)] - u[sl(-2)]) * inv2h
            return out
        low, high = self._true_edges(axis)
        out[sl(0)] = (u[sl(1)] - u[sl(0)]) / h if low else np.nan
        out[sl(-1)] = (u[sl(-1)] - u[sl(-2)]) / h if high else np.nan
        return out

    # -- quadrature ------------------------------------------------------
    def owned_slices(self) -> tuple:
        if self.window is None:
            return (slice(None),) * self.dim
        lo = self.window[0]
        return (slice(self.owned[0] - lo, self.owned[1] - lo),) + (slice(None),) * (self.dim - 1)

    def axis_weights(self, axis: int) -> np.ndarray:
        """Quadrature weights of the owned nodes along one axis."""
        h = self.spacing[axis]
        if axis == 0 and self.window is not None:
            lo, hi = self.owned
        else:
            lo, hi = 0, self.full_shape[axis]
        w = np.full(hi - lo, h)
        if self.topology[axis] == INTERVAL:
            last = self.full_shape[axis] - 1
            idx = np.arange(lo, hi)
            w[(idx == 0) | (idx == last)] = 0.5 * h
        return w

    @cached_property
    def weights(self) -> np.ndarray:
        """Tensor-product weights over the owned nodes."""
        W = np.ones(())
        for a in range(self.dim):
            W = np.multiply.outer(W, self.axis_weights(a))
        return W

    def full_weights(self) -> np.ndarray:
        """Weights over all materialized nodes, zero outside the owned rows."""
        W = np.zeros(self.shape)
        W[self.owned_slices()] = self.weights
        return W

    def integrate(self, f: np.ndarray):
        """Quadrature of a node array (shape == self.shape) over owned nodes."""
        f = np.asarray(f)
        if f.shape != self.shape:
            raise ValueError(f"node array {f.shape} does not match mesh {self.shape}")
        return np.sum(f[self.owned_slices()] * self.weights)

    # -- slabs -----------------------------------------------------------
    def slabs(self, halo: int = 2, budget: int = 300_000) -> Iterator["Mesh"]:
        """Windowed views along axis 0 whose owned rows partition the mesh."""
        if self.window is not None:
            raise ValueError("already a slab")
        full = self.full_shape
        row = int(np.prod(full[1:]))
        if int(np.prod(full)) <= budget:
            yield self
            return
        core = max(1, budget // row - 2 * halo)
        n0 = full[0]
        interval = self.topology[0] == INTERVAL
        for s in range(0, n0, core):
            e = min(n0, s + core)
            lo, hi = s - halo, e + halo
            if interval:
                lo, hi = max(0, lo), min(n0, hi)
            yield Mesh(self.counts, self.extents, self.topology, (lo, hi), (s, e))


def slab_reduce(mesh: Mesh, fn: Callable[[Mesh], object], halo: int = 2,
                budget: int = 300_000):
    """Sum fn(slab) over the slabs of `mesh`, in a fixed order.

    `fn` must only integrate over owned rows (every quadrature here does).
    The result may be a scalar or a numpy array of partial sums.
    """
    total = None
    for slab in mesh.slabs(halo=halo, budget=budget):
        part = fn(slab)
        total = part if total is None else total + part
    return total
