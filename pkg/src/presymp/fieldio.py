"""Field container: a JSON metadata header plus complex node data.

Binary layout: MAGIC, a little-endian uint32 header length, the UTF-8 JSON
header, then float64 little-endian (re, im) pairs. JSON layout: one object
with the same header keys plus "data", a flat [re, im, re, im, ...] list.
Both store entries in row-major node order; within a node, form components
(index combinations in lexicographic order) are the major index, then the
n x n matrix in row-major order.
"""
from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .forms import FormField, index_sets
from .gauge import GaugeMap
from .mesh import Mesh

MAGIC = b"PSYF\x01"
FORMAT_VERSION = 1


class FieldFormatError(ValueError):
    pass


def _header(mesh: Mesh, degree: int, n: int, group: bool) -> dict:
    h = {
        "version": FORMAT_VERSION,
        "dim": mesh.dim,
        "counts": list(mesh.counts),
        "extents": [float(e) for e in mesh.extents],
        "topology": list(mesh.topology),
        "degree": degree,
        "n": n,
    }
    if group:
        h["group"] = True
    return h


def _payload(values: np.ndarray, dim: int) -> np.ndarray:
    """(ncomp, *nodes, n, n) -> node-major, component-major flat complex."""
    order = tuple(range(1, dim + 1)) + (0, dim + 1, dim + 2)
    return np.ascontiguousarray(values.transpose(order)).reshape(-1)


def _unpayload(flat: np.ndarray, header: dict) -> np.ndarray:
    dim, n, p = header["dim"], header["n"], header["degree"]
    mesh = _mesh_of(header)
    ncomp = len(index_sets(dim, p))
    shape = mesh.shape + (ncomp, n, n)
    if flat.size != int(np.prod(shape)):
        raise FieldFormatError(f"payload has {flat.size} entries, header implies {int(np.prod(shape))}")
    arr = flat.reshape(shape)
    order = (dim,) + tuple(range(dim)) + (dim + 1, dim + 2)
    return np.ascontiguousarray(arr.transpose(order))


def _mesh_of(header: dict) -> Mesh:
    try:
        mesh = Mesh(tuple(header["counts"]), tuple(header["extents"]), tuple(header["topology"]))
    except (KeyError, TypeError) as exc:
        raise FieldFormatError(f"bad header: {exc}") from exc
    if mesh.dim != header.get("dim"):
        raise FieldFormatError("dim does not match counts")
    return mesh


def _split(obj):
    if isinstance(obj, GaugeMap):
        return obj.mesh, 0, obj.n, obj.values[None], True
    if isinstance(obj, FormField):
        if obj.mesh.is_slab:
            raise ValueError("cannot serialize a slab field")
        return obj.mesh, obj.degree, obj.n, obj.values, False
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _build(header: dict, values: np.ndarray):
    mesh = _mesh_of(header)
    if header.get("group"):
        if header["degree"] != 0:
            raise FieldFormatError("group fields must have degree 0")
        return GaugeMap(mesh, values[0], check=True)
    return FormField(mesh, header["degree"], values)


def dumps_binary(obj) -> bytes:
    mesh, p, n, values, group = _split(obj)
    head = json.dumps(_header(mesh, p, n, group), sort_keys=True).encode()
    data = _payload(values, mesh.dim).astype("<c16").tobytes()
    return MAGIC + struct.pack("<I", len(head)) + head + data


def loads_binary(buf: bytes):
    if not buf.startswith(MAGIC):
        raise FieldFormatError("not a field file (bad magic)")
    off = len(MAGIC)
    (hl,) = struct.unpack_from("<I", buf, off)
    off += 4
    header = json.loads(buf[off:off + hl].decode())
    flat = np.frombuffer(buf, dtype="<c16", offset=off + hl).astype(complex)
    return _build(header, _unpayload(flat, header))


def to_json_obj(obj) -> dict:
    mesh, p, n, values, group = _split(obj)
    out = _header(mesh, p, n, group)
    flat = _payload(values, mesh.dim)
    out["data"] = np.stack([flat.real, flat.imag], -1).reshape(-1).tolist()
    return out


def from_json_obj(d: dict):
    try:
        data = np.asarray(d["data"], dtype=float)
    except KeyError as exc:
        raise FieldFormatError("missing data") from exc
    if data.size % 2:
        raise FieldFormatError("data must hold (re, im) pairs")
    flat = data[0::2] + 1j * data[1::2]
    return _build(d, _unpayload(flat, d))


def save(obj, path, fmt: str | None = None):
    path = Path(path)
    fmt = fmt or ("json" if path.suffix == ".json" else "binary")
    if fmt == "json":
        # repr-precision floats round-trip exactly
        path.write_text(json.dumps(to_json_obj(obj), sort_keys=True))
    elif fmt == "binary":
        path.write_bytes(dumps_binary(obj))
    else:
        raise ValueError(f"unknown format {fmt!r}")


def load(path):
    raw = Path(path).read_bytes()
    if raw.startswith(MAGIC):
        return loads_binary(raw)
    try:
        return from_json_obj(json.loads(raw.decode()))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FieldFormatError(f"{path}: neither binary nor JSON field file") from exc


def convert(src, dst, fmt: str | None = None):
    """Re-encode a field file; the format of dst follows its suffix."""
    save(load(src), dst, fmt)
