import json

import numpy as np
import pytest

from presymp import fieldio
from presymp.families import BumpMap, random_fourier
from presymp.forms import FormField
from presymp.gauge import GaugeMap
from presymp.mesh import Mesh


@pytest.fixture
def field():
    m = Mesh.cylinder(4, 2)
    return random_fourier(m, 2, 3, 1, aligned=False).on(m)


def _same(a, b):
    assert type(a) is type(b) and a.mesh == b.mesh
    assert np.array_equal(a.values, b.values)
    if isinstance(a, FormField):
        assert a.degree == b.degree


def test_binary_round_trip_exact(field):
    buf = fieldio.dumps_binary(field)
    assert buf.startswith(fieldio.MAGIC)
    _same(field, fieldio.loads_binary(buf))


def test_json_round_trip_exact(field):
    d = json.loads(json.dumps(fieldio.to_json_obj(field)))
    _same(field, fieldio.from_json_obj(d))


def test_gauge_map_round_trip_and_revalidation(tmp_path):
    g = BumpMap(n=2).on(Mesh.torus(3, 4))
    p = tmp_path / "g.psf"
    fieldio.save(g, p)
    _same(g, fieldio.load(p))
    bad = fieldio.to_json_obj(g)
    bad["data"] = [2.0 * x for x in bad["data"]]
    with pytest.raises(ValueError):
        fieldio.from_json_obj(bad)


def test_convert_between_formats(tmp_path, field):
    b, j, b2 = tmp_path / "f.psf", tmp_path / "f.json", tmp_path / "g.psf"
    fieldio.save(field, b)
    fieldio.convert(b, j)
    assert j.read_text().startswith("{")
    fieldio.convert(j, b2)
    assert b2.read_bytes() == b.read_bytes()


def test_payload_layout_is_node_major(field):
    buf = fieldio.dumps_binary(field)
    hlen = int.from_bytes(buf[len(fieldio.MAGIC):len(fieldio.MAGIC) + 4], "little")
    header = json.loads(buf[len(fieldio.MAGIC) + 4:len(fieldio.MAGIC) + 4 + hlen])
    assert header["degree"] == 2 and header["n"] == 3
    data = np.frombuffer(buf[len(fieldio.MAGIC) + 4 + hlen:], dtype="<c16")
    # first node, first component, first matrix row
    assert np.array_equal(data[:3], field.values[(0,) + (0,) * 3][0])
    assert np.array_equal(data[9:12], field.values[(1,) + (0,) * 3][0])


def test_bad_input_rejected(tmp_path, field):
    with pytest.raises(fieldio.FieldFormatError):
        fieldio.loads_binary(b"NOPE" + fieldio.dumps_binary(field)[4:])
    with pytest.raises(fieldio.FieldFormatError):
        fieldio.loads_binary(fieldio.dumps_binary(field)[:-16])
    p = tmp_path / "junk"
    p.write_bytes(b"\xff\xfe garbage")
    with pytest.raises(fieldio.FieldFormatError):
        fieldio.load(p)
    with pytest.raises(ValueError):
        fieldio.save(field, tmp_path / "x", fmt="xml")
