import json
import math

import numpy as np
import pytest

from presymp.harness import checks, cli
from presymp.harness.report import (SATURATED, CheckReport, estimate_order, pairwise_orders,
                                    reports_to_csv)

EXPECTED = {
    "su2-vanishing", "omega-kappa-exact", "sigma-cs-closed", "lie-derivative-lemma",
    "flat-sector-kappa", "moment-phi-hamiltonian", "moment-phi-convention", "boundary-match",
    "sigma-cs-g0-invariance", "reality-structure", "stokes-chern-weil", "cs-quantization",
    "degree-additivity", "canonical-nondegeneracy", "ym-hamiltonian-field", "moment-J",
    "moment-J-convention", "moment-J0", "atiyah-bott", "dirichlet-mms", "neumann-mms",
    "coulomb-orthogonality", "kuranishi-identity", "dense-oracle",
}


def test_estimate_order_examples():
    assert estimate_order([1e-2, 2.5e-3, 6.25e-4], [8, 16, 32]) == pytest.approx(2.0)
    assert estimate_order([1e-3, 1.25e-4], [8, 16]) == pytest.approx(3.0)
    assert estimate_order([1e-16, 1e-17, 3e-17], [8, 16, 32]) == SATURATED
    # entries under the floor are dropped before fitting
    assert estimate_order([4e-6, 1e-6, 1e-20], [8, 16, 32]) == pytest.approx(2.0)
    # a scale lifts the floor
    assert estimate_order([1e-12, 2.5e-13], [8, 16], scales=[1e3, 1e3]) == SATURATED
    with pytest.raises(ValueError):
        estimate_order([1.0], [8])
    with pytest.raises(ValueError):
        estimate_order([1.0, 0.5], [16, 8])


def test_pairwise_orders():
    p = pairwise_orders([1e-2, 2.5e-3, 0.0], [8, 16, 32])
    assert p[0] == pytest.approx(2.0) and p[1] is None


def test_registry_contents():
    listed = {c["name"]: c for c in checks.list_checks()}
    assert EXPECTED <= set(listed)
    for c in listed.values():
        assert c["anchor"] and c["description"]
        assert c["class"] in ("exact", "convergent")


def test_check_config_validation():
    with pytest.raises(ValueError):
        checks.CheckConfig("su2-vanishing", grids=(16, 8))
    with pytest.raises(ValueError):
        checks.CheckConfig("su2-vanishing", n=1)


def test_report_deterministic_and_round_trips():
    cfg = checks.CheckConfig("omega-kappa-exact", grids=(6,))
    a, b = checks.run_check(cfg), checks.run_check(cfg)
    assert a.passed, a.reason
    assert a.to_json(include_time=False) == b.to_json(include_time=False)
    back = CheckReport.from_json(a.to_json())
    assert back.to_json() == a.to_json()
    d = json.loads(a.to_json())
    for key in ("check", "params", "grids", "residuals", "order", "conventions", "pass",
                "residual_class", "tolerance", "normalization", "wall_time"):
        assert key in d
    assert set(d["conventions"]) == {"s_cs", "s_q", "s_sigma"}
    assert d["normalization"]["q"] == pytest.approx(1 / (24 * math.pi ** 3))


def test_measured_conventions():
    c = checks.measure_conventions()
    assert c["oracle_degree"] == -1
    assert c["s_cs"] == -1 and c["s_q"] == 1
    assert c["s_sigma"] in (-1, 1)


def test_errors_become_failed_reports():
    rep = checks.run_check(checks.CheckConfig("dirichlet-mms", grids=(8,)))
    assert not rep.passed and "two grids" in rep.reason


def test_csv_rows():
    rep = checks.run_check(checks.CheckConfig("su2-vanishing", grids=(4, 6)))
    lines = reports_to_csv([rep]).strip().splitlines()
    assert lines[0].startswith("check,grid,residual")
    assert len(lines) == 3


def test_cli_list(capsys):
    assert cli.main(["list"]) == 0
    out = capsys.readouterr().out
    assert all(name in out for name in EXPECTED)


def test_cli_check_exit_codes(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert cli.main(["check", "su2-vanishing", "--grids", "4", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["pass"] is True
    # an impossible tolerance makes the check fail with exit code 1
    assert cli.main(["check", "omega-kappa-exact", "--grids", "4", "--tol", "1e-40"]) == 1
    assert cli.main(["check", "no-such-check"]) == 2
    assert cli.main(["check", "su2-vanishing", "--grids", "8,4"]) == 2
    capsys.readouterr()
    assert cli.main(["check", "su2-vanishing", "--grids", "4", "--format", "csv"]) == 0
    assert capsys.readouterr().out.startswith("check,grid")


def test_cli_convert(tmp_path):
    from presymp import fieldio
    from presymp.families import random_fourier
    from presymp.mesh import Mesh
    m = Mesh.torus(3, 4)
    src = tmp_path / "a.psf"
    fieldio.save(random_fourier(m, 1, 2, 0).on(m), src)
    assert cli.main(["convert", str(src), str(tmp_path / "a.json")]) == 0
    assert cli.main(["convert", str(tmp_path / "missing"), str(tmp_path / "b.json")]) == 2
    back = fieldio.load(tmp_path / "a.json")
    assert np.array_equal(back.values, fieldio.load(src).values)
