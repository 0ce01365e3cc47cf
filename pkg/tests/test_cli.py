import io
import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from hartree import csvio
from hartree.cli import main
from hartree.constants import SystemParams
from hartree.energy import j_infty
from hartree.model import BubbleSpec, PairField, bubble
from hartree.radial import RadialField, make_grid


def run(*argv):
    out = io.StringIO()
    code = main([str(a) for a in argv], stdout=out)
    return code, json.loads(out.getvalue())


PARAMS = ["--n", 6, "--alpha1", 1, "--alpha2", 1, "--beta", 2]


def test_constants():
    code, rep = run("constants", *PARAMS)
    assert code == 0
    assert rep["schema"] == 1
    assert abs(rep["s_hl_squared"] - 57.6) < 1e-6
    assert_allclose(rep["c_infty"], 9.6, rtol=1e-12)
    assert {"params", "grid", "tolerances"} <= set(rep)


def test_dimension_error():
    code, rep = run("constants", "--n", 4, "--alpha1", 1, "--alpha2", 1, "--beta", 2)
    assert code == 1
    assert rep["error"]["kind"] == "dimension"


def test_parameter_error():
    code, rep = run("constants", "--n", 6, "--alpha1", 1, "--alpha2", 3, "--beta", 2)
    assert code == 1
    assert rep["error"]["kind"] == "parameter"


@pytest.mark.parametrize("argv", [["constants", "--n", "6"], ["nope"], ["constants", *PARAMS, "--extra", "1"]])
def test_usage_errors(argv):
    code, rep = run(*argv)
    assert code == 1 and rep["error"]["kind"] == "usage"


def test_abbreviated_flag_rejected():
    code, rep = run("constants", "--n", 6, "--alpha", 1, "--alpha2", 1, "--beta", 2)
    assert code == 1


def test_admissible():
    code, rep = run("admissible", *PARAMS, "--v1norm", 1, "--v2norm", 1)
    assert code == 0 and rep["admissible"]
    assert_allclose(rep["lhs"], 0.3941, atol=1e-4)
    code, rep = run("admissible", *PARAMS, "--v-power", 2, "--m", 512)
    assert code == 0 and rep["admissible"] and rep["grid"]["M"] == 512


def test_verify_identity_pass_and_fail():
    code, rep = run("verify-identity", "--n", 6, "--s", 2)
    assert code == 0 and rep["max_relative_residual"] <= 1e-4
    assert len(rep["radii"]) == 20
    code, rep = run("verify-identity", "--n", 6, "--s", 2, "--tol", 1e-14)
    assert code == 2 and rep["error"]["kind"] == "tolerance"
    assert "max_relative_residual" in rep


def test_bubble_energy_round_trip(tmp_path):
    path = tmp_path / "b.csv"
    code, rep = run("bubble", "--n", 6, "--out", path)
    assert code == 0
    U = bubble(6, BubbleSpec(1.0), make_grid(6))
    params = SystemParams(6, 1.0, 1.0, 2.0)
    mem = j_infty(PairField(U, RadialField.zeros(U.grid)), params).j_value
    code, rep = run("energy", *PARAMS, "--u", path)
    assert code == 0
    assert abs(rep["j_value"] - mem) <= 1e-10


def test_groundstate_pair_files(tmp_path):
    path = tmp_path / "gs.csv"
    code, rep = run("bubble", "--n", 6, "--groundstate", "--alpha1", 1, "--alpha2", 1.5, "--beta", 2, "--out", path)
    assert code == 0
    code, rep = run("energy", "--n", 6, "--alpha1", 1, "--alpha2", 1.5, "--beta", 2, "--pair", path)
    assert_allclose(rep["j_value"], 8.64, rtol=1e-7)
    code, rep = run("residual", "--n", 6, "--alpha1", 1, "--alpha2", 1.5, "--beta", 2, "--pair", path)
    assert code == 0 and rep["max_residual"] < 1e-6
    code, rep = run("fit", "--pair", path)
    assert code == 0 and abs(rep["delta"] - 1) < 1e-8


def test_energy_with_potential(tmp_path):
    g = make_grid(6, M=256)
    V = RadialField.from_function(g, lambda r: (1 + r * r) ** -2.0, 4.0)
    U = bubble(6, BubbleSpec(1.0), g)
    csvio.write_field(tmp_path / "v.csv", V)
    csvio.write_pair(tmp_path / "p.csv", PairField(U, U))
    code, rep = run("energy", *PARAMS, "--pair", tmp_path / "p.csv", "--v1", tmp_path / "v.csv")
    code2, rep2 = run("energy", *PARAMS, "--pair", tmp_path / "p.csv", "--v-power", 2)
    assert code == code2 == 0
    assert rep["potential"] > 0
    assert_allclose(rep["potential"] * 2, rep2["potential"], rtol=1e-14)


def test_concentration_csv(tmp_path):
    path = tmp_path / "c.csv"
    code, rep = run("concentration", *PARAMS, "--deltas", "0.001,1,1000", "--out", path)
    assert code == 0
    _, header, data = csvio.read_table(path)
    assert header == ["delta", "beta_axial", "gamma"]
    assert data[0, 2] < 0.05 and data[2, 2] > 0.95


def test_potential_sweep():
    code, rep = run("potential-sweep", "--n", 6, "--deltas", "0.001,1000")
    assert code == 0
    assert all(row["ratio"] < 0.01 for row in rep["rows"])


def test_kelvin_check(tmp_path):
    path = tmp_path / "k.csv"
    code, rep = run("kelvin-check", "--n", 6, "--delta", 2, "--out", path)
    assert code == 0
    assert rep["fixed_point_deviation"] <= 1e-4 and rep["argmin_rel_error"] <= 0.01
    _, header, data = csvio.read_table(path)
    assert header == ["lambda", "deviation"] and data.shape == (64, 2)


def test_cutoff_rates():
    code, rep = run("cutoff-rates", "--n", 6, "--count", 4)
    assert code == 0
    assert rep["excess_slope"] == "inf"
    assert all(rep["checks"].values())


def test_solve_outputs(tmp_path):
    out, trace = tmp_path / "pair.csv", tmp_path / "trace.csv"
    code, rep = run(
        "solve", "--n", 6, "--alpha1", 1, "--alpha2", 1.5, "--beta", 2, "--m", 512, "--out", out, "--trace-out", trace
    )
    assert code == 0 and rep["converged"] and not rep["escaped"]
    assert rep["ratio_max_rel_error"] < 0.02
    _, header, data = csvio.read_table(trace)
    assert header == ["iter", "energy", "nehari_t", "delta_fit"]
    assert data.shape[0] == rep["iterations"] + 1
    pair = csvio.read_pair(out)
    assert np.all(pair.u.values >= 0)


def test_solve_scalar(tmp_path):
    code, rep = run("solve", "--n", 6, "--alpha1", 1, "--scalar", "--m", 512, "--out", tmp_path / "u.csv")
    assert code == 0
    assert_allclose(rep["energy"], 14.4, rtol=1e-2)
    code, rep = run("fit", "--field", tmp_path / "u.csv")
    assert code == 0 and rep["rel_err"] < 0.02


def test_solve_non_convergence():
    code, rep = run("solve", *PARAMS, "--m", 256, "--max-iters", 1)
    assert code == 2 and rep["error"]["kind"] == "convergence"


def test_missing_file():
    code, rep = run("fit", "--field", "/nonexistent/f.csv")
    assert code == 1 and rep["error"]["kind"] == "io"
