import json

import numpy as np
import pytest

from lgtt.cli import main
from lgtt.io import (
    RunManifest,
    format_text,
    load_family,
    read_complex_csv,
    read_eigenfield,
    read_report,
    read_tensor_csv,
    read_thimble_csv,
    save_family,
    to_jsonable,
    write_complex_csv,
    write_eigenfield,
    write_report,
    write_tensor_csv,
    write_thimble_csv,
)
from lgtt.poly import DeformationFamily
from lgtt.spectral import FormField, SpectralGrid
from lgtt.thimble import trace_thimble

from conftest import a2_family, poly


@pytest.fixture
def a2_file(tmp_path):
    p = tmp_path / "a2.json"
    save_family(p, a2_family((0.0, -1.0), 1.0))
    return p


@pytest.fixture
def quad_file(tmp_path):
    p = tmp_path / "z2.json"
    save_family(p, DeformationFamily(poly("z^2"), (), (), 1.0))
    return p


# --------------------------------------------------------------------------
# file formats

def test_family_roundtrip(tmp_path):
    fam = a2_family((0.3 + 0.1j, -1.0), 1.0 + 0.5j)
    save_family(tmp_path / "f.json", fam)
    back = load_family(tmp_path / "f.json")
    assert back.t == fam.t and back.tau == fam.tau
    assert back.member() == fam.member()


def test_load_family_rejects_missing_terms(tmp_path):
    (tmp_path / "bad.json").write_text(json.dumps({"vars": ["z"]}))
    with pytest.raises(ValueError):
        load_family(tmp_path / "bad.json")


def test_complex_csv_roundtrip(tmp_path):
    A = np.array([[1 + 2j, -0.5], [1e-17j, 3.25 - 1j]])
    write_complex_csv(tmp_path / "m.csv", A, ["a", "b"], ["r1", "r2"])
    B, cols, idx = read_complex_csv(tmp_path / "m.csv")
    assert (A == B).all() and cols == ["a", "b"] and idx == ["r1", "r2"]
    assert (tmp_path / "m.csv").read_text().splitlines()[0] == "row,a_re,a_im,b_re,b_im"


def test_thimble_csv_columns(tmp_path):
    th = trace_thimble(a2_family((0, -1), 1.0), a=0)
    write_thimble_csv(tmp_path / "t.csv", th)
    T = read_thimble_csv(tmp_path / "t.csv")
    assert T.shape[1] == 5
    assert np.allclose(T[:, 1] + 1j * T[:, 2], th.z)


def test_tensor_csv_roundtrip(tmp_path):
    A = np.arange(8).reshape(2, 2, 2) * (1 - 0.5j)
    write_tensor_csv(tmp_path / "a.csv", A)
    assert (read_tensor_csv(tmp_path / "a.csv") == A).all()


def test_eigenfield_roundtrip(tmp_path):
    g = SpectralGrid(1.0, 0.25)
    z = g.mesh()
    f = FormField(1, (np.exp(-abs(z) ** 2), 1j * z), g)
    write_eigenfield(tmp_path / "e.txt", f, 2.0)
    back, meta = read_eigenfield(tmp_path / "e.txt")
    assert meta["eigenvalue"] == "2.0"
    assert all(np.array_equal(a, b) for a, b in zip(back.components, f.components))


def test_report_json_and_text(tmp_path):
    rep = {"x": 1 + 2j, "m": np.eye(2), "flag": np.bool_(True)}
    write_report(tmp_path / "r.json", rep)
    assert read_report(tmp_path / "r.json") == to_jsonable(rep)
    text = format_text(rep)
    assert text.startswith("x: 1+2i\n")
    assert "m: \n  1  0\n" in text


def test_manifest_roundtrip(tmp_path, a2_file):
    m = RunManifest(["lgtt", "x"], seed=3, tolerances={"rtol": 1e-12})
    m.add_input(a2_file)
    m.finish()
    p = m.write(tmp_path / "out.csv")
    back = RunManifest.read(p)
    assert back.seed == 3 and back.tolerances == {"rtol": 1e-12}
    assert back.outputs == ["out.csv"]
    assert len(back.inputs[str(a2_file)]) == 64


# --------------------------------------------------------------------------
# command line

def test_moduli_quintic(capsys):
    assert main(["moduli", "--n", "5", "--d", "5"]) == 0
    assert capsys.readouterr().out.strip() == "moduli_dim=101 marginal=101 match=yes"


def test_moduli_quartic_surface_mismatch(capsys):
    assert main(["moduli", "--n", "4", "--d", "4"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("moduli_dim=20 marginal=19 match=no")


def test_usage_errors_exit_2(tmp_path, capsys, a2_file):
    assert main([]) == 2
    assert main(["nonsense"]) == 2
    assert main(["periods", str(tmp_path / "missing.json")]) == 2
    assert main(["periods", str(a2_file), "--t", "1"]) == 2
    assert main(["periods", str(a2_file), "--tau", "abc"]) == 2
    (tmp_path / "bad.json").write_text("{not json")
    assert main(["analyze", str(tmp_path / "bad.json")]) == 2


def test_computation_error_exit_1(tmp_path, capsys):
    p = tmp_path / "deg.json"
    save_family(p, DeformationFamily(poly("z^3"), (), (), 1.0))   # degenerate critical point
    assert main(["periods", str(p)]) == 1
    assert "periods failed" in capsys.readouterr().err


def test_periods_csv_and_manifest(tmp_path, capsys, a2_file):
    out = tmp_path / "pm.csv"
    assert main(["periods", str(a2_file), "--tau", "1", "--t", "0.3+0.1i,-1", "--out", str(out),
                 "--format", "csv"]) == 0
    M, cols, idx = read_complex_csv(out)
    assert idx == ["C1-", "C2-", "C1+", "C2+"] and cols == ["1", "z", "vol"]
    # the unit form is d/dt1 of the volume period: a factor 2 tau
    assert np.allclose(M[:2, 0], 2 * M[:2, 2], rtol=1e-5)
    man = json.loads((tmp_path / "pm.csv.manifest.json").read_text())
    # equal imaginary parts of the critical values: the run is rotated off the wall and says so
    assert man["perturbations"] and man["perturbations"][0]["tau_phase"] > 0
    assert man["tolerances"]["quadrature_rtol"] == 1e-12
    assert str(a2_file) in man["inputs"]
    assert man["outputs"] == ["pm.csv"]


def test_periods_deterministic(tmp_path, capsys, a2_file):
    for name in ("a.csv", "b.csv"):
        assert main(["periods", str(a2_file), "--out", str(tmp_path / name), "--format", "csv"]) == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_thimbles_write_four_files(tmp_path, capsys, a2_file):
    prefix = tmp_path / "th"
    assert main(["thimbles", str(a2_file), "--out", str(prefix), "--threads", "2"]) == 0
    for name in ("th_1minus.csv", "th_1plus.csv", "th_2minus.csv", "th_2plus.csv"):
        assert read_thimble_csv(tmp_path / name).shape[1] == 5
    man = json.loads((tmp_path / "th.manifest.json").read_text())
    assert len(man["outputs"]) == 5


def test_analyze_text_and_milnor(tmp_path, capsys, a2_file):
    mil = tmp_path / "mil.txt"
    assert main(["analyze", str(a2_file), "--milnor", str(mil)]) == 0
    out = capsys.readouterr().out
    assert "mu: 2" in out and "StronglyTame" in out
    text = mil.read_text()
    assert "reduction:" in text and "z * e2 -> 1" in text
    assert (tmp_path / "mil.txt.manifest.json").exists()


@pytest.mark.filterwarnings("ignore::lgtt.spectral.ResolutionWarning")
def test_spectrum_csv_and_strict(tmp_path, capsys, quad_file):
    args = ["spectrum", str(quad_file), "--grid-R", "3", "--grid-h", "0.25", "--k", "3"]
    assert main(args + ["--format", "csv"]) == 0
    assert capsys.readouterr().out.startswith("k,lambda_re,lambda_im")
    # the coarse grid under-resolves the potential: a warning normally, an error under --strict
    assert main(args + ["--strict"]) == 1


def test_spectrum_fields(tmp_path, capsys, quad_file):
    prefix = tmp_path / "ef"
    assert main(["spectrum", str(quad_file), "--grid-R", "2", "--grid-h", "0.125", "--k", "2",
                 "--fields", str(prefix)]) == 0
    fld, meta = read_eigenfield(tmp_path / "ef_1.txt")
    assert fld.degree == 1 and abs(float(meta["eigenvalue"])) < 0.05


def test_frobenius_outputs(tmp_path, capsys, a2_file):
    out = tmp_path / "fr.csv"
    assert main(["frobenius", str(a2_file), "--format", "csv", "--out", str(out),
                 "--tensor", str(tmp_path / "A.csv")]) == 0
    M, cols, idx = read_complex_csv(out)
    assert idx[:2] == ["eta[1]", "eta[2]"] and M.shape == (8, 2)
    A = read_tensor_csv(tmp_path / "A.csv")
    assert A.shape == (2, 2, 2) and np.allclose(A, A.transpose(1, 0, 2))


def test_tame_probe_csv(tmp_path, capsys):
    p = tmp_path / "p.json"
    save_family(p, DeformationFamily(poly("x^2*y^2 + x + y", ["x", "y"]), (), (), 1.0))
    out = tmp_path / "probe.csv"
    assert main(["tame", str(p), "--probe", "--format", "csv", "--out", str(out), "--seed", "4"]) == 0
    head = out.read_text().splitlines()[0]
    assert head == "radius,min_value,x1_re,x1_im,x2_re,x2_im"


def test_seed_reproduces_certificate(tmp_path, capsys):
    p = tmp_path / "l.json"
    save_family(p, DeformationFamily(poly("x + y + 1/(x*y)", ["x", "y"]), (), (), 1.0))
    outs = []
    for _ in range(2):
        assert main(["newton", str(p), "--seed", "7"]) == 0
        outs.append(capsys.readouterr().out)
    assert outs[0] == outs[1] and "nondegenerate" in outs[0]
