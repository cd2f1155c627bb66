import json
import subprocess
import sys

import pytest

from padicwave.cli import main
from padicwave.constructions import haar_function
from padicwave.formats import read_pwcert, read_pwv, write_pwf, write_pwv
from padicwave.schwartz import indicator_Zp
from padicwave.wavelets import VectorFunction


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--json")
    return code, json.loads(out)


@pytest.fixture
def files(tmp_path, capsys):
    paths = {}
    for name, argv in {"theta3": ["haar", "--p", 3], "t3": ["theorem3"],
                       "tilde": ["example33-stage", "--stage", "tilde"],
                       "tprime": ["example33-stage", "--stage", "tilde-prime"]}.items():
        path = tmp_path / f"{name}.pwv"
        assert run(capsys, "construct", *argv, "-o", path)[0] == 0
        paths[name] = path
    phi = tmp_path / "phi.pwv"
    phi.write_text(write_pwv(VectorFunction.of(indicator_Zp(2))))
    paths["phi"] = phi
    return paths


def test_construct(files):
    assert read_pwv(files["theta3"].read_text()).rank == 2
    assert read_pwv(files["t3"].read_text()).rank == 4


def test_construct_random_damaged_is_deterministic(tmp_path, capsys):
    outs = []
    for i in range(2):
        path = tmp_path / f"r{i}.pwv"
        assert run(capsys, "construct", "random-damaged", "--p", 2, "--steps", 5, "--seed", 7,
                   "-o", path, "--cert", tmp_path / f"r{i}.pwcert")[0] == 0
        outs.append(path.read_text())
    assert outs[0] == outs[1]
    assert run(capsys, "chain-verify", tmp_path / "r0.pwcert")[0] == 0


def test_verify_exit_codes(files, tmp_path, capsys):
    code, rep = run_json(capsys, "verify", files["theta3"])
    assert code == 0 and rep["verdict"] == "proven"
    assert rep["schema"] == "padicwave-report/1"
    code, rep = run_json(capsys, "verify", files["phi"])
    assert code == 1
    assert rep["witness"]["check"] == "zero-mean"
    assert rep["witness"]["item"]["witness"] == 1
    bad = tmp_path / "bad.pwv"
    bad.write_text('{"format": "pwv-1", "p": 2, "components": [')
    assert run(capsys, "verify", bad)[0] == 3
    assert run(capsys, "verify", tmp_path / "missing.pwv")[0] == 3


def test_verify_reports_are_deterministic(files, capsys):
    a = run(capsys, "verify", files["tprime"], "--json")
    b = run(capsys, "verify", files["tprime"], "--json")
    assert a == b


def test_verify_example_stages(files, capsys):
    for name in ("tilde", "tprime", "t3"):
        assert run(capsys, "verify", files[name])[0] == 0


def test_reduce_writes_a_checkable_certificate(files, tmp_path, capsys):
    cert = tmp_path / "t3.pwcert"
    code, rep = run_json(capsys, "reduce", files["t3"], "-o", cert)
    assert code == 0
    trace = rep["reduction"]["rank_trace"]
    assert trace[0] == 4 and trace[-1] == 1
    assert all(r % 1 == 0 for r in trace)
    assert read_pwcert(cert.read_text()).end.rank == 1
    proc = subprocess.run([sys.executable, "-m", "padicwave", "chain-verify", str(cert), "--json"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    out = json.loads(proc.stdout)
    assert out["certifies_onwb"] is True


def test_reduce_theta_is_trivial(files, tmp_path, capsys):
    cert = tmp_path / "theta.pwcert"
    code, rep = run_json(capsys, "reduce", files["theta3"], "-o", cert)
    assert code == 0 and rep["reduction"]["rank_trace"] == [2]
    assert read_pwcert(cert.read_text()).steps == []


def test_reduce_to_basic(files, capsys):
    code, rep = run_json(capsys, "reduce", files["tprime"], "--to-basic")
    assert code == 0 and rep["reduction"]["rank_trace"][-1] == 1


def test_reduce_refutes(files, capsys):
    code, rep = run_json(capsys, "reduce", files["phi"])
    assert code == 1 and rep["reduction"]["refutation"]["step"] == "scale"


def test_analyze(files, tmp_path, capsys):
    code, out, _ = run(capsys, "analyze", files["t3"], "--obstruction")
    assert code == 0 and "not reducible to standard Haar (d=3)" in out
    code, rep = run_json(capsys, "analyze", files["theta3"], "--eigen")
    assert rep["eigen"]["labels"] == [1, 2]
    f = tmp_path / "theta.pwf"
    f.write_text(write_pwf(haar_function(2, 1)))
    code, rep = run_json(capsys, "analyze", f, "--wpart", 0)
    assert code == 0 and rep["wpart"]["dimension"] == 1
    assert run(capsys, "analyze", files["theta3"], "--obstruction")[0] == 3
    assert run(capsys, "analyze", files["theta3"])[0] == 3


def test_chain_verify_corruption(files, tmp_path, capsys):
    cert = tmp_path / "r.pwcert"
    run(capsys, "construct", "random-damaged", "--p", 2, "--steps", 6, "--seed", 5,
        "-o", tmp_path / "r.pwv", "--cert", cert)
    doc = json.loads(cert.read_text())
    idx = next(i for i, s in enumerate(doc["steps"]) if s["kind"] == "unitary")
    entry = doc["steps"][idx]["matrix"][0][0]
    entry["re"] = repr(float(entry["re"]) + 0.01)
    cert.write_text(json.dumps(doc))
    code, rep = run_json(capsys, "chain-verify", cert)
    assert code == 1 and rep["failing_step"] == idx


def test_fourier_round_trip(tmp_path, capsys):
    f = tmp_path / "f.pwf"
    f.write_text(write_pwf(haar_function(3, 1)))
    g = tmp_path / "g.pwf"
    h = tmp_path / "h.pwf"
    assert run(capsys, "fourier", f, "-o", g)[0] == 0
    assert run(capsys, "fourier", g, "--inverse", "-o", h)[0] == 0
    from padicwave.formats import read_pwf
    from padicwave.schwartz import distance
    assert distance(read_pwf(h.read_text()), haar_function(3, 1)) < 1e-12


def test_usage_errors_exit_3(capsys):
    assert run(capsys, "construct", "haar", "--p", 4)[0] == 3
    assert run(capsys, "bogus")[0] == 3
    assert run(capsys, "--version")[0] == 0
    assert run(capsys, "construct", "haar", "--cert", "x.pwcert")[0] == 3
