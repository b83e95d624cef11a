import json
import subprocess
import sys

import mpmath as mp
import pytest

from partial_theta.cli import UsageError, main, parse_complex, parse_polar
from partial_theta.interval import make

from conftest import oracle_theta


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("text,re_,im_", [
    ("5+0i", "5", "0"), ("-0.5+2i", "-0.5", "2"), ("3-4i", "3", "-4"), ("2.5i", "0", "2.5"),
    ("-i", "0", "-1"), ("7", "7", "0"), ("1e-3-2e2i", "0.001", "-200"),
])
def test_parse_complex(text, re_, im_):
    z = parse_complex(text)
    assert z.re.contains(make(re_)) and z.im.contains(make(im_))
    assert z.re.width() < 1e-30 and z.im.width() < 1e-30


def test_parse_errors():
    for bad in ("", "abc", "1+2", "1++2i"):
        with pytest.raises(UsageError):
            parse_complex(bad)
    with pytest.raises(UsageError):
        parse_polar("3")


def test_polar_input():
    z = parse_polar("3:0.75pi")
    half_diag = make(3) / make(2).sqrt()
    assert z.re.intersects(-half_diag) and z.im.intersects(half_diag)
    assert z.re.width() < 1e-30


def test_eval_trivial(capsys):
    code, out, _ = run(capsys, "eval", "--q", "0", "--x", "5+0i")
    assert code == 0
    assert out.strip() == "1 ± 0"


def test_eval_radius_three_point(capsys):
    code, out, _ = run(capsys, "eval", "--q", "0.71", "--x-polar", "3:0.5188451144pi", "--abs")
    assert code == 0
    assert abs(float(out.split("±")[0]) - 0.0141) < 1e-4


def test_eval_matches_oracle(capsys):
    code, out, _ = run(capsys, "eval", "--q", "0.5", "--x", "1+0i", "--json")
    assert code == 0
    d = json.loads(out)
    lo, hi = (mp.mpf(v) for v in d["re"])
    with mp.workprec(256):
        v = oracle_theta(0.5, 1).real
    assert lo <= v <= hi
    assert d["terms_used"] > 0


def test_eval_negative_argument_values(capsys):
    code, out, _ = run(capsys, "eval", "--q", "0.3", "--x", "-0.5+2i", "--function", "dx")
    assert code == 0 and "i" in out
    code, _, _ = run(capsys, "eval", "--q", "-0.7", "--x", "-2.69998")
    assert code == 0


def test_usage_errors(capsys):
    assert run(capsys, "eval", "--q", "0.3", "--x", "nonsense")[0] == 2
    assert run(capsys)[0] == 2
    assert run(capsys, "frobnicate")[0] == 2
    assert run(capsys, "eval", "--q", "0.3", "--x", "1", "--precision", "32")[0] == 2
    assert run(capsys, "certify", "--region", "D", "--q", "0:0.5")[0] == 2
    assert run(capsys, "certify", "--region", "moon")[0] == 2


def test_numeric_failure_exit_code(capsys):
    code, _, err = run(capsys, "eval", "--q", "1.2", "--x", "3")
    assert code == 3 and "numeric failure" in err


def test_precision_env_var(capsys, monkeypatch):
    monkeypatch.setenv("THETA_PRECISION_BITS", "256")
    _, out256, _ = run(capsys, "eval", "--q", "0.3", "--x", "1.7-0.2i", "--json")
    monkeypatch.setenv("THETA_PRECISION_BITS", "64")
    _, out64, _ = run(capsys, "eval", "--q", "0.3", "--x", "1.7-0.2i", "--json")

    def width(o):
        lo, hi = (mp.mpf(v) for v in json.loads(o)["re"])
        return hi - lo
    assert width(out256) < width(out64)
    monkeypatch.setenv("THETA_PRECISION_BITS", "lots")
    assert run(capsys, "eval", "--q", "0.3", "--x", "1")[0] == 2


def test_certify_negative_control(capsys):
    code, out, _ = run(capsys, "certify", "--region", "segment:-8:-7", "--q", "0.305:0.315")
    assert code == 1
    assert "status: failed" in out and "sign change" in out


def test_certify_delta_writes_identical_files(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    code, out, _ = run(capsys, "certify", "--region", "Delta", "--q", "0.02:0.5", "--out", str(a), "--audit")
    assert code == 0 and "audit: ok" in out
    run(capsys, "certify", "--region", "Delta", "--q", "0.02:0.5", "--out", str(b), "--threads", "1")
    assert a.read_bytes() == b.read_bytes()
    d = json.loads(a.read_text())
    assert d["status"] == "certified" and d["region"] == "Delta"


def test_certify_json_output(capsys):
    code, out, _ = run(capsys, "certify", "--region", "segment:-1:0", "--q", "0.02:0.5", "--json")
    assert code == 0
    d = json.loads(out)
    assert d["status"] == "certified" and d["cells"]


def test_zeros_command(capsys):
    code, out, _ = run(capsys, "zeros", "--q", "0.726475", "--box", "-0.5:0.5:2.5:3.3", "--json")
    assert code == 0
    zs = json.loads(out)["zeros"]
    assert len(zs) == 1
    assert abs(complex(float(zs[0]["re"]), float(zs[0]["im"])) - 2.9083j) < 1e-3


def test_zeros_negative_box_values(capsys):
    code, out, _ = run(capsys, "zeros", "--q", "0.5", "--box", "-6:-2:-1:1", "--rigorous")
    assert code == 0 and out.startswith("zeros:")


def test_trace_command(capsys, tmp_path):
    out_csv = tmp_path / "t.csv"
    code, out, _ = run(capsys, "trace", "--q-from", "0.72", "--q-to", "0.721", "--seed", "0.03+2.9i",
                       "--out", str(out_csv))
    assert code == 0
    assert out_csv.read_text().startswith("branch,q,re,im,residual\n")


def test_spectral_command(capsys, tmp_path):
    path = tmp_path / "s.json"
    code, out, _ = run(capsys, "spectral", "--count", "2", "--json", "--out", str(path))
    assert code == 0
    vals = json.loads(out)
    assert abs(float(vals[0]["q"]) - 0.309249) < 1e-6
    assert json.loads(path.read_text()) == vals


def test_bench_command(capsys, tmp_path):
    tsv = tmp_path / "bench.tsv"
    plot = tmp_path / "plot.csv"
    code, _, _ = run(capsys, "bench", "--out", str(tsv), "--plot-data", str(plot))
    assert code == 0
    lines = tsv.read_text().splitlines()
    assert lines[0] == "id\tcomputed\texpected\ttol\tstatus"
    assert all(line.split("\t")[-1] in ("pass", "erratum") for line in lines[1:])
    assert plot.read_text().startswith("q,abs_K,M1_t0,M1_t1")


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "partial_theta", "eval", "--q", "0", "--x", "5+0i"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.strip() == "1 ± 0"
