import json

from vobj import corpus
from vobj.cli import main


def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_expand(tmp_path, capsys):
    assert main(["expand", _write(tmp_path, "p.voo", corpus.POINT)]) == 0
    out = capsys.readouterr().out
    assert "variable x 0" in out and "class.get.count" in out


def test_parse(tmp_path, capsys):
    assert main(["parse", _write(tmp_path, "s.voo", corpus.SHAPES)]) == 0
    data = json.loads(capsys.readouterr().out)
    assert [d["name"] for d in data] == ["Shape", "Circle"]


def test_parse_error(tmp_path, capsys):
    assert main(["parse", _write(tmp_path, "bad.voo", "voo::class {")]) == 1
    assert "vobj parse: error:" in capsys.readouterr().err


def test_missing_file(capsys):
    assert main(["expand", "/nonexistent/x.voo"]) == 1


def test_bench_out(tmp_path, capsys):
    out = tmp_path / "r.csv"
    rc = main(["bench", "--bulk", "1000", "--iterations", "10", "--suites", "getter,setter",
               "--format", "csv", "--out", str(out)])
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("suite,framework")
    assert sum(1 for ln in lines if ln.startswith("bulk,")) == 3


def test_bench_bad_framework(capsys):
    assert main(["bench", "--frameworks", "nope", "--iterations", "1"]) == 1


def test_usage_errors(capsys):
    assert main(["frobnicate"]) != 0
    assert main([]) != 0


def test_demo(capsys):
    assert main(["demo"]) == 0
    out = capsys.readouterr().out
    assert "78.53975" in out
    assert "p1 = Alice 30 75000.0" in out
    assert "copy = Alice 31 75000.0" in out
