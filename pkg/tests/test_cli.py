import json
import subprocess
import sys

import pytest

from yulefam import __version__
from yulefam.cli import RunConfig, config_from_header, main, parse_grid, run_config, UsageError


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("argv,value", [
    (["eval", "g", "--r", "0.5", "--n", "10000", "--s", "100"], 1.0),
    (["eval", "ml-density", "--alpha", "0.5", "--x", "1"], 0.439391289467722),
    (["eval", "z-moment", "--r", "0.5", "--k", "2", "--m", "1"], 0.376126389031838),
    (["eval", "ml-moment", "--alpha", "0.5", "--m", "2"], 2.0),
    (["eval", "dup-prob", "--r", "0.5", "--partition", "1,3|2"], 0.125),
    (["eval", "ewens-prob", "--theta", "1", "--partition", "1,2,3"], 1 / 3),
])
def test_eval(argv, value, capsys):
    code, out, _ = run(argv, capsys)
    assert code == 0
    assert float(out) == pytest.approx(value, rel=1e-12)


def test_eval_digits(capsys):
    _, out, _ = run(["eval", "ml-cdf", "--alpha", "0.5", "--x", "1"], capsys)
    assert len(out.strip().lstrip("0.").rstrip("0")) >= 12


@pytest.mark.parametrize("argv,code", [
    (["tail", "--r", "0.5", "--n", "100", "--reps", "0"], 2),
    (["tail", "--r", "0.5", "--n", "100"], 2),
    (["simulate", "--r", "1.5", "--n", "10"], 2),
    (["bogus"], 2),
    (["tail", "--r", "0.5", "--n", "100", "--reps", "3", "--s-grid", "5,2"], 2),
    (["eval", "g", "--r", "0.5"], 2),
    (["eval", "ml-density", "--alpha", "1.5", "--x", "1"], 3),
    (["eval", "g", "--r", "2", "--n", "10", "--s", "2"], 3),
    (["simulate", "--r", "0.1", "--n", "10", "--out", "/nonexistent/dir/x.csv"], 4),
])
def test_exit_codes(argv, code, capsys):
    got, _, err = run(argv, capsys)
    assert got == code
    assert err.startswith("yulefam:")


def test_simulate_single_family(capsys):
    code, out, _ = run(["simulate", "--r", "0", "--n", "10"], capsys)
    lines = out.splitlines()
    assert lines[0] == f"# yulefam v{__version__}"
    i = lines.index("label,size")
    assert lines[i + 1] == "1,10"
    j = lines.index("S,count")
    assert lines[j + 1:] == ["1,1"]


def test_csv_schema(tmp_path, capsys):
    path = tmp_path / "t.csv"
    main(["tail", "--r", "0.5", "--n", "500", "--reps", "20", "--s-grid", "1,3,9", "--out", str(path)])
    lines = path.read_text().splitlines()
    assert lines[0] == f"# yulefam v{__version__}"
    header = [ln for ln in lines if ln.startswith("#")]
    assert all("=" in ln for ln in header[1:])
    body = lines[len(header):]
    assert body[0] == "S,mean_F,stderr,g_S"
    # 17 significant digits for non-integral floats
    mean = body[2].split(",")[1]
    assert len(mean.replace(".", "").lstrip("0")) == 17


COMMANDS = [
    ["simulate", "--r", "0.2", "--n", "300"],
    ["tail", "--r", "0.3", "--n", "400", "--reps", "12"],
    ["coupling", "--r", "0.3", "--n-list", "50,100", "--reps", "10"],
    ["largest", "--r", "0.5", "--n", "400", "--reps", "30", "--k", "2"],
    ["decay", "--r", "0.5", "--n", "400", "--reps", "30", "--x-grid", "1,1.5"],
    ["crp", "--alpha", "0.3", "--theta", "1", "--n", "40", "--reps", "50"],
    ["partition-prob", "--r", "0.5", "--n", "4", "--theta", "2"],
    ["partition-prob", "--r", "0.5", "--partition", "1,3|2"],
]


@pytest.mark.parametrize("argv", COMMANDS, ids=lambda a: a[0])
@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_header_round_trip(argv, fmt, tmp_path):
    path = tmp_path / f"out.{fmt}"
    assert main(argv + ["--seed", "17", "--format", fmt, "--out", str(path)]) == 0
    text = path.read_text()
    cfg = config_from_header(text)
    assert run_config(cfg) == text


@pytest.mark.parametrize("argv", COMMANDS[:5], ids=lambda a: a[0])
def test_thread_count_does_not_change_output(argv, tmp_path):
    outs = []
    for threads in ("1", "2"):
        path = tmp_path / f"t{threads}.csv"
        assert main(argv + ["--threads", threads, "--out", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_json_document(capsys):
    code, out, _ = run(["partition-prob", "--r", "0.5", "--n", "3", "--format", "json"], capsys)
    doc = json.loads(out)
    assert doc["yulefam"] == __version__
    rows = doc["tables"]["partitions"]["rows"]
    assert sum(r[2] for r in rows) == pytest.approx(1.0)


def test_config_file_and_precedence(tmp_path, capsys):
    conf = tmp_path / "run.conf"
    conf.write_text("# comment\nr=0.5\nn=200\nreps=5\nseed=3\n")
    code, a, _ = run(["tail", "--config", str(conf), "--s-grid", "1,2"], capsys)
    assert code == 0
    assert "# seed=3" in a and "# r=0.5" in a
    code, b, _ = run(["tail", "--config", str(conf), "--s-grid", "1,2", "--seed", "4"], capsys)
    assert "# seed=4" in b
    conf.write_text("bogus=1\n")
    assert run(["tail", "--config", str(conf)], capsys)[0] == 2


def test_seed_from_environment(monkeypatch, capsys):
    monkeypatch.setenv("YULEFAM_SEED", "123")
    _, out, _ = run(["simulate", "--r", "0.2", "--n", "20"], capsys)
    assert "# seed=123" in out
    _, out, _ = run(["simulate", "--r", "0.2", "--n", "20", "--seed", "5"], capsys)
    assert "# seed=5" in out


def test_parse_grid():
    assert list(parse_grid("1,2,5")) == [1, 2, 5]
    assert list(parse_grid("geom:1:100:3", integer=True)) == [1, 10, 100]
    for bad in ("", "a,b", "geom:1:2"):
        with pytest.raises(UsageError):
            parse_grid(bad)


def test_config_rejects_unknown_file():
    with pytest.raises(UsageError):
        config_from_header("label,size\n1,2\n")
    with pytest.raises(UsageError):
        run_config(RunConfig("crp", alpha=0.5, theta=-1.0, n=10, reps=3))


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "yulefam", "eval", "g", "--r", "0.5", "--n", "10000", "--s", "10"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert float(res.stdout) == pytest.approx(100.0)
