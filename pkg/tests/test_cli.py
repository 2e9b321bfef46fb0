import json
import subprocess
import sys

import pytest

from nvbayes.cli import main
from nvbayes.csvio import read_csv


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def trace_file(tmp_path, capsys):
    path = tmp_path / "trace.csv"
    assert main(["simulate", "--rho", "0.7", "--noiseless", "--out", str(path)]) == 0
    capsys.readouterr()
    return path


def test_simulate_header(capsys):
    code, out, _ = run(["simulate", "--rho", "0.4", "--seed", "3"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("# version=")
    assert "# seed=3" in lines
    assert any(line.startswith("# config_hash=") for line in lines)
    assert "t_ns,f_count" in lines


def test_simulate_seed_changes_output(capsys):
    a = run(["simulate", "--seed", "1"], capsys)[1]
    b = run(["simulate", "--seed", "2"], capsys)[1]
    assert a != b


def test_estimate_ps_on_noiseless(trace_file, tmp_path, capsys):
    out = tmp_path / "est.csv"
    assert main(["estimate", "--trace", str(trace_file), "--method", "ps", "--out", str(out)]) == 0
    _, columns, rows = read_csv(out)
    assert columns == ["rho_e", "ci_low", "ci_high", "n_updates", "method", "seed"]
    assert float(rows[0][0]) == pytest.approx(0.7, abs=1e-12)


@pytest.mark.parametrize("extra", [["--method", "bayes", "--prior", "jeffreys"],
                                   ["--method", "bayes", "--prior", "conjugate", "--rho0", "0.6"],
                                   ["--method", "closed-form"]])
def test_estimate_methods(trace_file, capsys, extra):
    code, out, _ = run(["estimate", "--trace", str(trace_file), *extra], capsys)
    assert code == 0
    rho = float(out.splitlines()[-1].split(",")[0])
    assert rho == pytest.approx(0.7, abs=0.05)


def test_bounds(capsys):
    code, out, _ = run(["bounds", "--rho", "0.5", "--sigma0-sq", "0.001"], capsys)
    assert code == 0
    header = out.splitlines()[-2].split(",")
    values = dict(zip(header, out.splitlines()[-1].split(",")))
    assert float(values["ps"]) >= float(values["crlb"])
    assert float(values["conjugate"]) < float(values["crlb"])


def test_rabi(capsys):
    code, out, _ = run(["rabi", "--t-max", "200", "--points", "5"], capsys)
    assert code == 0
    assert len([ln for ln in out.splitlines() if not ln.startswith("#")]) == 6


def test_calibrate(tmp_path, capsys):
    ref = tmp_path / "ref.csv"
    assert main(["simulate", "--rho", "1", "--noiseless", "--dt", "10", "--readout-time", "5000",
                 "--lambda", "700", "--out", str(ref)]) == 0
    code, out, _ = run(["calibrate", "--trace", str(ref), "--dt", "10", "--readout-time", "5000",
                        "--margin", "0"], capsys)
    assert code == 0
    lam, L = map(float, out.splitlines()[-1].split(",")[:2])
    assert lam == pytest.approx(700, rel=1e-6)
    assert L == pytest.approx(0.3, abs=1e-3)


def test_bench_summary(capsys):
    code, out, _ = run(["bench", "--sweep", "readout_time", "--values", "100,400,1600", "--trials", "20",
                        "--dt", "5", "--method", "ps,flat"], capsys)
    assert code == 0
    assert "# summary PS.interior_minimum=" in out
    assert "# summary BayesFlat.non_increasing=" in out


def test_bench_out_directory(tmp_path, capsys):
    assert main(["bench", "--sweep", "grid_points", "--values", "20", "--trials", "3", "--dt", "10",
                 "--out", str(tmp_path)]) == 0
    files = list(tmp_path.glob("bench_grid_points_*.csv"))
    assert len(files) == 1


def test_config_file_and_hash(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"lambda": 80.0}))
    a = run(["bounds", "--config", str(cfg)], capsys)[1]
    b = run(["bounds"], capsys)[1]
    assert "# config.lambda=80.0" in a
    hash_a = [ln for ln in a.splitlines() if "config_hash" in ln]
    hash_b = [ln for ln in b.splitlines() if "config_hash" in ln]
    assert hash_a != hash_b


@pytest.mark.parametrize(
    "argv, code",
    [
        (["estimate", "--trace", "/nonexistent.csv"], 14),
        (["bounds", "--config", "/nonexistent.json"], 3),
        (["bounds", "--L", "1.5"], 4),
        (["simulate", "--rho", "2"], 4),
        (["bench", "--sweep", "dt", "--method", "mle"], 3),
        (["bench", "--sweep", "dt", "--values", "1.5", "--trials", "2"], 4),
    ],
)
def test_exit_codes(argv, code, capsys):
    got, _, err = run(argv, capsys)
    assert got == code
    assert ":" in err


def test_argparse_error_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["bench"])
    assert exc.value.code == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "nvbayes", "bounds"], capture_output=True, text=True)
    assert proc.returncode == 0 and "crlb" in proc.stdout


def test_simulate_default_seed7_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        assert main(["simulate", "--config", "default", "--rho", "1", "--seed", "7", "--out", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()
