import io
import json
import subprocess
import sys

import pytest

from chiralflow.cli import run


def call(*argv):
    out = io.StringIO()
    code = run(list(argv), out)
    return code, out.getvalue()


def reports(text):
    return [json.loads(line) for line in text.splitlines()]


def test_verify_n2_json():
    code, out = call("verify", "n2", "--rank", "2", "--hmax", "2")
    assert code == 0
    (rep,) = reports(out)
    assert rep["status"] == "PASS" and rep["check"] == "n2_closure"
    assert "elapsed_ms" in rep


def test_flow_constancy():
    code, out = call("flow", "constancy", "--rank", "1", "--hmax", "2", "--kmax", "4")
    assert code == 0
    assert [r["status"] for r in reports(out)] == ["PASS", "PASS"]


def test_character_ellipticity():
    code, out = call("character", "ellipticity", "--rank", "1", "-n", "1", "--hmax", "2")
    assert code == 0
    assert reports(out)[0]["status"] == "PASS"


def test_stable_output_is_byte_identical():
    argv = ("flow", "intertwine", "--rank", "1", "--hmax", "1", "--stable")
    first, second = call(*argv), call(*argv)
    assert first == second
    assert "elapsed_ms" not in first[1]


def test_text_mode_series_printout():
    code, out = call("character", "trace", "--hmax", "1", "--text", "--stable")
    assert code == 0
    assert out.splitlines()[1:] == ["q^-1/8 y^0 : 1", "q^3/8 y^-1 : -1", "q^3/8 y^1 : -1", "q^7/8 y^0 : 1"]


def test_ope_and_apply():
    code, out = call("ope", "J", "J", "--rank", "2", "--stable")
    assert code == 0 and reports(out)[0]["measured"]["poles"] == {"2": ["2 |0>"]}
    code, out = call("ope", "1 c[1,-1] |0>", "b1")
    assert reports(out)[0]["measured"]["poles"] == {"1": ["1 |0>"]}
    code, out = call("flow", "apply", "--state", "1 |0>", "--rank", "2")
    assert reports(out)[0]["measured"]["output"] == ["1 c[1,-1] c[2,-1] |0>"]


def test_config_file(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# defaults\nrank = 2\nhmax = 1/2\nstable = yes\n")
    code, out = call("character", "dims", "--config", str(cfg))
    rep = reports(out)[0]
    assert rep["rank"] == 2 and rep["window"]["hmax"] == "1/2"
    assert rep["measured"]["total"] == 5
    # flags beat the config file
    code, out = call("character", "dims", "--config", str(cfg), "--rank", "1")
    assert reports(out)[0]["rank"] == 1


def test_bad_config_is_usage_error(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = blue\n")
    with pytest.raises(SystemExit) as exc:
        call("verify", "omega", "--config", str(cfg))
    assert exc.value.code == 2


@pytest.mark.parametrize("argv", [["frobnicate"], ["verify", "nope"], ["verify", "n2", "--bogus"],
                                  ["flow", "apply"], ["ope", "1 q[1,-1] |0>", "J"]])
def test_usage_errors_exit_2(argv):
    with pytest.raises(SystemExit) as exc:
        call(*argv)
    assert exc.value.code == 2


def test_failure_exit_code(monkeypatch):
    from chiralflow import series

    real = series.graded_dims

    def corrupted(*a, **k):
        dims = real(*a, **k)
        dims.table[next(iter(sorted(dims.table)))] += 1
        return dims

    monkeypatch.setattr(series, "graded_dims", corrupted)
    code, out = call("character", "ellipticity", "--hmax", "1")
    assert code == 1
    rep = reports(out)[0]
    assert rep["status"] == "FAIL" and rep["counterexample"]


def test_borcherds_with_thread_cap(monkeypatch):
    monkeypatch.setenv("CHIRALFLOW_THREADS", "2")
    code, out = call("verify", "borcherds", "--hmax", "1", "--mode-range", "1", "--stable")
    assert code == 0
    monkeypatch.setenv("CHIRALFLOW_THREADS", "1")
    assert call("verify", "borcherds", "--hmax", "1", "--mode-range", "1", "--stable")[1] == out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "chiralflow.cli", "verify", "omega", "--rank", "3", "--stable"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["status"] == "PASS"
