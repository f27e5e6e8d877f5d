import json
import shutil
from pathlib import Path

import pytest

from padiclf.cli import main
from padiclf.pipeline import _DATA


CONTROL = str(_DATA / "configs" / "control_11a_p5.json")


@pytest.fixture(scope="module")
def fast_config(tmp_path_factory):
    """A smaller control configuration so the CLI tests stay quick."""
    base = json.load(open(CONTROL))
    base["M"] = 6
    base["N"] = 6
    base["modulus"] = [1]
    path = tmp_path_factory.mktemp("cfg") / "fast.json"
    path.write_text(json.dumps(base))
    return str(path)


def test_field_validate_ok(capsys):
    rc = main(["field", "validate", "--config", CONTROL])
    assert rc == 0
    assert "OK" in capsys.readouterr().out


def test_field_validate_rejects_malformed(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({
        "schema_version": 1, "name": "bad", "p": 5, "degree": 2,
        "signature": [1, 0],
        "embeddings": [{"label": "r0", "kind": "real"}],
        "generator_minpoly": [1], "mult_table": [[[1]]],
        "generator_real_intervals": {"r0": ["1", "1"]},
        "discriminant": 1, "different_generator": [1],
        "narrow_class_number": 1, "primes_above_p": [],
    }))
    rc = main(["field", "validate", "--config", str(bad)])
    assert rc == 2
    assert "INVALID" in capsys.readouterr().out


def test_symbol_build_and_lift(fast_config, tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["symbol", "build", "--config", fast_config, "--out", str(out)]) == 0
    assert (out / "symbol.json").exists()
    assert main(["symbol", "lift", "--config", fast_config, "--out", str(out)]) == 0
    record = json.loads((out / "lift.json").read_text())
    assert record["report"]["converged"]
    assert record["report"]["specialization_residual"] is None
    assert all(v is None for v in record["report"]["eigen_residuals"].values())
    assert record["metadata"]["uniformizers"] == [[5]]


def test_lfun_compute_eval_deterministic_and_resumable(fast_config, tmp_path, capsys):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    for out in (out1, out2):
        assert main(["symbol", "lift", "--config", fast_config, "--out", str(out)]) == 0
        assert main(["lfun", "compute", "--config", fast_config, "--out", str(out)]) == 0
        assert main(["lfun", "eval", "--config", fast_config, "--out", str(out)]) == 0
    captured = capsys.readouterr().out
    assert "reusing persisted lift" in captured
    for name in ("lift.json", "mu.json", "eval.json"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes(), name


def test_lfun_recomputes_on_config_change(fast_config, tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["symbol", "lift", "--config", fast_config, "--out", str(out)]) == 0
    # change the precision: the persisted lift no longer matches
    assert main(["lfun", "compute", "--config", fast_config, "--out", str(out),
                 "--precision", "7"]) == 0
    captured = capsys.readouterr().out
    assert "reusing persisted lift" not in captured


def test_verify_gauss_passes(capsys):
    rc = main(["verify", "gauss", "--seed", "5"])
    out = capsys.readouterr().out
    assert rc == 0
    assert "FAIL" not in out
    assert "checks passed" in out
