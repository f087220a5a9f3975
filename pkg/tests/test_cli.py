"""Command-line front end: schema validation with key paths, exit codes,
and byte-deterministic CSV output."""

import json

import pytest

from crossing_kit.cli import main, parse_config
from crossing_kit.errors import SchemaError
from crossing_kit.normalform import predict_transfer


def write_config(tmp_path, payload, name="config.json"):
    p = tmp_path / name
    p.write_text(json.dumps(payload), encoding="utf-8")
    return str(p)


def model_block(**overrides):
    block = {
        "kind": "model",
        "m": 1,
        "f_coeffs": [0.0, 1.0],
        "coupling": {"width": 0.8, "amplitude": 1.0},
        "interval": [-1.0, 1.0],
    }
    block.update(overrides)
    return block


def test_minimal_model_config_fills_defaults(tmp_path):
    path = write_config(
        tmp_path, {"mode": "solve-model", "problem": model_block(), "h": 1e-2}
    )
    config = parse_config(path)
    assert config.mode == "solve-model"
    assert config.h == 1e-2
    assert config.method == "neumann"
    assert config.terms == 8
    assert config.jobs == 1
    assert config.seed == 0
    assert config.branch == 1
    assert config.window_eps is None
    assert config.tolerances == {"exponent": 0.05, "prefactor": 0.10}
    assert config.csv_path is None and config.summary_path is None
    assert config.problem.m == 1


def test_negative_h_rejected(tmp_path, capsys):
    path = write_config(tmp_path, {"problem": model_block(), "h": -0.5})
    with pytest.raises(SchemaError, match="must be positive"):
        parse_config(path, mode="solve-model")
    assert main(["solve-model", "--config", path]) == 2
    assert "h: must be positive" in capsys.readouterr().err


def test_unknown_key_named_with_path(tmp_path, capsys):
    path = write_config(tmp_path, {"problem": model_block(), "hh": 0.5})
    with pytest.raises(SchemaError) as exc:
        parse_config(path, mode="solve-model")
    assert exc.value.key_path == "hh"
    assert main(["solve-model", "--config", path]) == 2
    assert "hh" in capsys.readouterr().err


def test_unknown_nested_key_reports_full_path(tmp_path):
    bad = model_block(coupling={"widht": 0.8})
    path = write_config(tmp_path, {"problem": bad, "h": 1e-2})
    with pytest.raises(SchemaError) as exc:
        parse_config(path, mode="solve-model")
    assert exc.value.key_path == "problem.coupling.widht"


def test_problem_level_validation_becomes_schema_error(tmp_path):
    # vanishing order of f disagrees with the declared m
    path = write_config(
        tmp_path, {"problem": model_block(m=2), "h": 1e-2}
    )
    with pytest.raises(SchemaError, match="problem"):
        parse_config(path, mode="solve-model")


def test_mode_mismatch_rejected(tmp_path, capsys):
    path = write_config(
        tmp_path, {"mode": "sweep", "problem": model_block(), "h": 1e-2}
    )
    assert main(["solve-model", "--config", path]) == 2
    assert "mode" in capsys.readouterr().err


def test_missing_config_file_exits_2(capsys):
    assert main(["predict", "--config", "/no/such/file.json"]) == 2
    assert "config error" in capsys.readouterr().err


def test_invalid_json_exits_2(tmp_path, capsys):
    p = tmp_path / "broken.json"
    p.write_text("{not json", encoding="utf-8")
    assert main(["predict", "--config", str(p)]) == 2
    assert "invalid JSON" in capsys.readouterr().err


def test_grid_spec_forms(tmp_path):
    base = {"problem": {"kind": "model-corpus", "index": 0}}
    path = write_config(
        tmp_path,
        base | {"h_grid": {"start": 1e-1, "stop": 1e-3, "count": 5}},
    )
    config = parse_config(path, mode="sweep")
    assert len(config.h_values) == 5
    assert config.h_values[0] == pytest.approx(1e-1)
    assert config.h_values[-1] == pytest.approx(1e-3)

    path = write_config(
        tmp_path, base | {"h_grid": {"values": [1e-1, 1e-2, 1e-3, 1e-4]}}
    )
    assert parse_config(path, mode="sweep").h_values == (1e-1, 1e-2, 1e-3, 1e-4)

    path = write_config(
        tmp_path, base | {"h_grid": {"start": 1e-1, "stop": 1e-2, "count": 6}}
    )
    with pytest.raises(SchemaError, match="2 decades"):
        parse_config(path, mode="sweep")

    path = write_config(tmp_path, base)
    with pytest.raises(SchemaError, match="h_grid"):
        parse_config(path, mode="sweep")


def test_branch_key_requires_schrodinger(tmp_path):
    path = write_config(
        tmp_path, {"problem": model_block(), "h": 1e-2, "branch": -1}
    )
    with pytest.raises(SchemaError) as exc:
        parse_config(path, mode="solve-model")
    assert exc.value.key_path == "branch"


def test_csv_output_rejected_for_single_solve(tmp_path):
    path = write_config(
        tmp_path,
        {"problem": model_block(), "h": 1e-2, "output": {"csv": "x.csv"}},
    )
    with pytest.raises(SchemaError) as exc:
        parse_config(path, mode="solve-model")
    assert exc.value.key_path == "output.csv"


def test_zero_energy_problem_only_predicts(tmp_path, capsys):
    cfg = {"problem": {"kind": "schrodinger-corpus", "index": 2}, "h": 1e-3}
    path = write_config(tmp_path, cfg)
    assert main(["solve-schrodinger", "--config", path]) == 2
    assert "problem.e0" in capsys.readouterr().err
    assert main(["predict", "--config", path]) == 0


def test_seeded_random_problem_is_reproducible(tmp_path):
    path = write_config(
        tmp_path, {"problem": {"kind": "random-model", "m": 2}, "h": 1e-2}
    )
    a = parse_config(path, mode="predict", seed=7).problem
    b = parse_config(path, mode="predict", seed=7).problem
    c = parse_config(path, mode="predict", seed=8).problem
    assert a == b
    assert a != c
    assert a.m == 2 and a.f.coeffs[2] > 0


def test_predict_summary_matches_library(tmp_path, capsys):
    out = tmp_path / "summary.json"
    path = write_config(
        tmp_path,
        {
            "problem": model_block(),
            "h": 1e-3,
            "output": {"summary": str(out)},
        },
    )
    assert main(["predict", "--config", path]) == 0
    capsys.readouterr()
    payload = json.loads(out.read_text(encoding="utf-8"))
    expected = predict_transfer(parse_config(path, mode="predict").problem)
    re, im = payload["entries"]["t21"]
    assert complex(re, im) == pytest.approx(complex(expected.t21), abs=1e-15)


def test_solve_model_writes_summary_and_small_error(tmp_path, capsys):
    out = tmp_path / "summary.json"
    path = write_config(
        tmp_path,
        {
            "problem": model_block(),
            "h": 1e-2,
            "output": {"summary": str(out)},
        },
    )
    assert main(["solve-model", "--config", path]) == 0
    assert "max abs error" in capsys.readouterr().out
    payload = json.loads(out.read_text(encoding="utf-8"))
    assert set(payload) >= {"extracted", "predicted", "abs_errors", "max_abs_error"}
    assert payload["max_abs_error"] < 0.05


def test_solve_schrodinger_minus_branch(tmp_path, capsys):
    cfg = {
        "problem": {"kind": "schrodinger-corpus", "index": 0},
        "h": 2.5e-3,
        "branch": -1,
    }
    path = write_config(tmp_path, cfg)
    assert main(["solve-schrodinger", "--config", path]) == 0
    assert "extracted" in capsys.readouterr().out


def test_verify_model_corpus_passes(tmp_path, capsys):
    csv = tmp_path / "rows.csv"
    summary = tmp_path / "verify.json"
    cfg = {
        "problem": {"kind": "model-corpus", "index": 0},
        "jobs": 3,
        "output": {"csv": str(csv), "summary": str(summary)},
    }
    path = write_config(tmp_path, cfg)
    assert main(["verify", "--config", path]) == 0
    assert "result: PASS" in capsys.readouterr().out
    lines = csv.read_text(encoding="utf-8").strip().splitlines()
    assert len(lines) == 13  # header plus the 12-point default grid
    payload = json.loads(summary.read_text(encoding="utf-8"))
    assert payload["passed"] is True
    assert payload["ok_rows"] == 12
    assert all(v["passed"] for v in payload["verdicts"].values())


def test_verify_absurd_tolerance_fails(tmp_path, capsys):
    cfg = {
        "problem": {"kind": "model-corpus", "index": 0},
        "jobs": 3,
        "tolerances": {"exponent": 1e-15},
        "output": {"csv": str(tmp_path / "rows.csv")},
    }
    path = write_config(tmp_path, cfg)
    assert main(["verify", "--config", path]) == 1
    assert "result: FAIL" in capsys.readouterr().out


def test_sweep_csv_byte_deterministic(tmp_path, capsys):
    cfg = {
        "problem": {"kind": "model-corpus", "index": 0},
        "h_grid": {"start": 1e-1, "stop": 1e-3, "count": 5},
    }
    path = write_config(tmp_path, cfg)
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["sweep", "--config", path, "--out", str(out1)]) == 0
    assert main(["sweep", "--config", path, "--out", str(out2), "--jobs", "2"]) == 0
    capsys.readouterr()
    assert out1.read_bytes() == out2.read_bytes()


def test_numerical_failure_exits_3(tmp_path, capsys):
    # readout window pushed onto the coupling support
    cfg = {
        "problem": model_block(),
        "h": 1e-2,
        "window_eps": 0.58,
    }
    path = write_config(tmp_path, cfg)
    assert main(["solve-model", "--config", path]) == 3
    assert "numerical failure" in capsys.readouterr().err


def test_bad_jobs_flag_exits_2(tmp_path, capsys):
    path = write_config(
        tmp_path, {"problem": model_block(), "h": 1e-2}
    )
    assert main(["solve-model", "--config", path, "--jobs", "0"]) == 2
    assert "jobs" in capsys.readouterr().err
