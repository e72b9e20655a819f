import json
import math
import os

import numpy as np
import pytest

from hemiot.cli import (ConfigError, ExperimentConfig, build_density,
                        build_domain, build_target, compile_expression, main,
                        run)
from hemiot.domains import DiskDomain


def _write(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


SOLVE_DOC = {
    "command": "solve",
    "domain": {"kind": "disk", "radius": 0.5},
    "density": {"kind": "constant", "value": 1.0},
    "target": {"kind": "chart_disk", "center": [0.0, 0.0], "radius": 0.8},
    "N": 24,
    "seed": 1,
}


def test_config_roundtrip():
    cfg = ExperimentConfig.from_dict(dict(SOLVE_DOC, out="x"))
    again = ExperimentConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
    assert again == cfg
    assert again.to_dict() == cfg.to_dict()


def test_config_validation_errors():
    with pytest.raises(ConfigError, match="config.command"):
        ExperimentConfig.from_dict({"command": "fit"})
    with pytest.raises(ConfigError, match="config.tol"):
        ExperimentConfig.from_dict({"command": "solve", "tol": 0.5})
    with pytest.raises(ConfigError, match="config.threads"):
        ExperimentConfig.from_dict({"command": "solve", "threads": 0})
    with pytest.raises(ConfigError, match="config.banana"):
        ExperimentConfig.from_dict({"command": "solve", "banana": 1})
    with pytest.raises(ConfigError, match="config.seed"):
        ExperimentConfig.from_dict({"command": "solve", "seed": -1})


def test_expression_grammar_evaluates():
    ev = compile_expression("1.0 + 0.5*sin(x1)*cos(x2) + max(d, 0.1)")
    env = {"x1": np.array([0.0, 1.0]), "x2": np.array([0.0, 0.5]),
           "d": np.array([0.3, 0.01])}
    out = ev(env)
    assert out[0] == pytest.approx(1.0 + 0.3)
    assert out[1] == pytest.approx(1.0 + 0.5 * math.sin(1.0) * math.cos(0.5) + 0.1)


def test_expression_grammar_rejections():
    for bad in ("__import__('os')", "x1.real", "lambda: 1", "x3 + 1",
                "min(x1)", "x1 if d else x2", "f(x1)", "[1,2]"):
        with pytest.raises(ConfigError):
            compile_expression(bad)


def test_build_domain_and_density():
    dom = build_domain({"kind": "disk", "radius": 2.0})
    assert isinstance(dom, DiskDomain)
    with pytest.raises(ConfigError, match="domain.radius"):
        build_domain({"kind": "disk", "radius": -1.0})
    with pytest.raises(ConfigError, match="domain.kind"):
        build_domain({"kind": "blob"})
    dens = build_density({"kind": "expression", "formula": "1.0 + x1*x1"}, dom)
    assert dens(np.array([[1.0, 0.0]]))[0] == pytest.approx(2.0)
    with pytest.raises(ConfigError, match="density"):
        build_density({"kind": "expression", "formula": "x1"}, dom)  # negative
    decay = build_density({"kind": "decay", "C0": 0.2, "delta": 0.5}, dom)
    assert decay(np.array([[0.0, 0.0]]))[0] == pytest.approx(0.2 / math.sqrt(2.0))


def test_build_target_guards():
    with pytest.raises(ConfigError, match="target.sites"):
        build_target({"kind": "explicit",
                      "sites": [[0.1, 0.2], [0.1, 0.2]],
                      "masses": [1.0, 1.0]}, 2, 1.0, 0)
    with pytest.raises(ConfigError, match="target.kind"):
        build_target({"kind": "mystery"}, 5, 1.0, 0)
    t = build_target({"kind": "explicit", "sites": [[0.5, 0.0], [-0.5, 0.0]],
                      "masses": [1.0, 3.0]}, 2, 2.0, 0)
    assert t.total == pytest.approx(2.0)
    assert t.masses == pytest.approx([0.5, 1.5])


def test_solve_run_exit_zero(tmp_path):
    cfg = _write(tmp_path, "c.json", dict(SOLVE_DOC, out=str(tmp_path / "o")))
    assert main(["--config", cfg]) == 0
    report = json.loads((tmp_path / "o" / "report.json").read_text())
    assert report["passed"] is True
    assert report["verdicts"]["mass_balance"] is True
    assert set(report["artifacts"]) == {"mesh.obj", "solution.csv"}
    for meta in report["artifacts"].values():
        assert len(meta["sha256"]) == 64 and meta["bytes"] > 0


def test_reports_are_deterministic_up_to_timings(tmp_path):
    c1 = _write(tmp_path, "c1.json", dict(SOLVE_DOC, out=str(tmp_path / "r1")))
    c2 = _write(tmp_path, "c2.json", dict(SOLVE_DOC, out=str(tmp_path / "r2")))
    assert main(["--config", c1]) == 0
    assert main(["--config", c2]) == 0
    a = json.loads((tmp_path / "r1" / "report.json").read_text())
    b = json.loads((tmp_path / "r2" / "report.json").read_text())
    for r in (a, b):
        r.pop("timings")
        r["config"].pop("out")
    assert a == b
    assert (tmp_path / "r1" / "solution.csv").read_bytes() == \
        (tmp_path / "r2" / "solution.csv").read_bytes()


def test_flag_overrides(tmp_path):
    cfg = _write(tmp_path, "c.json", SOLVE_DOC)
    out = str(tmp_path / "flagged")
    assert main(["--config", cfg, "--out", out, "--seed", "9",
                 "--tol", "1e-5", "--threads", "2"]) == 0
    report = json.loads(open(os.path.join(out, "report.json")).read())
    assert report["config"]["seed"] == 9
    assert report["config"]["tol"] == 1e-5
    assert report["config"]["threads"] == 2


def test_missing_and_invalid_config(tmp_path, capsys):
    assert main(["--config", str(tmp_path / "nope.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["--config", str(bad)]) == 2
    err = capsys.readouterr().err
    assert "validation error" in err


def test_validation_exit_codes(tmp_path):
    dup = dict(SOLVE_DOC,
               target={"kind": "explicit",
                       "sites": [[0.1, 0.2], [0.1, 0.2], [0.3, 0.0]],
                       "masses": [1.0, 1.0, 1.0]},
               out=str(tmp_path / "dup"))
    assert main(["--config", _write(tmp_path, "dup.json", dup)]) == 2
    noncritical = {"command": "blowup",
                   "density": {"kind": "constant", "value": 2.0},
                   "out": str(tmp_path / "nc")}
    assert main(["--config", _write(tmp_path, "nc.json", noncritical)]) == 2


def test_nonconvergence_exit_code(tmp_path, capsys):
    doc = dict(SOLVE_DOC, tol=1e-6, max_iter=1, N=40,
               density={"kind": "expression",
                        "formula": "1.0 + 0.4*sin(3.0*x1)"},
               out=str(tmp_path / "nc"))
    code = main(["--config", _write(tmp_path, "n.json", doc)])
    assert code == 3
    report = json.loads((tmp_path / "nc" / "report.json").read_text())
    assert report["verdicts"]["converged"] is False
    # partial artifacts still land next to the report
    assert "solution.csv" in report["artifacts"]


def test_contract_failure_exit_code(tmp_path):
    doc = {"command": "sphere-benchmark", "N": 60,
           "params": {"r": 0.6, "n_eval": 500},
           "out": str(tmp_path / "sb"), "seed": 0}
    code = main(["--config", _write(tmp_path, "sb.json", doc)])
    assert code == 1  # too coarse for the 5e-2 gradient contract
    report = json.loads((tmp_path / "sb" / "report.json").read_text())
    assert report["verdicts"]["gradient_sup_error"] is False
    assert report["verdicts"]["converged"] is True


def test_lemmas_command(tmp_path):
    doc = {"command": "lemmas",
           "params": {"trials": 5, "n_points": 400,
                      "estar_samples": 100000, "thetas": [0.1]},
           "out": str(tmp_path / "lm"), "seed": 0}
    assert main(["--config", _write(tmp_path, "lm.json", doc)]) == 0
    report = json.loads((tmp_path / "lm" / "report.json").read_text())
    assert report["verdicts"]["cone_inclusion"] is True
    assert report["verdicts"]["slice_estimate"] is True
    assert "samples.csv" in report["artifacts"]


def test_oracle_compare_command(tmp_path):
    doc = {"command": "oracle-compare",
           "domain": {"kind": "disk", "radius": 0.6},
           "density": {"kind": "constant", "value": 1.0},
           "target": {"kind": "chart_disk", "radius": 0.75},
           "N": 6, "params": {"grid_m": 8, "threshold": 0.6},
           "out": str(tmp_path / "oc"), "seed": 0}
    assert main(["--config", _write(tmp_path, "oc.json", doc)]) == 0
    report = json.loads((tmp_path / "oc" / "report.json").read_text())
    m = report["measurements"]
    assert m["agreement_fraction"] <= m["agreement_ceiling"] + 1e-12
    assert report["verdicts"]["monotonicity"] is True


def test_export_command(tmp_path):
    doc = dict(SOLVE_DOC, command="export", out=str(tmp_path / "ex"))
    assert main(["--config", _write(tmp_path, "ex.json", doc)]) == 0
    cells = (tmp_path / "ex" / "cells.csv").read_text().splitlines()
    assert cells[0] == "site,k,x1,x2"
    assert len(cells) > 10


def test_run_accepts_plain_dicts(tmp_path):
    doc = dict(SOLVE_DOC, out=str(tmp_path / "d"))
    assert run(doc) == 0
