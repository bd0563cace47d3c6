"""Harness tests: config handling, CSV schemas, determinism, CLI, plots."""

import json
from pathlib import Path

import numpy as np
import pytest

from sketchsign import linalg, problems
from sketchsign.experiments import cli, config, invariants, records, regression
from sketchsign.experiments import robustness, svgplot, timing
from sketchsign.experiments.config import ConfigError, RunConfig, make_config


@pytest.fixture(autouse=True)
def isolated_env(monkeypatch):
    monkeypatch.delenv(config.OUTPUT_DIR_ENV, raising=False)


# --- config -----------------------------------------------------------------


def test_defaults_are_runnable():
    cfg = make_config()
    assert cfg.experiment == "regression"
    assert cfg.seeds == (0, 1, 2)
    assert config.resolve_methods(cfg) == ("lr-muon", "muon", "adamw", "sgdm")


def test_precedence_env_file_cli(monkeypatch):
    monkeypatch.setenv(config.OUTPUT_DIR_ENV, "from-env")
    assert make_config().output_dir == "from-env"
    assert make_config({"output_dir": "from-file"}).output_dir == "from-file"
    cfg = make_config({"output_dir": "from-file"}, {"output_dir": "from-cli"})
    assert cfg.output_dir == "from-cli"


def test_unknown_key_rejected():
    with pytest.raises(ConfigError, match="unknown config key"):
        make_config({"learning_rate": "0.1"})


def test_value_parsing():
    cfg = make_config({
        "seeds": "3, 4,5",
        "noise_vars": "0.5,2.0",
        "muon_safeguard": "false",
        "rank": "16",
    })
    assert cfg.seeds == (3, 4, 5)
    assert cfg.noise_vars == (0.5, 2.0)
    assert cfg.muon_safeguard is False
    assert cfg.rank == 16
    with pytest.raises(ConfigError, match="bad value"):
        make_config({"seeds": "a,b"})
    with pytest.raises(ConfigError, match="boolean"):
        make_config({"muon_safeguard": "maybe"})


def test_validation_rules():
    with pytest.raises(ConfigError, match="unknown experiment"):
        make_config({"experiment": "spectral"})
    with pytest.raises(ConfigError, match="unknown method"):
        make_config({"experiment": "timing", "methods": "sgdm"})
    with pytest.raises(ConfigError, match="alpha"):
        make_config({"alpha": "3.0"})
    with pytest.raises(ConfigError, match="seeds"):
        make_config({"seeds": ""})


def test_config_file_loading(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(
        "# comment line\n"
        "iters = 12\n"
        "methods = lr-gd, sgdm   # trailing comment\n"
        "\n"
    )
    kv = config.load_config_file(path)
    cfg = make_config(kv)
    assert cfg.iters == 12
    assert cfg.methods == ("lr-gd", "sgdm")
    with pytest.raises(ConfigError, match="cannot read"):
        config.load_config_file(tmp_path / "missing.cfg")
    bad = tmp_path / "bad.cfg"
    bad.write_text("just words\n")
    with pytest.raises(ConfigError, match="expected"):
        config.load_config_file(bad)


def test_config_echo_is_sorted_and_flat():
    echo = config.config_echo(make_config())
    parts = echo.split(" ")
    keys = [p.split("=", 1)[0] for p in parts]
    assert keys == sorted(keys)
    assert "experiment=regression" in parts


# --- records ----------------------------------------------------------------


def test_record_roundtrip(tmp_path):
    rec = records.RunRecord(header="a,b,c")
    rec.append(1, 0.25, "x")
    rec.append(2, 1e-17, "y")
    rec.meta["note"] = "hello"
    path = records.write_csv(tmp_path / "r.csv", rec)
    meta, columns, rows = records.read_csv(path)
    assert columns == ["a", "b", "c"]
    assert rows == [["1", "0.25", "x"], ["2", "1e-17", "y"]]
    assert meta["note"] == "hello"
    assert "wall_clock" in meta
    # float cells are repr-exact
    assert float(rows[1][1]) == 1e-17


def test_format_cell_floats_roundtrip():
    for v in (0.1, 1 / 3, 2.0**-52, 12345.678):
        assert float(records.format_cell(v)) == v


# --- svg plots ----------------------------------------------------------------


def test_svg_deterministic_and_well_formed():
    series = [("a", [1.0, 2.0, 3.0], [1.0, 0.5, 0.25]), ("b", [1.0, 2.0], [3.0, 1.0])]
    s1 = svgplot.render_line_svg(series, title="t", xlabel="x", ylabel="y", ylog=True)
    s2 = svgplot.render_line_svg(series, title="t", xlabel="x", ylabel="y", ylog=True)
    assert s1 == s2
    assert s1.startswith("<svg") and s1.rstrip().endswith("</svg>")
    assert "polyline" in s1


def test_svg_ylog_drops_nonpositive():
    out = svgplot.render_line_svg([("a", [1.0, 2.0, 3.0], [0.0, -1.0, 4.0])], ylog=True)
    assert "polyline" in out  # the positive point still renders


def test_svg_empty_raises():
    with pytest.raises(ValueError, match="nothing to plot"):
        svgplot.render_line_svg([("a", [1.0], [-2.0])], ylog=True)


# --- regression runner --------------------------------------------------------


def _tiny_regression_cfg(out: Path, **extra) -> RunConfig:
    kv = {
        "experiment": "regression",
        "output_dir": str(out),
        "n": "24",
        "p": "4",
        "iters": "8",
        "seeds": "0",
        "methods": "lr-gd,lr-muon",
        "rank": "4",
    }
    kv.update({k: str(v) for k, v in extra.items()})
    return make_config(kv)


def test_regression_csv_schema_and_rows(tmp_path):
    cfg = _tiny_regression_cfg(tmp_path)
    paths = regression.run_regression(cfg)
    csv = paths["regression_lr-gd_seed0.csv"]
    meta, columns, rows = records.read_csv(csv)
    assert columns == records.REGRESSION_HEADER.split(",")
    assert len(rows) == 8
    ks = [int(r[0]) for r in rows]
    assert ks == list(range(8))
    for r in rows:
        assert all(np.isfinite(float(v)) for v in r)
    assert meta["method"] == "lr-gd"
    assert meta["seed"] == "0"
    assert "experiment=regression" in meta["config"]
    assert paths["objective.svg"].exists()
    assert paths["grad_fro.svg"].exists()


def _strip_timing(path: Path) -> str:
    """Drop the wall-clock meta line and the elapsed_ns column."""
    out = []
    for line in path.read_text().splitlines():
        if line.startswith("# wall_clock:"):
            continue
        if line.startswith("#") or line.startswith("k,"):
            out.append(line)
        else:
            out.append(line.rsplit(",", 1)[0])
    return "\n".join(out)


def test_regression_deterministic_modulo_clock(tmp_path):
    """Same config and seeds twice: identical bytes except the clock parts."""
    cfg = _tiny_regression_cfg(tmp_path)
    p1 = regression.run_regression(cfg)
    first = {
        name: _strip_timing(path)
        for name, path in p1.items() if name.endswith(".csv")
    }
    first_svg = p1["objective.svg"].read_text()
    p2 = regression.run_regression(cfg)
    for name, stripped in first.items():
        assert stripped != ""
        assert _strip_timing(p2[name]) == stripped
    assert p2["objective.svg"].read_text() == first_svg


def test_render_plots_pure_function_of_csvs(tmp_path):
    cfg = _tiny_regression_cfg(tmp_path)
    paths = regression.run_regression(cfg)
    first = paths["grad_fro.svg"].read_text()
    csvs = {
        "lr-gd": paths["regression_lr-gd_seed0.csv"],
        "lr-muon": paths["regression_lr-muon_seed0.csv"],
    }
    again = regression.render_plots(csvs, tmp_path / "rebuilt")
    assert (tmp_path / "rebuilt").exists()
    assert again["grad_fro.svg"].read_text() == first


def test_one_step_lr_gd_lands_on_sign_of_data_term(tmp_path):
    """First iterate from zero is msgn(A^T C B^T), chained through the runner."""
    inst = problems.gen_matrix_regression(12, 3, sv_base=1.3, seed=5)
    cfg = _tiny_regression_cfg(tmp_path, iters=2, n=12, p=3, rank=12)
    rec = regression.run_method(inst, "lr-gd", cfg, seed=0)
    # reconstruct X^1 by replaying the recorded step: f at k=1 must match
    target = linalg.msgn_exact(inst.A.T @ inst.C @ inst.B.T)
    f1 = float(rec.rows[1][1])
    assert f1 == pytest.approx(inst.objective(target), rel=1e-9)


def test_regression_all_six_methods_run(tmp_path):
    cfg = _tiny_regression_cfg(
        tmp_path, methods="lr-gd,safeguarded-gd,lr-muon,muon,sgdm,adamw", iters=4
    )
    paths = regression.run_regression(cfg)
    csvs = [n for n in paths if n.endswith(".csv")]
    assert len(csvs) == 6


def test_regression_divergent_method_stops_recording(tmp_path):
    # a huge lr_scale makes the signed methods blow up quickly; rows stay finite
    cfg = _tiny_regression_cfg(tmp_path, sv_base=2.0, p=8, iters=60)
    inst = problems.gen_matrix_regression(24, 8, sv_base=2.0, seed=0)
    rec = regression.run_method(inst, "sgdm", cfg, seed=0)
    assert len(rec.rows) < 60
    for row in rec.rows:
        assert all(np.isfinite(float(v)) for v in row)


# --- timing and robustness runners ---------------------------------------------


def test_timing_record_structure(tmp_path):
    cfg = make_config({
        "experiment": "timing",
        "output_dir": str(tmp_path),
        "dims": "48",
        "reps": "2",
        "warmup": "0",
    })
    rec = timing.timing_record(cfg)
    cells = {(r[1], r[2]) for r in rec.rows}
    assert ("gaussian-sketch", "qr") in cells
    assert ("gaussian-sketch", "polar") in cells
    assert ("gaussian-sketch", "other") in cells
    assert ("gaussian-sketch", "total") in cells
    assert ("exact-svd", "total") in cells
    assert all(int(r[3]) >= 0 and int(r[4]) >= 0 for r in rec.rows)
    paths = timing.run_timing(cfg)
    assert paths["timing.csv"].exists() and paths["timing.svg"].exists()


def test_timing_phases_sum_close_to_total(tmp_path):
    cfg = make_config({
        "experiment": "timing",
        "output_dir": str(tmp_path),
        "dims": "64",
        "methods": "gaussian-sketch",
        "reps": "3",
        "warmup": "1",
    })
    rec = timing.timing_record(cfg)
    by_phase = {r[2]: r[3] for r in rec.rows}
    partial = by_phase["qr"] + by_phase["polar"] + by_phase["other"]
    assert partial <= by_phase["total"] * 1.5  # medians need not add exactly


def test_robustness_record_and_direction(tmp_path):
    cfg = make_config({
        "experiment": "robustness",
        "output_dir": str(tmp_path),
        "dims": "60",
        "noise_vars": "1.0",
        "bases": "2",
        "draws": "6",
        "rank": "6",
    })
    rec = robustness.robustness_record(cfg)
    assert len(rec.rows) == 2  # one per estimator
    trace = {r[2]: r[3] for r in rec.rows}
    assert trace["gaussian-sketch"] > 0
    assert trace["gaussian-sketch"] < trace["newton-schulz-full"]
    paths = robustness.run_robustness(cfg)
    assert paths["robustness.csv"].exists() and paths["robustness.svg"].exists()


def test_robustness_deterministic(tmp_path):
    kv = {
        "experiment": "robustness",
        "dims": "40",
        "noise_vars": "0.5",
        "bases": "1",
        "draws": "4",
        "rank": "4",
    }
    cfg1 = make_config(kv | {"output_dir": str(tmp_path / "a")})
    cfg2 = make_config(kv | {"output_dir": str(tmp_path / "b")})
    r1 = robustness.run_robustness(cfg1)["robustness.csv"]
    r2 = robustness.run_robustness(cfg2)["robustness.csv"]
    strip = lambda p: [
        l for l in p.read_text().splitlines()
        if not l.startswith("# wall_clock:") and not l.startswith("# config:")
    ]
    assert strip(r1) == strip(r2)


# --- invariants and the mutation check ------------------------------------------


def test_invariants_jsonl_one_line_per_property(tmp_path):
    cfg = make_config({"experiment": "invariants", "output_dir": str(tmp_path)})
    fake = [
        ("always-good", lambda seed: (0.0, 1.0)),
        ("always-bad", lambda seed: (2.0, 1.0)),
    ]
    real = invariants.REGISTRY
    try:
        invariants.REGISTRY = fake
        results = invariants.run_invariants(cfg)
    finally:
        invariants.REGISTRY = real
    assert [r.passed for r in results] == [True, False]
    lines = (tmp_path / "invariants.jsonl").read_text().splitlines()
    assert len(lines) == 2
    first = json.loads(lines[0])
    assert first == {"name": "always-good", "measured": 0.0, "bound": 1.0, "pass": True}


def test_invariants_crashing_property_counts_as_failure(tmp_path):
    cfg = make_config({"experiment": "invariants", "output_dir": str(tmp_path)})

    def boom(seed):
        raise RuntimeError("broken")

    real = invariants.REGISTRY
    try:
        invariants.REGISTRY = [("explodes", boom)]
        results = invariants.run_invariants(cfg)
    finally:
        invariants.REGISTRY = real
    assert results[0].passed is False


def test_corrupted_polar_sign_is_caught(monkeypatch):
    """The factorization identity must flag a silently wrong sign kernel."""
    healthy, bound = invariants._p_factorization_identity(0)
    assert healthy <= bound

    true_polar = linalg.polar_sign

    def skewed(M, cfg):
        S = true_polar(M, cfg)
        S = S.copy()
        S[0, :] = -S[0, :]  # flip one row: still orthogonal, wrong sign
        return S

    monkeypatch.setattr(linalg, "polar_sign", skewed)
    corrupted, bound = invariants._p_factorization_identity(0)
    assert corrupted > bound


def test_full_invariant_registry_passes(tmp_path):
    cfg = make_config({
        "experiment": "invariants", "output_dir": str(tmp_path), "seeds": "0",
    })
    results = invariants.run_invariants(cfg)
    failed = [r.name for r in results if not r.passed]
    assert failed == []
    lines = (tmp_path / "invariants.jsonl").read_text().splitlines()
    assert len(lines) == len(invariants.REGISTRY)


# --- CLI -------------------------------------------------------------------------


def test_cli_usage_errors_exit_2(tmp_path, capsys):
    assert cli.main([]) == 2
    assert cli.main(["spectral"]) == 2
    assert cli.main(["regression", "--learning_rate", "1"]) == 2
    assert cli.main(["regression", "--iters"]) == 2
    assert cli.main(["regression", "iters"]) == 2
    assert cli.main(["regression", "--config", str(tmp_path / "nope.cfg")]) == 2
    err = capsys.readouterr().err
    assert "bench:" in err


def test_cli_help_exits_0(capsys):
    assert cli.main(["--help"]) == 0
    assert "usage:" in capsys.readouterr().out


def test_cli_regression_end_to_end(tmp_path, capsys):
    rc = cli.main([
        "regression",
        "--output_dir", str(tmp_path),
        "--n", "24", "--p", "4", "--iters", "4",
        "--seeds", "0", "--methods", "lr-gd", "--rank", "4",
    ])
    assert rc == 0
    out = capsys.readouterr().out
    assert "regression_lr-gd_seed0.csv" in out
    assert (tmp_path / "regression_lr-gd_seed0.csv").exists()


def test_cli_config_file_with_override(tmp_path, capsys):
    cfgfile = tmp_path / "run.cfg"
    cfgfile.write_text("n = 24\np = 4\niters = 4\nseeds = 0\nmethods = lr-gd\nrank = 4\n")
    rc = cli.main([
        "regression", "--config", str(cfgfile),
        "--output_dir", str(tmp_path / "out"),
        "--iters", "2",
    ])
    assert rc == 0
    _, _, rows = records.read_csv(tmp_path / "out" / "regression_lr-gd_seed0.csv")
    assert len(rows) == 2  # CLI override beats the file value


def test_cli_invariants_exit_codes(tmp_path):
    real = invariants.REGISTRY
    try:
        invariants.REGISTRY = [("good", lambda seed: (0.0, 1.0))]
        assert cli.main(["invariants", "--output_dir", str(tmp_path / "ok")]) == 0
        invariants.REGISTRY = [("bad", lambda seed: (2.0, 1.0))]
        assert cli.main(["invariants", "--output_dir", str(tmp_path / "no")]) == 1
    finally:
        invariants.REGISTRY = real


def test_cli_env_output_dir(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv(config.OUTPUT_DIR_ENV, str(tmp_path / "envdir"))
    real = invariants.REGISTRY
    try:
        invariants.REGISTRY = [("good", lambda seed: (0.0, 1.0))]
        assert cli.main(["invariants"]) == 0
    finally:
        invariants.REGISTRY = real
    assert (tmp_path / "envdir" / "invariants.jsonl").exists()
