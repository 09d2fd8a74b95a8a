import json

import pytest

from unitrace import analysis, cli, config
from unitrace.algebra import AlgebraShape
from unitrace.errors import ConfigError

DEMO = """
# a direct sum: identity on the first block, conjugation on the second
source = M2 (+) M1
hom = dsum(id, bar)
mode = unitary
analyses = lambda, k0, pairing, verdict
seed = 3
trials = 10
"""


def test_config_parse_round_trip():
    cfg = config.parse_config_text(DEMO)
    assert cfg.source == AlgebraShape((2, 1))
    assert cfg.target == AlgebraShape((2, 1))
    assert cfg.analyses == ("lambda", "k0", "pairing", "verdict")
    assert cfg.seed == 3 and cfg.trials == 10


def test_config_defaults_all_unitary_analyses():
    cfg = config.parse_config_text("source = M1\nhom = id\n")
    assert cfg.analyses == config.UNITARY_ANALYSES


def test_config_rejects_bad_input():
    with pytest.raises(ConfigError):
        config.parse_config_text("hom = id\n")  # missing source
    with pytest.raises(ConfigError):
        config.parse_config_text("source = M1\nhom = nope\n")
    with pytest.raises(ConfigError):
        config.parse_config_text("source = M1\nhom = id\nmode = both\n")
    with pytest.raises(ConfigError):
        config.parse_config_text("source = M1\nhom = id\nanalyses = spectra\n")
    with pytest.raises(ConfigError):
        config.parse_config_text("source = M1\nhom = id\ntarget = M2\n")
    with pytest.raises(ConfigError):
        config.parse_config_text("source = M1\nhom = modtwist(1, 0)\n")  # gl-only generator


def test_run_analysis_sections_and_status():
    report = analysis.run_analysis(config.parse_config_text(DEMO))
    assert report.status == "ok"
    assert set(report.sections) == {"lambda", "k0", "pairing", "verdict"}
    assert report.sections["lambda"]["matrix"] == [[1.0, 0.0], [0.0, -1.0]]
    assert report.sections["k0"]["matrix"] == [[1, 0], [0, -1]]
    assert report.sections["pairing"]["residual"] < 1e-9
    assert report.sections["verdict"]["sign"] is None


def test_missing_dual_is_reported_not_fatal():
    cfg = config.parse_config_text(
        "source = M2 (+) M1\nhom = dsum(id, bar)\nanalyses = lambda, dual\n"
    )
    report = analysis.run_analysis(cfg)
    assert report.status == "ok"
    assert report.sections["dual"]["error"] == "NoDualError"


def test_report_json_round_trip():
    report = analysis.run_analysis(config.parse_config_text(DEMO))
    back = analysis.Report.from_dict(json.loads(report.to_json()))
    assert back.to_json() == report.to_json()


def test_report_json_is_deterministic():
    cfg = config.parse_config_text(DEMO)
    r1 = analysis.run_analysis(cfg)
    r2 = analysis.run_analysis(cfg)
    assert r1.to_json() == r2.to_json()


def test_gl_mode_analysis():
    cfg = config.parse_config_text(
        "source = M1\nhom = modtwist(0.5, -0.3)\nmode = gl\n"
    )
    report = analysis.run_analysis(cfg)
    assert report.status == "ok"
    gl = report.sections["gl"]
    assert gl["real_matrix"] == [[1.0, -0.5], [0.0, 1.3]]
    assert gl["c_linearity_defect"] > 0.5


def test_run_corpus_all_green():
    report = analysis.run_corpus()
    assert report.status == "ok"
    assert len(report.sections) == 7
    for entry in report.sections.values():
        assert entry["passed"]


def test_run_properties_small_sweep():
    report = analysis.run_properties(seed=1, trials=5)
    assert report.status == "ok"
    for entry in report.sections.values():
        assert entry["passed"]


def test_cli_corpus_exit_zero(capsys):
    assert cli.main(["--corpus", "--format", "json"]) == 0
    out = capsys.readouterr().out
    assert json.loads(out)["status"] == "ok"


def test_cli_config_file(tmp_path, capsys):
    path = tmp_path / "demo.cfg"
    path.write_text(DEMO)
    assert cli.main(["--config", str(path), "--format", "json"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["kind"] == "analysis"


def test_cli_bad_config_exits_three(tmp_path, capsys):
    path = tmp_path / "bad.cfg"
    path.write_text("source = M1\nhom = frobnicate\n")
    assert cli.main(["--config", str(path)]) == 3
    assert cli.main(["--config", str(tmp_path / "missing.cfg")]) == 3
    assert cli.main([]) == 3
    assert cli.main(["--corpus", "--properties"]) == 3
    capsys.readouterr()


def test_cli_output_is_byte_identical(tmp_path, capsys):
    path = tmp_path / "demo.cfg"
    path.write_text(DEMO)
    cli.main(["--config", str(path), "--format", "json"])
    first = capsys.readouterr().out
    cli.main(["--config", str(path), "--format", "json"])
    second = capsys.readouterr().out
    assert first == second
