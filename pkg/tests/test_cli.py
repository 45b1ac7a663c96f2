import json

import pytest

from thinshell.cli import ConfigError, default_config, main, parse_config, run, version_info

SMALL_THINSHELL = """
[experiment]
name = thinshell
n_grid = 4 8 16
samples = 2000
seed = 99
output_dir = {out}

[body.cube]
kind = cube
"""


def test_parse_config_defaults_and_overrides():
    cfg = parse_config("[experiment]\nname = clt\nseed = 7\n")
    assert cfg.experiment == "clt"
    assert cfg.seed == 7
    cfg2 = parse_config("[experiment]\nname = berry-esseen\n")
    assert cfg2.experiment == "berry_esseen"
    assert cfg2.samples == 10 ** 6


def test_parse_config_bodies():
    cfg = parse_config("[experiment]\nname = thinshell\n\n[body.l1]\nkind = lp_ball\np = 1\n")
    assert cfg.bodies[0].kind == "lp_ball"
    assert cfg.bodies[0].p == 1.0


def test_parse_config_unknown_key_is_named():
    with pytest.raises(ConfigError, match="banana"):
        parse_config("[experiment]\nname = thinshell\nbanana = 1\n")
    with pytest.raises(ConfigError, match="radius"):
        parse_config("[experiment]\nname = thinshell\n\n[body.x]\nkind = cube\nradius = 2\n")
    with pytest.raises(ConfigError, match="missing"):
        parse_config("[body.x]\nkind = cube\n")


def test_parse_config_validation():
    with pytest.raises(ConfigError):
        parse_config("[experiment]\nname = thinshell\nsamples = 10\n")
    with pytest.raises(ConfigError):
        parse_config("[experiment]\nname = nonsense\n")


def test_run_identities_and_artifacts(tmp_path):
    cfg = default_config("identities")
    cfg.output_dir = str(tmp_path / "out")
    assert run(cfg) == 0
    csv_text = (tmp_path / "out" / "report.csv").read_text()
    assert csv_text.startswith("estimator_id,body,n,N,seed,value,half_width,bound,extra_json")
    payload = json.loads((tmp_path / "out" / "report.json").read_text())
    assert payload["passed"] is True
    assert all(a["anchor"] for a in payload["assertions"])
    assert "timestamp" in payload


def test_run_byte_identical_reports(tmp_path, capsys):
    texts = []
    for name in ("a", "b"):
        code = main(["thinshell", "--config", _write_cfg(tmp_path, name)])
        assert code == 0
        texts.append((tmp_path / name / "report.csv").read_bytes())
    assert texts[0] == texts[1]


def _write_cfg(tmp_path, sub):
    p = tmp_path / f"cfg_{sub}.ini"
    p.write_text(SMALL_THINSHELL.format(out=tmp_path / sub))
    return str(p)


def test_workers_do_not_change_reports(tmp_path, capsys):
    cfg1 = parse_config(SMALL_THINSHELL.format(out=tmp_path / "w1"))
    cfg2 = parse_config(SMALL_THINSHELL.format(out=tmp_path / "w2"))
    cfg2.workers = 2
    assert run(cfg1) == 0
    assert run(cfg2) == 0
    assert (tmp_path / "w1" / "report.csv").read_bytes() == \
        (tmp_path / "w2" / "report.csv").read_bytes()


def test_main_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text("[experiment]\nname = thinshell\nbanana = 1\n")
    assert main(["thinshell", "--config", str(bad)]) == 2
    assert main(["thinshell", "--config", str(tmp_path / "missing.ini")]) == 3
    assert main(["version"]) == 0
    out = capsys.readouterr().out
    assert "thinshell" in out and "philox" in out


def test_version_info_stable():
    a, b = version_info(), version_info()
    assert a == b
    assert "philox4x64" in a


def test_dump_samples_flag(tmp_path, capsys):
    cfg_path = tmp_path / "cfg.ini"
    cfg_path.write_text(SMALL_THINSHELL.format(out=tmp_path / "o"))
    dump = tmp_path / "rows.thsl"
    assert main(["thinshell", "--config", str(cfg_path), "--dump-samples", str(dump)]) == 0
    raw = dump.read_bytes()
    assert raw[:4] == b"THSL"


def test_plot_outputs(tmp_path, capsys):
    cfg = parse_config(SMALL_THINSHELL.format(out=tmp_path / "p"))
    cfg.plot = True
    assert run(cfg) == 0
    svg = (tmp_path / "p" / "thinshell_loglog.svg").read_text()
    assert svg.startswith("<svg") and "polyline" in svg


def test_output_dir_io_error(tmp_path, capsys):
    blocker = tmp_path / "blocker"
    blocker.write_text("")
    cfg = default_config("identities")
    cfg.output_dir = str(blocker / "nested")
    assert run(cfg) == 3
