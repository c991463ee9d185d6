import json

import pytest

from riverbargain.config import (
    KEYS,
    ParseError,
    RunConfig,
    ValidationError,
    example_config,
    format_config,
    parse_config,
)
from riverbargain.oracle import OracleConfig

from conftest import base_case, fixture_p

P_TOML = """\
upstream.a = 10
upstream.b = 1
downstream.a = 10
downstream.b = 1
endowments.e1 = 12
endowments.e2 = 2
penalty.c1w = 0.25
"""


def test_minimal_config():
    cfg = parse_config(P_TOML)
    assert cfg.problem == fixture_p()
    assert cfg.sweep is None and cfg.oracle == OracleConfig()
    assert cfg.csv_path is None and cfg.chart_delta is None


def test_example_config_round_trips():
    cfg = example_config()
    assert parse_config(format_config(cfg)) == cfg
    assert cfg.problem == base_case()
    assert len(cfg.sweep.delta_values) == 31 and len(cfg.sweep.e2_values()) == 41


def test_round_trip_with_every_optional_key():
    text = format_config(example_config()).replace("# output.csv", "output.csv")
    text += 'sweep.columns = ["delta", "e2", "feasible"]\n'
    cfg = parse_config(text)
    assert cfg.csv_path == "sweep.csv" and cfg.sweep.outputs == ("delta", "e2", "feasible")
    assert parse_config(format_config(cfg)) == cfg


def test_json_equivalent():
    tree = {
        "upstream": {"a": 10, "b": 1}, "downstream": {"a": 10, "b": 1},
        "endowments": {"e1": 12, "e2": 2}, "penalty": {"c1w": 0.25},
    }
    assert parse_config(json.dumps(tree, indent=2)) == parse_config(P_TOML)


def test_missing_penalty_is_named():
    text = "\n".join(line for line in P_TOML.splitlines() if "c1w" not in line)
    with pytest.raises(ParseError) as err:
        parse_config(text)
    assert err.value.key == "penalty.c1w"
    assert "penalty.c1w" in str(err.value)


def test_unknown_key_reports_line():
    with pytest.raises(ParseError) as err:
        parse_config(P_TOML + "penalty.c2w = 1\n")
    assert err.value.key == "penalty.c2w" and err.value.line == 8


def test_invalid_values_are_collected():
    text = P_TOML.replace("upstream.b = 1", "upstream.b = 0").replace("endowments.e2 = 2", "endowments.e2 = -2")
    with pytest.raises(ValidationError) as err:
        parse_config(text)
    assert [k for k, _ in err.value.violations] == ["upstream.b", "endowments.e2"]
    assert err.value.line == 2


def test_wrong_types():
    with pytest.raises(ParseError, match="expected a number"):
        parse_config(P_TOML.replace("upstream.a = 10", 'upstream.a = "10"'))
    with pytest.raises(ParseError, match="integer"):
        parse_config(P_TOML + "oracle.max_iterations = 2.5\n")
    with pytest.raises(ParseError):
        parse_config(P_TOML + "output.csv = 3\n")


def test_syntax_errors_carry_a_line():
    with pytest.raises(ParseError) as err:
        parse_config(P_TOML + "penalty = = 1\n")
    assert err.value.line == 8
    with pytest.raises(ParseError) as err:
        parse_config('{"upstream": {"a": 10,}}')
    assert err.value.line == 1


def test_sweep_block_rules():
    with pytest.raises(ParseError, match="exactly one"):
        parse_config(P_TOML + "sweep.e2_start = 0\n")
    with pytest.raises(ParseError) as err:
        parse_config(P_TOML + "sweep.delta_values = [1.0]\nsweep.e2_start = 0\nsweep.e2_stop = 2\n")
    assert err.value.key == "sweep.e2_step"
    cfg = parse_config(P_TOML + "sweep.delta_range = [0, 1, 0.25]\n"
                       "sweep.e2_start = 0\nsweep.e2_stop = 2\nsweep.e2_step = 1\n")
    assert cfg.sweep.delta_values == (0.0, 0.25, 0.5, 0.75, 1.0)
    with pytest.raises(ValidationError):
        parse_config(P_TOML + "sweep.delta_values = [1.0]\nsweep.e2_start = 0\n"
                     "sweep.e2_stop = 2\nsweep.e2_step = 0\n")


def test_oracle_overrides():
    cfg = parse_config(P_TOML + "oracle.grid_points = 64\noracle.alpha_tolerance = 1e-12\n")
    assert cfg.oracle.grid_points == 64 and cfg.oracle.alpha_tolerance == 1e-12
    with pytest.raises(ValidationError):
        parse_config(P_TOML + "oracle.grid_points = 1\n")


def test_every_key_appears_in_the_template():
    text = format_config(example_config())
    for key in KEYS:
        assert key in text, key


def test_run_config_defaults():
    cfg = RunConfig(problem=fixture_p())
    assert cfg.sweep is None and cfg.svg_path is None
