"""Flat key=value experiment configs: parsing, validation, round-trips."""

import math

import pytest

from heatlab.config import (
    ConfigError,
    ExperimentConfig,
    load_experiment_config,
    parse_config_text,
)

BASE = """
# 1-d cubic source problem
equation.regime = subcritical
equation.p = 3.0
domain.kind = interval
domain.lower = -20.0
domain.upper = 20.0
grid.n = 400
operator.kind = dirichlet_laplacian
initial.recipe = gaussian
initial.amplitude = 0.3
integrator.t_max = 2.0
"""


def base_map(**overrides):
    raw = parse_config_text(BASE)
    raw.update(overrides)
    return raw


def test_parser_basics():
    out = parse_config_text(
        "a.b = 3\nname = fred # trailing comment\nflag = true\n"
        "xs = 1, 2.5, hi\nneg = -4.5e-2\n  \n# full comment line\n"
    )
    assert out["a.b"] == 3 and isinstance(out["a.b"], int)
    assert out["name"] == "fred"
    assert out["flag"] is True
    assert out["xs"] == (1, 2.5, "hi")
    assert math.isclose(out["neg"], -0.045)


def test_parser_errors():
    with pytest.raises(ConfigError, match="key = value"):
        parse_config_text("just words\n")
    with pytest.raises(ConfigError, match="empty key"):
        parse_config_text("= 3\n")
    with pytest.raises(ConfigError, match="duplicate"):
        parse_config_text("a = 1\na = 2\n")
    err = None
    try:
        parse_config_text("ok = 1\nbroken line\n")
    except ConfigError as exc:
        err = exc
    assert err is not None and err.key == "line 2"


def test_valid_config_builds():
    cfg = ExperimentConfig.from_mapping(base_map())
    assert cfg.regime == "subcritical"
    assert cfg.p == 3.0
    assert cfg.dim == 1
    assert cfg.n == (400,)
    assert cfg.t_max == 2.0
    assert cfg.sweep_key is None


def test_unknown_keys_rejected_by_name():
    with pytest.raises(ConfigError) as exc:
        ExperimentConfig.from_mapping(base_map(**{"grid.m": 3, "zap": 1}))
    msg = str(exc.value)
    assert "grid.m" in msg and "zap" in msg


def test_missing_required_key():
    raw = base_map()
    del raw["integrator.t_max"]
    with pytest.raises(ConfigError, match="required"):
        ExperimentConfig.from_mapping(raw)


def test_critical_needs_three_dimensions():
    raw = base_map(**{
        "equation.regime": "critical",
        "domain.kind": "box",
        "domain.lower": (-5.0, -5.0),
        "domain.upper": (5.0, 5.0),
        "grid.n": 10,
    })
    del raw["equation.p"]
    with pytest.raises(ConfigError, match="critical requires d >= 3"):
        ExperimentConfig.from_mapping(raw)
    raw3 = base_map(**{
        "equation.regime": "critical",
        "domain.kind": "box",
        "domain.lower": (-5.0, -5.0, -5.0),
        "domain.upper": (5.0, 5.0, 5.0),
        "grid.n": 9,
    })
    del raw3["equation.p"]
    cfg = ExperimentConfig.from_mapping(raw3)
    assert cfg.p == 5.0  # pinned to (d+2)/(d-2)
    bad_p = dict(raw3)
    bad_p["equation.p"] = 3.0
    with pytest.raises(ConfigError, match="critical exponent"):
        ExperimentConfig.from_mapping(bad_p)


def test_subcritical_exponent_window():
    with pytest.raises(ConfigError, match="need p > 1"):
        ExperimentConfig.from_mapping(base_map(**{"equation.p": 1.0}))
    raw = base_map(**{
        "domain.kind": "box",
        "domain.lower": (-5.0, -5.0, -5.0),
        "domain.upper": (5.0, 5.0, 5.0),
        "grid.n": 8,
        "equation.p": 6.0,
    })
    with pytest.raises(ConfigError, match="subcritical range"):
        ExperimentConfig.from_mapping(raw)


def test_domain_shape_validation():
    with pytest.raises(ConfigError, match="one-dimensional"):
        ExperimentConfig.from_mapping(base_map(**{
            "domain.lower": (0.0, 0.0), "domain.upper": (1.0, 1.0),
        }))
    with pytest.raises(ConfigError, match="different lengths"):
        ExperimentConfig.from_mapping(base_map(**{
            "domain.kind": "box",
            "domain.lower": (0.0, 0.0), "domain.upper": (1.0, 1.0, 1.0),
        }))
    with pytest.raises(ConfigError, match="exceed"):
        ExperimentConfig.from_mapping(base_map(**{
            "domain.lower": 5.0, "domain.upper": -5.0,
        }))
    with pytest.raises(ConfigError, match="starting at 0"):
        ExperimentConfig.from_mapping(base_map(**{
            "domain.kind": "halfline", "domain.lower": 1.0, "domain.upper": 30.0,
        }))


def test_grid_broadcast_and_minimum():
    raw = base_map(**{
        "domain.kind": "box",
        "domain.lower": (0.0, 0.0), "domain.upper": (1.0, 2.0),
        "grid.n": 12,
    })
    cfg = ExperimentConfig.from_mapping(raw)
    assert cfg.n == (12, 12)
    raw["grid.n"] = (12, 1)
    with pytest.raises(ConfigError, match="at least 2"):
        ExperimentConfig.from_mapping(raw)


def test_operator_and_potential_rules():
    with pytest.raises(ConfigError, match="halfline"):
        ExperimentConfig.from_mapping(base_map(**{"operator.kind": "robin_halfline"}))
    with pytest.raises(ConfigError, match="schrodinger"):
        ExperimentConfig.from_mapping(base_map(**{"potential.kind": "gaussian_well"}))
    cfg = ExperimentConfig.from_mapping(base_map(**{
        "operator.kind": "schrodinger",
        "potential.kind": "inverse_power",
        "potential.alpha": 0.5,
        "potential.coupling": 1.0,
        "potential.sign": 1,
    }))
    assert cfg.potential_kind == "inverse_power"
    with pytest.raises(ConfigError, match="sign"):
        ExperimentConfig.from_mapping(base_map(**{
            "operator.kind": "schrodinger",
            "potential.kind": "inverse_power",
            "potential.alpha": 0.5,
            "potential.coupling": 1.0,
            "potential.sign": 2,
        }))


def test_initial_recipe_rules():
    cfg = ExperimentConfig.from_mapping(base_map(**{
        "initial.recipe": "scaled_ground_state", "initial.lambda": 1.2,
    }))
    assert cfg.lam == 1.2
    with pytest.raises(ConfigError, match="lambda"):
        ExperimentConfig.from_mapping(base_map(**{
            "initial.recipe": "scaled_ground_state", "initial.lambda": -1.0,
        }))
    raw = base_map(**{
        "equation.regime": "critical",
        "domain.kind": "box",
        "domain.lower": (-5.0,) * 3,
        "domain.upper": (5.0,) * 3,
        "grid.n": 7,
        "initial.recipe": "scaled_ground_state",
        "initial.lambda": 1.0,
    })
    del raw["equation.p"]
    with pytest.raises(ConfigError, match="initial.recipe"):
        ExperimentConfig.from_mapping(raw)


def test_typed_value_rejection():
    with pytest.raises(ConfigError, match="number"):
        ExperimentConfig.from_mapping(base_map(**{"integrator.t_max": "soon"}))
    with pytest.raises(ConfigError, match="integer"):
        ExperimentConfig.from_mapping(base_map(**{"grid.n": 10.5}))
    with pytest.raises(ConfigError, match="number"):
        ExperimentConfig.from_mapping(base_map(**{"equation.p": True}))
    with pytest.raises(ConfigError, match="positive"):
        ExperimentConfig.from_mapping(base_map(**{"integrator.rel_tol": -1.0}))
    with pytest.raises(ConfigError, match="t_max"):
        ExperimentConfig.from_mapping(base_map(**{"integrator.t_max": -2.0}))


def test_sweep_axis():
    cfg = ExperimentConfig.from_mapping(base_map(**{
        "sweep.key": "initial.amplitude",
        "sweep.values": (0.1, 0.2, 0.4),
    }))
    assert cfg.sweep_key == "initial.amplitude"
    assert cfg.sweep_values == (0.1, 0.2, 0.4)
    with pytest.raises(ConfigError, match="cannot sweep"):
        ExperimentConfig.from_mapping(base_map(**{
            "sweep.key": "sweep.values", "sweep.values": (1,),
        }))
    with pytest.raises(ConfigError, match="missing"):
        ExperimentConfig.from_mapping(base_map(**{"sweep.key": "initial.amplitude"}))
    # an explicitly empty value list is a legal, empty axis
    empty = ExperimentConfig.from_mapping(base_map(**{
        "sweep.key": "initial.amplitude", "sweep.values": "",
    }))
    assert empty.sweep_values == ()


def test_with_override_revalidates():
    cfg = ExperimentConfig.from_mapping(base_map())
    up = cfg.with_override("initial.amplitude", 0.9)
    assert up.amplitude == 0.9
    assert cfg.amplitude == 0.3  # original untouched
    with pytest.raises(ConfigError):
        cfg.with_override("grid.n", 0)


def test_echo_round_trip():
    raw = base_map(**{
        "integrator.cutoff_radii": (1.5, 2.5),
        "seed": 7,
    })
    cfg = ExperimentConfig.from_mapping(raw)
    echoed = cfg.echo_text()
    assert parse_config_text(echoed) == cfg.raw
    # echo is sorted and newline-terminated, so it is byte-stable
    lines = echoed.strip().splitlines()
    assert lines == sorted(lines)
    assert echoed.endswith("\n")
    again = ExperimentConfig.from_mapping(parse_config_text(echoed))
    assert again.echo_text() == echoed


def test_load_from_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(BASE, encoding="utf-8")
    cfg = load_experiment_config(str(path))
    assert cfg.amplitude == 0.3
    with pytest.raises(FileNotFoundError):
        load_experiment_config(str(tmp_path / "missing.cfg"))
