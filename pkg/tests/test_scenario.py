import importlib.resources

import pytest

from structpath import (
    InteractionSpec,
    NoiseSpec,
    NormalDist,
    PathSpec,
    ScenarioError,
    ScenarioSpec,
    VariableSpec,
    default_scenario,
    loads_scenario,
    serialize_scenario,
    topological_order,
    validate_scenario,
)

MINIMAL = '{"variables": [{"name": "X", "role": "exogenous"}]}'


def test_minimal_file_gets_defaults():
    spec = loads_scenario(MINIMAL)
    assert spec.n == 150
    assert spec.seed == 42
    assert len(spec.variables) == 1
    v = spec.variables[0]
    assert v.dist == NormalDist(0.0, 1.0)


def test_duplicate_name_rejected():
    text = '{"variables": [{"name": "X3", "role": "exogenous"}, {"name": "X3", "role": "exogenous"}]}'
    with pytest.raises(ScenarioError, match="duplicate"):
        loads_scenario(text)


def test_unknown_field_rejected():
    with pytest.raises(ScenarioError, match="unknown field"):
        loads_scenario('{"variables": [], "extra": 1}')
    with pytest.raises(ScenarioError, match="unknown field"):
        loads_scenario('{"variables": [{"name": "X", "role": "exogenous", "mu": 0}]}')


def test_malformed_json_reports_location():
    with pytest.raises(ScenarioError, match="line 1"):
        loads_scenario('{"n": }')


def test_bad_scalar_types_rejected():
    with pytest.raises(ScenarioError, match="n must be"):
        loads_scenario('{"n": -3, "variables": []}')
    with pytest.raises(ScenarioError, match="seed must be"):
        loads_scenario('{"seed": "abc", "variables": []}')


def test_round_trip_identity():
    spec = default_scenario()
    assert loads_scenario(serialize_scenario(spec)) == spec


def test_shipped_scenario_file_equals_default():
    text = (importlib.resources.files("structpath") / "data" / "default_scenario.json").read_text()
    assert loads_scenario(text) == default_scenario()


def test_default_scenario_shape():
    spec = default_scenario()
    assert spec.n == 150
    assert spec.seed == 42
    assert len(spec.variables) == 14
    weights = {(p.source, p.target): p.weight for p in spec.paths}
    assert weights[("X3", "Y1")] == 0.42
    assert weights[("X6", "Y2")] == 0.38
    assert weights[("M2", "Y3")] == 0.47
    assert validate_scenario(spec) == []


def _one_var(name, role="exogenous", **kw):
    return VariableSpec(name, role, dist=NormalDist() if role in ("exogenous", "moderator") else None, **kw)


def test_validate_reports_cycle():
    spec = ScenarioSpec(variables=(
        _one_var("X3"),
        VariableSpec("M1", "mediator"),
        VariableSpec("Y", "outcome"),
    ), paths=(
        PathSpec("M1", "Y", 0.2),
        PathSpec("Y", "M1", 0.2),
    ))
    problems = validate_scenario(spec)
    assert any("cycle" in p for p in problems)


def test_validate_reports_undeclared_endpoint():
    spec = ScenarioSpec(variables=(
        _one_var("X1"),
        VariableSpec("M1", "mediator"),
    ), paths=(PathSpec("X9", "M1", 0.5),))
    problems = validate_scenario(spec)
    assert any("undeclared endpoint" in p and "X9" in p for p in problems)


def test_validate_reports_bad_dist_and_probs():
    spec = ScenarioSpec(variables=(
        VariableSpec("X1", "exogenous", dist=NormalDist(0.0, -1.0)),
        VariableSpec("MOD2", "moderator", kind="categorical",
                     levels=("a", "b"), probs=(0.7, 0.7)),
    ))
    problems = validate_scenario(spec)
    assert any("nonpositive sd" in p for p in problems)
    assert any("probability-sum" in p for p in problems)


def test_validate_rejects_target_roles_and_duplicate_noise():
    spec = ScenarioSpec(variables=(
        _one_var("X1"),
        _one_var("X2"),
        VariableSpec("Y", "outcome"),
    ), paths=(PathSpec("X1", "X2", 0.5),),
       noise=(NoiseSpec("Y", 0.1), NoiseSpec("Y", 0.2)))
    problems = validate_scenario(spec)
    assert any("mediator or outcome role" in p for p in problems)
    assert any("duplicate noise" in p for p in problems)


def test_validate_interaction_rules():
    spec = ScenarioSpec(variables=(
        _one_var("X1"),
        VariableSpec("Y", "outcome"),
    ), interactions=(InteractionSpec("X1", "X1", "Y", 0.3),))
    assert any("identical factors" in p for p in validate_scenario(spec))


def test_topological_order_deterministic_with_declaration_ties():
    spec = default_scenario()
    order = topological_order(spec)
    assert order.index("X3") < order.index("M1") < order.index("Y1")
    assert order.index("X5") < order.index("M2") < order.index("Y3")
    # sources with no dependencies keep declaration order
    assert order[:6] == ["X1", "X2", "X3", "X4", "X5", "X6"]
    assert order == topological_order(spec)
