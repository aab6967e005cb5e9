import numpy as np
import pytest

from structpath import (
    ColumnMismatchError,
    DataTable,
    InteractionSpec,
    InvalidScenarioError,
    NoiseSpec,
    NormalDist,
    PathSpec,
    ScenarioSpec,
    VariableSpec,
    default_scenario,
    generate,
    one_hot,
    ols_fit,
    quality_gate,
)

STD = NormalDist(0.0, 1.0)


def chain_spec(weight=0.5, noise_sd=0.0, n=150, seed=42):
    return ScenarioSpec(n=n, seed=seed, variables=(
        VariableSpec("X3", "exogenous", dist=STD),
        VariableSpec("M1", "mediator"),
    ), paths=(PathSpec("X3", "M1", weight),),
       noise=(NoiseSpec("M1", noise_sd),))


# ---------------------------------------------------------------------------
# generate
# ---------------------------------------------------------------------------

def test_noiseless_propagation_is_exact():
    t = generate(chain_spec(weight=0.5, noise_sd=0.0))
    assert np.array_equal(t.col("M1"), 0.5 * t.col("X3"))


def test_default_scenario_shape_and_finiteness():
    t = generate(default_scenario())
    assert t.n_rows == 150
    assert len(t.names) == 14
    for name in t.numeric_names():
        assert np.isfinite(t.col(name)).all()
    assert set(np.unique(t.col("Y1"))) <= {0.0, 1.0}


def test_lone_variable_sampling_error_bound():
    # 3*sd/sqrt(n) = 0.019 at n = 1e5
    spec = ScenarioSpec(n=100_000, seed=42, variables=(
        VariableSpec("X", "exogenous", dist=NormalDist(10.0, 2.0)),
    ))
    t = generate(spec)
    assert abs(t.col("X").mean() - 10.0) <= 0.02


def test_generate_is_deterministic():
    spec = default_scenario()
    a = generate(spec)
    b = generate(spec)
    for name in a.names:
        assert np.array_equal(a.col(name), b.col(name))


def test_per_variable_streams_are_stable_under_insertion():
    # adding a trailing variable must not change existing columns
    base = chain_spec(noise_sd=0.3)
    extended = ScenarioSpec(
        n=base.n, seed=base.seed,
        variables=base.variables + (VariableSpec("Z", "exogenous", dist=STD),),
        paths=base.paths, noise=base.noise,
    )
    a = generate(base)
    b = generate(extended)
    assert np.array_equal(a.col("X3"), b.col("X3"))
    assert np.array_equal(a.col("M1"), b.col("M1"))


def test_pure_interaction_rows_exact():
    spec = ScenarioSpec(n=200, seed=7, variables=(
        VariableSpec("X3", "exogenous", dist=STD),
        VariableSpec("MOD1", "moderator", dist=STD),
        VariableSpec("Y", "outcome"),
    ), interactions=(InteractionSpec("X3", "MOD1", "Y", 1.0),),
       noise=(NoiseSpec("Y", 0.0),))
    t = generate(spec)
    assert np.array_equal(t.col("Y"), t.col("X3") * t.col("MOD1"))


def test_zero_noise_recovery_of_generating_weights():
    spec = ScenarioSpec(n=400, seed=3, variables=(
        VariableSpec("X1", "exogenous", dist=STD),
        VariableSpec("X2", "exogenous", dist=STD),
        VariableSpec("MOD", "moderator", dist=STD),
        VariableSpec("M", "mediator", intercept=0.25),
        VariableSpec("Y", "outcome"),
    ), paths=(
        PathSpec("X1", "M", 0.7),
        PathSpec("X2", "M", -0.4),
        PathSpec("M", "Y", 0.5),
        PathSpec("X2", "Y", 0.3),
    ), interactions=(InteractionSpec("X1", "MOD", "Y", 0.6),),
       noise=(NoiseSpec("M", 0.0), NoiseSpec("Y", 0.0)))
    t = generate(spec)

    fit_m = ols_fit(t, "M", ["X1", "X2"])
    assert fit_m.coef_for("X1") == pytest.approx(0.7, abs=1e-6)
    assert fit_m.coef_for("X2") == pytest.approx(-0.4, abs=1e-6)
    assert fit_m.coef_for("intercept") == pytest.approx(0.25, abs=1e-6)
    assert fit_m.r2 >= 1 - 1e-9

    work = t.with_column("X1xMOD", t.col("X1") * t.col("MOD"))
    fit_y = ols_fit(work, "Y", ["M", "X2", "X1xMOD"])
    assert fit_y.coef_for("M") == pytest.approx(0.5, abs=1e-6)
    assert fit_y.coef_for("X2") == pytest.approx(0.3, abs=1e-6)
    assert fit_y.coef_for("X1xMOD") == pytest.approx(0.6, abs=1e-6)
    assert fit_y.r2 >= 1 - 1e-9


def test_generate_rejects_invalid_spec():
    bad = ScenarioSpec(variables=(
        VariableSpec("M1", "mediator"),
        VariableSpec("Y", "outcome"),
    ), paths=(PathSpec("M1", "Y", 0.5), PathSpec("Y", "M1", 0.5)))
    with pytest.raises(InvalidScenarioError, match="cycle"):
        generate(bad)


def test_binary_outcome_intercept_shifts_base_rate():
    def rate(intercept):
        spec = ScenarioSpec(n=4000, seed=11, variables=(
            VariableSpec("X", "exogenous", dist=STD),
            VariableSpec("Y", "outcome", kind="binary", intercept=intercept),
        ), paths=(PathSpec("X", "Y", 0.3),), noise=(NoiseSpec("Y", 0.0),))
        return generate(spec).col("Y").mean()
    assert abs(rate(0.0) - 0.5) < 0.03
    assert rate(1.5) > 0.75


# ---------------------------------------------------------------------------
# one_hot
# ---------------------------------------------------------------------------

def cat_table():
    return DataTable(
        {"g": np.array(["A", "B", "C", "A", "C"], dtype=object),
         "x": np.arange(5.0)},
        kinds={"g": "categorical", "x": "continuous"},
        levels={"g": ("A", "B", "C")},
    )


def test_one_hot_reference_coding():
    t = one_hot(cat_table(), "g")
    assert t.names == ["g=B", "g=C", "x"]
    assert np.array_equal(t.col("g=B"), [0, 1, 0, 0, 0])
    assert np.array_equal(t.col("g=C"), [0, 0, 1, 0, 1])
    # row with reference level A maps to all zeros
    assert t.col("g=B")[0] == 0 and t.col("g=C")[0] == 0
    assert t.onehot_groups["g"] == ["g=B", "g=C"]


def test_one_hot_two_levels_single_indicator():
    t = DataTable({"s": np.array(["low", "high", "low"], dtype=object)},
                  kinds={"s": "categorical"}, levels={"s": ("low", "high")})
    out = one_hot(t, "s")
    assert out.names == ["s=high"]
    assert np.array_equal(out.col("s=high"), [0, 1, 0])


def test_one_hot_errors():
    t = cat_table()
    with pytest.raises(ValueError, match="not categorical"):
        one_hot(t, "x")
    with pytest.raises(ValueError, match="unseen level"):
        one_hot(t, "g", levels=("A", "B"))


# ---------------------------------------------------------------------------
# quality gate
# ---------------------------------------------------------------------------

def test_default_generation_passes_gate():
    spec = default_scenario()
    report = quality_gate(generate(spec), spec)
    assert report.passed, [c.name for c in report.failures()]


def test_gate_completeness_fails_on_nan():
    spec = default_scenario()
    t = generate(spec)
    col = t.col("X1").copy()
    col[3] = np.nan
    broken = t.with_column("X1", col)
    report = quality_gate(broken, spec)
    assert not report.passed
    assert any(c.name == "completeness" and not c.passed for c in report.checks)


def test_gate_sign_check_fails_on_negated_column():
    spec = default_scenario()
    t = generate(spec)
    flipped = t.with_column("M1", -t.col("M1"))
    report = quality_gate(flipped, spec)
    names = [c.name for c in report.failures()]
    assert "sign:X3->M1" in names


def test_gate_structure_fails_on_kind_mismatch():
    spec = default_scenario()
    t = generate(spec)
    # survival column replaced by a continuous score
    broken = t.with_column("Y1", np.linspace(0, 2, t.n_rows))
    report = quality_gate(broken, spec)
    assert any(c.name == "structure:Y1" and not c.passed for c in report.checks)


def test_gate_distribution_fails_on_shifted_mean():
    spec = default_scenario()
    t = generate(spec)
    shifted = t.with_column("X2", t.col("X2") + 5.0)
    report = quality_gate(shifted, spec)
    assert any(c.name == "distribution:X2" and not c.passed for c in report.checks)


def test_gate_regressibility_fails_on_shuffled_target():
    spec = default_scenario()
    t = generate(spec)
    rng = np.random.default_rng(0)
    report = quality_gate(t.with_column("M1", rng.permutation(t.col("M1"))), spec)
    assert any(c.name == "regressibility:M1" and not c.passed for c in report.checks)


def test_gate_raises_on_missing_column():
    spec = default_scenario()
    t = generate(spec).select(["X1", "X2"])
    with pytest.raises(ColumnMismatchError):
        quality_gate(t, spec)


# ---------------------------------------------------------------------------
# DataTable CSV round trip
# ---------------------------------------------------------------------------

def test_csv_round_trip_is_exact():
    t = generate(default_scenario())
    back = DataTable.from_csv(t.to_csv())
    assert back.names == t.names
    for name in t.names:
        if t.kinds[name] == "categorical":
            assert back.col(name).tolist() == t.col(name).tolist()
        else:
            assert np.array_equal(back.col(name), t.col(name))
    assert back.kinds["Y1"] == "binary"
    assert back.kinds["MOD2"] == "categorical"


def test_binary_column_validation():
    with pytest.raises(ValueError, match="outside"):
        DataTable({"b": np.array([0.0, 0.5, 1.0])}, kinds={"b": "binary"})
