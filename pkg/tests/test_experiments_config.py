"""
test_experiments_config.py — Experiment config loading, validation and templates.
"""

import pytest
import yaml

from cbrw.experiments import (
    EXPERIMENT_KINDS,
    ConfigError,
    create_experiment_template,
    default_config,
    load_config,
    parse_config,
    validate_config,
)


def minimal(kind: str = "mt1", **sections) -> dict:
    raw = {"experiment": {"kind": kind}}
    raw.update(sections)
    return raw


class TestParseConfig:
    """Sections, defaults and key normalisation."""

    def test_defaults(self):
        """Only experiment.kind is required."""
        config = parse_config(minimal())
        assert config.name == "mt1"
        assert config.kind == "mt1"
        assert config.laws.dimension == 5
        assert config.laws.offspring == "binary"
        assert config.solver.box_radius == 8
        assert config.monte_carlo.threads is None
        assert config.experiment.scale == "desk"

    def test_key_styles(self):
        """camelCase and kebab-case keys map onto snake_case fields."""
        config = parse_config(
            minimal(solver={"boxRadius": 5, "nonlinear": "newton-krylov"}, monte_carlo={"n-samples": 100})
        )
        assert config.solver.box_radius == 5
        assert config.solver.nonlinear == "newton-krylov"
        assert config.monte_carlo.n_samples == 100

    def test_monte_carlo_section_camel_case(self):
        config = parse_config({"experiment": {"kind": "mt1"}, "monteCarlo": {"seed": 7}})
        assert config.monte_carlo.seed == 7

    def test_exponent_without_dot(self):
        """YAML reads 1e-10 as a string; it still parses as a tolerance."""
        config = parse_config(yaml.safe_load("experiment: {kind: qr}\nsolver: {tol: 1e-10}"))
        assert config.solver.tol == pytest.approx(1e-10)

    def test_points_target(self):
        config = parse_config(minimal(target={"kind": "points", "points": [[0, 0, 0, 0, 0], [0, 1, 0, 0, 0]]}))
        assert len(config.target.build(5)) == 2

    def test_law_specs(self):
        """Mappings are passed through to the law presets."""
        config = parse_config(minimal(laws={"offspring": {"pmf": {0: 0.25, 1: 0.5, 2: 0.25}}, "jump": "lazy-srw"}))
        assert config.laws.offspring_law().sigma2 == pytest.approx(0.5)
        assert config.laws.jump_law().prob_of((0, 0, 0, 0, 0)) == pytest.approx(0.5)

    def test_to_json(self):
        config = parse_config(minimal(criteria={"slope": 0.2}))
        data = config.to_json()
        assert data["experiment"]["kind"] == "mt1"
        assert data["criteria"] == {"slope": 0.2}
        assert config.criteria.get("slope", 1.0) == 0.2
        assert config.criteria.get("other", 1.0) == 1.0


class TestConfigErrors:
    """Every section is checked before anything runs."""

    @pytest.mark.parametrize(
        "raw",
        [
            [],
            {"experiment": {}},
            {"experiment": {"kind": "mt9"}},
            minimal(laws={"dimension": 3}),
            minimal("halfline", laws={"dimension": 5}),
            minimal(laws={"offspring": "triple"}),
            minimal(laws={"jump": {"preset": "axis-power", "params": {"alpha": 2.0}}}),
            {"experiment": {"kind": "mt1", "colour": "red"}},
            minimal(solver={"radius": 4}),
            minimal(solver={"tol": "small"}),
            minimal(solver={"tol": -1.0}),
            minimal(solver={"box_radius": 0}),
            minimal(solver={"method": "cholesky"}),
            minimal(solver={"nonlinear": "anderson"}),
            minimal(monte_carlo={"n_samples": 0}),
            minimal(monte_carlo={"seed": -1}),
            minimal(target={"kind": "cube"}),
            minimal(target={"kind": "points", "points": [[0, 0]]}),
            minimal(target={"kind": "slab", "radius": 2, "m": 9}),
            minimal(sites=[[1, 2, 3]]),
            minimal(criteria={"slope": "tight"}),
            minimal(params=[1, 2]),
        ],
    )
    def test_rejected(self, raw):
        with pytest.raises(ConfigError):
            parse_config(raw)

    def test_budget_must_be_positive(self):
        with pytest.raises(ConfigError):
            parse_config({"experiment": {"kind": "mt1", "budget_seconds": 0}})

    def test_halfline_in_one_dimension(self):
        config = parse_config(minimal("halfline", laws={"dimension": 1, "jump": "pm1"}))
        assert config.laws.jump_law().dim == 1


class TestValidateConfig:
    """Warnings for configs that run but mislead."""

    def test_clean(self):
        config = parse_config(minimal("qr", monte_carlo={"n_samples": 10}))
        assert validate_config(config) == []

    def test_site_outside_box(self):
        config = parse_config(minimal("qr", solver={"box_radius": 4}, sites=[[9, 0, 0, 0, 0]]))
        assert any("outside the solver box" in w for w in validate_config(config))

    def test_small_margin(self):
        config = parse_config(minimal("qr", solver={"box_radius": 3}, target={"kind": "points", "points": [[2, 0, 0, 0, 0]]}))
        assert any("margin" in w for w in validate_config(config))

    def test_below_acceptance_scale(self):
        config = parse_config(minimal("mt1", monte_carlo={"n_samples": 10}))
        assert any("acceptance scale" in w for w in validate_config(config))

    def test_degenerate_law(self):
        config = parse_config(minimal("qr", laws={"offspring": "delta1"}))
        assert any("degenerate" in w for w in validate_config(config))
        reduction = parse_config(minimal("reduction", laws={"offspring": "delta1"}))
        assert validate_config(reduction) == []


class TestLoadConfig:
    def test_from_file(self, tmp_path):
        path = tmp_path / "exp.yaml"
        path.write_text("experiment:\n  kind: mt2\n  name: growth\nsolver:\n  box-radius: 6\n")
        config = load_config(path)
        assert config.name == "growth"
        assert config.solver.box_radius == 6

    def test_not_a_mapping(self, tmp_path):
        path = tmp_path / "exp.yaml"
        path.write_text("- mt1\n")
        with pytest.raises(ConfigError):
            load_config(path)


class TestTemplates:
    """Starter configs for every experiment kind."""

    @pytest.mark.parametrize("kind", EXPERIMENT_KINDS)
    def test_template_parses(self, kind):
        config = default_config(kind)
        assert config.kind == kind
        assert config.name == kind

    def test_named_template(self):
        text = create_experiment_template("mt5", "domination")
        assert "name: domination" in text
        assert default_config("mt5", "domination").params["compare_offspring"] == "geometric"

    def test_laws_per_kind(self):
        assert default_config("halfline").laws.dimension == 1
        assert default_config("reduction").laws.offspring == "delta1"
        assert len(default_config("mt1").target.points) == 2

    def test_unknown_kind(self):
        with pytest.raises(ConfigError):
            create_experiment_template("mt9")

    def test_desk_notes_acceptance_values(self):
        text = create_experiment_template("mt1")
        assert "scale: desk" in text
        assert "acceptance: [6.0, 24.0]" in text
        assert "acceptance: 1000000" in text

    @pytest.mark.parametrize("kind", EXPERIMENT_KINDS)
    def test_acceptance_template_parses(self, kind):
        config = default_config(kind, scale="acceptance")
        assert config.kind == kind
        assert config.experiment.scale == "acceptance"
        assert config.monte_carlo.n_samples == 1_000_000

    def test_acceptance_values(self):
        mt1 = default_config("mt1", scale="acceptance")
        assert mt1.target.kind == "origin"
        assert mt1.solver.box_radius == 32
        assert mt1.params["fit_range"] == [6.0, 24.0]
        assert mt1.params["plateau_range"] == [16.0, 24.0]
        qr = default_config("qr", scale="acceptance")
        assert qr.params["ratio_norm"] == 20.0
        assert qr.params["q_range"] == [8.0, 16.0]
        mt2 = default_config("mt2", scale="acceptance")
        assert mt2.params["pairs"] == 50
        assert mt2.params["radii"] == [4, 8, 16, 32]
        green = default_config("green-ratio", scale="acceptance")
        assert green.params["identity_radius"] == 6
        assert green.params["far_norm"] == 20.0
        assert default_config("entering", scale="acceptance").params["norms"] == [8, 16, 32]

    def test_unknown_scale(self):
        with pytest.raises(ConfigError, match="scale"):
            create_experiment_template("mt1", scale="huge")
        with pytest.raises(ConfigError, match="scale"):
            parse_config(minimal(experiment={"kind": "mt1", "scale": "huge"}))
