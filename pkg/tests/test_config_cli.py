"""Config schema, serialisation round trips, CLI behaviour, exit codes."""

import csv
import json

import numpy as np
import pytest

from bvm.cli import (
    EXIT_CONFIG,
    EXIT_ESTIMATION,
    EXIT_OK,
    EXIT_RULE_MISMATCH,
    main,
)
from bvm.config import (
    ConfigError,
    build_scenario,
    build_sweep_template,
    distribution_from_config,
    distribution_to_config,
    rule_from_config,
    rule_to_config,
    validate_config,
)
from bvm.studies import builtin_configs


def scenario_doc(**overrides):
    doc = {
        "model": {"distribution": {"type": "normal", "mean": 0.0, "std": 1.0}},
        "data": {"distribution": {"type": "dirac", "value": 0.0}},
        "agreement": {"type": "threshold", "fn": "abs_diff", "eps": 1.0},
        "estimator": {"method": "mc", "samples": 5000, "seed": 3},
    }
    doc.update(overrides)
    return doc


class TestSchema:
    def test_valid_doc_passes(self):
        validate_config(scenario_doc())

    def test_unknown_top_level_key_rejected(self):
        with pytest.raises(ConfigError, match="extra"):
            validate_config(scenario_doc(extra=1))

    def test_unknown_nested_key_rejected(self):
        doc = scenario_doc()
        doc["model"]["distribution"]["mystery"] = True
        with pytest.raises(ConfigError):
            validate_config(doc)

    def test_error_names_offending_field(self):
        doc = scenario_doc()
        doc["agreement"] = {"type": "threshold", "fn": "abs_diff"}  # eps missing
        with pytest.raises(ConfigError, match=r"\$\.agreement"):
            validate_config(doc)

    def test_every_builtin_config_validates(self):
        for name, doc in builtin_configs(seed=1).items():
            validate_config(doc)


class TestRoundTrip:
    @pytest.mark.parametrize(
        "doc",
        [
            {"type": "normal", "mean": 0.5, "std": 2.0},
            {"type": "dirac", "value": 3.0},
            {"type": "dirac", "value": [1.0, 2.0]},
            {"type": "student_t", "location": 0.0, "dof": 10.0, "scale": 1.75},
            {"type": "uniform", "lo": -1.0, "hi": 1.0},
            {"type": "shifted_exponential", "rate": 2.0, "shift": 0.1},
            {"type": "categorical", "values": [0.0, 1.0], "probs": [0.4, 0.6]},
            {"type": "product", "components": [{"type": "normal", "mean": 0.0, "std": 1.0}]},
            {
                "type": "push_forward",
                "prior": {"type": "dirac", "value": [1.0]},
                "model_function": {"family": "polynomial", "powers": [0]},
                "grid": {"points": [0.0, 1.0]},
            },
        ],
        ids=lambda d: d["type"],
    )
    def test_distribution_fixed_point(self, doc):
        built = distribution_from_config(doc)
        once = distribution_to_config(built)
        twice = distribution_to_config(distribution_from_config(once))
        assert once == twice

    @pytest.mark.parametrize(
        "doc",
        [
            {"type": "always_true"},
            {"type": "threshold", "fn": "mean_abs_error", "eps": 0.46},
            {"type": "interval", "fn": "identity", "lo": -1.0, "hi": 1.0},
            {"type": "soft_exponential", "fn": "abs_diff", "eps_prime": 0.2, "rate": 3.0},
            {"type": "gamma_epsilon", "gamma": 0.9, "eps": 0.1, "m": 5.0},
            {"type": "set_membership", "synonyms": {"cat": ["cat", "feline"]}},
            {
                "type": "and",
                "children": [
                    {"type": "threshold", "fn": "abs_diff", "eps": 1.0},
                    {"type": "not", "child": {"type": "always_false"}},
                ],
            },
            {
                "type": "in_region",
                "side": "model",
                "region": {"kind": "interval", "level": 0.9, "intervals": [[-1.0, 1.0]]},
            },
            {
                "type": "epsilon_beta",
                "mean_tol": 0.9,
                "coverage_lo": 0.91,
                "coverage_hi": 0.99,
                "band": {"lo": [-1.0, -1.0], "hi": [1.0, 1.0]},
            },
        ],
        ids=lambda d: d["type"],
    )
    def test_rule_fixed_point(self, doc):
        built = rule_from_config(doc)
        once = rule_to_config(built)
        twice = rule_to_config(rule_from_config(once))
        assert once == twice

    def test_builtin_configs_reach_fixed_point(self):
        # Bands resolved from the model collapse to literal lo/hi arrays on
        # first serialisation; after that the form must be stable.
        for name, doc in builtin_configs(seed=0).items():
            if "agreement" not in doc:
                continue
            if "model_function" in doc["model"]:
                from bvm.config import _model_dist_from_section

                model_dist = _model_dist_from_section(doc["model"])
            else:
                model_dist = distribution_from_config(doc["model"]["distribution"])
            rule = rule_from_config(doc["agreement"], model_dist)
            once = rule_to_config(rule)
            twice = rule_to_config(rule_from_config(once))
            assert once == twice, name

    def test_plain_rule_round_trips_exactly(self):
        doc = scenario_doc()
        built = build_scenario(doc)
        assert rule_to_config(built.scenario.rule) == doc["agreement"]

    def test_resolved_config_is_itself_a_fixed_point(self):
        for name, doc in builtin_configs(seed=2).items():
            if "agreement" not in doc:
                continue  # metric configs run through their own subcommands
            built = build_scenario(doc)
            validate_config(built.resolved)
            rebuilt = build_scenario(built.resolved)
            assert rebuilt.resolved == built.resolved, name


class TestBuilders:
    def test_missing_section(self):
        doc = scenario_doc()
        del doc["agreement"]
        with pytest.raises(ConfigError, match="agreement"):
            build_scenario(doc)

    def test_generator_data_path(self):
        doc = {
            "model": {"distribution": {"type": "dirac", "value": [1.0, 1.0, 1.0]}},
            "data": {
                "generator": {
                    "type": "grid_function",
                    "name": "cos",
                    "grid": {"start": 0.0, "stop": 1.0, "num": 3},
                }
            },
            "agreement": {"type": "gamma_epsilon", "gamma": 1.0, "eps": 1.0, "m": 5.0},
            "estimator": {"method": "mc", "samples": 10, "seed": 0},
        }
        built = build_scenario(doc)
        est_path = built.scenario.data_dist.value
        assert np.allclose(est_path, np.cos(np.linspace(0, 1, 3)))

    def test_sweep_needs_certain_data(self):
        doc = scenario_doc()
        doc["model"] = {
            "model_function": {"family": "polynomial", "powers": [0]},
            "prior": {"type": "dirac", "value": [1.0]},
            "grid": {"start": 0.0, "stop": 1.0, "num": 4},
        }
        with pytest.raises(ConfigError, match="certain data path"):
            build_sweep_template(doc)


@pytest.fixture()
def tmp_config(tmp_path):
    def write(doc, name="cfg.json"):
        path = tmp_path / name
        path.write_text(json.dumps(doc))
        return str(path)

    return write


class TestCli:
    def test_validate_success_and_record(self, tmp_config, tmp_path, capsys):
        out = str(tmp_path / "record.json")
        code = main(["validate", "--config", tmp_config(scenario_doc()), "--out", out])
        assert code == EXIT_OK
        printed = capsys.readouterr().out
        assert "P(agree)" in printed and "agreement:" in printed
        record = json.loads(open(out).read())
        assert record["estimates"][0]["n_samples"] == 5000
        assert record["version"]

    def test_validate_is_reproducible(self, tmp_config, tmp_path):
        cfg = tmp_config(scenario_doc())
        out1, out2 = str(tmp_path / "r1.json"), str(tmp_path / "r2.json")
        assert main(["validate", "--config", cfg, "--out", out1]) == EXIT_OK
        assert main(["validate", "--config", cfg, "--out", out2]) == EXIT_OK
        r1 = json.loads(open(out1).read())
        r2 = json.loads(open(out2).read())
        r1.pop("wall_time_s"), r2.pop("wall_time_s")
        assert r1 == r2

    def test_schema_error_exit_code(self, tmp_config, capsys):
        code = main(["validate", "--config", tmp_config(scenario_doc(extra=1))])
        assert code == EXIT_CONFIG
        assert "config error" in capsys.readouterr().err

    def test_missing_file_exit_code(self):
        assert main(["validate", "--config", "/nonexistent/cfg.json"]) == EXIT_CONFIG

    def test_estimation_error_exit_code(self, tmp_config):
        # Path comparison against scalar values cannot be evaluated.
        doc = scenario_doc(agreement={"type": "threshold", "fn": "mean_abs_error", "eps": 1.0})
        doc["model"] = {"distribution": {"type": "dirac", "value": [1.0, 2.0]}}
        code = main(["validate", "--config", tmp_config(doc)])
        assert code == EXIT_ESTIMATION

    def test_ratio_identical_configs(self, tmp_config, capsys):
        cfg = tmp_config(scenario_doc())
        assert main(["ratio", cfg, cfg]) == EXIT_OK
        out = capsys.readouterr().out
        assert "K = 1.0" in out and "R = 1.0" in out

    def test_ratio_prior_scaling(self, tmp_config, capsys):
        cfg = tmp_config(scenario_doc())
        assert main(["ratio", cfg, cfg, "--prior-m", "1", "--prior-m2", "2"]) == EXIT_OK
        assert "R = 0.5" in capsys.readouterr().out

    def test_ratio_rule_mismatch_exit_code(self, tmp_config):
        a = tmp_config(scenario_doc(), "a.json")
        other = scenario_doc(agreement={"type": "threshold", "fn": "abs_diff", "eps": 2.0})
        b = tmp_config(other, "b.json")
        assert main(["ratio", a, b]) == EXIT_RULE_MISMATCH

    def test_ratio_indeterminate_status(self, tmp_config, capsys):
        doc = scenario_doc(agreement={"type": "always_false"})
        cfg = tmp_config(doc)
        assert main(["ratio", cfg, cfg]) == EXIT_OK
        assert "indeterminate" in capsys.readouterr().out


def sweep_doc(powers, prior_components):
    return {
        "model": {
            "model_function": {"family": "polynomial", "powers": powers},
            "prior": {"type": "product", "components": prior_components},
            "grid": {"start": 0.0, "stop": 2.0, "num": 10},
        },
        "data": {
            "generator": {"type": "grid_function", "name": "cos", "grid": {"start": 0.0, "stop": 2.0, "num": 10}}
        },
        "agreement": {"type": "gamma_epsilon", "gamma": 0.9, "eps": 0.1, "m": 5.0},
        "estimator": {"method": "grid", "seed": 0, "points_per_param": 9},
    }


class TestSweepCli:
    def test_two_model_sweep_outputs(self, tmp_config, tmp_path, capsys):
        a = tmp_config(
            sweep_doc([0, 2], [{"type": "normal", "mean": 1.0, "std": 0.2}, {"type": "normal", "mean": -0.5, "std": 0.1}]),
            "m1.json",
        )
        b = tmp_config(
            sweep_doc(
                [0, 2, 4],
                [
                    {"type": "normal", "mean": 1.0, "std": 0.2},
                    {"type": "normal", "mean": -0.5, "std": 0.1},
                    {"type": "normal", "mean": 1 / 24, "std": 0.02},
                ],
            ),
            "m2.json",
        )
        prefix = str(tmp_path / "out")
        code = main(
            ["sweep", a, b, "--gamma", "0.75:1.0:0.05", "--eps", "0:0.5:0.05", "--m", "5", "--out-prefix", prefix]
        )
        assert code == EXIT_OK
        printed = capsys.readouterr().out
        assert "averaged agreement ratio" in printed

        with open(prefix + "_model1.csv") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["gamma", "epsilon", "p_agree"]
        assert len(rows) - 1 == 6 * 11

        with open(prefix + "_ratio.csv") as fh:
            ratio_rows = list(csv.reader(fh))
        assert ratio_rows[0] == ["gamma", "epsilon", "ratio", "status"]
        statuses = {row[3] for row in ratio_rows[1:]}
        assert statuses <= {"ok", "indeterminate", "infinite"}

    def test_csv_floats_round_trip(self, tmp_config, tmp_path):
        a = tmp_config(
            sweep_doc([0, 2], [{"type": "normal", "mean": 1.0, "std": 0.2}, {"type": "normal", "mean": -0.5, "std": 0.1}]),
            "m1.json",
        )
        prefix = str(tmp_path / "rt")
        assert main(["sweep", a, "--gamma", "0.75:1.0:0.01", "--eps", "0:1:0.01", "--out-prefix", prefix]) == EXIT_OK
        from bvm.config import load_config, build_sweep_template
        from bvm.engine import sweep as run_sweep
        from bvm.studies import sweep_axes

        template, estimator = build_sweep_template(load_config(a))
        gammas, epsilons = sweep_axes()
        grid = run_sweep(template, gammas, epsilons, m=5.0, estimator="grid", seed=0)
        with open(prefix + "_model1.csv") as fh:
            rows = list(csv.reader(fh))[1:]
        assert len(rows) == 26 * 101
        for (g, e, p), (i, j) in zip(
            ((float(r[0]), float(r[1]), float(r[2])) for r in rows),
            ((i, j) for i in range(26) for j in range(101)),
        ):
            assert g == grid.gammas[i]
            assert e == grid.epsilons[j]
            assert p == grid.values[i, j]

    def test_bad_axis_spec(self, tmp_config):
        a = tmp_config(
            sweep_doc([0, 2], [{"type": "normal", "mean": 1.0, "std": 0.2}, {"type": "normal", "mean": -0.5, "std": 0.1}])
        )
        assert main(["sweep", a, "--gamma", "nope"]) == EXIT_CONFIG


class TestMetricCli:
    def test_reliability_subcommand(self, tmp_config, capsys):
        doc = {
            "metric": {"name": "reliability", "eps": 1.959963984540054},
            "model": {"distribution": {"type": "normal", "mean": 0.0, "std": 1.0}},
            "data": {"distribution": {"type": "dirac", "value": 0.0}},
        }
        assert main(["reliability", "--config", tmp_config(doc)]) == EXIT_OK
        assert "P(agree) = 0.95" in capsys.readouterr().out

    def test_classical_subcommand(self, tmp_config, capsys):
        doc = {
            "metric": {"name": "classical", "alpha": 0.05},
            "data": {"distribution": {"type": "student_t", "location": 0.0, "dof": 10.0, "scale": 1.75}},
        }
        assert main(["classical", "--config", tmp_config(doc)]) == EXIT_OK
        assert "0.95" in capsys.readouterr().out

    def test_power_subcommand(self, tmp_config, capsys):
        doc = {
            "metric": {"name": "power", "alpha": 0.05, "alpha_hat": 0.05, "region": "interval"},
            "model": {"distribution": {"type": "normal", "mean": 0.0, "std": 2.0}},
            "data": {"distribution": dict({"type": "student_t", "location": 0.0, "dof": 10.0, "scale": 1.75})},
        }
        assert main(["power", "--config", tmp_config(doc)]) == EXIT_OK
        out = capsys.readouterr().out
        assert "power_model_in_data" in out

    def test_evidence_subcommand(self, tmp_config, capsys):
        doc = {
            "metric": {"name": "evidence", "sigma": 0.5, "data_y": [0.7]},
            "model": {
                "model_function": {"family": "polynomial", "powers": [0]},
                "prior": {"type": "normal", "mean": 0.0, "std": 1.0},
                "grid": {"points": [0.0]},
            },
            "estimator": {"method": "mc", "samples": 20000, "seed": 0},
        }
        assert main(["evidence", "--config", tmp_config(doc)]) == EXIT_OK
        assert "log evidence" in capsys.readouterr().out

    def test_metric_name_mismatch(self, tmp_config):
        doc = {
            "metric": {"name": "classical", "alpha": 0.05},
            "data": {"distribution": {"type": "normal", "mean": 0.0, "std": 1.0}},
        }
        assert main(["reliability", "--config", tmp_config(doc)]) == EXIT_CONFIG

    def test_frequentist_subcommand(self, tmp_config, capsys):
        doc = {
            "metric": {
                "name": "frequentist",
                "model_mean": 0.0,
                "data_summary": {"mean": 0.0, "std": 1.0, "n": 10},
            },
            "agreement": {"type": "threshold", "fn": "abs_value", "eps": 0.5},
        }
        assert main(["frequentist", "--config", tmp_config(doc)]) == EXIT_OK
        assert "P(agree)" in capsys.readouterr().out

    def test_improved_reliability_subcommand(self, tmp_config, capsys):
        doc = {
            "metric": {"name": "improved_reliability", "eps": 0.5},
            "model": {
                "model_function": {"family": "polynomial", "powers": [0]},
                "prior": {"type": "product", "components": [{"type": "normal", "mean": 0.0, "std": 0.1}]},
                "grid": {"start": 0.0, "stop": 1.0, "num": 5},
            },
            "data": {"distribution": {"type": "dirac", "value": [0.0, 0.0, 0.0, 0.0, 0.0]}},
            "estimator": {"method": "mc", "samples": 5000, "seed": 1},
        }
        assert main(["improved_reliability", "--config", tmp_config(doc)]) == EXIT_OK
        assert "P(agree)" in capsys.readouterr().out

    def test_area_subcommand(self, tmp_config, capsys):
        doc = {
            "metric": {"name": "area", "samples_m": [0.0, 1.0, 2.0], "samples_d": [0.0, 1.0, 2.0]},
            "agreement": {"type": "threshold", "fn": "identity", "eps": 0.0},
        }
        assert main(["area", "--config", tmp_config(doc)]) == EXIT_OK
        assert "P(agree) = 1.0" in capsys.readouterr().out

    def test_binned_pdf_subcommand(self, tmp_config, capsys):
        doc = {
            "metric": {
                "name": "binned_pdf",
                "edges": [0.0, 0.5, 1.0],
                "model_masses": [0.5, 0.5],
                "data_counts": [5000, 5000],
                "draws": 2000,
            },
            "agreement": {"type": "threshold", "fn": "identity", "eps": 0.1},
        }
        assert main(["binned_pdf", "--config", tmp_config(doc)]) == EXIT_OK
        assert "P(agree)" in capsys.readouterr().out

    def test_divergence_subcommand(self, tmp_config, capsys):
        doc = {
            "metric": {
                "name": "divergence",
                "kind": "js",
                "edges": [0.0, 0.5, 1.0],
                "model_masses": [0.5, 0.5],
                "data_masses": [0.5, 0.5],
            },
            "agreement": {"type": "threshold", "fn": "identity", "eps": 0.0},
        }
        assert main(["divergence", "--config", tmp_config(doc)]) == EXIT_OK
        assert "P(agree) = 1.0" in capsys.readouterr().out


class TestReproduceCli:
    def test_power_study_passes(self, capsys):
        assert main(["reproduce", "ex-5.1"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "[PASS]" in out and "[FAIL]" not in out

    def test_alias(self, capsys):
        assert main(["reproduce", "power"]) == EXIT_OK

    def test_target_failure_exit_code(self, monkeypatch, capsys):
        from bvm.studies import StudyReport

        def failing_study(study, seed=0):
            rep = StudyReport(study=study, seed=seed)
            rep.check("synthetic target", False, "forced miss")
            return rep

        monkeypatch.setattr("bvm.cli.run_study", failing_study)
        assert main(["reproduce", "ex-5.1"]) == 5
        assert "[FAIL]" in capsys.readouterr().out


class TestOutputFormats:
    def test_validate_csv_format(self, tmp_config, tmp_path):
        out = str(tmp_path / "est.csv")
        code = main(["validate", "--config", tmp_config(scenario_doc()), "--out", out, "--format", "csv"])
        assert code == EXIT_OK
        rows = list(csv.reader(open(out)))
        header, values = rows[0], rows[1]
        assert "p_hat" in header and "seed" in header
        p = float(values[header.index("p_hat")])
        assert 0.0 <= p <= 1.0

    def test_ratio_csv_format(self, tmp_config, tmp_path):
        cfg = tmp_config(scenario_doc())
        out = str(tmp_path / "ratio.csv")
        assert main(["ratio", cfg, cfg, "--out", out, "--format", "csv"]) == EXIT_OK
        content = open(out).read()
        assert "label,ratio,status" in content
        assert "factor,1.0,ok" in content

    def test_output_section_defaults(self, tmp_config, tmp_path):
        doc = scenario_doc(output={"path": str(tmp_path / "rec.json"), "format": "json"})
        assert main(["validate", "--config", tmp_config(doc)]) == EXIT_OK
        record = json.loads(open(tmp_path / "rec.json").read())
        assert record["command"] == "validate"
