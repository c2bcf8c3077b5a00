import json
import subprocess
import sys

import pytest

from axiscone.cli import main
from axiscone.errors import ConfigInvalid
from axiscone.harness import (
    ExperimentConfig,
    Report,
    generate_instance,
    parse_report,
    replay,
    run,
    selftest,
)
from axiscone.operators import top_eigen
from axiscone.positivity import VerdictStatus, improves_positivity_axis


class TestConfig:
    def test_defaults_filled(self):
        config = ExperimentConfig(kind="cone_axioms", seed=1, params={})
        assert config.params["dims"] == [2, 3, 5, 8]
        assert config.params["samples"] == 1000

    def test_unknown_kind(self):
        with pytest.raises(ConfigInvalid, match="kind"):
            ExperimentConfig(kind="fourier", seed=0, params={})

    def test_missing_seed(self):
        with pytest.raises(ConfigInvalid, match="seed"):
            ExperimentConfig.from_json('{"kind": "pf_verify"}')

    def test_seed_range(self):
        with pytest.raises(ConfigInvalid, match="seed"):
            ExperimentConfig(kind="pf_verify", seed=-1, params={})
        with pytest.raises(ConfigInvalid, match="seed"):
            ExperimentConfig(kind="pf_verify", seed=2**64, params={})

    def test_unknown_param(self):
        with pytest.raises(ConfigInvalid, match="volume"):
            ExperimentConfig(kind="cone_axioms", seed=0, params={"volume": 11})

    def test_bad_json(self):
        with pytest.raises(ConfigInvalid):
            ExperimentConfig.from_json("{not json")

    def test_grid_shorthand(self):
        config = ExperimentConfig(
            kind="perturb_sweep", seed=0,
            params={"kappa_grid": {"start": -0.1, "stop": 0.1, "num": 5}},
        )
        assert config.params["kappa_grid"] == pytest.approx([-0.1, -0.05, 0.0, 0.05, 0.1])

    def test_canonical_json_sorted(self):
        config = ExperimentConfig(kind="cone_axioms", seed=3, params={})
        parsed = json.loads(config.canonical_json())
        assert parsed["kind"] == "cone_axioms"
        assert parsed["seed"] == 3


class TestGenerateInstance:
    def test_deterministic(self):
        a = generate_instance("psd-simple", 5, 99)
        b = generate_instance("psd-simple", 5, 99)
        assert a.matrix.tobytes() == b.matrix.tobytes()

    def test_degenerate_flavor(self):
        a = generate_instance("degenerate-top", 3, 4)
        _, _, simple = top_eigen(a)
        assert not simple

    def test_psd_simple_flavor(self):
        a = generate_instance("psd-simple", 4, 4)
        _, u0, _ = top_eigen(a)
        assert improves_positivity_axis(a, u0).status is VerdictStatus.CERTIFIED_TRUE

    def test_unknown_flavor(self):
        with pytest.raises(ValueError):
            generate_instance("toeplitz", 3, 0)


class TestRunners:
    def test_cone_axioms_clean(self):
        config = ExperimentConfig(kind="cone_axioms", seed=7,
                                  params={"dims": [5], "samples": 1000})
        report = run(config)
        assert report.passed
        violations = [int(row[5]) for row in report.rows]
        assert sum(violations) == 0

    def test_perturb_reproduces_threshold(self):
        report = run(ExperimentConfig(kind="perturb_sweep", seed=0, params={}))
        assert report.passed
        header = dict(report.header_extra)
        assert float(header["budget_kappa_threshold"]) == pytest.approx(
            0.0478864, abs=1e-7
        )

    def test_determinism_rows(self):
        config = ExperimentConfig(kind="pf_verify", seed=21,
                                  params={"dims": [3], "instances_per_flavor": 2})
        first = run(config).render(timestamp=False)
        second = run(
            ExperimentConfig(kind="pf_verify", seed=21,
                             params={"dims": [3], "instances_per_flavor": 2})
        ).render(timestamp=False)
        assert first == second

    def test_jobs_do_not_change_output(self):
        config = ExperimentConfig(kind="cone_axioms", seed=3,
                                  params={"dims": [2, 3, 4], "samples": 100})
        serial = run(config, jobs=1).render(timestamp=False)
        parallel = run(config, jobs=4).render(timestamp=False)
        assert serial == parallel

    def test_schrodinger_small(self):
        config = ExperimentConfig(
            kind="schrodinger", seed=1,
            params={"N": 4, "h": 0.5, "e_grid": [-0.004, 0.0, 0.004], "s0": 1.0},
        )
        report = run(config)
        assert report.passed
        stages = {row[0] for row in report.rows}
        assert stages == {"base", "sweep", "orthant_demo"}

    def test_schrodinger_model_file(self, tmp_path):
        model = tmp_path / "model.txt"
        model.write_text(
            "N 4\nh 0.5\npotential harmonic\nvector_potential gaussian\n"
            "e_grid -0.004 0 0.004\ns0 1.0\n"
        )
        config = ExperimentConfig(kind="schrodinger", seed=1,
                                  params={"model_path": str(model)})
        report = run(config)
        assert report.passed


class TestReportFormat:
    def test_roundtrip_parse(self):
        config = ExperimentConfig(kind="pf_verify", seed=13,
                                  params={"dims": [3], "instances_per_flavor": 1})
        report = run(config)
        header, columns, rows = parse_report(report.render(timestamp=False))
        assert header["kind"] == "pf_verify"
        assert columns == report.columns
        assert len(rows) == len(report.rows)

    def test_timestamp_toggle(self):
        report = Report(kind="pf_verify", seed=0, config_json="{}",
                        columns=["ok"], rows=[["1"]])
        with_ts = report.render(timestamp=True)
        without = report.render(timestamp=False)
        assert "# timestamp:" in with_ts
        assert "# timestamp:" not in without


class TestReplay:
    def pf_report_text(self):
        config = ExperimentConfig(kind="pf_verify", seed=31,
                                  params={"dims": [3, 4], "instances_per_flavor": 2})
        return run(config).render(timestamp=False)

    def test_replays_all_certified_false(self):
        results = replay(self.pf_report_text())
        assert results  # degenerate flavor guarantees CertifiedFalse rows
        assert all(r.reproduced for r in results)

    def test_detects_corrupted_witness(self):
        text = self.pf_report_text()
        lines = text.splitlines()
        for i, line in enumerate(lines):
            if ",CertifiedFalse," in line and ",improves_positivity_axis," in line:
                parts = line.split(",")
                witness = [float(x) for x in parts[5].split()]
                witness[0] += 25.0  # push the ray far off the boundary
                parts[5] = " ".join(format(x, ".17g") for x in witness)
                lines[i] = ",".join(parts)
                break
        corrupted = replay("\n".join(lines))
        assert any(not r.reproduced for r in corrupted)


class TestSelftest:
    def test_all_criteria_pass(self):
        report = selftest(seed=0)
        assert report.passed
        assert len(report.rows) == 9

    def test_byte_identical(self):
        first = selftest(seed=0).render(timestamp=False)
        second = selftest(seed=0).render(timestamp=False)
        assert first.encode() == second.encode()


class TestCli:
    def test_verify_writes_report(self, tmp_path, capsys):
        out = tmp_path / "report.csv"
        code = main(["verify", "--kind", "cone_axioms", "--seed", "3",
                     "--out", str(out), "--no-timestamp"])
        assert code == 0
        text = out.read_text()
        assert "# kind: cone_axioms" in text

    def test_config_file(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({
            "kind": "pf_verify", "seed": 5,
            "params": {"dims": [3], "instances_per_flavor": 1},
        }))
        out = tmp_path / "r.csv"
        assert main(["verify", "--config", str(cfg), "--out", str(out)]) == 0
        assert "pf_verify" in out.read_text()

    def test_malformed_config_exits_2(self, tmp_path, capsys):
        cfg = tmp_path / "bad.json"
        cfg.write_text('{"kind": "pf_verify"}')
        assert main(["verify", "--config", str(cfg)]) == 2
        assert "config error" in capsys.readouterr().err

    def test_kind_subcommand_mismatch_exits_2(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"kind": "schrodinger", "seed": 0}))
        assert main(["perturb", "--config", str(cfg)]) == 2

    def test_replay_roundtrip(self, tmp_path):
        out = tmp_path / "pf.csv"
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({
            "kind": "pf_verify", "seed": 8,
            "params": {"dims": [3], "instances_per_flavor": 2},
        }))
        assert main(["verify", "--config", str(cfg), "--out", str(out),
                     "--no-timestamp"]) == 0
        assert main(["replay", str(out)]) == 0

    def test_replay_corrupted_report_exits_1(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({
            "kind": "pf_verify", "seed": 31,
            "params": {"dims": [3], "instances_per_flavor": 2},
        }))
        out = tmp_path / "pf.csv"
        assert main(["verify", "--config", str(cfg), "--out", str(out),
                     "--no-timestamp"]) == 0
        lines = out.read_text().splitlines()
        for i, line in enumerate(lines):
            if ",CertifiedFalse," in line and ",improves_positivity_axis," in line:
                parts = line.split(",")
                witness = [float(x) for x in parts[5].split()]
                witness[0] += 25.0
                parts[5] = " ".join(format(x, ".17g") for x in witness)
                lines[i] = ",".join(parts)
                break
        corrupted = tmp_path / "corrupted.csv"
        corrupted.write_text("\n".join(lines) + "\n")
        assert main(["replay", str(corrupted)]) == 1
        assert "FAILED to reproduce" in capsys.readouterr().out

    def test_seed_override_changes_rows(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({
            "kind": "pf_verify", "seed": 8,
            "params": {"dims": [3], "instances_per_flavor": 1},
        }))
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        assert main(["verify", "--config", str(cfg), "--out", str(a),
                     "--no-timestamp"]) == 0
        assert main(["verify", "--config", str(cfg), "--seed", "9", "--out", str(b),
                     "--no-timestamp"]) == 0
        assert a.read_text() != b.read_text()

    def test_degenerate_model_is_usage_error(self, tmp_path, capsys):
        # a decoupled double well has a ground doublet below tau_gap: the
        # experiment is ill-posed, which is a usage error rather than a bug
        n_half, h = 8, 0.5
        xs = [abs(j) * h for j in range(-n_half, n_half + 1)]
        potential = [x * x + (1e12 if x == 0.0 else 0.0) for x in xs]
        cfg = tmp_path / "well.json"
        cfg.write_text(json.dumps({
            "kind": "schrodinger", "seed": 0,
            "params": {"N": n_half, "h": h, "potential": potential,
                       "e_grid": [0.0], "s0": 1.0},
        }))
        assert main(["schrodinger", "--config", str(cfg)]) == 2
        assert "DegenerateBottom" in capsys.readouterr().err

    def test_module_entrypoint(self, tmp_path):
        out = tmp_path / "cli.csv"
        proc = subprocess.run(
            [sys.executable, "-m", "axiscone.cli", "verify", "--kind", "cone_axioms",
             "--seed", "1", "--out", str(out), "--no-timestamp"],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0
        assert out.exists()
