import csv
import math
import subprocess
import sys

import numpy as np
import pytest

from genmem.cli import main
from genmem.harness import (ExperimentConfig, TrialSpec, correlation_report, experiment_one_trials,
                            experiment_two_trials, fmt, pearson, report_trial_dir, run_experiment)
from genmem.network import Genotype, NetworkTopology, save_genome
from genmem.plasticity import PlasticityConfig
from genmem.trial import run_trial
from genmem.world import SimConfig, save_world, t_maze

SIM = SimConfig(max_steps=300)


@pytest.fixture
def genome_file(tmp_path, random_genotype):
    path = tmp_path / "genome.json"
    save_genome(random_genotype, path)
    return path


def read_rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


class TestTrialLists:
    def test_experiment_two_structure(self):
        trials = experiment_two_trials()
        assert len(trials) == 6
        assert [t.obstacles for t in trials] == [0, 0, 2, 2, 4, 4]
        assert {t.direction for t in trials} == {"left", "right"}
        # x {ga, hebbian} gives the six configurations
        assert len({(t.obstacles, mode) for t in trials for mode in ("ga", "hebbian")}) == 6

    def test_experiment_one(self):
        assert [(t.luminosity, t.direction) for t in experiment_one_trials()] == [
            (1.0, "left"), (1.0, "right"), (0.1, "left"), (0.1, "right")]

    def test_names_unique(self):
        names = [t.name for t in experiment_one_trials() + experiment_two_trials()]
        assert len(set(names)) == len(names) - 2  # base rows appear in both lists

    def test_fmt(self):
        assert fmt(None) == "NA" and fmt(3) == "3" and fmt(0.1234567) == "0.123457" and fmt(True) == "1"


class TestRunExperiment:
    def test_ga_mode_forces_plasticity_off(self, random_genotype):
        cfg = ExperimentConfig(random_genotype, "ga", PlasticityConfig(0.1))
        assert not cfg.plasticity.enabled

    def test_bad_mode(self, random_genotype):
        with pytest.raises(ValueError):
            ExperimentConfig(random_genotype, "sgd")

    def test_ga_weight_fields_absent(self, tmp_path, genome_file):
        res = run_experiment(ExperimentConfig(genome_file, "ga", sim=SIM, out_dir=tmp_path / "o"))
        assert all(r["weight_change_cumulative"] is None for r in res.rows)
        rows = read_rows(tmp_path / "o" / "metrics.csv")
        assert len(rows) == 2 and all(r["weight_change_per_step"] == "NA" for r in rows)
        assert not list((tmp_path / "o").glob("trials/*/weights.csv"))

    def test_empty_trial_list(self, tmp_path, genome_file):
        res = run_experiment(ExperimentConfig(genome_file, trials=[], sim=SIM, out_dir=tmp_path))
        assert res.rows == []
        assert len((tmp_path / "metrics.csv").read_text().splitlines()) == 1

    def test_files_written(self, tmp_path, genome_file):
        trials = experiment_two_trials()
        run_experiment(ExperimentConfig(genome_file, "hebbian", PlasticityConfig(1e-4), trials, sim=SIM,
                                        out_dir=tmp_path))
        for t in trials:
            d = tmp_path / "trials" / t.name
            for f in ("trajectory.csv", "fitness.csv", "sensors.csv", "weights.csv"):
                assert (d / f).exists()
            traj = read_rows(d / "trajectory.csv")
            assert list(traj[0]) == ["step", "t", "x", "y", "heading", "success_flag"]
            assert all(len(v.split(".")[1]) == 6 for v in traj[1].values() if "." in v)
        assert (tmp_path / "summary.json").exists()

    def test_byte_identical_rerun(self, tmp_path, genome_file):
        outs = []
        for k in range(2):
            out = tmp_path / f"run{k}"
            run_experiment(ExperimentConfig(genome_file, "hebbian", PlasticityConfig(0.002),
                                            experiment_one_trials(), sim=SIM, out_dir=out))
            outs.append(out)
        files = sorted(p.relative_to(outs[0]) for p in outs[0].rglob("*") if p.is_file())
        assert files
        for f in files:
            assert (outs[0] / f).read_bytes() == (outs[1] / f).read_bytes(), f

    def test_metrics_self_consistent(self, random_genotype):
        res = run_experiment(ExperimentConfig(random_genotype, "hebbian", PlasticityConfig(0.002),
                                              experiment_two_trials(), sim=SIM))
        for r in res.results:
            traj = r.outcome.trajectory
            path = float(np.sum(np.hypot(*np.diff(traj, axis=0).T)))
            elapsed = r.outcome.steps_taken * SIM.dt
            assert r.metrics.path_length == pytest.approx(path, abs=1e-12)
            assert r.metrics.average_speed == pytest.approx(path / elapsed, abs=1e-9)
            assert r.metrics.min_position_error <= r.metrics.final_position_error
            assert (r.metrics.time_to_goal is None) == (not r.metrics.success)

    def test_ga_equals_hebbian_zero_rate(self, random_genotype):
        trials = experiment_two_trials()
        ga = run_experiment(ExperimentConfig(random_genotype, "ga", trials=trials, sim=SIM))
        hz = run_experiment(ExperimentConfig(random_genotype, "hebbian", PlasticityConfig(0.0), trials, sim=SIM))
        for a, b in zip(ga.results, hz.results):
            assert np.array_equal(a.outcome.trajectory, b.outcome.trajectory)
        assert all(r["weight_change_cumulative"] == 0.0 for r in hz.rows)

    def test_topology_mismatch_file(self, tmp_path):
        path = tmp_path / "g.json"
        save_genome(Genotype.zeros(NetworkTopology((16, 2))), path)
        with pytest.raises(ValueError):
            run_experiment(ExperimentConfig(path, sim=SIM))


class TestCorrelation:
    def test_pearson(self):
        assert pearson([1, 2, 3], [2, 4, 6]) == (pytest.approx(1.0), True)
        r, ok = pearson([1, 1, 1], [1, 2, 3])
        assert math.isnan(r) and not ok

    def test_constant_fitness(self, rng):
        log = np.column_stack([np.full(20, 0.5), np.zeros(20), rng.uniform(size=20)])
        rep = correlation_report(log, rng.uniform(size=(20, 16)))
        assert math.isnan(rep.fitness_change_r) and not rep.fitness_change_defined
        assert all(rep.sensor_defined.values())

    def test_disabled_gives_zero_change(self, random_genotype):
        _, _, log = run_trial(random_genotype, t_maze(), PlasticityConfig(0.0), config=SIM)
        assert np.all(log.sum_abs_delta == 0.0)
        rep = correlation_report(log, np.zeros((len(log.fitness), 16)))
        assert not any(rep.sensor_defined.values())

    def test_doubling_rate_doubles_change(self, random_genotype):
        maze = t_maze()
        out1, _, log1 = run_trial(random_genotype, maze, PlasticityConfig(1e-8), config=SIM)
        out2, _, log2 = run_trial(random_genotype, maze, PlasticityConfig(2e-8), config=SIM)
        assert len(log1.fitness) == len(log2.fitness)
        np.testing.assert_allclose(log2.sum_abs_delta, 2 * log1.sum_abs_delta, rtol=1e-4)
        r1 = correlation_report(log1, out1.sensors)
        r2 = correlation_report(log2, out2.sensors)
        assert r2.fitness_change_r == pytest.approx(r1.fitness_change_r, abs=1e-4)
        for k in r1.sensor_r:
            if r1.sensor_defined[k]:
                assert r2.sensor_r[k] == pytest.approx(r1.sensor_r[k], abs=1e-4)

    def test_length_mismatch(self, rng):
        with pytest.raises(ValueError):
            correlation_report(rng.uniform(size=(10, 4)), rng.uniform(size=(9, 16)))

    def test_report_dir(self, tmp_path, genome_file):
        run_experiment(ExperimentConfig(genome_file, "hebbian", PlasticityConfig(0.002), sim=SIM, out_dir=tmp_path))
        d = tmp_path / "trials" / TrialSpec(True).name
        rep = report_trial_dir(d)
        rows = read_rows(d / "correlation.csv")
        assert [r["signal"] for r in rows][:2] == ["F", "light0"] and len(rows) == 17
        assert len(rep.fitness) == len(read_rows(d / "weights.csv"))


class TestCli:
    def test_full_pipeline(self, tmp_path, capsys):
        world = tmp_path / "world.json"
        assert main(["world", "--out", str(world)]) == 0
        evo = tmp_path / "evo"
        assert main(["evolve", "--world", str(world), "--out", str(evo), "--population", "6",
                     "--generations", "2", "--elitism", "1", "--max-steps", "100"]) == 0
        assert (evo / "champion.json").exists() and (evo / "generations.csv").exists()
        run = tmp_path / "run"
        assert main(["run", "--world", str(world), "--genome", str(evo / "champion.json"), "--mode", "hebbian",
                     "--base-rate", "0.001", "--luminosity", "0.1", "--obstacles", "2", "--max-steps", "200",
                     "--out", str(run)]) == 0
        assert len(read_rows(run / "metrics.csv")) == 2
        assert main(["report", "--out", str(run)]) == 0
        assert len(list(run.glob("trials/*/correlation.csv"))) == 2
        assert "r(F, sum|dW|)" in capsys.readouterr().out

    def test_missing_genome(self, tmp_path):
        assert main(["run", "--genome", str(tmp_path / "nope.json"), "--out", str(tmp_path / "o")]) != 0

    def test_bad_world(self, tmp_path, genome_file):
        bad = tmp_path / "w.json"
        bad.write_text("{not json")
        assert main(["run", "--world", str(bad), "--genome", str(genome_file), "--out", str(tmp_path / "o")]) != 0

    def test_report_on_ga_run(self, tmp_path, genome_file):
        assert main(["run", "--genome", str(genome_file), "--max-steps", "50", "--out", str(tmp_path)]) == 0
        assert main(["report", "--out", str(tmp_path)]) != 0

    def test_world_file_carries_sim(self, tmp_path, genome_file):
        world = tmp_path / "w.json"
        save_world(world, t_maze(), SimConfig(max_steps=40))
        assert main(["run", "--world", str(world), "--genome", str(genome_file), "--out", str(tmp_path / "o")]) == 0
        steps = [len(read_rows(p)) for p in (tmp_path / "o").glob("trials/*/fitness.csv")]
        assert steps and max(steps) <= 40

    def test_module_entry(self):
        out = subprocess.run([sys.executable, "-m", "genmem", "--help"], capture_output=True, text=True)
        assert out.returncode == 0 and "evolve" in out.stdout
