import json

import pytest

from earthworm.checkpoint import CheckpointError
from earthworm.montecarlo import ExperimentPlan, SampleTable, derive_seed, run_sweep
from earthworm.rng import splitmix64_stream


def rows_without_walltime(table):
    return [
        (r.dim, r.n, r.replica, r.seed, r.s_n, r.created_total, r.tan_total)
        for r in table.sorted_rows()
    ]


class TestExperimentPlan:
    def test_valid_plan(self):
        plan = ExperimentPlan(dim=2, n_grid=(10, 100), replicas=3, seed_base=1)
        assert plan.n_grid == (10, 100)

    def test_grid_must_increase(self):
        with pytest.raises(ValueError):
            ExperimentPlan(dim=2, n_grid=(100, 10), replicas=1, seed_base=1)
        with pytest.raises(ValueError):
            ExperimentPlan(dim=2, n_grid=(10, 10), replicas=1, seed_base=1)

    def test_grid_nonempty(self):
        with pytest.raises(ValueError):
            ExperimentPlan(dim=2, n_grid=(), replicas=1, seed_base=1)

    def test_replicas_positive(self):
        with pytest.raises(ValueError):
            ExperimentPlan(dim=2, n_grid=(10,), replicas=0, seed_base=1)

    def test_dim_at_least_two(self):
        with pytest.raises(ValueError):
            ExperimentPlan(dim=1, n_grid=(10,), replicas=1, seed_base=1)

    def test_row_seeds_are_the_splitmix_stream(self):
        plan = ExperimentPlan(dim=2, n_grid=(10, 20, 30), replicas=2, seed_base=77)
        seeds = plan.row_seeds()
        stream = splitmix64_stream(77, 6)
        expected = {}
        idx = 0
        for n in (10, 20, 30):
            for r in range(2):
                expected[(n, r)] = stream[idx]
                idx += 1
        assert seeds == expected
        assert len(set(seeds.values())) == 6  # disjoint streams

    def test_row_seeds_match_derive_seed(self):
        plan = ExperimentPlan(dim=2, n_grid=(5, 10), replicas=2, seed_base=3)
        seeds = plan.row_seeds()
        assert seeds[(5, 0)] == derive_seed(3, 0)
        assert seeds[(10, 1)] == derive_seed(3, 3)


class TestRunSweep:
    def test_shape_and_order(self):
        plan = ExperimentPlan(dim=2, n_grid=(10, 100), replicas=2, seed_base=42)
        table = run_sweep(plan)
        assert [(r.n, r.replica) for r in table.sorted_rows()] == [
            (10, 0),
            (10, 1),
            (100, 0),
            (100, 1),
        ]
        for row in table.rows:
            assert 1 <= row.s_n <= row.n + 1
            assert row.s_n == row.created_total
            assert row.tan_total is None

    def test_zero_step_row(self):
        plan = ExperimentPlan(dim=2, n_grid=(0,), replicas=1, seed_base=5)
        table = run_sweep(plan)
        assert len(table.rows) == 1
        assert table.rows[0].s_n == 1

    def test_parallelism_does_not_change_results(self):
        plan = ExperimentPlan(dim=2, n_grid=(50, 200), replicas=3, seed_base=42)
        serial = run_sweep(plan, parallelism=1)
        parallel = run_sweep(plan, parallelism=4)
        assert rows_without_walltime(serial) == rows_without_walltime(parallel)

    def test_tracked_sweep_carries_tan_counts(self):
        plan = ExperimentPlan(dim=2, n_grid=(100,), replicas=2, seed_base=9, track_visits=True)
        table = run_sweep(plan)
        for row in table.rows:
            assert row.tan_total is not None
            assert 0 <= row.tan_total <= row.n

    def test_means_increase_with_n(self):
        plan = ExperimentPlan(dim=2, n_grid=(100, 1000, 10000), replicas=5, seed_base=2)
        table = run_sweep(plan, parallelism=2)
        means = [m for _, m in table.mean_pairs()]
        assert means[0] < means[1] < means[2]

    def test_parallelism_validated(self):
        plan = ExperimentPlan(dim=2, n_grid=(10,), replicas=1, seed_base=1)
        with pytest.raises(ValueError):
            run_sweep(plan, parallelism=0)


class TestSweepCheckpoint:
    def test_resume_reproduces_uninterrupted_table(self, tmp_path):
        plan = ExperimentPlan(dim=2, n_grid=(50, 150), replicas=2, seed_base=11)
        straight = run_sweep(plan)

        ckpt = tmp_path / "sweep.json"
        full = run_sweep(plan, checkpoint_path=str(ckpt))
        assert rows_without_walltime(full) == rows_without_walltime(straight)

        # craft an interrupted checkpoint: keep only the first completed row
        payload = json.loads(ckpt.read_text())
        payload["completed"] = payload["completed"][:1]
        ckpt.write_text(json.dumps(payload))

        resumed = run_sweep(plan, checkpoint_path=str(ckpt))
        assert rows_without_walltime(resumed) == rows_without_walltime(straight)

    def test_plan_mismatch_rejected(self, tmp_path):
        plan = ExperimentPlan(dim=2, n_grid=(50,), replicas=1, seed_base=11)
        ckpt = tmp_path / "sweep.json"
        run_sweep(plan, checkpoint_path=str(ckpt))
        other = ExperimentPlan(dim=2, n_grid=(50,), replicas=1, seed_base=12)
        with pytest.raises(CheckpointError, match="plan"):
            run_sweep(other, checkpoint_path=str(ckpt))

    def test_corrupt_checkpoint_rejected(self, tmp_path):
        plan = ExperimentPlan(dim=2, n_grid=(50,), replicas=1, seed_base=11)
        ckpt = tmp_path / "sweep.json"
        ckpt.write_text("{not json")
        with pytest.raises(CheckpointError):
            run_sweep(plan, checkpoint_path=str(ckpt))


class TestSampleTable:
    def test_validate_rejects_duplicates(self):
        plan = ExperimentPlan(dim=2, n_grid=(10,), replicas=1, seed_base=1)
        table = run_sweep(plan)
        table.rows.append(table.rows[0])
        with pytest.raises(ValueError, match="duplicate"):
            table.validate()

    def test_validate_rejects_out_of_range_s(self):
        plan = ExperimentPlan(dim=2, n_grid=(10,), replicas=1, seed_base=1)
        table = run_sweep(plan)
        bad = table.rows[0].__class__(**{**table.rows[0].as_dict(), "s_n": 99})
        with pytest.raises(ValueError, match="s_n"):
            SampleTable(rows=[bad]).validate()

    def test_tan_rate_pairs_requires_counts(self):
        plan = ExperimentPlan(dim=2, n_grid=(10,), replicas=1, seed_base=1)
        table = run_sweep(plan)
        with pytest.raises(ValueError, match="tan"):
            table.tan_rate_pairs()
