import json

import numpy as np
import pytest

from hclab.battery import (
    BatteryConfig,
    hereditary_sample,
    orbit_coverage,
    run_battery,
    sequence_battery,
)
from hclab.linalg import Ball, basis_vector, cvec
from hclab.zoo import make_operator


def e(i, d):
    return basis_vector(i, d)


def canonical(doc):
    return json.dumps(doc, sort_keys=True)


class TestConfig:
    def test_defaults_are_documented_values(self):
        cfg = BatteryConfig()
        assert (cfg.d, cfg.n_max, cfg.ball_samples) == (32, 64, 20)
        assert (cfg.radius_min, cfg.radius_max) == (0.05, 1.0)
        assert (cfg.m_copies, cfg.hs_dim) == (3, 8)

    def test_validation(self):
        with pytest.raises(ValueError):
            BatteryConfig(ball_samples=0)
        with pytest.raises(ValueError):
            BatteryConfig(radius_min=0.0)
        with pytest.raises(ValueError):
            BatteryConfig(patch_span=40, d=32)

    def test_json_round_trip(self):
        cfg = BatteryConfig(d=24, rng_seed=9)
        assert BatteryConfig.from_json(cfg.to_json()) == cfg


class TestOrbitCoverage:
    def test_identity_misses_far_targets(self):
        T = make_operator("identity")
        targets = [Ball(e(2, 8), 0.3), Ball(3 * e(1, 8), 0.3)]
        assert orbit_coverage(T, e(1, 8), targets, 10, 8) == 0.0

    def test_index_zero_counts(self):
        T = make_operator("rolewicz:2.0")
        x = e(1, 8)
        assert orbit_coverage(T, x, [Ball(x, 1e-3)], 4, 8) == 1.0

    def test_shift_orbit_covers_scaled_targets(self):
        T = make_operator("rolewicz:2.0")
        x = cvec([2.0 ** (-(j + 1) ** 2) for j in range(6)])
        targets = [Ball(2.0 ** (-3) * e(1, 16), 0.5), Ball(np.zeros(16), 0.5)]
        frac = orbit_coverage(T, np.concatenate([x, np.zeros(10)]), targets, 8, 16)
        assert frac > 0.0


class TestHereditary:
    def test_rolewicz_passes(self):
        cfg = BatteryConfig(d=16, n_max=32, ball_samples=10, subsequence_samples=5, rng_seed=1)
        out = hereditary_sample(make_operator("rolewicz:2.0"), range(1, 33), cfg)
        assert out["verdict"] == "pass"
        assert len(out["records"]) == 50

    def test_identity_fails(self):
        cfg = BatteryConfig(d=16, n_max=16, ball_samples=6, subsequence_samples=3, rng_seed=1)
        out = hereditary_sample(make_operator("identity"), range(1, 17), cfg)
        assert out["verdict"] == "fail"

    def test_contraction_fails(self):
        cfg = BatteryConfig(d=16, n_max=16, ball_samples=6, subsequence_samples=3, rng_seed=1)
        out = hereditary_sample(make_operator("rolewicz:0.5"), range(1, 17), cfg)
        assert out["verdict"] == "fail"

    def test_full_sequence_always_sampled(self):
        cfg = BatteryConfig(d=16, n_max=16, ball_samples=2, subsequence_samples=3, rng_seed=4)
        out = hereditary_sample(make_operator("rolewicz:2.0"), range(1, 17), cfg)
        first = [r for r in out["records"] if r["subsequence"] == 0]
        assert all(r["stride"] == 1 and r["offset"] == 0 for r in first)


@pytest.fixture(scope="module")
def cfg():
    return BatteryConfig(ball_samples=8, subsequence_samples=3, rng_seed=7)


class TestRunBattery:

    def test_rolewicz_all_pass(self, cfg):
        rep = run_battery(make_operator("rolewicz:2.0"), cfg)
        assert set(rep.verdicts().values()) == {"pass"}
        assert rep.consistent and rep.overall_pass

    @pytest.mark.parametrize("op_id", ["identity", "rolewicz:0.5", "diag:0.5"])
    def test_negative_controls_fail_consistently(self, cfg, op_id):
        rep = run_battery(make_operator(op_id), cfg)
        assert set(rep.verdicts().values()) == {"fail"}
        assert rep.consistent and not rep.overall_pass

    def test_salas_passes_where_evaluated(self):
        cfg = BatteryConfig(
            d=48, n_max=40, hs_dim=18, m_copies=2, ball_samples=8,
            subsequence_samples=3, rng_seed=3, patch_span=2, patch_dim=2,
        )
        rep = run_battery(make_operator("salas:ones"), cfg)
        verdicts = rep.verdicts()
        assert verdicts["certificate"] == "not_evaluated"
        assert rep.conditions["certificate"]["reason"]
        evaluated = {k: v for k, v in verdicts.items() if v != "not_evaluated"}
        assert set(evaluated.values()) == {"pass"}
        assert rep.consistent

    def test_seed_reproduces_identical_report(self, cfg):
        rep1 = run_battery(make_operator("rolewicz:2.0"), cfg)
        rep2 = run_battery(make_operator("rolewicz:2.0"), cfg)
        assert canonical(rep1.to_json()) == canonical(rep2.to_json())

    def test_different_seed_changes_samples(self, cfg):
        rep1 = run_battery(make_operator("rolewicz:2.0"), cfg)
        rep2 = run_battery(make_operator("rolewicz:2.0"), cfg.override(rng_seed=8))
        assert canonical(rep1.to_json()) != canonical(rep2.to_json())

    def test_monotone_evidence_on_shared_prefix(self):
        base = BatteryConfig(ball_samples=5, subsequence_samples=2, n_max=24, rng_seed=11)
        more = base.override(ball_samples=9, n_max=48)
        rep_base = run_battery(make_operator("rolewicz:2.0"), base)
        rep_more = run_battery(make_operator("rolewicz:2.0"), more)
        for name in ("direct_sum", "left_multiplication", "through_zero"):
            recs_base = rep_base.conditions[name]["records"]
            recs_more = rep_more.conditions[name]["records"]
            for rb, rm in zip(recs_base, recs_more):
                if rb["feasible"]:
                    assert rm["feasible"]


class TestSequenceBattery:
    def test_rolewicz_full_sequence(self):
        cfg = BatteryConfig(ball_samples=8, rng_seed=5)
        doc = sequence_battery(make_operator("rolewicz:2.0"), range(1, 33), cfg)
        assert doc["verdicts"] == {
            "sequence_and_decay": "pass",
            "eventual": "pass",
            "certificate": "pass",
        }
        assert doc["agree"]

    def test_identity_all_fail(self):
        cfg = BatteryConfig(ball_samples=8, rng_seed=5)
        doc = sequence_battery(make_operator("identity"), range(1, 33), cfg)
        assert doc["verdicts"]["sequence_and_decay"] == "fail"
        assert doc["verdicts"]["eventual"] == "fail"
        assert doc["verdicts"]["certificate"] == "fail"
        assert doc["agree"]

    def test_sparse_powers_of_two(self):
        cfg = BatteryConfig(ball_samples=8, rng_seed=5)
        doc = sequence_battery(make_operator("rolewicz:2.0"), [2, 4, 8, 16], cfg)
        # kernel hits are exact regardless of sparsity
        assert doc["verdicts"]["sequence_and_decay"] == "pass"
        assert doc["verdicts"]["eventual"] == "pass"
        assert doc["agree"]

    def test_eventual_records_have_thresholds(self):
        cfg = BatteryConfig(ball_samples=4, rng_seed=5)
        doc = sequence_battery(make_operator("rolewicz:2.0"), range(1, 25), cfg)
        assert all(rec["N"] is not None for rec in doc["eventual"])
