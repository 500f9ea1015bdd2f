import math

import numpy as np
import pytest

import rnachannel as rc
from rnachannel.kinetics import Composition
from rnachannel.mutation import ErrorCounts

KIN = rc.KineticParams.from_rate(22.0)


def small_cfg(**over):
    base = dict(
        n0=64,
        rates=rc.ErrorRates(2e-3, 2e-3, 1e-3),
        kinetics=KIN,
        t_max=20.0,
        checkpoints=np.linspace(0.0, 20.0, 5),
        pop_cap=256,
        trials=4,
        master_seed=17,
    )
    base.update(over)
    return rc.SimConfig(**base)


def _traj_tuple(res):
    return [
        (s.time, s.population, s.live, s.mean_generation, s.del_rate, s.ins_rate,
         s.sub_rate, tuple(s.del_rate_by_letter))
        for s in res.checkpoints
    ]


def test_same_seed_reproduces_exactly():
    cfg = small_cfg()
    a = rc.run_trial(cfg, 0)
    b = rc.run_trial(cfg, 0)
    assert _traj_tuple(a) == _traj_tuple(b)


def test_trial_index_changes_the_stream():
    cfg = small_cfg()
    a = rc.run_trial(cfg, 0)
    b = rc.run_trial(cfg, 1)
    assert _traj_tuple(a) != _traj_tuple(b)


def test_lineage_recording_does_not_perturb_the_trajectory():
    cfg = small_cfg()
    plain = rc.run_trial(cfg, 2)
    recorded = rc.run_trial(cfg, 2, record_lineage=True)
    assert _traj_tuple(plain) == _traj_tuple(recorded)
    assert recorded.lineage is not None


def test_noiseless_growth_doubles_per_replication_time():
    horizon = 10 * 64 / 22.0  # ten expected doubling times
    cfg = small_cfg(
        rates=rc.ErrorRates(),
        t_max=horizon,
        checkpoints=np.array([0.0, horizon]),
        pop_cap=1 << 20,
        master_seed=0,
    )
    res = rc.run_trial(cfg, 0)
    first, last = res.checkpoints
    assert first.live == 1 and first.population == 1.0
    assert first.mean_generation == 0.0
    assert 400 < last.live < 2600  # 2^10 give or take branching noise
    assert 4.0 < last.mean_generation < 5.6
    assert last.del_rate == 0.0 and last.ins_rate == 0.0 and last.sub_rate == 0.0


def test_culling_caps_live_population_and_multiplier_compensates():
    horizon = 10 * 64 / 22.0
    base = dict(
        rates=rc.ErrorRates(),
        t_max=horizon,
        checkpoints=np.array([0.0, horizon]),
        master_seed=0,
    )
    capped = rc.run_trial(small_cfg(pop_cap=128, **base), 0)
    last = capped.checkpoints[-1]
    assert last.live <= 128
    assert last.population > last.live  # multiplier kicked in
    assert 400 < last.population < 2600  # still tracks true growth


def test_extinction_raised_when_nothing_can_replicate():
    base = dict(
        n0=1,
        rates=rc.ErrorRates(0.0, 0.9, 0.0),
        kinetics=KIN,
        t_max=10.0,
        checkpoints=np.array([0.0, 10.0]),
        pop_cap=2,
        trials=1,
        master_seed=0,
    )
    for rep in ("counts", "sequence"):
        with pytest.raises(rc.PopulationExtinct):
            rc.run_trial(rc.SimConfig(representation=rep, **base), 0)


def test_children_inherit_cumulative_counters():
    cfg = small_cfg(representation="sequence", rates=rc.ErrorRates(0.05, 0.05, 0.05),
                    t_max=20.0, checkpoints=np.array([20.0]), pop_cap=64)
    res = rc.run_trial(cfg, 1, record_lineage=True)
    lin = res.lineage
    assert len(lin) > 40
    assert lin.parent[0] == -1
    child = np.arange(1, len(lin))
    par = lin.parent[1:]
    assert np.all(par < child)
    assert np.all(lin.generation[1:] == lin.generation[par] + 1)
    for arr in (lin.insertions, lin.deletions, lin.substitutions):
        assert np.all(arr[1:] >= arr[par])
    assert np.all(lin.length == cfg.n0 + lin.insertions - lin.deletions)


def test_counts_and_sequence_engines_agree_on_means():
    horizon = 8 * 100 / 22.0
    base = dict(
        n0=100,
        rates=rc.ErrorRates(0.01, 0.01, 0.005),
        kinetics=KIN,
        t_max=horizon,
        checkpoints=np.array([horizon]),
        pop_cap=512,
        trials=40,
    )
    agg_c = rc.run_experiment(rc.SimConfig(representation="counts", master_seed=21, **base))
    agg_s = rc.run_experiment(rc.SimConfig(representation="sequence", master_seed=22, **base))
    for name in ("del_rate", "ins_rate", "sub_rate", "mean_generation"):
        a, b = getattr(agg_c, name)[0], getattr(agg_s, name)[0]
        se = math.hypot(getattr(agg_c, name + "_se")[0], getattr(agg_s, name + "_se")[0])
        assert abs(a - b) < 5 * se, name


def make_strand(gen, ins, dels, subs, per_letter, length=100):
    seq = np.zeros(length, dtype=np.uint8)
    return rc.Strand(
        composition=Composition.from_digits(seq),
        generation=gen,
        cum_errors=ErrorCounts(ins, dels, subs, np.asarray(per_letter)),
        birth_time=0.0,
        sequence=seq,
    )


def test_checkpoint_statistics_exact_for_small_populations():
    strands = [
        make_strand(2, 1, 4, 0, [4, 0, 0, 0]),
        make_strand(4, 3, 2, 6, [0, 2, 0, 0]),
    ]
    rng = np.random.default_rng(0)
    s = rc.sample_checkpoint(
        strands, 5.0, rng, n0=100, root_composition=[25, 25, 25, 25], multiplier=8.0
    )
    assert s.population == 16.0 and s.live == 2
    assert s.mean_generation == pytest.approx(3.0)
    assert s.del_rate == pytest.approx(3 / 100)
    assert s.ins_rate == pytest.approx(2 / 100)
    assert s.sub_rate == pytest.approx(3 / 100)
    assert s.del_rate_by_letter == pytest.approx([2 / 25, 1 / 25, 0.0, 0.0])


def test_checkpoint_sampling_caps_large_populations():
    strands = [make_strand(1, 0, i % 3, 0, [i % 3, 0, 0, 0]) for i in range(50)]
    rng = np.random.default_rng(1)
    s = rc.sample_checkpoint(
        strands, 0.0, rng, n0=100, root_composition=[100, 0, 0, 0], sample_cap=10
    )
    assert 0.0 <= s.del_rate <= 2 / 100
    assert s.live == 50


def test_empty_population_rejected():
    rng = np.random.default_rng(2)
    with pytest.raises(rc.EmptyPopulation):
        rc.sample_checkpoint([], 0.0, rng, n0=10, root_composition=[10, 0, 0, 0])
    with pytest.raises(rc.EmptyPopulation):
        rc.cull_population([], 8, rng)


def test_cull_keeps_half_the_cap_and_reports_the_factor():
    strands = [make_strand(0, 0, 0, 0, [0, 0, 0, 0]) for _ in range(64)]
    rng = np.random.default_rng(3)
    survivors, factor = rc.cull_population(strands, 32, rng)
    assert len(survivors) == 16
    assert factor == pytest.approx(64 / 16)
    unchanged, factor1 = rc.cull_population(strands[:30], 32, rng)
    assert len(unchanged) == 30 and factor1 == 1.0


def test_random_root_is_shared_and_deterministic():
    cfg = small_cfg(root_seed=111)
    d1, c1 = rc.resolve_root(cfg)
    d2, c2 = rc.resolve_root(cfg)
    assert np.array_equal(d1, d2)
    assert np.array_equal(c1, c2)
    assert c1.sum() == cfg.n0
    d3, _ = rc.resolve_root(small_cfg(root_seed=112))
    assert not np.array_equal(d1, d3)


def test_explicit_roots():
    seq_cfg = small_cfg(root_sequence=np.array([0, 1, 2, 3] * 8, dtype=np.uint8))
    assert seq_cfg.n0 == 32
    digits, comp = rc.resolve_root(seq_cfg)
    assert np.array_equal(comp, [8, 8, 8, 8])
    comp_cfg = small_cfg(root_composition=np.array([10, 0, 0, 6]))
    assert comp_cfg.n0 == 16
    digits, comp = rc.resolve_root(comp_cfg)
    assert digits is None and np.array_equal(comp, [10, 0, 0, 6])


def test_config_field_validation():
    with pytest.raises(ValueError, match="n0"):
        small_cfg(n0=0).validate()
    with pytest.raises(ValueError, match="time_mode"):
        small_cfg(time_mode="uniform").validate()
    with pytest.raises(ValueError, match="representation"):
        small_cfg(representation="tree").validate()
    with pytest.raises(ValueError, match="checkpoints"):
        small_cfg(checkpoints=np.array([5.0, 1.0])).validate()
    with pytest.raises(ValueError, match="checkpoints"):
        small_cfg(checkpoints=np.array([0.0, 25.0])).validate()  # beyond t_max
    with pytest.raises(ValueError, match="pop_cap"):
        small_cfg(pop_cap=1).validate()
    with pytest.raises(ValueError, match="trials"):
        small_cfg(trials=0).validate()
    with pytest.raises(ValueError, match="root_composition"):
        small_cfg(representation="sequence", root_composition=np.array([4, 4, 4, 4])).validate()


def test_config_with_rescales_checkpoints_to_new_horizon():
    cfg = small_cfg()  # t_max=20, checkpoints 0..20
    shrunk = rc.config_with(cfg, t_max=5.0)
    assert shrunk.t_max == 5.0
    assert np.array_equal(shrunk.checkpoints, cfg.checkpoints / 4.0)
    explicit = rc.config_with(cfg, t_max=5.0, checkpoints=np.array([0.0, 5.0]))
    assert np.array_equal(explicit.checkpoints, [0.0, 5.0])
    with pytest.raises(ValueError, match="representation"):
        rc.config_with(cfg, representation="tree")


def test_capture_final_requires_sequences():
    with pytest.raises(ValueError):
        rc.run_trial(small_cfg(), 0, capture_final=True)
    cfg = small_cfg(representation="sequence", t_max=5.0, checkpoints=np.array([0.0]))
    res = rc.run_trial(cfg, 0, capture_final=True)
    assert res.final_population
    assert all(s.sequence is not None for s in res.final_population)


def test_experiment_aggregates_and_threads_match():
    cfg = small_cfg(trials=6)
    seq = rc.run_experiment(cfg, threads=1)
    par = rc.run_experiment(cfg, threads=4)
    for name in ("population", "mean_generation", "del_rate", "ins_rate", "sub_rate",
                 "del_rate_by_letter", "del_rate_se"):
        assert np.array_equal(getattr(seq, name), getattr(par, name)), name
    assert seq.per_trial["del_rate"].shape == (6, cfg.checkpoints.size)


def test_single_trial_reports_zero_se():
    cfg = small_cfg(trials=1)
    agg = rc.run_experiment(cfg)
    assert np.all(agg.del_rate_se == 0.0)
    assert np.all(agg.mean_generation_se == 0.0)
