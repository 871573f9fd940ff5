"""Smoke tests for the python module against the build-tree extension."""

import math

import pytest

import mecsim


def desk(users=3, tasks=4, channels=2, train=25, eval_slots=5):
    cfg = mecsim.SimConfig.profile_defaults("desk-consistent")
    cfg.users = users
    cfg.tasks = tasks
    cfg.channels = channels
    cfg.cache_bytes = 60e6
    cfg.train_slots = train
    cfg.eval_slots = eval_slots
    cfg.agent.batch_size = 4
    cfg.agent.replay_capacity = 16
    cfg.agent.hidden_units = 8
    return cfg


def test_profiles():
    ref = mecsim.SimConfig.profile_defaults("paper-table2")
    assert ref.users == 20 and ref.tasks == 50
    assert ref.slot_seconds == pytest.approx(5e-3)
    desk_cfg = mecsim.SimConfig.profile_defaults("desk-consistent")
    assert desk_cfg.slot_seconds == 5.0
    desk_cfg.validate()
    with pytest.raises(ValueError):
        mecsim.SimConfig.profile_defaults("unknown")


def test_scenario_and_request_model():
    cfg = desk()
    scn = mecsim.build_scenario(cfg, 1)
    assert len(scn.tasks) == 4 and len(scn.users) == 3
    model = mecsim.RequestModel(4, 0.2, 0.8, 2)
    matrix = model.transition_matrix()
    for row in matrix:
        assert sum(row) == pytest.approx(1.0, abs=1e-12)
    nxt = mecsim.sample_requests([0, 1, 2], model, seed=5)
    assert len(nxt) == 3 and all(0 <= r <= 4 for r in nxt)


def test_game_solution_is_stable_against_deviations():
    cfg = desk(users=3, tasks=3)
    scn = mecsim.build_scenario(cfg, 2)
    slot = mecsim.sample_fading(scn, 3)
    mu = [1, 2, 3]
    cache = [1, 0, 0]
    out = mecsim.solve_ne(scn, mu, cache, slot, arbiter_seed=4)
    assert len(out.decision) == 3
    for phi_prev, phi in zip(out.potential_trace, out.potential_trace[1:]):
        assert phi < phi_prev
    # no feasible unilateral move lowers the mover's own energy
    for k in range(3):
        own = (
            mecsim.local_energy(scn, mu[k])
            if out.decision[k] == 0
            else mecsim.offload_energy(scn, k, mu[k], bool(cache[mu[k] - 1]), out.decision, slot)
        )
        for a in range(cfg.channels + 1):
            if a == out.decision[k]:
                continue
            trial = list(out.decision)
            trial[k] = a
            if a == 0:
                cost = mecsim.local_energy(scn, mu[k])
            else:
                if mecsim.offload_delay(scn, k, mu[k], bool(cache[mu[k] - 1]), trial, slot) > cfg.slot_seconds:
                    continue
                cost = mecsim.offload_energy(scn, k, mu[k], bool(cache[mu[k] - 1]), trial, slot)
            assert cost >= own * (1 - 1e-12)


def test_knapsack_matches_enumeration():
    values = [0.5, -0.2, 0.9, 0.4]
    sizes = [2.0, 1.0, 3.0, 2.0]
    picked = mecsim.knapsack_solve(values, sizes, 5.0, unit_bytes=1.0)
    best, best_value = mecsim.knapsack_brute_force(values, sizes, 5.0)
    assert sum(v for v, b in zip(values, picked) if b) == pytest.approx(best_value)
    assert mecsim.knapsack_max_value(values, sizes, 5.0, unit_bytes=1.0) == pytest.approx(best_value)


def test_huber_branches():
    assert mecsim.huber_loss(1.5, 1.0) == (pytest.approx(0.125), pytest.approx(0.5))
    assert mecsim.huber_loss(4.0, 1.0) == (pytest.approx(2.5), 1.0)


def test_network_masking_and_checkpoint(tmp_path):
    net = mecsim.ScaaNetwork(users=3, tasks=4, hidden=8, seed=9)
    enc = mecsim.encode_state([2, 0, 4])
    values = net.values(enc)
    assert len(values) == 4
    q = net.forward(enc, [1, 0, 1, 0])
    assert q == pytest.approx(values[0] + values[2], rel=1e-12)

    path = str(tmp_path / "net.scaa")
    net.save(path)
    back = mecsim.ScaaNetwork.load(path)
    assert back.forward(enc, [1, 0, 1, 0]) == q


def test_run_experiment_and_determinism(tmp_path):
    cfg = desk()
    res1 = mecsim.run_experiment(cfg, mecsim.Policy.PROPOSED, 11, str(tmp_path / "a"))
    res2 = mecsim.run_experiment(cfg, mecsim.Policy.PROPOSED, 11, str(tmp_path / "b"))
    assert len(res1.records) == 30
    bytes1 = open(res1.metrics_path, "rb").read()
    bytes2 = open(res2.metrics_path, "rb").read()
    assert bytes1 == bytes2
    assert mecsim.metrics_file_summary(res1.metrics_path) == pytest.approx(res1.summary_energy)
    for rec in res1.records:
        assert rec.energy >= 0
        assert rec.reward == pytest.approx(rec.energy_no_cache - rec.energy)


def test_policies_run_and_differ_from_offloading():
    cfg = desk(train=20, eval_slots=10)
    energies = {}
    for policy in (mecsim.Policy.LRU, mecsim.Policy.LFU, mecsim.Policy.FIFO,
                   mecsim.Policy.LMP, mecsim.Policy.OFFLOAD_ONLY):
        energies[policy] = mecsim.run_experiment(cfg, policy, 3).summary_energy
    assert all(e >= 0 for e in energies.values())


def test_stepwise_run_matches_batch_run():
    cfg = desk()
    run = mecsim.Run(cfg, mecsim.Policy.LRU, 11)
    records = []
    while not run.done():
        records.append(run.step())
        assert sum(s for s, t in zip(run.cache, [t.software_bytes for t in run.scenario.tasks])
                   if s) >= 0  # cache always readable mid-run
    assert run.slot == run.total_slots == 30
    with pytest.raises(RuntimeError):
        run.step()

    batch = mecsim.run_experiment(cfg, mecsim.Policy.LRU, 11)
    assert [r.energy for r in records] == [r.energy for r in batch.records]
    assert [r.reward for r in records] == [r.reward for r in batch.records]


def test_moving_average():
    series = [float(i) for i in range(10)]
    ma = mecsim.moving_average(series, window=3)
    assert len(ma) == 8
    assert ma[0] == pytest.approx(1.0)
    assert math.isclose(ma[-1], 8.0)
