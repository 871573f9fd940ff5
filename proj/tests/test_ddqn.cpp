#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "mecsim/ddqn.hpp"
#include "mecsim/game.hpp"
#include "mecsim/knapsack.hpp"

using namespace mecsim;
using namespace testutil;

namespace {

AgentConfig small_agent_config() {
  AgentConfig cfg;
  cfg.batch_size = 4;
  cfg.replay_capacity = 64;
  cfg.hidden_units = 16;
  cfg.eps_decay_slots = 100;
  cfg.knapsack_unit_bytes = 1e6;
  return cfg;
}

RequestState random_requests(const Scenario& scn, Rng& rng, double idle_frac = 0.25) {
  RequestState mu(static_cast<std::size_t>(scn.cfg.users), 0);
  for (auto& r : mu)
    if (rng.uniform() >= idle_frac) r = 1 + static_cast<int>(rng.below(scn.cfg.tasks));
  return mu;
}

double cache_value(const CacheState& action, const std::vector<double>& values) {
  double v = 0;
  for (std::size_t f = 0; f < action.size(); ++f)
    if (action[f]) v += values[f];
  return v;
}

}  // namespace

TEST_CASE("replay memory: ring eviction drops the oldest records") {
  ReplayMemory mem(5);
  for (int i = 0; i < 8; ++i) {
    Transition t;
    t.reward = static_cast<double>(i);
    mem.push(t);
  }
  CHECK(mem.size() == 5);
  std::vector<double> rewards;
  for (std::size_t i = 0; i < mem.size(); ++i) rewards.push_back(mem.at(i).reward);
  std::sort(rewards.begin(), rewards.end());
  CHECK(rewards == std::vector<double>{3, 4, 5, 6, 7});
}

TEST_CASE("replay memory: sampling more than stored is an error") {
  ReplayMemory mem(10);
  Transition t;
  mem.push(t);
  Rng rng(1);
  CHECK_THROWS_AS(mem.sample_indices(2, rng), std::runtime_error);
  CHECK(mem.sample_indices(1, rng) == std::vector<std::size_t>{0});
}

TEST_CASE("exploration schedule: linear decay between the endpoints") {
  AgentConfig cfg;
  cfg.eps_start = 1.0;
  cfg.eps_end = 0.05;
  cfg.eps_decay_slots = 100;
  CHECK(cfg.epsilon_at(0) == doctest::Approx(1.0));
  CHECK(cfg.epsilon_at(50) == doctest::Approx(0.525));
  CHECK(cfg.epsilon_at(100) == doctest::Approx(0.05));
  CHECK(cfg.epsilon_at(5000) == doctest::Approx(0.05));
  // reference learning rate default
  CHECK(AgentConfig{}.learning_rate == 1e-4);
}

TEST_CASE("reward: an empty action saves nothing under a shared arbiter seed") {
  Rng rng(41);
  Scenario scn = random_desk_scenario(rng, 4, 5, 2);
  const auto slot = random_fading(scn, rng);
  const RequestState mu = random_requests(scn, rng);
  const CacheState empty(5, 0);
  Rng a1(12345), a2(12345);
  CHECK(compute_reward(scn, mu, empty, slot, a1, a2) == 0.0);
}

TEST_CASE("reward: caching only unrequested software saves nothing") {
  Rng rng(42);
  Scenario scn = random_desk_scenario(rng, 4, 6, 2);
  const auto slot = random_fading(scn, rng);
  // requests touch tasks 1..3 only, the cache holds 4..6
  RequestState mu{1, 2, 3, 1};
  CacheState cache{0, 0, 0, 1, 1, 1};
  Rng a1(777), a2(777);
  CHECK(compute_reward(scn, mu, cache, slot, a1, a2) == 0.0);
}

TEST_CASE("reward: single-user instance matches the exhaustive difference") {
  Rng rng(43);
  for (int trial = 0; trial < 25; ++trial) {
    Scenario scn = random_desk_scenario(rng, 1, 4, 3);
    const auto slot = random_fading(scn, rng);
    RequestState mu{1 + static_cast<int>(rng.below(4))};
    CacheState cache(4, 0);
    cache[static_cast<std::size_t>(rng.below(4))] = 1;

    // exhaustive minimisation over the M+1 decisions for both cache states
    const OffloadDecision base{0};
    long double best_cached = 1e300L, best_empty = 1e300L;
    const CacheState empty(4, 0);
    for (int a = 0; a <= 3; ++a) {
      const auto with = oracle_own_cost(scn, 0, a, mu, cache, slot, base);
      if (with.feasible) best_cached = std::min(best_cached, with.energy);
      const auto without = oracle_own_cost(scn, 0, a, mu, empty, slot, base);
      if (without.feasible) best_empty = std::min(best_empty, without.energy);
    }
    const double expect = static_cast<double>(best_empty - best_cached);

    Rng a1(trial), a2(1000 + trial);
    const double got = compute_reward(scn, mu, cache, slot, a1, a2);
    CHECK(got == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("action selection: exploration always respects the capacity") {
  Rng rng(44);
  Scenario scn = random_desk_scenario(rng, 5, 8, 2);
  scn.cfg.cache_bytes = 60e6;  // roughly two items
  Rng init(1);
  Agent agent(scn, small_agent_config(), init);
  Rng expl(2);
  for (int trial = 0; trial < 200; ++trial) {
    const auto action = agent.select_action(random_requests(scn, rng), 1.0, expl);
    double used = 0;
    for (std::size_t f = 0; f < action.size(); ++f)
      if (action[f]) used += scn.tasks[f].software_bytes;
    CHECK(used <= scn.cfg.cache_bytes);
  }
}

TEST_CASE("action selection: greedy with non-positive values caches nothing") {
  Rng rng(45);
  Scenario scn = random_desk_scenario(rng, 4, 5, 2);
  Rng init(1);
  Agent agent(scn, small_agent_config(), init);
  // push every value contribution below zero
  auto& net = agent.eval_net();
  const std::size_t n = net.parameter_count();
  const std::size_t b4_start = n - 5;
  // zero the dense layer into the value cells, then negative biases
  const std::size_t w4_count = static_cast<std::size_t>(16) * 5;
  for (std::size_t i = n - 5 - w4_count; i < b4_start; ++i) net.set_parameter(i, 0.0);
  for (std::size_t i = b4_start; i < n; ++i) net.set_parameter(i, -1.0);

  const auto values = net.values(encode_state(RequestState{1, 2, 3, 0}));
  for (double v : values) CHECK(v < 0.0);
  Rng expl(2);
  const auto action = agent.select_action(RequestState{1, 2, 3, 0}, 0.0, expl);
  CHECK(action == CacheState(5, 0));
}

TEST_CASE("action selection: greedy attains the exhaustive optimum") {
  Rng rng(46);
  for (int trial = 0; trial < 20; ++trial) {
    Scenario scn = random_desk_scenario(rng, 4, 6, 2);
    // integer-megabyte sizes so the unit grid is exact
    for (auto& t : scn.tasks) t.software_bytes = static_cast<double>(1 + rng.below(40)) * 1e6;
    scn.cfg.cache_bytes = static_cast<double>(rng.below(120)) * 1e6;
    Rng init(trial);
    Agent agent(scn, small_agent_config(), init);
    const RequestState mu = random_requests(scn, rng);
    Rng expl(3);
    const auto action = agent.select_action(mu, 0.0, expl);

    const auto values = agent.eval_net().values(encode_state(mu));
    std::vector<double> sizes;
    for (const auto& t : scn.tasks) sizes.push_back(t.software_bytes);
    const auto [best, best_value] = knapsack::brute_force(values, sizes, scn.cfg.cache_bytes);
    CHECK(cache_value(action, values) ==
          doctest::Approx(best_value).epsilon(1e-9));
    double used = 0;
    for (std::size_t f = 0; f < action.size(); ++f)
      if (action[f]) used += sizes[f];
    CHECK(used <= scn.cfg.cache_bytes);
  }
}

TEST_CASE("training: a transition already at its target moves nothing") {
  Rng rng(47);
  Scenario scn = random_desk_scenario(rng, 3, 4, 2);
  Rng init(5);
  Agent agent(scn, small_agent_config(), init);

  // push every value contribution below zero so the bootstrap term is an
  // exact zero, then sync the target net
  auto& net = agent.eval_net();
  const std::size_t n = net.parameter_count();
  const std::size_t w4_count = static_cast<std::size_t>(16) * 4;
  for (std::size_t i = n - 4 - w4_count; i < n - 4; ++i) net.set_parameter(i, 0.0);
  for (std::size_t i = n - 4; i < n; ++i) net.set_parameter(i, -1.0);
  agent.maybe_copy_target(agent.config().target_copy_period);

  const RequestState s{1, 2, 0};
  const RequestState s_next{2, 3, 1};
  const CacheState action{1, 0, 1, 0};
  REQUIRE(agent.target_state_value(s_next) == 0.0);
  const double q = net.forward(encode_state(s), action);
  // with a zero bootstrap the target equals the reward exactly
  const double reward = q;
  agent.store(Transition{s, action, reward, s_next});

  std::vector<double> before(agent.eval_net().parameter_count());
  for (std::size_t i = 0; i < before.size(); ++i) before[i] = agent.eval_net().get_parameter(i);
  const double loss = agent.train_step(std::vector<std::size_t>{0});
  CHECK(loss == 0.0);
  for (std::size_t i = 0; i < before.size(); ++i)
    CHECK(agent.eval_net().get_parameter(i) == before[i]);
}

TEST_CASE("training: a vanishing discount makes the target the raw reward") {
  Rng rng(48);
  Scenario scn = random_desk_scenario(rng, 3, 4, 2);
  AgentConfig cfg = small_agent_config();
  cfg.discount = 1e-300;  // the bootstrap term underflows to nothing
  Rng init(6);
  Agent agent(scn, cfg, init);
  const RequestState s{1, 2, 0};
  const CacheState action{1, 1, 0, 0};
  const double q = agent.eval_net().forward(encode_state(s), action);
  const double reward = 1.25;
  agent.store(Transition{s, action, reward, RequestState{0, 1, 2}});
  const double loss = agent.train_step(std::vector<std::size_t>{0});
  CHECK(loss == doctest::Approx(huber_loss(q, reward).loss).epsilon(1e-12));
}

TEST_CASE("training: the parameter update follows the loss gradient") {
  Rng rng(49);
  Scenario scn = random_desk_scenario(rng, 3, 4, 2);
  AgentConfig cfg = small_agent_config();
  cfg.learning_rate = 1e-4;
  Rng init(7);
  Agent agent(scn, cfg, init);

  const RequestState s{1, 3, 0};
  const RequestState s_next{2, 0, 4};
  const CacheState action{0, 1, 1, 0};
  const double reward = 0.4;
  agent.store(Transition{s, action, reward, s_next});
  const double target = reward + cfg.discount * agent.target_state_value(s_next);

  // snapshot, then finite-difference the single-transition loss
  ScaaNetwork& net = agent.eval_net();
  std::vector<double> before(net.parameter_count());
  for (std::size_t i = 0; i < before.size(); ++i) before[i] = net.get_parameter(i);

  auto loss_fn = [&](void) {
    return huber_loss(net.forward(encode_state(s), action), target).loss;
  };
  const double step = 1e-6;
  std::vector<std::size_t> probes{0, 5, before.size() / 2, before.size() - 1};
  std::vector<double> fd(probes.size());
  for (std::size_t p = 0; p < probes.size(); ++p) {
    const std::size_t i = probes[p];
    net.set_parameter(i, before[i] + step);
    const double up = loss_fn();
    net.set_parameter(i, before[i] - step);
    const double down = loss_fn();
    net.set_parameter(i, before[i]);
    fd[p] = (up - down) / (2 * step);
  }

  agent.train_step(std::vector<std::size_t>{0});
  for (std::size_t p = 0; p < probes.size(); ++p) {
    const std::size_t i = probes[p];
    const double moved = before[i] - net.get_parameter(i);
    CHECK(moved == doctest::Approx(cfg.learning_rate * fd[p]).epsilon(1e-4));
  }
}

TEST_CASE("training: the bootstrap value comes from the target network only") {
  Rng rng(54);
  Scenario scn = random_desk_scenario(rng, 3, 4, 2);
  AgentConfig cfg = small_agent_config();
  cfg.target_copy_period = 1000;  // keep the target frozen for this test
  Rng init(15);
  Agent agent(scn, cfg, init);

  // drift the evaluation net away from the frozen target
  const RequestState drift_state{1, 2, 3};
  const CacheState drift_action{1, 1, 1, 0};
  agent.store(Transition{drift_state, drift_action, 3.0, drift_state});
  for (int i = 0; i < 20; ++i) agent.train_step(std::vector<std::size_t>{0});

  const RequestState s_next{2, 3, 4};
  std::vector<double> sizes;
  for (const auto& t : scn.tasks) sizes.push_back(t.software_bytes);
  const double from_target = knapsack::max_value(agent.target_net().values(encode_state(s_next)),
                                                 sizes, scn.cfg.cache_bytes,
                                                 cfg.knapsack_unit_bytes);
  const double from_eval = knapsack::max_value(agent.eval_net().values(encode_state(s_next)),
                                               sizes, scn.cfg.cache_bytes,
                                               cfg.knapsack_unit_bytes);
  REQUIRE(from_target != from_eval);
  CHECK(agent.target_state_value(s_next) == from_target);

  // a transition whose target equals its prediction only under the target
  // network trains to zero loss; bootstrapping from the evaluation network
  // would leave a residual
  const RequestState s{1, 0, 2};
  const CacheState action{0, 1, 0, 1};
  const double q = agent.eval_net().forward(encode_state(s), action);
  agent.store(Transition{s, action, q - cfg.discount * from_target, s_next});
  const double loss = agent.train_step(std::vector<std::size_t>{1});
  CHECK(loss <= 1e-25);
}

TEST_CASE("training: refuses to run before the replay holds a batch") {
  Rng rng(50);
  Scenario scn = random_desk_scenario(rng, 3, 4, 2);
  Rng init(8);
  Agent agent(scn, small_agent_config(), init);
  CHECK_FALSE(agent.ready());
  Rng sample(9);
  CHECK_THROWS_AS(agent.train_step(sample), std::runtime_error);
}

TEST_CASE("target copies: every slot with period one, frozen in between") {
  Rng rng(51);
  Scenario scn = random_desk_scenario(rng, 3, 4, 2);
  AgentConfig cfg = small_agent_config();
  cfg.target_copy_period = 1;
  Rng init(10);
  Agent agent(scn, cfg, init);

  const RequestState s{1, 2, 3};
  const CacheState action{1, 0, 0, 1};
  // drift the evaluation net, then copy with g = 1
  agent.store(Transition{s, action, 5.0, s});
  agent.train_step(std::vector<std::size_t>{0});
  agent.maybe_copy_target(1);
  CHECK(agent.eval_net().values(encode_state(s)) == agent.target_net().values(encode_state(s)));
  CHECK(agent.target_state_value(s) ==
        knapsack::max_value(
            agent.eval_net().values(encode_state(s)),
            [&] {
              std::vector<double> sizes;
              for (const auto& t : scn.tasks) sizes.push_back(t.software_bytes);
              return sizes;
            }(),
            scn.cfg.cache_bytes, cfg.knapsack_unit_bytes));

  // with a long period the target stays frozen while the eval net trains
  AgentConfig cfg2 = small_agent_config();
  cfg2.target_copy_period = 1000;
  Rng init2(11);
  Agent agent2(scn, cfg2, init2);
  const auto frozen = agent2.target_net().values(encode_state(s));
  for (std::int64_t t = 1; t <= 20; ++t) {
    agent2.store(Transition{s, action, 1.0, s});
    agent2.train_step(std::vector<std::size_t>{0});
    agent2.maybe_copy_target(t);
    CHECK(agent2.target_net().values(encode_state(s)) == frozen);
  }
}

TEST_CASE("inference: the update is the elementwise difference of cache states") {
  Rng rng(52);
  Scenario scn = random_desk_scenario(rng, 4, 5, 2);
  Rng init(12);
  Agent agent(scn, small_agent_config(), init);
  Rng req_rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const RequestState mu = random_requests(scn, req_rng);
    CacheState current(5, 0);
    for (auto& b : current) b = req_rng.uniform() < 0.4 ? 1 : 0;
    const auto update = agent.infer_update(mu, current);
    const auto next = apply_update(current, update);
    CHECK(next == agent.greedy_action(mu));
    for (std::size_t f = 0; f < update.size(); ++f)
      CHECK(update[f] >= -static_cast<int>(current[f]));
    // applying the same state twice yields the zero update
    const auto again = agent.infer_update(mu, next);
    CHECK(again == CacheUpdate(5, 0));
  }
}

TEST_CASE("inference: from an empty cache the update only adds") {
  Rng rng(53);
  Scenario scn = random_desk_scenario(rng, 4, 5, 2);
  Rng init(14);
  Agent agent(scn, small_agent_config(), init);
  const CacheState empty(5, 0);
  const auto update = agent.infer_update(RequestState{1, 2, 3, 4}, empty);
  for (auto u : update) CHECK(u >= 0);
  CHECK(apply_update(empty, update) == agent.greedy_action(RequestState{1, 2, 3, 4}));
}
