#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "mecsim/baselines.hpp"
#include "mecsim/config.hpp"
#include "mecsim/ddqn.hpp"
#include "mecsim/env.hpp"
#include "mecsim/game.hpp"
#include "mecsim/harness.hpp"
#include "mecsim/knapsack.hpp"
#include "mecsim/scaa.hpp"

using namespace mecsim;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string profile = "desk-consistent";
  std::string out_dir = "out";
  std::uint64_t seed = 1;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "JSON config overriding the profile defaults");
  cmd->add_option("--profile", opts.profile, "parameter profile")
      ->check(CLI::IsMember({"paper-table2", "desk-consistent"}));
  cmd->add_option("--seed", opts.seed, "master seed for the run");
  cmd->add_option("--out", opts.out_dir, "output directory for metrics and checkpoints");
}

SimConfig load_config(const CommonOpts& opts) {
  if (!opts.config_path.empty()) return SimConfig::from_json_file(opts.config_path, opts.profile);
  return SimConfig::profile_defaults(opts.profile);
}

// Small random worlds for the equilibrium checks.
Scenario tiny_world(std::uint64_t seed, int users, int tasks, int channels) {
  SimConfig cfg = SimConfig::profile_defaults("desk-consistent");
  cfg.users = users;
  cfg.tasks = tasks;
  cfg.channels = channels;
  cfg.neighbors = std::min(cfg.neighbors, tasks);
  return build_scenario(cfg, seed);
}

struct Instance {
  Scenario scn;
  RequestState mu;
  CacheState cache;
  SlotRealization slot;
};

Instance random_instance(Rng& rng, int max_users, int max_channels, int max_tasks) {
  const int users = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_users)));
  const int channels = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_channels)));
  const int tasks = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_tasks)));
  Instance inst{tiny_world(rng.next(), users, tasks, channels), {}, {}, {}};
  inst.mu.assign(static_cast<std::size_t>(users), 0);
  for (auto& r : inst.mu)
    if (rng.uniform() < 0.8) r = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(tasks)));
  inst.cache.assign(static_cast<std::size_t>(tasks), 0);
  double used = 0;
  for (std::size_t f = 0; f < inst.cache.size(); ++f) {
    if (rng.uniform() < 0.5 &&
        used + inst.scn.tasks[f].software_bytes <= inst.scn.cfg.cache_bytes) {
      inst.cache[f] = 1;
      used += inst.scn.tasks[f].software_bytes;
    }
  }
  Rng fading(rng.next());
  inst.slot = env::sample_fading(inst.scn, fading);
  return inst;
}

// No requesting user can lower its own energy by a feasible unilateral move.
bool no_profitable_deviation(const Instance& inst, const OffloadDecision& alpha) {
  const auto& scn = inst.scn;
  for (int k = 0; k < scn.cfg.users; ++k) {
    const int f = inst.mu[static_cast<std::size_t>(k)];
    if (f == 0) {
      if (alpha[static_cast<std::size_t>(k)] != 0) return false;
      continue;
    }
    const bool cached = inst.cache[static_cast<std::size_t>(f - 1)] != 0;
    const int current = alpha[static_cast<std::size_t>(k)];
    const double own = current == 0
                           ? env::local_energy(scn, f)
                           : env::offload_energy(scn, k, f, cached, alpha, inst.slot);
    for (int a = 0; a <= scn.cfg.channels; ++a) {
      if (a == current) continue;
      double cost;
      if (a == 0) {
        cost = env::local_energy(scn, f);
      } else {
        OffloadDecision trial = alpha;
        trial[static_cast<std::size_t>(k)] = a;
        if (env::offload_delay(scn, k, f, cached, trial, inst.slot) > scn.cfg.slot_seconds)
          continue;
        cost = env::offload_energy(scn, k, f, cached, trial, inst.slot);
      }
      if (cost < own * (1.0 - 1e-12)) return false;
    }
  }
  return true;
}

int run_ne_check(std::uint64_t seed, int instances) {
  Rng rng(seed);
  int failed = 0;
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < instances; ++i) {
    Instance inst = random_instance(rng, 4, 2, 5);
    Rng arbiter(rng.next());
    const auto out = game::solve_ne(inst.scn, inst.mu, inst.cache, inst.slot, arbiter);
    if (!no_profitable_deviation(inst, out.decision)) {
      ++failed;
      std::cout << "instance " << i << ": a profitable deviation exists\n";
    }
  }
  const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start);
  std::printf("ne-check: %d/%d instances passed (%.2fs)\n", instances - failed, instances,
              elapsed.count());
  return failed == 0 ? 0 : 1;
}

int run_selftest() {
  int failures = 0;
  const auto suite = [&](const char* name, const std::function<bool()>& body) {
    bool ok = false;
    std::string detail;
    try {
      ok = body();
    } catch (const std::exception& e) {
      detail = e.what();
    }
    std::printf("%-34s %s%s%s\n", name, ok ? "PASS" : "FAIL", detail.empty() ? "" : "  ",
                detail.c_str());
    if (!ok) ++failures;
  };

  suite("request-chain rows", [] {
    for (double R : {0.0, 0.3, 0.9})
      for (double z : {0.0, 0.8})
        for (int N : {1, 3}) {
          const RequestModel model(12, R, z, N);
          for (const auto& row : model.transition_matrix()) {
            double sum = 0;
            for (double p : row) sum += p;
            if (std::abs(sum - 1.0) > 1e-12) return false;
          }
        }
    return true;
  });

  suite("request-chain sampling", [] {
    const RequestModel model(8, 0.25, 0.7, 3);
    const auto matrix = model.transition_matrix();
    Rng rng(41);
    std::vector<std::vector<std::int64_t>> counts(9, std::vector<std::int64_t>(9, 0));
    std::vector<std::int64_t> visits(9, 0);
    int state = 0;
    for (int i = 0; i < 100000; ++i) {
      const int next = model.step(state, rng);
      ++counts[static_cast<std::size_t>(state)][static_cast<std::size_t>(next)];
      ++visits[static_cast<std::size_t>(state)];
      state = next;
    }
    for (int i = 0; i <= 8; ++i) {
      const double n = static_cast<double>(visits[static_cast<std::size_t>(i)]);
      if (n == 0) continue;
      for (int j = 0; j <= 8; ++j) {
        const double p = matrix[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        const double c =
            static_cast<double>(counts[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
        if (p == 0.0 && c != 0) return false;
        if (p > 0 && std::abs(c - n * p) > 3 * std::sqrt(n * p * (1 - p)) + 1) return false;
      }
    }
    return true;
  });

  suite("cache dominance", [] {
    Rng rng(41);
    for (int t = 0; t < 50; ++t) {
      Instance inst = random_instance(rng, 4, 3, 5);
      for (int k = 0; k < inst.scn.cfg.users; ++k) {
        const int f = inst.mu[static_cast<std::size_t>(k)];
        if (f == 0) continue;
        OffloadDecision alpha(static_cast<std::size_t>(inst.scn.cfg.users), 0);
        alpha[static_cast<std::size_t>(k)] = 1;
        if (env::offload_energy(inst.scn, k, f, true, alpha, inst.slot) >=
            env::offload_energy(inst.scn, k, f, false, alpha, inst.slot))
          return false;
        if (env::offload_delay(inst.scn, k, f, true, alpha, inst.slot) >=
            env::offload_delay(inst.scn, k, f, false, alpha, inst.slot))
          return false;
      }
    }
    return true;
  });

  suite("equilibrium deviations", [] {
    Rng rng(42);
    for (int t = 0; t < 25; ++t) {
      Instance inst = random_instance(rng, 4, 2, 5);
      Rng arbiter(rng.next());
      const auto out = game::solve_ne(inst.scn, inst.mu, inst.cache, inst.slot, arbiter);
      if (!no_profitable_deviation(inst, out.decision)) return false;
    }
    return true;
  });

  suite("potential descent", [] {
    Rng rng(43);
    for (int t = 0; t < 25; ++t) {
      Instance inst = random_instance(rng, 6, 3, 6);
      Rng arbiter(rng.next());
      const auto out = game::solve_ne(inst.scn, inst.mu, inst.cache, inst.slot, arbiter);
      for (std::size_t i = 1; i < out.potential_trace.size(); ++i)
        if (!(out.potential_trace[i] < out.potential_trace[i - 1])) return false;
      // every accepted update descends by at least eps * delta_min
      if (out.iterations > 0) {
        const double descent = out.potential_trace.front() - out.potential_trace.back();
        const double floor_per_update =
            out.bound_terms.min_decrement_eps * out.bound_terms.delta_min;
        if (static_cast<double>(out.iterations) * floor_per_update > descent * (1 + 1e-9))
          return false;
      }
    }
    return true;
  });

  suite("sign agreement", [] {
    Rng rng(44);
    for (int t = 0; t < 1000; ++t) {
      Instance inst = random_instance(rng, 4, 3, 5);
      const int K = inst.scn.cfg.users;
      OffloadDecision alpha(static_cast<std::size_t>(K), 0);
      for (int k = 0; k < K; ++k)
        if (inst.mu[static_cast<std::size_t>(k)] != 0)
          alpha[static_cast<std::size_t>(k)] =
              static_cast<int>(rng.below(static_cast<std::uint64_t>(inst.scn.cfg.channels) + 1));
      const int k = static_cast<int>(rng.below(static_cast<std::uint64_t>(K)));
      const int f = inst.mu[static_cast<std::size_t>(k)];
      if (f == 0) continue;
      OffloadDecision dev = alpha;
      dev[static_cast<std::size_t>(k)] =
          static_cast<int>(rng.below(static_cast<std::uint64_t>(inst.scn.cfg.channels) + 1));
      if (dev == alpha) continue;
      const bool cached = inst.cache[static_cast<std::size_t>(f - 1)] != 0;
      const auto own = [&](const OffloadDecision& a) {
        return a[static_cast<std::size_t>(k)] == 0
                   ? env::local_energy(inst.scn, f)
                   : env::offload_energy(inst.scn, k, f, cached, a, inst.slot);
      };
      const double phi_a = game::potential(inst.scn, alpha, inst.mu, inst.cache, inst.slot);
      const double phi_b = game::potential(inst.scn, dev, inst.mu, inst.cache, inst.slot);
      const double ea = own(alpha);
      const double eb = own(dev);
      const double dphi = phi_a - phi_b;
      const double de = ea - eb;
      const bool zero_phi = std::abs(dphi) <= 1e-12 * (std::abs(phi_a) + std::abs(phi_b));
      const bool zero_e = std::abs(de) <= 1e-12 * (std::abs(ea) + std::abs(eb));
      if (zero_phi != zero_e) return false;
      if (!zero_phi && std::signbit(dphi) != std::signbit(de)) return false;
    }
    return true;
  });

  suite("knapsack vs exhaustive", [] {
    Rng rng(45);
    for (int t = 0; t < 100; ++t) {
      const int n = 1 + static_cast<int>(rng.below(12));
      std::vector<double> values, sizes;
      double total = 0;
      for (int f = 0; f < n; ++f) {
        values.push_back(rng.uniform(-1, 2));
        sizes.push_back(static_cast<double>(1 + rng.below(9)));
        total += sizes.back();
      }
      const double cap = static_cast<double>(rng.below(static_cast<std::uint64_t>(total) + 1));
      const double dp = knapsack::max_value(values, sizes, cap, 1);
      const auto [sel, bf] = knapsack::brute_force(values, sizes, cap);
      (void)sel;
      if (std::abs(dp - bf) > 1e-9 * std::max(1.0, std::abs(bf))) return false;
      double used = 0, got = 0;
      const auto picked = knapsack::solve(values, sizes, cap, 1);
      for (int f = 0; f < n; ++f)
        if (picked[static_cast<std::size_t>(f)]) {
          used += sizes[static_cast<std::size_t>(f)];
          got += values[static_cast<std::size_t>(f)];
        }
      if (used > cap) return false;
      if (std::abs(got - bf) > 1e-9 * std::max(1.0, std::abs(bf))) return false;
    }
    return true;
  });

  suite("network masking", [] {
    Rng init(46);
    ScaaNetwork net(5, 6, 12, init);
    Rng rng(47);
    RequestState mu{1, 0, 4, 6, 2};
    const auto enc = encode_state(mu);
    CacheState action{1, 0, 1, 1, 0, 1};
    const double q0 = net.forward(enc, action);
    for (int t = 0; t < 50; ++t) {
      const int k = static_cast<int>(rng.below(5));
      const int f = static_cast<int>(rng.below(6));
      if (!enc.masked(k, f)) continue;
      const double saved = net.first_layer_weight(k, f);
      net.set_first_layer_weight(k, f, saved + rng.uniform(-3, 3));
      const double q = net.forward(enc, action);
      net.set_first_layer_weight(k, f, saved);
      if (std::memcmp(&q, &q0, sizeof q) != 0) return false;
    }
    net.zero_gradients();
    net.forward(enc, action);
    net.backward(enc, action, 1.0);
    for (int k = 0; k < 5; ++k)
      for (int f = 0; f < 6; ++f)
        if (enc.masked(k, f) && net.first_layer_gradient(k, f) != 0.0) return false;
    return true;
  });

  suite("network gradients", [] {
    Rng init(48);
    ScaaNetwork net(4, 5, 8, init);
    Rng rng(49);
    for (int trial = 0; trial < 3; ++trial) {
      RequestState mu(4, 0);
      for (auto& r : mu)
        if (rng.uniform() < 0.75) r = 1 + static_cast<int>(rng.below(5));
      const auto enc = encode_state(mu);
      CacheState action(5, 0);
      for (auto& b : action) b = rng.uniform() < 0.5 ? 1 : 0;
      const double target = rng.uniform(-1, 1);
      net.zero_gradients();
      const double q = net.forward(enc, action);
      net.backward(enc, action, huber_loss(q, target).dloss_dq);
      for (std::size_t i = 0; i < net.parameter_count(); i += 7) {
        const double saved = net.get_parameter(i);
        const double h = 1e-6;
        net.set_parameter(i, saved + h);
        const double up = huber_loss(net.forward(enc, action), target).loss;
        net.set_parameter(i, saved - h);
        const double down = huber_loss(net.forward(enc, action), target).loss;
        net.set_parameter(i, saved);
        const double fd = (up - down) / (2 * h);
        const double an = net.get_gradient(i);
        if (std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-8}) > 1e-4)
          return false;
      }
    }
    return true;
  });

  suite("harness determinism", [] {
    SimConfig cfg = SimConfig::profile_defaults("desk-consistent");
    cfg.users = 3;
    cfg.tasks = 4;
    cfg.channels = 2;
    cfg.cache_bytes = 60e6;
    cfg.train_slots = 25;
    cfg.eval_slots = 5;
    cfg.agent.batch_size = 4;
    cfg.agent.replay_capacity = 16;
    cfg.agent.hidden_units = 8;
    const auto a = harness::run_experiment(cfg, harness::Policy::Proposed, 5);
    const auto b = harness::run_experiment(cfg, harness::Policy::Proposed, 5);
    if (a.records.size() != b.records.size()) return false;
    for (std::size_t i = 0; i < a.records.size(); ++i) {
      if (a.records[i].energy != b.records[i].energy) return false;
      if (a.records[i].reward != b.records[i].reward) return false;
      if (a.records[i].loss != b.records[i].loss) return false;
    }
    return true;
  });

  std::printf("selftest: %s\n", failures == 0 ? "all suites passed" : "FAILURES");
  return failures == 0 ? 0 : 1;
}

std::vector<double> parse_doubles(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

std::vector<std::uint64_t> parse_seeds(const std::string& csv) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoull(item));
  return out;
}

std::vector<harness::Policy> parse_policies(const std::string& csv) {
  std::vector<harness::Policy> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(harness::policy_from_name(item));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Edge-cell simulator: offloading game + learned software caching"};
  app.require_subcommand(1);

  CommonOpts train_opts;
  auto* train = app.add_subcommand("train", "train the caching agent, write metrics + checkpoint");
  add_common(train, train_opts);

  CommonOpts eval_opts;
  std::string eval_policy = "proposed";
  std::string eval_checkpoint;
  auto* eval = app.add_subcommand("eval", "frozen-policy run (no exploration, no training)");
  add_common(eval, eval_opts);
  eval->add_option("--policy", eval_policy, "proposed|lru|lfu|fifo|lmp|offload-only");
  eval->add_option("--checkpoint", eval_checkpoint, "trained weights for the proposed policy");

  CommonOpts sweep_opts;
  std::string sweep_axis = "cache_bytes";
  std::string sweep_grid;
  std::string sweep_policies = "proposed,lru,lfu,fifo,lmp,offload-only";
  std::string sweep_seeds = "1,2,3";
  int sweep_jobs = 0;
  auto* sweep = app.add_subcommand("sweep", "grid x policies x seeds comparison table");
  add_common(sweep, sweep_opts);
  sweep->add_option("--axis", sweep_axis,
                    "cache_bytes|users|tasks|channels|idle_prob|zipf_exp|neighbors|"
                    "input_max_bytes|software_max_bytes|cycles_max");
  sweep->add_option("--grid", sweep_grid, "comma-separated axis values")->required();
  sweep->add_option("--policies", sweep_policies, "comma-separated policy names");
  sweep->add_option("--seeds", sweep_seeds, "comma-separated seeds");
  sweep->add_option("--jobs", sweep_jobs, "worker threads (0 = hardware)");

  std::uint64_t ne_seed = 7;
  int ne_instances = 200;
  auto* ne = app.add_subcommand("ne-check", "equilibrium quality on random small instances");
  ne->add_option("--seed", ne_seed, "instance generator seed");
  ne->add_option("--instances", ne_instances, "number of random instances");

  app.add_subcommand("selftest", "run the built-in property suites");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) {
      const SimConfig cfg = load_config(train_opts);
      const auto result = harness::run_experiment(cfg, harness::Policy::Proposed, train_opts.seed,
                                                  train_opts.out_dir);
      std::printf("trained %lld slots + %lld eval slots; eval-window mean energy %.6g J\n",
                  static_cast<long long>(cfg.train_slots), static_cast<long long>(cfg.eval_slots),
                  result.summary_energy);
      std::printf("metrics:    %s\ncheckpoint: %s\n", result.metrics_path.c_str(),
                  result.checkpoint_path.c_str());
      return 0;
    }
    if (eval->parsed()) {
      SimConfig cfg = load_config(eval_opts);
      cfg.eval_slots = cfg.total_slots();
      cfg.train_slots = 0;
      const auto policy = harness::policy_from_name(eval_policy);
      const auto result =
          harness::run_experiment(cfg, policy, eval_opts.seed, eval_opts.out_dir, eval_checkpoint);
      std::printf("%s over %zu slots: mean energy %.6g J\nmetrics: %s\n", eval_policy.c_str(),
                  result.records.size(), result.summary_energy, result.metrics_path.c_str());
      return 0;
    }
    if (sweep->parsed()) {
      const SimConfig cfg = load_config(sweep_opts);
      const auto result = harness::run_sweep(cfg, sweep_axis, parse_doubles(sweep_grid),
                                             parse_policies(sweep_policies),
                                             parse_seeds(sweep_seeds), sweep_opts.out_dir,
                                             sweep_jobs);
      std::printf("sweep table: %s (%zu cells, %d failed)\n", result.table_path.c_str(),
                  result.cells.size(), result.failures);
      for (const auto& cell : result.cells)
        if (cell.failed)
          std::printf("  FAILED %s=%g %s seed=%llu: %s\n", cell.axis.c_str(), cell.value,
                      harness::policy_name(cell.policy).c_str(),
                      static_cast<unsigned long long>(cell.seed), cell.error.c_str());
      return result.failures == 0 ? 0 : 1;
    }
    if (ne->parsed()) return run_ne_check(ne_seed, ne_instances);
    return run_selftest();
  } catch (const ConstraintViolation& e) {
    std::cerr << "constraint audit failed: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
