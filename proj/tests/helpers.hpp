#pragma once

// Test-only scenario builders and independent oracles.  The oracles
// re-evaluate the closed forms in long double straight from the model
// definitions and never call into the code paths they check.

#include <cmath>
#include <cstdint>
#include <vector>

#include "mecsim/rng.hpp"
#include "mecsim/types.hpp"

namespace testutil {

using mecsim::CacheState;
using mecsim::OffloadDecision;
using mecsim::RequestState;
using mecsim::Rng;
using mecsim::Scenario;
using mecsim::SlotRealization;
using mecsim::SystemConfig;
using mecsim::Task;
using mecsim::User;

inline SystemConfig desk_system(int users, int tasks, int channels) {
  SystemConfig cfg;
  cfg.users = users;
  cfg.tasks = tasks;
  cfg.channels = channels;
  cfg.bandwidth_hz = 30e6;
  cfg.cache_bytes = 100e6;
  cfg.slot_seconds = 5.0;
  cfg.noise_w = 2e-13;
  cfg.edge_cpu_hz = 20e9;
  cfg.user_cpu_hz = 1e9;
  cfg.path_loss_exp = 4;
  cfg.energy_coeff = 5e-27;
  return cfg;
}

inline Scenario make_scenario(SystemConfig cfg, std::vector<Task> tasks, std::vector<User> users) {
  Scenario scn;
  scn.cfg = cfg;
  scn.cfg.users = static_cast<int>(users.size());
  scn.cfg.tasks = static_cast<int>(tasks.size());
  scn.tasks = std::move(tasks);
  scn.users = std::move(users);
  scn.validate();
  return scn;
}

// Random desk-scale world: distances across the cell, megabyte inputs, tens
// of megabytes of software, sub-gigacycle tasks.
inline Scenario random_desk_scenario(Rng& rng, int users, int tasks, int channels) {
  SystemConfig cfg = desk_system(users, tasks, channels);
  std::vector<Task> ts;
  for (int f = 1; f <= tasks; ++f)
    ts.push_back(Task{f, rng.uniform(1e6, 2e6), rng.uniform(10e6, 50e6), rng.uniform(2e8, 9e8)});
  std::vector<User> us;
  for (int k = 1; k <= users; ++k)
    us.push_back(User{k, rng.uniform(20.0, 140.0), 0.5, 1e9});
  return make_scenario(cfg, std::move(ts), std::move(us));
}

inline SlotRealization unit_fading(const Scenario& scn) {
  SlotRealization slot;
  slot.fading.assign(scn.users.size(), 1.0);
  slot.gain.resize(scn.users.size());
  for (std::size_t k = 0; k < scn.users.size(); ++k)
    slot.gain[k] = std::pow(scn.users[k].distance_m, -scn.cfg.path_loss_exp);
  return slot;
}

inline SlotRealization random_fading(const Scenario& scn, Rng& rng) {
  SlotRealization slot;
  slot.fading.resize(scn.users.size());
  slot.gain.resize(scn.users.size());
  for (std::size_t k = 0; k < scn.users.size(); ++k) {
    slot.fading[k] = rng.exponential();
    slot.gain[k] = slot.fading[k] * std::pow(scn.users[k].distance_m, -scn.cfg.path_loss_exp);
  }
  return slot;
}

// ---- independent long-double oracles -------------------------------------

inline long double oracle_rate(const Scenario& scn, int k, int channel,
                               const OffloadDecision& alpha, const SlotRealization& slot) {
  long double interf = 0;
  for (std::size_t n = 0; n < alpha.size(); ++n) {
    if (static_cast<int>(n) == k) continue;
    if (alpha[n] == channel)
      interf += static_cast<long double>(scn.users[n].tx_power_w) * slot.gain[n];
  }
  const long double p = scn.users[static_cast<std::size_t>(k)].tx_power_w;
  const long double h = slot.gain[static_cast<std::size_t>(k)];
  const long double sinr = p * h / (interf + static_cast<long double>(scn.cfg.noise_w));
  return static_cast<long double>(scn.cfg.bandwidth_hz) / scn.cfg.channels *
         (std::log(1.0L + sinr) / std::log(2.0L));
}

inline long double oracle_local_energy(const Scenario& scn, int task_id) {
  const auto& t = scn.task(task_id);
  const long double s = t.cycles;
  const long double tau = scn.cfg.slot_seconds;
  return static_cast<long double>(scn.cfg.energy_coeff) * s * s * s / (tau * tau);
}

inline long double oracle_offload_energy(const Scenario& scn, int k, int task_id, bool cached,
                                         long double rate) {
  const auto& t = scn.task(task_id);
  const long double bits = 8.0L * (t.input_bytes + (cached ? 0.0L : t.software_bytes));
  return static_cast<long double>(scn.users[static_cast<std::size_t>(k)].tx_power_w) * bits / rate;
}

inline long double oracle_offload_delay(const Scenario& scn, int k, int task_id, bool cached,
                                        long double rate) {
  (void)k;
  const auto& t = scn.task(task_id);
  const long double bits = 8.0L * (t.input_bytes + (cached ? 0.0L : t.software_bytes));
  return static_cast<long double>(t.cycles) / scn.cfg.edge_cpu_hz + bits / rate;
}

// Own energy of user k under decision a (0 = local), others fixed; also
// reports delay feasibility of the choice.
struct OracleCost {
  long double energy = 0;
  bool feasible = true;
};

inline OracleCost oracle_own_cost(const Scenario& scn, int k, int a, const RequestState& mu,
                                  const CacheState& cache, const SlotRealization& slot,
                                  const OffloadDecision& alpha) {
  OracleCost out;
  const int f = mu[static_cast<std::size_t>(k)];
  if (f == 0) {
    out.energy = 0;
    out.feasible = a == 0;
    return out;
  }
  if (a == 0) {
    out.energy = oracle_local_energy(scn, f);
    return out;
  }
  OffloadDecision trial = alpha;
  trial[static_cast<std::size_t>(k)] = a;
  const bool cached = cache[static_cast<std::size_t>(f - 1)] != 0;
  const long double rate = oracle_rate(scn, k, a, trial, slot);
  out.energy = oracle_offload_energy(scn, k, f, cached, rate);
  out.feasible = oracle_offload_delay(scn, k, f, cached, rate) <=
                 static_cast<long double>(scn.cfg.slot_seconds);
  return out;
}

// Exhaustive check that no requesting user has a feasible unilateral
// deviation strictly lowering its own energy.  Enumerates the whole
// (M+1)^K profile space to locate the profile under test, then checks the
// deviations row by row.
inline bool oracle_is_nash(const Scenario& scn, const RequestState& mu, const CacheState& cache,
                           const SlotRealization& slot, const OffloadDecision& alpha,
                           long double rel_tol = 1e-12L) {
  const int K = scn.cfg.users;
  const int M = scn.cfg.channels;
  std::uint64_t profiles = 1;
  for (int k = 0; k < K; ++k) profiles *= static_cast<std::uint64_t>(M + 1);

  // locate the candidate profile among all (M+1)^K
  bool seen = false;
  for (std::uint64_t code = 0; code < profiles; ++code) {
    std::uint64_t rest = code;
    bool match = true;
    for (int k = 0; k < K; ++k) {
      if (static_cast<int>(rest % static_cast<std::uint64_t>(M + 1)) !=
          alpha[static_cast<std::size_t>(k)])
        match = false;
      rest /= static_cast<std::uint64_t>(M + 1);
    }
    if (match) {
      seen = true;
      break;
    }
  }
  if (!seen) return false;

  for (int k = 0; k < K; ++k) {
    if (mu[static_cast<std::size_t>(k)] == 0) {
      if (alpha[static_cast<std::size_t>(k)] != 0) return false;
      continue;
    }
    const OracleCost current =
        oracle_own_cost(scn, k, alpha[static_cast<std::size_t>(k)], mu, cache, slot, alpha);
    if (!current.feasible) return false;
    for (int a = 0; a <= M; ++a) {
      if (a == alpha[static_cast<std::size_t>(k)]) continue;
      const OracleCost dev = oracle_own_cost(scn, k, a, mu, cache, slot, alpha);
      if (!dev.feasible) continue;
      const long double scale = std::max<long double>(1e-300L, current.energy);
      if (dev.energy < current.energy - rel_tol * scale) return false;
    }
  }
  return true;
}

}  // namespace testutil
