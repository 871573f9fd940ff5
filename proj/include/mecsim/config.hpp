#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mecsim/ddqn.hpp"
#include "mecsim/types.hpp"

namespace mecsim {

// Full experiment configuration.  Two named profiles ship with the
// simulator:
//
//   paper-table2    the literal reference constants (5 ms slots, gigabyte
//                   software, gigacycle tasks).  Under these constants the
//                   slot deadline rules out both local computing at the
//                   device CPU and any upload, so the profile is kept for
//                   inspection rather than for experiments.
//   desk-consistent a rescaled workload (5 s slots, megabyte inputs, tens
//                   of megabytes of software, sub-gigacycle tasks) in which
//                   local computing, cached and non-cached offloading are
//                   all feasible.  All shipped experiments use it.
struct SimConfig {
  std::string profile = "paper-table2";

  // environment
  int users = 20;
  int tasks = 50;
  int channels = 10;
  double bandwidth_hz = 30e6;
  double cache_bytes = 2e9;
  double slot_seconds = 5e-3;
  double noise_w = 2e-13;
  double edge_cpu_hz = 20e9;
  double user_cpu_hz = 1e9;
  double tx_power_w = 0.5;
  double path_loss_exp = 4;
  double energy_coeff = 5e-27;
  double cell_meters = 200;
  bool strict_feasibility = false;

  // task library generation (uniform per task)
  double input_min_bytes = 1e6;
  double input_max_bytes = 5e6;
  double software_min_bytes = 1e9;
  double software_max_bytes = 5e9;
  double cycles_min = 1e9;
  double cycles_max = 5e9;

  // request chain
  double idle_prob = 0.2;
  double zipf_exp = 0.8;
  int neighbors = 3;

  // run shape: training slots followed by a frozen evaluation segment
  std::int64_t train_slots = 2000;
  std::int64_t eval_slots = 0;

  AgentConfig agent;

  static SimConfig profile_defaults(const std::string& name);
  static SimConfig from_json_file(const std::string& path, const std::string& profile_override = "");
  void apply_json_text(const std::string& text);
  std::string to_json_text() const;

  SystemConfig system() const;
  RequestModel request_model() const;
  std::int64_t total_slots() const { return train_slots + eval_slots; }
  void validate() const;
};

// Deterministic world construction: user placement from the placement
// stream, task library from the task stream.
Scenario build_scenario(const SimConfig& cfg, std::uint64_t seed);

// Sets one sweepable parameter by name.  Valid axes: cache_bytes, users,
// tasks, channels, idle_prob, zipf_exp, neighbors, input_max_bytes,
// software_max_bytes, cycles_max.
void apply_axis(SimConfig& cfg, const std::string& axis, double value);

}  // namespace mecsim
