#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mecsim/rng.hpp"

namespace mecsim {

// Per-user request vector; 0 means no request, 1..F is a task id.
using RequestState = std::vector<int>;
// Per-task cache bit.
using CacheState = std::vector<std::uint8_t>;
// Per-task cache update in {-1, 0, +1}.
using CacheUpdate = std::vector<std::int8_t>;
// Per-user offloading decision; 0 means local computing, 1..M is a channel.
using OffloadDecision = std::vector<int>;

// Raised when a live state breaks one of the problem constraints; the
// harness aborts the run and surfaces the constraint name.
class ConstraintViolation : public std::runtime_error {
 public:
  ConstraintViolation(std::string constraint, const std::string& detail)
      : std::runtime_error("constraint " + constraint + " violated: " + detail),
        constraint_(std::move(constraint)) {}
  const std::string& constraint() const { return constraint_; }

 private:
  std::string constraint_;
};

struct Task {
  int id = 0;              // 1..F
  double input_bytes = 0;  // size of the input parameters
  double software_bytes = 0;
  double cycles = 0;  // CPU cycles to execute

  void validate() const;
};

struct User {
  int id = 0;  // 1..K
  double distance_m = 0;
  double tx_power_w = 0;
  double cpu_hz = 0;  // local CPU ceiling, used in strict-feasibility mode

  void validate() const;
};

struct SystemConfig {
  int users = 0;     // K
  int tasks = 0;     // F
  int channels = 0;  // M
  double bandwidth_hz = 0;
  double cache_bytes = 0;
  double slot_seconds = 0;
  double noise_w = 0;      // receiver noise variance
  double edge_cpu_hz = 0;  // MEC server CPU
  double user_cpu_hz = 0;  // device CPU ceiling
  double path_loss_exp = 0;
  double energy_coeff = 0;  // joule.s^2/cycle^3
  bool strict_feasibility = false;

  void validate() const;
};

// One slot's channel realisation: unit-mean exponential fading per user and
// the resulting gain h_k = rho_k * d_k^-n.
struct SlotRealization {
  std::vector<double> fading;
  std::vector<double> gain;
};

// Per-user request chain: from any state to idle with probability R; from
// idle to task j by a Zipf(delta) draw; from task i uniformly to one of the
// N successors (i+1 .. i+N) mod (F+1), which may wrap onto idle.
class RequestModel {
 public:
  RequestModel(int tasks, double idle_prob, double zipf_exp, int neighbors);

  int tasks() const { return tasks_; }
  double idle_prob() const { return idle_prob_; }
  double zipf_exp() const { return zipf_exp_; }
  int neighbors() const { return neighbors_; }

  // probability of moving from request i to request j, both in [0, F]
  double transition_prob(int from, int to) const;
  std::vector<std::vector<double>> transition_matrix() const;
  int step(int from, Rng& rng) const;

 private:
  int tasks_;
  int neighbors_;
  double idle_prob_;
  double zipf_exp_;
  std::vector<double> zipf_cdf_;  // cumulative popularity over tasks 1..F
};

struct Scenario {
  SystemConfig cfg;
  std::vector<Task> tasks;  // tasks[f-1] has id f
  std::vector<User> users;  // users[k] has id k+1

  double total_software_bytes() const;
  const Task& task(int id) const { return tasks.at(static_cast<std::size_t>(id - 1)); }
  void validate() const;
};

double cache_bytes_used(const CacheState& cache, const std::vector<Task>& tasks);

// Checks the cache capacity constraint and throws ConstraintViolation("10a")
// on overflow.
void check_cache_capacity(const CacheState& cache, const Scenario& scn);

// Checks an update against the current cache: values in {-1,0,+1} (10f),
// no removal of uncached software (10d), and capacity of the successor
// state (10a via 10c).
void check_cache_update(const CacheUpdate& update, const CacheState& cache, const Scenario& scn);

CacheState apply_update(const CacheState& cache, const CacheUpdate& update);

}  // namespace mecsim
