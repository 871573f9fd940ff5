#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "mecsim/config.hpp"
#include "mecsim/types.hpp"

namespace mecsim::harness {

enum class Policy { Proposed, Lru, Lfu, Fifo, Lmp, OffloadOnly };

Policy policy_from_name(const std::string& name);
std::string policy_name(Policy p);
const std::vector<Policy>& all_policies();

struct SlotRecord {
  std::int64_t slot = 0;
  double energy = 0;           // system energy under the live cache
  double energy_no_cache = 0;  // empty-cache counterfactual
  double reward = 0;
  std::int64_t ne_iterations = 0;
  int cache_hits = 0;  // requests whose software is cached this slot
  double loss = 0;     // training loss, zero outside training
};

struct RunResult {
  std::vector<SlotRecord> records;
  double summary_energy = 0;  // mean energy over the evaluation window
  std::string metrics_path;
  std::string checkpoint_path;
};

// One policy's live simulation: owns the world, the cache and (for the
// proposed policy) the agent, and advances one slot at a time.  Each step
// samples requests and fading, solves the offloading game under the live
// cache, audits every constraint, computes the empty-cache counterfactual
// and applies the policy's cache update at the slot end.
class Run {
 public:
  Run(const SimConfig& cfg, Policy policy, std::uint64_t seed, const std::string& checkpoint = "");
  ~Run();
  Run(Run&&) noexcept;
  Run& operator=(Run&&) noexcept;

  SlotRecord step();  // advances one slot; throws past the horizon
  std::int64_t slot() const;  // slots completed so far
  std::int64_t total_slots() const;
  bool done() const;
  const SimConfig& config() const;
  const Scenario& scenario() const;
  const CacheState& cache() const;  // cache content for the upcoming slot
  const Agent* agent() const;       // null for baseline policies
  Policy policy() const;

 private:
  struct State;
  std::unique_ptr<State> state_;
};

// Executes one seeded run of a policy to completion.  With a non-empty
// out_dir the per-slot records, a trailing summary row and (for the proposed
// policy) a weight checkpoint are written there; metrics are
// byte-deterministic in (config, seed).  An optional checkpoint path preloads
// the agent and is only meaningful for the proposed policy.
RunResult run_experiment(const SimConfig& cfg, Policy policy, std::uint64_t seed,
                         const std::string& out_dir = "", const std::string& checkpoint = "");

struct SweepCell {
  std::string axis;
  double value = 0;
  Policy policy = Policy::Proposed;
  std::uint64_t seed = 0;
  double summary_energy = 0;
  bool failed = false;
  std::string error;
  std::string metrics_path;
};

struct SweepResult {
  std::vector<SweepCell> cells;
  std::string table_path;
  int failures = 0;
};

// Grid x policies x seeds cross product; cells run on a small worker pool
// and the aggregate table reports mean and standard deviation over seeds.
SweepResult run_sweep(const SimConfig& base, const std::string& axis,
                      const std::vector<double>& grid, const std::vector<Policy>& policies,
                      const std::vector<std::uint64_t>& seeds, const std::string& out_dir,
                      int jobs = 0);

// Trailing mean with warm-up truncation: out[i] covers series[i .. i+w-1].
// Throws if the window is empty or longer than the series.
std::vector<double> moving_average(const std::vector<double>& series, std::size_t window = 20);

// Re-reads a metrics file and returns the mean of the energy column,
// checking it against the recorded summary row.
double metrics_file_summary(const std::string& path);

}  // namespace mecsim::harness
