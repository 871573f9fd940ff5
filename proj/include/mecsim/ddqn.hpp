#pragma once

#include <cstdint>
#include <vector>

#include "mecsim/knapsack.hpp"
#include "mecsim/rng.hpp"
#include "mecsim/scaa.hpp"
#include "mecsim/types.hpp"

namespace mecsim {

struct Transition {
  RequestState state;
  CacheState action;  // cache content chosen for the next slot
  double reward = 0;
  RequestState next_state;
};

// Fixed-capacity ring buffer; the oldest record is evicted first.
class ReplayMemory {
 public:
  explicit ReplayMemory(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const { return buffer_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Transition& at(std::size_t i) const { return buffer_[i]; }
  std::vector<std::size_t> sample_indices(std::size_t batch, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::size_t cursor_ = 0;
  std::vector<Transition> buffer_;
};

struct AgentConfig {
  double discount = 0.9;
  double eps_start = 1.0;
  double eps_end = 0.05;
  std::int64_t eps_decay_slots = 0;  // 0: resolved to half the training slots
  std::int64_t target_copy_period = 100;
  int batch_size = 8;
  double learning_rate = 1e-4;
  std::size_t replay_capacity = 1000;
  double knapsack_unit_bytes = 1e6;
  int hidden_units = 128;

  void validate() const;
  double epsilon_at(std::int64_t slot) const;  // linear decay, slots are 1-based
};

// Caching-update agent: evaluation and target value networks, replay memory,
// epsilon-greedy behaviour and the per-slot training step.
class Agent {
 public:
  Agent(const Scenario& scn, const AgentConfig& cfg, Rng& init);

  const AgentConfig& config() const { return cfg_; }
  ScaaNetwork& eval_net() { return eval_; }
  const ScaaNetwork& eval_net() const { return eval_; }
  const ScaaNetwork& target_net() const { return target_; }

  // Greedy cache content for the next slot: knapsack over the evaluation
  // network's per-task values.
  CacheState greedy_action(const RequestState& state) const;

  // Epsilon-greedy: with probability epsilon a random feasible cache content
  // (shuffled task order, added while capacity allows), else greedy.
  CacheState select_action(const RequestState& state, double epsilon, Rng& rng);

  // Next-slot cache via the greedy action, returned as an update against the
  // current content.
  CacheUpdate infer_update(const RequestState& state, const CacheState& current) const;

  void store(Transition t) { replay_.push(std::move(t)); }
  const ReplayMemory& replay() const { return replay_; }
  bool ready() const { return replay_.size() >= static_cast<std::size_t>(cfg_.batch_size); }

  // One gradient step on a uniformly sampled mini-batch; returns the mean
  // Huber loss.  Throws if the replay holds fewer records than a batch.
  double train_step(Rng& rng);
  double train_step(const std::vector<std::size_t>& batch);

  // Copies evaluation weights into the target network every g-th slot.
  void maybe_copy_target(std::int64_t slot);

  // max_a Q(state, a) under the capacity, evaluated with the target network.
  double target_state_value(const RequestState& state) const;

  void save_checkpoint(const std::string& path) const { eval_.save(path); }
  void load_checkpoint(const std::string& path);

 private:
  AgentConfig cfg_;
  std::vector<double> sizes_bytes_;
  std::vector<std::int64_t> size_units_;
  std::int64_t capacity_units_ = 0;
  double cache_bytes_ = 0;
  ScaaNetwork eval_;
  ScaaNetwork target_;
  ReplayMemory replay_;
};

// Energy saved by running cache content `action` instead of an empty cache
// in the slot whose requests are `mu`: both offloading games run on the same
// realisation with independent arbiter randomness.
double compute_reward(const Scenario& scn, const RequestState& mu, const CacheState& action,
                      const SlotRealization& slot, Rng& arbiter_cached, Rng& arbiter_empty);

}  // namespace mecsim
