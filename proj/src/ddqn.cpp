#include "mecsim/ddqn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "mecsim/game.hpp"

namespace mecsim {

ReplayMemory::ReplayMemory(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("replay capacity must be positive");
  buffer_.reserve(capacity);
}

void ReplayMemory::push(Transition t) {
  if (buffer_.size() < capacity_) {
    buffer_.push_back(std::move(t));
  } else {
    buffer_[cursor_] = std::move(t);
  }
  cursor_ = (cursor_ + 1) % capacity_;
}

std::vector<std::size_t> ReplayMemory::sample_indices(std::size_t batch, Rng& rng) const {
  if (batch > buffer_.size())
    throw std::runtime_error("replay memory holds fewer records than a batch");
  std::vector<std::size_t> idx(batch);
  for (auto& i : idx) i = static_cast<std::size_t>(rng.below(buffer_.size()));
  return idx;
}

void AgentConfig::validate() const {
  if (!(discount > 0 && discount < 1)) throw std::invalid_argument("discount outside (0,1)");
  if (eps_start < 0 || eps_start > 1 || eps_end < 0 || eps_end > 1)
    throw std::invalid_argument("exploration probabilities outside [0,1]");
  if (target_copy_period < 1) throw std::invalid_argument("target copy period must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
  if (!(learning_rate > 0)) throw std::invalid_argument("learning rate must be positive");
  if (replay_capacity == 0) throw std::invalid_argument("replay capacity must be positive");
  if (!(knapsack_unit_bytes > 0)) throw std::invalid_argument("capacity unit must be positive");
  if (hidden_units < 1) throw std::invalid_argument("hidden width must be >= 1");
}

double AgentConfig::epsilon_at(std::int64_t slot) const {
  if (eps_decay_slots <= 0) return eps_end;
  const double frac = std::min(1.0, static_cast<double>(slot) / static_cast<double>(eps_decay_slots));
  return eps_start + (eps_end - eps_start) * frac;
}

Agent::Agent(const Scenario& scn, const AgentConfig& cfg, Rng& init)
    : cfg_(cfg),
      eval_(scn.cfg.users, scn.cfg.tasks, cfg.hidden_units, init),
      target_(eval_.users(), eval_.tasks(), eval_.hidden(), init),
      replay_(cfg.replay_capacity) {
  cfg_.validate();
  sizes_bytes_.reserve(scn.tasks.size());
  for (const auto& t : scn.tasks) sizes_bytes_.push_back(t.software_bytes);
  size_units_ = knapsack::sizes_to_units(sizes_bytes_, cfg_.knapsack_unit_bytes);
  capacity_units_ =
      static_cast<std::int64_t>(std::floor(scn.cfg.cache_bytes / cfg_.knapsack_unit_bytes));
  cache_bytes_ = scn.cfg.cache_bytes;
  ScaaNetwork::clone_weights(eval_, target_);
}

CacheState Agent::greedy_action(const RequestState& state) const {
  const auto contributions = eval_.values(encode_state(state));
  return knapsack::solve_units(contributions, size_units_, capacity_units_);
}

CacheState Agent::select_action(const RequestState& state, double epsilon, Rng& rng) {
  if (epsilon > 0 && rng.uniform() < epsilon) {
    // uniformly random subset, trimmed to capacity in random order; keeps
    // the explored actions diverse even when everything would fit
    std::vector<int> picked;
    picked.reserve(sizes_bytes_.size());
    for (std::size_t f = 0; f < sizes_bytes_.size(); ++f)
      if (rng.uniform() < 0.5) picked.push_back(static_cast<int>(f));
    rng.shuffle(picked);
    CacheState action(sizes_bytes_.size(), 0);
    double used = 0;
    for (int f : picked) {
      if (used + sizes_bytes_[static_cast<std::size_t>(f)] <= cache_bytes_) {
        action[static_cast<std::size_t>(f)] = 1;
        used += sizes_bytes_[static_cast<std::size_t>(f)];
      }
    }
    return action;
  }
  return greedy_action(state);
}

CacheUpdate Agent::infer_update(const RequestState& state, const CacheState& current) const {
  const CacheState next = greedy_action(state);
  CacheUpdate update(current.size());
  for (std::size_t f = 0; f < current.size(); ++f)
    update[f] = static_cast<std::int8_t>(static_cast<int>(next[f]) - static_cast<int>(current[f]));
  return update;
}

double Agent::target_state_value(const RequestState& state) const {
  const auto contributions = target_.values(encode_state(state));
  return knapsack::max_value_units(contributions, size_units_, capacity_units_);
}

double Agent::train_step(Rng& rng) {
  return train_step(replay_.sample_indices(static_cast<std::size_t>(cfg_.batch_size), rng));
}

double Agent::train_step(const std::vector<std::size_t>& batch) {
  if (batch.empty()) throw std::runtime_error("empty training batch");
  eval_.zero_gradients();
  double mean_loss = 0;
  const double scale = 1.0 / static_cast<double>(batch.size());
  for (std::size_t i : batch) {
    const Transition& tr = replay_.at(i);
    const InputEncoding enc = encode_state(tr.state);
    const double q = eval_.forward(enc, tr.action);
    // the bootstrap value comes from the target network only
    const double target = tr.reward + cfg_.discount * target_state_value(tr.next_state);
    const HuberResult h = huber_loss(q, target);
    mean_loss += h.loss * scale;
    eval_.backward(enc, tr.action, h.dloss_dq * scale);
  }
  eval_.sgd_step(cfg_.learning_rate);
  return mean_loss;
}

void Agent::maybe_copy_target(std::int64_t slot) {
  if (slot % cfg_.target_copy_period == 0) ScaaNetwork::clone_weights(eval_, target_);
}

void Agent::load_checkpoint(const std::string& path) {
  ScaaNetwork loaded = ScaaNetwork::load(path);
  ScaaNetwork::clone_weights(loaded, eval_);
  ScaaNetwork::clone_weights(loaded, target_);
}

double compute_reward(const Scenario& scn, const RequestState& mu, const CacheState& action,
                      const SlotRealization& slot, Rng& arbiter_cached, Rng& arbiter_empty) {
  const auto with_cache = game::solve_ne(scn, mu, action, slot, arbiter_cached);
  const CacheState empty(action.size(), 0);
  const auto without_cache = game::solve_ne(scn, mu, empty, slot, arbiter_empty);
  return without_cache.energy - with_cache.energy;
}

}  // namespace mecsim
