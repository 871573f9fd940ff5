#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mecsim/rng.hpp"
#include "mecsim/types.hpp"

namespace mecsim {

// Request-state coding for the network input.  active[k] is 1 iff user k
// requests some task; a requesting user's first-layer row is masked down to
// the single connection (k, request[k]), an idle user's row stays fully
// connected but contributes nothing because its input is zero.
struct InputEncoding {
  std::vector<std::uint8_t> active;  // X_k
  RequestState request;              // raw requests, defines the mask

  bool masked(int k, int f) const {  // f is 0-based task index
    return request[static_cast<std::size_t>(k)] >= 1 &&
           request[static_cast<std::size_t>(k)] != f + 1;
  }
};

InputEncoding encode_state(const RequestState& mu);

struct HuberResult {
  double loss = 0;
  double dloss_dq = 0;
};

// Huber loss of the prediction error q - target with unit transition point.
HuberResult huber_loss(double q, double target);

// Value network with a masked first layer and an aggregation output: the
// trunk produces one value contribution per task and the state-action value
// is the inner product of those contributions with the action bits.
//
// Layout: input K -> masked dense (F, ReLU) -> dense (hidden, ReLU)
//         -> dense (F, linear) = per-task values -> weighted sum by action.
class ScaaNetwork {
 public:
  ScaaNetwork(int users, int tasks, int hidden, Rng& init);

  int users() const { return users_; }
  int tasks() const { return tasks_; }
  int hidden() const { return hidden_; }

  // Trunk output: per-task value contributions (no gradient bookkeeping).
  std::vector<double> values(const InputEncoding& enc) const;

  // Q(state, action); records activations for the matching backward call.
  double forward(const InputEncoding& enc, const CacheState& action);

  // Accumulates dLoss/dparam into the gradient buffers.  Must follow a
  // forward call with the same encoding and action; throws otherwise.
  void backward(const InputEncoding& enc, const CacheState& action, double dloss_dq);

  void zero_gradients();
  void scale_gradients(double factor);
  void sgd_step(double learning_rate);

  // Copies every parameter of src into dst; shapes must match.
  static void clone_weights(const ScaaNetwork& src, ScaaNetwork& dst);

  // Flat parameter/gradient access, used by checkpointing and the
  // finite-difference checks.
  std::size_t parameter_count() const;
  double get_parameter(std::size_t i) const;
  void set_parameter(std::size_t i, double v);
  double get_gradient(std::size_t i) const;

  double first_layer_weight(int k, int f) const { return w1_[idx_kf(k, f)]; }
  void set_first_layer_weight(int k, int f, double v) { w1_[idx_kf(k, f)] = v; }
  double first_layer_gradient(int k, int f) const { return gw1_[idx_kf(k, f)]; }

  // Pre-activation of the second layer, exposed for the state-coding checks.
  std::vector<double> second_layer_preactivation(const InputEncoding& enc) const;

  void save(const std::string& path) const;
  static ScaaNetwork load(const std::string& path);

 private:
  std::size_t idx_kf(int k, int f) const {
    return static_cast<std::size_t>(k) * static_cast<std::size_t>(tasks_) +
           static_cast<std::size_t>(f);
  }
  void trunk(const InputEncoding& enc, std::vector<double>& z2, std::vector<double>& a2,
             std::vector<double>& z3, std::vector<double>& a3, std::vector<double>& out) const;

  int users_ = 0;
  int tasks_ = 0;
  int hidden_ = 0;

  std::vector<double> w1_, b2_;  // K x F, F
  std::vector<double> w3_, b3_;  // F x H, H
  std::vector<double> w4_, b4_;  // H x F, F
  std::vector<double> gw1_, gb2_, gw3_, gb3_, gw4_, gb4_;

  // activations cached by forward for the paired backward
  std::vector<double> z2_, a2_, z3_, a3_, o_;
  InputEncoding cached_enc_;
  CacheState cached_action_;
  bool has_forward_ = false;
};

}  // namespace mecsim
