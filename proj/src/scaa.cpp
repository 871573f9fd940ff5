#include "mecsim/scaa.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace mecsim {

namespace {

constexpr char kMagic[8] = {'S', 'C', 'A', 'A', 'N', 'E', 'T', '1'};

void uniform_fill(std::vector<double>& w, double limit, Rng& rng) {
  for (double& x : w) x = rng.uniform(-limit, limit);
}

void write_block(std::ofstream& os, const std::vector<double>& v) {
  os.write(reinterpret_cast<const char*>(v.data()),
           static_cast<std::streamsize>(v.size() * sizeof(double)));
}

void read_block(std::ifstream& is, std::vector<double>& v) {
  is.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(v.size() * sizeof(double)));
}

}  // namespace

InputEncoding encode_state(const RequestState& mu) {
  InputEncoding enc;
  enc.request = mu;
  enc.active.resize(mu.size());
  for (std::size_t k = 0; k < mu.size(); ++k) enc.active[k] = mu[k] >= 1 ? 1 : 0;
  return enc;
}

HuberResult huber_loss(double q, double target) {
  const double e = q - target;
  HuberResult r;
  if (std::abs(e) < 1.0) {
    r.loss = 0.5 * e * e;
    r.dloss_dq = e;
  } else {
    r.loss = std::abs(e) - 0.5;
    r.dloss_dq = e > 0 ? 1.0 : -1.0;
  }
  return r;
}

ScaaNetwork::ScaaNetwork(int users, int tasks, int hidden, Rng& init)
    : users_(users), tasks_(tasks), hidden_(hidden) {
  if (users < 1 || tasks < 1 || hidden < 1)
    throw std::invalid_argument("network dimensions must be positive");
  const auto K = static_cast<std::size_t>(users);
  const auto F = static_cast<std::size_t>(tasks);
  const auto H = static_cast<std::size_t>(hidden);

  w1_.resize(K * F);
  b2_.assign(F, 0.05);
  w3_.resize(F * H);
  b3_.assign(H, 0.05);
  w4_.resize(H * F);
  b4_.assign(F, 0.0);
  uniform_fill(w1_, 1.0 / std::sqrt(static_cast<double>(users)), init);
  uniform_fill(w3_, 1.0 / std::sqrt(static_cast<double>(tasks)), init);
  uniform_fill(w4_, 1.0 / std::sqrt(static_cast<double>(hidden)), init);

  gw1_.assign(K * F, 0.0);
  gb2_.assign(F, 0.0);
  gw3_.assign(F * H, 0.0);
  gb3_.assign(H, 0.0);
  gw4_.assign(H * F, 0.0);
  gb4_.assign(F, 0.0);
}

void ScaaNetwork::trunk(const InputEncoding& enc, std::vector<double>& z2, std::vector<double>& a2,
                        std::vector<double>& z3, std::vector<double>& a3,
                        std::vector<double>& out) const {
  const auto F = static_cast<std::size_t>(tasks_);
  const auto H = static_cast<std::size_t>(hidden_);

  // Requesting users feed exactly one second-layer cell; idle users feed
  // nothing because their input is zero.
  z2.assign(F, 0.0);
  for (std::size_t k = 0; k < enc.request.size(); ++k) {
    const int f = enc.request[k];
    if (f >= 1) z2[static_cast<std::size_t>(f - 1)] += w1_[idx_kf(static_cast<int>(k), f - 1)];
  }
  a2.resize(F);
  for (std::size_t f = 0; f < F; ++f) {
    z2[f] += b2_[f];
    a2[f] = z2[f] > 0 ? z2[f] : 0.0;
  }

  z3.assign(H, 0.0);
  for (std::size_t f = 0; f < F; ++f) {
    if (a2[f] == 0.0) continue;
    const double a = a2[f];
    const std::size_t row = f * H;
    for (std::size_t h = 0; h < H; ++h) z3[h] += w3_[row + h] * a;
  }
  a3.resize(H);
  for (std::size_t h = 0; h < H; ++h) {
    z3[h] += b3_[h];
    a3[h] = z3[h] > 0 ? z3[h] : 0.0;
  }

  out.assign(F, 0.0);
  for (std::size_t h = 0; h < H; ++h) {
    if (a3[h] == 0.0) continue;
    const double a = a3[h];
    const std::size_t row = h * F;
    for (std::size_t f = 0; f < F; ++f) out[f] += w4_[row + f] * a;
  }
  for (std::size_t f = 0; f < F; ++f) out[f] += b4_[f];
}

std::vector<double> ScaaNetwork::values(const InputEncoding& enc) const {
  if (enc.request.size() != static_cast<std::size_t>(users_))
    throw std::invalid_argument("encoding does not match the network's user count");
  std::vector<double> z2, a2, z3, a3, out;
  trunk(enc, z2, a2, z3, a3, out);
  return out;
}

double ScaaNetwork::forward(const InputEncoding& enc, const CacheState& action) {
  if (enc.request.size() != static_cast<std::size_t>(users_))
    throw std::invalid_argument("encoding does not match the network's user count");
  if (action.size() != static_cast<std::size_t>(tasks_))
    throw std::invalid_argument("action does not match the network's task count");
  trunk(enc, z2_, a2_, z3_, a3_, o_);
  cached_enc_ = enc;
  cached_action_ = action;
  has_forward_ = true;
  double q = 0;
  for (std::size_t f = 0; f < action.size(); ++f)
    if (action[f]) q += o_[f];
  return q;
}

void ScaaNetwork::backward(const InputEncoding& enc, const CacheState& action, double dloss_dq) {
  if (!has_forward_ || cached_enc_.request != enc.request || cached_action_ != action)
    throw std::logic_error("backward without a matching forward: activations are stale");
  const auto F = static_cast<std::size_t>(tasks_);
  const auto H = static_cast<std::size_t>(hidden_);

  // dQ/dO_f is the action bit
  std::vector<double> do_(F, 0.0);
  for (std::size_t f = 0; f < F; ++f)
    if (action[f]) do_[f] = dloss_dq;

  std::vector<double> da3(H, 0.0);
  for (std::size_t h = 0; h < H; ++h) {
    const std::size_t row = h * F;
    double acc = 0;
    for (std::size_t f = 0; f < F; ++f) {
      gw4_[row + f] += a3_[h] * do_[f];
      acc += w4_[row + f] * do_[f];
    }
    da3[h] = acc;
  }
  for (std::size_t f = 0; f < F; ++f) gb4_[f] += do_[f];

  std::vector<double> da2(F, 0.0);
  for (std::size_t h = 0; h < H; ++h) {
    const double dz3 = z3_[h] > 0 ? da3[h] : 0.0;
    if (dz3 == 0.0) continue;
    gb3_[h] += dz3;
    for (std::size_t f = 0; f < F; ++f) {
      gw3_[f * H + h] += a2_[f] * dz3;
      da2[f] += w3_[f * H + h] * dz3;
    }
  }

  for (std::size_t f = 0; f < F; ++f) {
    const double dz2 = z2_[f] > 0 ? da2[f] : 0.0;
    gb2_[f] += dz2;
  }
  // only the surviving first-layer connections carry gradient
  for (std::size_t k = 0; k < enc.request.size(); ++k) {
    const int f = enc.request[k];
    if (f >= 1) {
      const double dz2 = z2_[static_cast<std::size_t>(f - 1)] > 0
                             ? da2[static_cast<std::size_t>(f - 1)]
                             : 0.0;
      gw1_[idx_kf(static_cast<int>(k), f - 1)] += dz2;
    }
  }
}

void ScaaNetwork::zero_gradients() {
  std::fill(gw1_.begin(), gw1_.end(), 0.0);
  std::fill(gb2_.begin(), gb2_.end(), 0.0);
  std::fill(gw3_.begin(), gw3_.end(), 0.0);
  std::fill(gb3_.begin(), gb3_.end(), 0.0);
  std::fill(gw4_.begin(), gw4_.end(), 0.0);
  std::fill(gb4_.begin(), gb4_.end(), 0.0);
}

void ScaaNetwork::scale_gradients(double factor) {
  for (auto* g : {&gw1_, &gb2_, &gw3_, &gb3_, &gw4_, &gb4_})
    for (double& x : *g) x *= factor;
}

void ScaaNetwork::sgd_step(double learning_rate) {
  const std::vector<double>* grads[] = {&gw1_, &gb2_, &gw3_, &gb3_, &gw4_, &gb4_};
  std::vector<double>* params[] = {&w1_, &b2_, &w3_, &b3_, &w4_, &b4_};
  for (int i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < params[i]->size(); ++j)
      (*params[i])[j] -= learning_rate * (*grads[i])[j];
  has_forward_ = false;
}

void ScaaNetwork::clone_weights(const ScaaNetwork& src, ScaaNetwork& dst) {
  if (src.users_ != dst.users_ || src.tasks_ != dst.tasks_ || src.hidden_ != dst.hidden_)
    throw std::invalid_argument("cannot clone weights between mismatched networks");
  dst.w1_ = src.w1_;
  dst.b2_ = src.b2_;
  dst.w3_ = src.w3_;
  dst.b3_ = src.b3_;
  dst.w4_ = src.w4_;
  dst.b4_ = src.b4_;
  dst.has_forward_ = false;
}

std::size_t ScaaNetwork::parameter_count() const {
  return w1_.size() + b2_.size() + w3_.size() + b3_.size() + w4_.size() + b4_.size();
}

namespace {
template <typename Vecs>
auto& locate(Vecs& vecs, std::size_t& i) {
  for (auto* v : vecs) {
    if (i < v->size()) return (*v)[i];
    i -= v->size();
  }
  throw std::out_of_range("parameter index out of range");
}
}  // namespace

double ScaaNetwork::get_parameter(std::size_t i) const {
  const std::vector<double>* vecs[] = {&w1_, &b2_, &w3_, &b3_, &w4_, &b4_};
  return locate(vecs, i);
}

void ScaaNetwork::set_parameter(std::size_t i, double v) {
  std::vector<double>* vecs[] = {&w1_, &b2_, &w3_, &b3_, &w4_, &b4_};
  locate(vecs, i) = v;
  has_forward_ = false;
}

double ScaaNetwork::get_gradient(std::size_t i) const {
  const std::vector<double>* vecs[] = {&gw1_, &gb2_, &gw3_, &gb3_, &gw4_, &gb4_};
  return locate(vecs, i);
}

std::vector<double> ScaaNetwork::second_layer_preactivation(const InputEncoding& enc) const {
  std::vector<double> z2, a2, z3, a3, out;
  trunk(enc, z2, a2, z3, a3, out);
  return z2;
}

void ScaaNetwork::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open checkpoint for writing: " + path);
  os.write(kMagic, sizeof(kMagic));
  const std::int32_t dims[3] = {users_, tasks_, hidden_};
  os.write(reinterpret_cast<const char*>(dims), sizeof(dims));
  write_block(os, w1_);
  write_block(os, b2_);
  write_block(os, w3_);
  write_block(os, b3_);
  write_block(os, w4_);
  write_block(os, b4_);
  if (!os) throw std::runtime_error("failed writing checkpoint: " + path);
}

ScaaNetwork ScaaNetwork::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("not a network checkpoint: " + path);
  std::int32_t dims[3];
  is.read(reinterpret_cast<char*>(dims), sizeof(dims));
  if (!is || dims[0] < 1 || dims[1] < 1 || dims[2] < 1)
    throw std::runtime_error("corrupt checkpoint header: " + path);
  Rng dummy(0);
  ScaaNetwork net(dims[0], dims[1], dims[2], dummy);
  read_block(is, net.w1_);
  read_block(is, net.b2_);
  read_block(is, net.w3_);
  read_block(is, net.b3_);
  read_block(is, net.w4_);
  read_block(is, net.b4_);
  if (!is) throw std::runtime_error("checkpoint truncated: " + path);
  return net;
}

}  // namespace mecsim
