#include "mecsim/types.hpp"

#include <cmath>
#include <sstream>

namespace mecsim {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

void Task::validate() const {
  require(id >= 1, "task id must be >= 1");
  require(input_bytes > 0, "task input_bytes must be positive");
  require(software_bytes > 0, "task software_bytes must be positive");
  require(cycles > 0, "task cycles must be positive");
}

void User::validate() const {
  require(id >= 1, "user id must be >= 1");
  require(distance_m > 0, "user distance must be positive");
  require(tx_power_w > 0, "user tx power must be positive");
  require(cpu_hz > 0, "user cpu must be positive");
}

void SystemConfig::validate() const {
  require(users >= 1, "users must be >= 1");
  require(tasks >= 1, "tasks must be >= 1");
  require(channels >= 1, "channels must be >= 1");
  require(bandwidth_hz > 0, "bandwidth must be positive");
  require(cache_bytes >= 0, "cache size must be non-negative");
  require(slot_seconds > 0, "slot length must be positive");
  require(noise_w > 0, "noise variance must be positive");
  require(edge_cpu_hz > 0, "edge cpu must be positive");
  require(user_cpu_hz > 0, "user cpu must be positive");
  require(path_loss_exp > 0, "path loss exponent must be positive");
  require(energy_coeff > 0, "energy coefficient must be positive");
  require(edge_cpu_hz > user_cpu_hz, "edge cpu must exceed the device cpu");
}

RequestModel::RequestModel(int tasks, double idle_prob, double zipf_exp, int neighbors)
    : tasks_(tasks), neighbors_(neighbors), idle_prob_(idle_prob), zipf_exp_(zipf_exp) {
  if (tasks < 1) throw std::invalid_argument("request model needs at least one task");
  if (idle_prob < 0 || idle_prob > 1) throw std::invalid_argument("idle probability outside [0,1]");
  if (zipf_exp < 0) throw std::invalid_argument("zipf exponent must be non-negative");
  if (neighbors < 1 || neighbors > tasks)
    throw std::invalid_argument("neighbor count outside [1, tasks]");
  zipf_cdf_.resize(static_cast<std::size_t>(tasks));
  double acc = 0;
  for (int j = 1; j <= tasks; ++j) {
    acc += std::pow(static_cast<double>(j), -zipf_exp);
    zipf_cdf_[static_cast<std::size_t>(j - 1)] = acc;
  }
  for (auto& c : zipf_cdf_) c /= acc;
}

double RequestModel::transition_prob(int from, int to) const {
  const int states = tasks_ + 1;
  if (from < 0 || from >= states || to < 0 || to >= states)
    throw std::out_of_range("request state outside [0, F]");
  double p = 0;
  if (to == 0) p += idle_prob_;
  if (from == 0) {
    if (to >= 1) {
      const double w = zipf_cdf_[static_cast<std::size_t>(to - 1)] -
                       (to >= 2 ? zipf_cdf_[static_cast<std::size_t>(to - 2)] : 0.0);
      p += (1 - idle_prob_) * w;
    }
  } else {
    // successors (from+1 .. from+N) mod (F+1); the wrap may land on idle
    for (int q = 1; q <= neighbors_; ++q) {
      if ((from + q) % states == to) p += (1 - idle_prob_) / neighbors_;
    }
  }
  return p;
}

std::vector<std::vector<double>> RequestModel::transition_matrix() const {
  const int states = tasks_ + 1;
  std::vector<std::vector<double>> m(static_cast<std::size_t>(states),
                                     std::vector<double>(static_cast<std::size_t>(states), 0.0));
  for (int i = 0; i < states; ++i)
    for (int j = 0; j < states; ++j)
      m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = transition_prob(i, j);
  return m;
}

int RequestModel::step(int from, Rng& rng) const {
  const int states = tasks_ + 1;
  if (from < 0 || from >= states) throw std::out_of_range("request state outside [0, F]");
  const double u = rng.uniform();
  if (u < idle_prob_) return 0;
  if (from == 0) {
    // remap to [0,1) and invert the popularity cdf
    const double v = (u - idle_prob_) / (1 - idle_prob_);
    int lo = 0, hi = tasks_ - 1;
    while (lo < hi) {
      const int mid = (lo + hi) / 2;
      if (zipf_cdf_[static_cast<std::size_t>(mid)] <= v)
        lo = mid + 1;
      else
        hi = mid;
    }
    return lo + 1;
  }
  const double v = (u - idle_prob_) / (1 - idle_prob_);
  int q = 1 + static_cast<int>(v * neighbors_);
  if (q > neighbors_) q = neighbors_;
  return (from + q) % states;
}

double Scenario::total_software_bytes() const {
  double total = 0;
  for (const auto& t : tasks) total += t.software_bytes;
  return total;
}

void Scenario::validate() const {
  cfg.validate();
  if (tasks.size() != static_cast<std::size_t>(cfg.tasks))
    throw std::invalid_argument("task list does not match the configured count");
  if (users.size() != static_cast<std::size_t>(cfg.users))
    throw std::invalid_argument("user list does not match the configured count");
  for (std::size_t f = 0; f < tasks.size(); ++f) {
    tasks[f].validate();
    if (tasks[f].id != static_cast<int>(f) + 1)
      throw std::invalid_argument("task ids must be 1..F in order");
  }
  for (std::size_t k = 0; k < users.size(); ++k) {
    users[k].validate();
    if (users[k].id != static_cast<int>(k) + 1)
      throw std::invalid_argument("user ids must be 1..K in order");
  }
  if (cfg.strict_feasibility) {
    for (const auto& t : tasks) {
      if (t.cycles / cfg.slot_seconds > users.front().cpu_hz) {
        std::ostringstream os;
        os << "strict feasibility: task " << t.id << " needs " << t.cycles / cfg.slot_seconds
           << " Hz locally, device tops out at " << users.front().cpu_hz;
        throw std::invalid_argument(os.str());
      }
    }
  }
}

double cache_bytes_used(const CacheState& cache, const std::vector<Task>& tasks) {
  double used = 0;
  for (std::size_t f = 0; f < cache.size(); ++f)
    if (cache[f]) used += tasks[f].software_bytes;
  return used;
}

void check_cache_capacity(const CacheState& cache, const Scenario& scn) {
  if (cache.size() != scn.tasks.size())
    throw ConstraintViolation("10a", "cache vector length does not match the task count");
  const double used = cache_bytes_used(cache, scn.tasks);
  if (used > scn.cfg.cache_bytes) {
    std::ostringstream os;
    os << "cached software " << used << " B exceeds capacity " << scn.cfg.cache_bytes << " B";
    throw ConstraintViolation("10a", os.str());
  }
}

void check_cache_update(const CacheUpdate& update, const CacheState& cache, const Scenario& scn) {
  if (update.size() != cache.size())
    throw ConstraintViolation("10c", "update vector length does not match the cache");
  for (std::size_t f = 0; f < update.size(); ++f) {
    if (update[f] < -1 || update[f] > 1)
      throw ConstraintViolation("10f", "update entries must lie in {-1, 0, +1}");
    if (update[f] < -static_cast<int>(cache[f]))
      throw ConstraintViolation("10d", "cannot remove software that is not cached");
    if (cache[f] + update[f] > 1)
      throw ConstraintViolation("10c", "cannot add software that is already cached");
  }
  check_cache_capacity(apply_update(cache, update), scn);
}

CacheState apply_update(const CacheState& cache, const CacheUpdate& update) {
  CacheState next(cache.size());
  for (std::size_t f = 0; f < cache.size(); ++f)
    next[f] = static_cast<std::uint8_t>(cache[f] + update[f]);
  return next;
}

}  // namespace mecsim
