#include "mecsim/baselines.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace mecsim::baselines {

namespace {

CacheUpdate diff(const CacheState& next, const CacheState& current) {
  CacheUpdate update(current.size());
  for (std::size_t f = 0; f < current.size(); ++f)
    update[f] = static_cast<std::int8_t>(static_cast<int>(next[f]) - static_cast<int>(current[f]));
  return update;
}

// requested task ids this slot, deduplicated, ascending
std::vector<int> requested_tasks(const RequestState& mu, int tasks) {
  std::vector<std::uint8_t> seen(static_cast<std::size_t>(tasks) + 1, 0);
  for (int f : mu)
    if (f >= 1) seen[static_cast<std::size_t>(f)] = 1;
  std::vector<int> out;
  for (int f = 1; f <= tasks; ++f)
    if (seen[static_cast<std::size_t>(f)]) out.push_back(f);
  return out;
}

}  // namespace

LruPolicy::LruPolicy(const Scenario& scn)
    : scn_(scn), last_request_(static_cast<std::size_t>(scn.cfg.tasks) + 1, -1) {}

CacheUpdate LruPolicy::slot_update(const RequestState& mu, const CacheState& cache,
                                   std::int64_t slot) {
  const auto requested = requested_tasks(mu, scn_.cfg.tasks);
  for (int f : requested) last_request_[static_cast<std::size_t>(f)] = slot;

  CacheState next = cache;
  double used = cache_bytes_used(next, scn_.tasks);
  for (int f : requested) {
    if (next[static_cast<std::size_t>(f - 1)]) continue;
    const double size = scn_.task(f).software_bytes;
    if (size > scn_.cfg.cache_bytes) continue;  // can never fit
    while (used + size > scn_.cfg.cache_bytes) {
      // evict the stalest cached software, oldest id on ties
      int victim = -1;
      for (int g = 1; g <= scn_.cfg.tasks; ++g) {
        if (!next[static_cast<std::size_t>(g - 1)]) continue;
        if (victim < 0 || last_request_[static_cast<std::size_t>(g)] <
                              last_request_[static_cast<std::size_t>(victim)])
          victim = g;
      }
      next[static_cast<std::size_t>(victim - 1)] = 0;
      used -= scn_.task(victim).software_bytes;
    }
    next[static_cast<std::size_t>(f - 1)] = 1;
    used += size;
  }
  return diff(next, cache);
}

LfuPolicy::LfuPolicy(const Scenario& scn)
    : scn_(scn), counts_(static_cast<std::size_t>(scn.cfg.tasks) + 1, 0) {}

CacheUpdate LfuPolicy::slot_update(const RequestState& mu, const CacheState& cache,
                                   std::int64_t /*slot*/) {
  for (int f : mu)
    if (f >= 1) ++counts_[static_cast<std::size_t>(f)];

  std::vector<int> order;
  for (int f = 1; f <= scn_.cfg.tasks; ++f)
    if (counts_[static_cast<std::size_t>(f)] > 0) order.push_back(f);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const auto ca = counts_[static_cast<std::size_t>(a)];
    const auto cb = counts_[static_cast<std::size_t>(b)];
    return ca != cb ? ca > cb : a < b;
  });

  CacheState next(cache.size(), 0);
  double used = 0;
  for (int f : order) {
    const double size = scn_.task(f).software_bytes;
    if (used + size <= scn_.cfg.cache_bytes) {
      next[static_cast<std::size_t>(f - 1)] = 1;
      used += size;
    }
  }
  return diff(next, cache);
}

FifoPolicy::FifoPolicy(const Scenario& scn) : scn_(scn) {}

CacheUpdate FifoPolicy::slot_update(const RequestState& mu, const CacheState& cache,
                                    std::int64_t /*slot*/) {
  const auto requested = requested_tasks(mu, scn_.cfg.tasks);
  CacheState next = cache;
  double used = cache_bytes_used(next, scn_.tasks);
  for (int f : requested) {
    if (next[static_cast<std::size_t>(f - 1)]) continue;  // a hit keeps its position
    const double size = scn_.task(f).software_bytes;
    if (size > scn_.cfg.cache_bytes) continue;
    while (used + size > scn_.cfg.cache_bytes) {
      const int victim = queue_.front();
      queue_.pop_front();
      next[static_cast<std::size_t>(victim - 1)] = 0;
      used -= scn_.task(victim).software_bytes;
    }
    next[static_cast<std::size_t>(f - 1)] = 1;
    queue_.push_back(f);
    used += size;
  }
  return diff(next, cache);
}

LmpPolicy::LmpPolicy(const Scenario& scn)
    : scn_(scn),
      transitions_(static_cast<std::size_t>(scn.cfg.tasks) + 1,
                   std::vector<std::uint64_t>(static_cast<std::size_t>(scn.cfg.tasks) + 1, 0)),
      popularity_(static_cast<std::size_t>(scn.cfg.tasks) + 1, 0) {}

std::vector<double> LmpPolicy::scores(const RequestState& mu) const {
  const int F = scn_.cfg.tasks;
  // short-term: empirical next-request distribution out of each user's
  // current request, uniform when that row is still unobserved
  std::vector<double> short_term(static_cast<std::size_t>(F) + 1, 0.0);
  for (int i : mu) {
    const auto& row = transitions_[static_cast<std::size_t>(i)];
    const std::uint64_t total = std::accumulate(row.begin(), row.end(), std::uint64_t{0});
    if (total == 0) {
      for (int j = 1; j <= F; ++j) short_term[static_cast<std::size_t>(j)] += 1.0 / F;
    } else {
      for (int j = 1; j <= F; ++j)
        short_term[static_cast<std::size_t>(j)] +=
            static_cast<double>(row[static_cast<std::size_t>(j)]) / static_cast<double>(total);
    }
  }
  double short_mass = std::accumulate(short_term.begin(), short_term.end(), 0.0);
  if (short_mass <= 0) {
    for (int j = 1; j <= F; ++j) short_term[static_cast<std::size_t>(j)] = 1.0 / F;
    short_mass = 1.0;
  }

  // long-term: lifetime request popularity
  const std::uint64_t pop_total =
      std::accumulate(popularity_.begin(), popularity_.end(), std::uint64_t{0});
  std::vector<double> score(static_cast<std::size_t>(F) + 1, 0.0);
  for (int j = 1; j <= F; ++j) {
    const double long_term = pop_total == 0 ? 1.0 / F
                                            : static_cast<double>(popularity_[static_cast<std::size_t>(j)]) /
                                                  static_cast<double>(pop_total);
    score[static_cast<std::size_t>(j)] =
        0.5 * short_term[static_cast<std::size_t>(j)] / short_mass + 0.5 * long_term;
  }
  return score;
}

CacheUpdate LmpPolicy::slot_update(const RequestState& mu, const CacheState& cache,
                                   std::int64_t /*slot*/) {
  if (has_prev_) {
    for (std::size_t k = 0; k < mu.size(); ++k)
      ++transitions_[static_cast<std::size_t>(prev_[k])][static_cast<std::size_t>(mu[k])];
  }
  for (int f : mu)
    if (f >= 1) ++popularity_[static_cast<std::size_t>(f)];
  prev_ = mu;
  has_prev_ = true;

  const auto score = scores(mu);
  std::vector<int> order;
  for (int f = 1; f <= scn_.cfg.tasks; ++f)
    if (score[static_cast<std::size_t>(f)] > 0) order.push_back(f);
  // fill by score density, lower id on ties
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const double da = score[static_cast<std::size_t>(a)] / scn_.task(a).software_bytes;
    const double db = score[static_cast<std::size_t>(b)] / scn_.task(b).software_bytes;
    return da != db ? da > db : a < b;
  });

  CacheState next(cache.size(), 0);
  double used = 0;
  for (int f : order) {
    const double size = scn_.task(f).software_bytes;
    if (used + size <= scn_.cfg.cache_bytes) {
      next[static_cast<std::size_t>(f - 1)] = 1;
      used += size;
    }
  }
  return diff(next, cache);
}

std::unique_ptr<CachingPolicy> make_policy(const std::string& name, const Scenario& scn) {
  if (name == "lru") return std::make_unique<LruPolicy>(scn);
  if (name == "lfu") return std::make_unique<LfuPolicy>(scn);
  if (name == "fifo") return std::make_unique<FifoPolicy>(scn);
  if (name == "lmp") return std::make_unique<LmpPolicy>(scn);
  throw std::invalid_argument("unknown caching policy: " + name);
}

game::GameOutcome pure_offloading(const Scenario& scn, const RequestState& mu,
                                  const SlotRealization& slot, Rng& arbiter) {
  const CacheState empty(static_cast<std::size_t>(scn.cfg.tasks), 0);
  return game::solve_ne(scn, mu, empty, slot, arbiter);
}

}  // namespace mecsim::baselines
