#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <string>
#include <vector>

#include "mecsim/game.hpp"
#include "mecsim/types.hpp"

namespace mecsim::baselines {

// Slot-end caching policies.  Each one sees the slot's requests and the live
// cache and returns an update obeying the capacity and removal constraints.
class CachingPolicy {
 public:
  virtual ~CachingPolicy() = default;
  virtual CacheUpdate slot_update(const RequestState& mu, const CacheState& cache,
                                  std::int64_t slot) = 0;
};

// Admits requested software, evicting the least recently requested content
// until the newcomer fits.  Software larger than the whole cache is rejected.
class LruPolicy : public CachingPolicy {
 public:
  explicit LruPolicy(const Scenario& scn);
  CacheUpdate slot_update(const RequestState& mu, const CacheState& cache,
                          std::int64_t slot) override;

 private:
  const Scenario& scn_;
  std::vector<std::int64_t> last_request_;
};

// Keeps the most frequently requested software, refilled greedily by
// descending lifetime request count each slot.
class LfuPolicy : public CachingPolicy {
 public:
  explicit LfuPolicy(const Scenario& scn);
  CacheUpdate slot_update(const RequestState& mu, const CacheState& cache,
                          std::int64_t slot) override;

 private:
  const Scenario& scn_;
  std::vector<std::uint64_t> counts_;
};

// Admits requested software, evicting in insertion order; re-requests do not
// refresh a task's queue position.
class FifoPolicy : public CachingPolicy {
 public:
  explicit FifoPolicy(const Scenario& scn);
  CacheUpdate slot_update(const RequestState& mu, const CacheState& cache,
                          std::int64_t slot) override;

 private:
  const Scenario& scn_;
  std::deque<int> queue_;  // cached task ids, oldest first
};

// Scores every task with an equal-weight mixture of the empirical transition
// frequencies out of the current requests and the normalised lifetime
// popularity, then fills the cache by score density (score per byte).
class LmpPolicy : public CachingPolicy {
 public:
  explicit LmpPolicy(const Scenario& scn);
  CacheUpdate slot_update(const RequestState& mu, const CacheState& cache,
                          std::int64_t slot) override;

  // next-request score per task id (1..F), exposed for tests
  std::vector<double> scores(const RequestState& mu) const;

 private:
  const Scenario& scn_;
  std::vector<std::vector<std::uint64_t>> transitions_;  // (F+1) x (F+1)
  std::vector<std::uint64_t> popularity_;                // F+1, index 0 unused
  RequestState prev_;
  bool has_prev_ = false;
};

std::unique_ptr<CachingPolicy> make_policy(const std::string& name, const Scenario& scn);

// Offloading-only comparison scheme: the game under an empty cache.
game::GameOutcome pure_offloading(const Scenario& scn, const RequestState& mu,
                                  const SlotRealization& slot, Rng& arbiter);

}  // namespace mecsim::baselines
