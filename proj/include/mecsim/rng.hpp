#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace mecsim {

// All randomness in a run flows from one master seed through named streams,
// and every stream is re-derived per slot.  Draw counts in one subsystem
// therefore never shift the draws seen by another, and two runs that share
// (seed, slot) see identical requests/fading/arbiter randomness even when
// their policies consume different amounts of exploration randomness.
//
// Draw order inside a slot: requests (user 1..K), fading (user 1..K),
// arbiter (one pick per contested round), exploration, replay sampling.
enum class Stream : std::uint64_t {
  Placement = 1,   // user positions, once per run
  TaskGen = 2,     // task library sizes/cycles, once per run
  NetInit = 3,     // network weight initialisation, once per run
  Requests = 4,    // per slot
  Fading = 5,      // per slot
  ArbiterMain = 6, // per slot, the slot's actual offloading game
  ArbiterCf = 7,   // per slot, the empty-cache counterfactual game
  Exploration = 8, // per slot
  Replay = 9,      // per slot
};

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  static Rng stream(std::uint64_t master, Stream id, std::uint64_t slot = 0) {
    std::uint64_t s = master;
    std::uint64_t h = splitmix64(s);
    s = h ^ (0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(id) + 1));
    h = splitmix64(s);
    s = h ^ (0xd1342543de82ef95ULL * (slot + 1));
    return Rng(splitmix64(s));
  }

  std::uint64_t next() { return splitmix64(state_); }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // uniform integer in [0, n)
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t threshold = (-n) % n;
    for (;;) {
      const std::uint64_t r = next();
      if (r >= threshold) return r % n;
    }
  }

  // unit-mean exponential, strictly positive
  double exponential() {
    const double u = (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
    return -std::log(u);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
};

}  // namespace mecsim
