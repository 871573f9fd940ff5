#pragma once

#include <cstdint>
#include <vector>

#include "mecsim/env.hpp"
#include "mecsim/rng.hpp"
#include "mecsim/types.hpp"

namespace mecsim::game {

// Quantities feeding the closed-form iteration bound.  delta_* are the
// extremal received powers p_k h_k over the requesting users, v_* the
// extremal interference thresholds, and min_decrement_eps the smallest
// positive per-update potential decrement divided by the mover's p_k h_k
// (measured post hoc; the bound treats it as the decrement constant).
struct BoundTerms {
  double delta_max = 0;
  double delta_min = 0;
  double v_max = 0;
  double v_min = 0;
  double min_decrement_eps = 0;
};

struct GameOutcome {
  OffloadDecision decision;
  std::int64_t iterations = 0;          // accepted decision updates
  std::vector<double> potential_trace;  // potential at start and after each update
  double energy = 0;                    // system energy at the equilibrium
  BoundTerms bound_terms;
};

// Co-channel interference power seen by user k.
double interference(const Scenario& scn, int k, const OffloadDecision& alpha,
                    const SlotRealization& slot);

// Interference threshold below which offloading task_id beats local
// computing for user k.  May be negative (offloading never pays).
double threshold(const Scenario& scn, int k, int task_id, bool cached,
                 const SlotRealization& slot);

// Decisions available to user k: local computing plus every channel whose
// offload delay meets the slot deadline under the current occupancy.
std::vector<int> strategy_space(const Scenario& scn, int k, const RequestState& mu,
                                const CacheState& cache, const SlotRealization& slot,
                                const OffloadDecision& alpha);

// Choice in the strategy space minimising user k's own energy, others fixed.
// Ties keep the incumbent decision, then prefer the lower index.
int best_response(const Scenario& scn, int k, const OffloadDecision& alpha,
                  const RequestState& mu, const CacheState& cache, const SlotRealization& slot);

// Ordinal potential of the offloading game; sums over requesting users only.
double potential(const Scenario& scn, const OffloadDecision& alpha, const RequestState& mu,
                 const CacheState& cache, const SlotRealization& slot);

// Round-based best-response dynamics from the all-local profile: every
// requesting user reports its best response and an arbiter lets exactly one
// of the users asking for a change update per round.  Returns a pure Nash
// equilibrium of the own-energy game.
GameOutcome solve_ne(const Scenario& scn, const RequestState& mu, const CacheState& cache,
                     const SlotRealization& slot, Rng& arbiter);

// Closed-form bound on the number of accepted updates.  Returns 1 when the
// terms make the bound vacuous (no positive decrement observed or a
// non-positive numerator).
double iteration_bound(const BoundTerms& terms, int players);

}  // namespace mecsim::game
