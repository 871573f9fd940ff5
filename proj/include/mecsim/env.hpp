#pragma once

#include "mecsim/rng.hpp"
#include "mecsim/types.hpp"

namespace mecsim::env {

// Advances every user's request chain by one slot.
RequestState sample_requests(const RequestState& prev, const RequestModel& model, Rng& rng);

// Draws one slot of unit-mean exponential fading and derives channel gains.
SlotRealization sample_fading(const Scenario& scn, Rng& rng);

// Achievable uplink rate (bit/s) of user k under decision alpha.  The
// co-channel interference sums over the other users sharing k's channel.
// Throws std::invalid_argument if user k is not offloading.
double uplink_rate(const Scenario& scn, int k, const OffloadDecision& alpha,
                   const SlotRealization& slot);

// Energy (J) for executing a task on the device, CPU clocked at cycles/tau.
// In strict-feasibility mode throws if that frequency exceeds the device CPU.
double local_energy(const Scenario& scn, int task_id);

// Delay (s) for offloaded execution: server compute plus upload of the input
// parameters and, when the software is not cached, the software itself.
double offload_delay(const Scenario& scn, int k, int task_id, bool cached,
                     const OffloadDecision& alpha, const SlotRealization& slot);

// Transmit energy (J) of an offloaded task; cached tasks upload inputs only.
double offload_energy(const Scenario& scn, int k, int task_id, bool cached,
                      const OffloadDecision& alpha, const SlotRealization& slot);

// Per-user energy dispatch: 0 when idle, local energy when computing on the
// device, cached / non-cached offload energy otherwise.
double user_energy(const Scenario& scn, int k, const RequestState& mu,
                   const OffloadDecision& alpha, const CacheState& cache,
                   const SlotRealization& slot);

// Sum of user_energy over all users.
double system_energy(const Scenario& scn, const RequestState& mu, const OffloadDecision& alpha,
                     const CacheState& cache, const SlotRealization& slot);

}  // namespace mecsim::env
