#include "mecsim/env.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mecsim::env {

namespace {

void check_user(const Scenario& scn, int k) {
  if (k < 0 || k >= scn.cfg.users) throw std::out_of_range("user index outside [0, K)");
}

void check_offloading(const OffloadDecision& alpha, int k, int channels) {
  const int a = alpha[static_cast<std::size_t>(k)];
  if (a < 1 || a > channels)
    throw std::invalid_argument("user has no channel: offloading rate/delay undefined");
}

}  // namespace

RequestState sample_requests(const RequestState& prev, const RequestModel& model, Rng& rng) {
  RequestState next(prev.size());
  for (std::size_t k = 0; k < prev.size(); ++k) next[k] = model.step(prev[k], rng);
  return next;
}

SlotRealization sample_fading(const Scenario& scn, Rng& rng) {
  SlotRealization slot;
  slot.fading.resize(scn.users.size());
  slot.gain.resize(scn.users.size());
  for (std::size_t k = 0; k < scn.users.size(); ++k) {
    slot.fading[k] = rng.exponential();
    slot.gain[k] = slot.fading[k] * std::pow(scn.users[k].distance_m, -scn.cfg.path_loss_exp);
  }
  return slot;
}

double uplink_rate(const Scenario& scn, int k, const OffloadDecision& alpha,
                   const SlotRealization& slot) {
  check_user(scn, k);
  check_offloading(alpha, k, scn.cfg.channels);
  const int channel = alpha[static_cast<std::size_t>(k)];
  double co_channel = 0;
  for (std::size_t n = 0; n < alpha.size(); ++n) {
    if (static_cast<int>(n) == k) continue;
    if (alpha[n] == channel) co_channel += scn.users[n].tx_power_w * slot.gain[n];
  }
  const double sinr = scn.users[static_cast<std::size_t>(k)].tx_power_w *
                      slot.gain[static_cast<std::size_t>(k)] / (co_channel + scn.cfg.noise_w);
  return scn.cfg.bandwidth_hz / scn.cfg.channels * std::log2(1.0 + sinr);
}

double local_energy(const Scenario& scn, int task_id) {
  const Task& t = scn.task(task_id);
  const double freq = t.cycles / scn.cfg.slot_seconds;
  if (scn.cfg.strict_feasibility && freq > scn.cfg.user_cpu_hz) {
    std::ostringstream os;
    os << "task " << task_id << " needs " << freq << " Hz locally, device tops out at "
       << scn.cfg.user_cpu_hz << " Hz";
    throw std::domain_error(os.str());
  }
  const double s = t.cycles;
  return scn.cfg.energy_coeff * s * s * s / (scn.cfg.slot_seconds * scn.cfg.slot_seconds);
}

double offload_delay(const Scenario& scn, int k, int task_id, bool cached,
                     const OffloadDecision& alpha, const SlotRealization& slot) {
  const Task& t = scn.task(task_id);
  const double rate = uplink_rate(scn, k, alpha, slot);
  const double upload_bits = 8.0 * (t.input_bytes + (cached ? 0.0 : t.software_bytes));
  return t.cycles / scn.cfg.edge_cpu_hz + upload_bits / rate;
}

double offload_energy(const Scenario& scn, int k, int task_id, bool cached,
                      const OffloadDecision& alpha, const SlotRealization& slot) {
  const Task& t = scn.task(task_id);
  const double rate = uplink_rate(scn, k, alpha, slot);
  const double upload_bits = 8.0 * (t.input_bytes + (cached ? 0.0 : t.software_bytes));
  return scn.users[static_cast<std::size_t>(k)].tx_power_w * upload_bits / rate;
}

double user_energy(const Scenario& scn, int k, const RequestState& mu,
                   const OffloadDecision& alpha, const CacheState& cache,
                   const SlotRealization& slot) {
  check_user(scn, k);
  const int f = mu[static_cast<std::size_t>(k)];
  if (f == 0) return 0.0;
  if (alpha[static_cast<std::size_t>(k)] == 0) return local_energy(scn, f);
  const bool cached = cache[static_cast<std::size_t>(f - 1)] != 0;
  return offload_energy(scn, k, f, cached, alpha, slot);
}

double system_energy(const Scenario& scn, const RequestState& mu, const OffloadDecision& alpha,
                     const CacheState& cache, const SlotRealization& slot) {
  double total = 0;
  for (int k = 0; k < scn.cfg.users; ++k) total += user_energy(scn, k, mu, alpha, cache, slot);
  return total;
}

}  // namespace mecsim::env
