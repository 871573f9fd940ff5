#include "mecsim/game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace mecsim::game {

namespace {

double received_power(const Scenario& scn, int k, const SlotRealization& slot) {
  return scn.users[static_cast<std::size_t>(k)].tx_power_w *
         slot.gain[static_cast<std::size_t>(k)];
}

// Interference seen on each channel by user k under the others' decisions.
std::vector<double> per_channel_interference(const Scenario& scn, int k,
                                             const OffloadDecision& alpha,
                                             const SlotRealization& slot) {
  std::vector<double> interf(static_cast<std::size_t>(scn.cfg.channels) + 1, 0.0);
  for (std::size_t n = 0; n < alpha.size(); ++n) {
    if (static_cast<int>(n) == k) continue;
    if (alpha[n] >= 1) interf[static_cast<std::size_t>(alpha[n])] += received_power(scn, static_cast<int>(n), slot);
  }
  return interf;
}

double rate_under(const Scenario& scn, int k, double interference_w, const SlotRealization& slot) {
  const double sinr = received_power(scn, k, slot) / (interference_w + scn.cfg.noise_w);
  return scn.cfg.bandwidth_hz / scn.cfg.channels * std::log2(1.0 + sinr);
}

struct Candidate {
  bool feasible = false;
  double energy = 0;
};

// Energy of every decision available to user k (index 0 = local computing,
// index m = channel m), with delay feasibility per channel.
std::vector<Candidate> candidate_costs(const Scenario& scn, int k, const RequestState& mu,
                                       const CacheState& cache, const SlotRealization& slot,
                                       const OffloadDecision& alpha) {
  const int f = mu[static_cast<std::size_t>(k)];
  const Task& t = scn.task(f);
  const bool cached = cache[static_cast<std::size_t>(f - 1)] != 0;
  const double upload_bits = 8.0 * (t.input_bytes + (cached ? 0.0 : t.software_bytes));
  const double server_delay = t.cycles / scn.cfg.edge_cpu_hz;
  const auto interf = per_channel_interference(scn, k, alpha, slot);

  std::vector<Candidate> out(static_cast<std::size_t>(scn.cfg.channels) + 1);
  out[0] = {true, env::local_energy(scn, f)};
  for (int m = 1; m <= scn.cfg.channels; ++m) {
    const double rate = rate_under(scn, k, interf[static_cast<std::size_t>(m)], slot);
    const double delay = server_delay + upload_bits / rate;
    if (delay <= scn.cfg.slot_seconds) {
      const double p = scn.users[static_cast<std::size_t>(k)].tx_power_w;
      out[static_cast<std::size_t>(m)] = {true, p * upload_bits / rate};
    }
  }
  return out;
}

}  // namespace

double interference(const Scenario& scn, int k, const OffloadDecision& alpha,
                    const SlotRealization& slot) {
  const int channel = alpha[static_cast<std::size_t>(k)];
  if (channel < 1 || channel > scn.cfg.channels)
    throw std::invalid_argument("interference is defined for offloading users only");
  double sum = 0;
  for (std::size_t n = 0; n < alpha.size(); ++n) {
    if (static_cast<int>(n) == k) continue;
    if (alpha[n] == channel) sum += received_power(scn, static_cast<int>(n), slot);
  }
  return sum;
}

double threshold(const Scenario& scn, int k, int task_id, bool cached,
                 const SlotRealization& slot) {
  const Task& t = scn.task(task_id);
  const double p = scn.users[static_cast<std::size_t>(k)].tx_power_w;
  const double tau = scn.cfg.slot_seconds;
  const double upload_bits = 8.0 * (t.input_bytes + (cached ? 0.0 : t.software_bytes));
  const double cube = t.cycles * t.cycles * t.cycles;
  const double exponent = p * tau * tau * scn.cfg.channels * upload_bits /
                          (scn.cfg.bandwidth_hz * scn.cfg.energy_coeff * cube);
  // 2^x - 1, exact for small exponents, +inf (hence V = -noise) for huge ones
  const double denom = std::expm1(exponent * M_LN2);
  return received_power(scn, k, slot) / denom - scn.cfg.noise_w;
}

std::vector<int> strategy_space(const Scenario& scn, int k, const RequestState& mu,
                                const CacheState& cache, const SlotRealization& slot,
                                const OffloadDecision& alpha) {
  if (mu[static_cast<std::size_t>(k)] == 0) return {0};
  const auto costs = candidate_costs(scn, k, mu, cache, slot, alpha);
  std::vector<int> space;
  for (int a = 0; a <= scn.cfg.channels; ++a)
    if (costs[static_cast<std::size_t>(a)].feasible) space.push_back(a);
  return space;
}

int best_response(const Scenario& scn, int k, const OffloadDecision& alpha,
                  const RequestState& mu, const CacheState& cache, const SlotRealization& slot) {
  if (mu[static_cast<std::size_t>(k)] == 0) return 0;
  const auto costs = candidate_costs(scn, k, mu, cache, slot, alpha);
  const int current = alpha[static_cast<std::size_t>(k)];

  int best = -1;
  double best_cost = std::numeric_limits<double>::infinity();
  if (costs[static_cast<std::size_t>(current)].feasible) {
    best = current;
    best_cost = costs[static_cast<std::size_t>(current)].energy;
  }
  for (int a = 0; a <= scn.cfg.channels; ++a) {
    const auto& c = costs[static_cast<std::size_t>(a)];
    if (c.feasible && c.energy < best_cost) {
      best = a;
      best_cost = c.energy;
    }
  }
  return best;  // local computing is always feasible, so best >= 0
}

double potential(const Scenario& scn, const OffloadDecision& alpha, const RequestState& mu,
                 const CacheState& cache, const SlotRealization& slot) {
  double pairwise = 0;
  double idle_side = 0;
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    const int f = mu[k];
    if (f == 0) continue;
    if (alpha[k] >= 1) {
      for (std::size_t n = 0; n < alpha.size(); ++n) {
        if (n == k || mu[n] == 0) continue;
        if (alpha[n] == alpha[k])
          pairwise += received_power(scn, static_cast<int>(k), slot) *
                      received_power(scn, static_cast<int>(n), slot);
      }
    } else {
      const bool cached = cache[static_cast<std::size_t>(f - 1)] != 0;
      idle_side += received_power(scn, static_cast<int>(k), slot) *
                   threshold(scn, static_cast<int>(k), f, cached, slot);
    }
  }
  return 0.5 * pairwise + idle_side;
}

GameOutcome solve_ne(const Scenario& scn, const RequestState& mu, const CacheState& cache,
                     const SlotRealization& slot, Rng& arbiter) {
  const int K = scn.cfg.users;
  GameOutcome out;
  out.decision.assign(static_cast<std::size_t>(K), 0);

  std::vector<int> participants;
  for (int k = 0; k < K; ++k)
    if (mu[static_cast<std::size_t>(k)] != 0) participants.push_back(k);

  BoundTerms& terms = out.bound_terms;
  terms.delta_max = 0;
  terms.delta_min = std::numeric_limits<double>::infinity();
  terms.v_max = -std::numeric_limits<double>::infinity();
  terms.v_min = std::numeric_limits<double>::infinity();
  for (int k : participants) {
    const double ph = received_power(scn, k, slot);
    const int f = mu[static_cast<std::size_t>(k)];
    const bool cached = cache[static_cast<std::size_t>(f - 1)] != 0;
    const double v = threshold(scn, k, f, cached, slot);
    terms.delta_max = std::max(terms.delta_max, ph);
    terms.delta_min = std::min(terms.delta_min, ph);
    terms.v_max = std::max(terms.v_max, v);
    terms.v_min = std::min(terms.v_min, v);
  }

  out.potential_trace.push_back(potential(scn, out.decision, mu, cache, slot));
  if (!participants.empty()) {
    double min_eps = std::numeric_limits<double>::infinity();
    std::vector<std::pair<int, int>> requesters;  // (user, wanted decision)
    for (;;) {
      requesters.clear();
      for (int k : participants) {
        const int br = best_response(scn, k, out.decision, mu, cache, slot);
        if (br != out.decision[static_cast<std::size_t>(k)]) requesters.emplace_back(k, br);
      }
      if (requesters.empty()) break;

      const auto [mover, wanted] =
          requesters[static_cast<std::size_t>(arbiter.below(requesters.size()))];
      out.decision[static_cast<std::size_t>(mover)] = wanted;
      const double phi = potential(scn, out.decision, mu, cache, slot);
      const double decrement = out.potential_trace.back() - phi;
      if (decrement > 0)
        min_eps = std::min(min_eps, decrement / received_power(scn, mover, slot));
      out.potential_trace.push_back(phi);
      ++out.iterations;

      if (std::isfinite(min_eps)) {
        BoundTerms t = terms;
        t.min_decrement_eps = min_eps;
        const double bound = iteration_bound(t, static_cast<int>(participants.size()));
        if (static_cast<double>(out.iterations) > 10.0 * bound) {
          std::ostringstream os;
          os << "offloading game exceeded 10x its iteration bound (" << out.iterations << " > 10*"
             << bound << ")";
          throw std::runtime_error(os.str());
        }
      }
      if (out.iterations > 1'000'000)
        throw std::runtime_error("offloading game failed to settle within 1e6 updates");
    }
    if (std::isfinite(min_eps)) terms.min_decrement_eps = min_eps;
  }

  out.energy = env::system_energy(scn, mu, out.decision, cache, slot);
  return out;
}

double iteration_bound(const BoundTerms& terms, int players) {
  if (!(terms.min_decrement_eps > 0) || !(terms.delta_min > 0) ||
      !std::isfinite(terms.delta_min))
    return 1.0;
  const double k = static_cast<double>(players);
  const double numerator = 0.5 * k * k * terms.delta_max * terms.delta_max +
                           k * (terms.delta_max * terms.v_max - terms.delta_min * terms.v_min);
  if (!(numerator > 0)) return 1.0;
  return numerator / (terms.min_decrement_eps * terms.delta_min);
}

}  // namespace mecsim::game
