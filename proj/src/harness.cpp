#include "mecsim/harness.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "mecsim/baselines.hpp"
#include "mecsim/ddqn.hpp"
#include "mecsim/env.hpp"
#include "mecsim/game.hpp"

namespace mecsim::harness {

namespace fs = std::filesystem;

Policy policy_from_name(const std::string& name) {
  if (name == "proposed") return Policy::Proposed;
  if (name == "lru") return Policy::Lru;
  if (name == "lfu") return Policy::Lfu;
  if (name == "fifo") return Policy::Fifo;
  if (name == "lmp") return Policy::Lmp;
  if (name == "offload-only") return Policy::OffloadOnly;
  throw std::invalid_argument("unknown policy: " + name +
                              " (expected proposed|lru|lfu|fifo|lmp|offload-only)");
}

std::string policy_name(Policy p) {
  switch (p) {
    case Policy::Proposed: return "proposed";
    case Policy::Lru: return "lru";
    case Policy::Lfu: return "lfu";
    case Policy::Fifo: return "fifo";
    case Policy::Lmp: return "lmp";
    case Policy::OffloadOnly: return "offload-only";
  }
  throw std::logic_error("unreachable policy");
}

const std::vector<Policy>& all_policies() {
  static const std::vector<Policy> all = {Policy::Proposed, Policy::Lru,  Policy::Lfu,
                                          Policy::Fifo,     Policy::Lmp, Policy::OffloadOnly};
  return all;
}

namespace {

// shortest round-trip decimal form, locale-free
std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string fmt(std::int64_t v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

constexpr const char* kHeader = "slot,energy_j,energy_no_cache_j,reward_j,ne_iterations,cache_hits,loss\n";

std::string record_row(const SlotRecord& r) {
  std::string row;
  row.reserve(96);
  row += fmt(r.slot);
  row += ',';
  row += fmt(r.energy);
  row += ',';
  row += fmt(r.energy_no_cache);
  row += ',';
  row += fmt(r.reward);
  row += ',';
  row += fmt(r.ne_iterations);
  row += ',';
  row += fmt(static_cast<std::int64_t>(r.cache_hits));
  row += ',';
  row += fmt(r.loss);
  row += '\n';
  return row;
}

void audit_decision(const Scenario& scn, const RequestState& mu, const OffloadDecision& alpha,
                    const CacheState& cache, const SlotRealization& slot) {
  for (int k = 0; k < scn.cfg.users; ++k) {
    const int a = alpha[static_cast<std::size_t>(k)];
    if (a < 0 || a > scn.cfg.channels)
      throw ConstraintViolation("10e", "offloading decision outside {0..M}");
    const int f = mu[static_cast<std::size_t>(k)];
    if (f == 0) {
      if (a != 0) throw ConstraintViolation("10e", "idle user holds a channel");
      continue;
    }
    if (a >= 1) {
      const bool cached = cache[static_cast<std::size_t>(f - 1)] != 0;
      const double delay = env::offload_delay(scn, k, f, cached, alpha, slot);
      if (delay > scn.cfg.slot_seconds) {
        std::ostringstream os;
        os << "user " << k + 1 << " offload delay " << delay << " s exceeds the slot of "
           << scn.cfg.slot_seconds << " s";
        throw ConstraintViolation("10b", os.str());
      }
    }
  }
}

void audit_energy(const Scenario& scn, const RequestState& mu, const OffloadDecision& alpha,
                  const CacheState& cache, const SlotRealization& slot, double recorded) {
  double total = 0;
  for (int k = 0; k < scn.cfg.users; ++k)
    total += env::user_energy(scn, k, mu, alpha, cache, slot);
  if (total != recorded)
    throw ConstraintViolation("energy-accounting",
                              "per-user energies do not sum to the recorded system energy");
}

int count_cache_hits(const RequestState& mu, const CacheState& cache) {
  int hits = 0;
  for (int f : mu)
    if (f >= 1 && cache[static_cast<std::size_t>(f - 1)]) ++hits;
  return hits;
}

CacheUpdate as_update(const CacheState& next, const CacheState& current) {
  CacheUpdate update(current.size());
  for (std::size_t f = 0; f < current.size(); ++f)
    update[f] = static_cast<std::int8_t>(static_cast<int>(next[f]) - static_cast<int>(current[f]));
  return update;
}

}  // namespace

struct Run::State {
  SimConfig cfg;
  Policy policy = Policy::Proposed;
  std::uint64_t seed = 0;
  Scenario scn;
  RequestModel model;
  std::int64_t total = 0;
  std::int64_t t = 0;  // completed slots

  std::unique_ptr<Agent> agent;
  std::unique_ptr<baselines::CachingPolicy> baseline;

  CacheState cache;
  RequestState prev;
  bool has_pending = false;
  RequestState pending_state;
  CacheState pending_action;

  State(const SimConfig& c, Policy p, std::uint64_t s)
      : cfg(c), policy(p), seed(s), scn(build_scenario(c, s)), model(c.request_model()) {}
};

Run::Run(const SimConfig& cfg_in, Policy policy, std::uint64_t seed, const std::string& checkpoint) {
  SimConfig cfg = cfg_in;
  if (cfg.agent.eps_decay_slots <= 0)
    cfg.agent.eps_decay_slots = std::max<std::int64_t>(1, cfg.train_slots / 2);
  cfg.validate();

  state_ = std::make_unique<State>(cfg, policy, seed);
  state_->total = cfg.total_slots();
  if (policy == Policy::Proposed) {
    Rng init = Rng::stream(seed, Stream::NetInit);
    state_->agent = std::make_unique<Agent>(state_->scn, cfg.agent, init);
    if (!checkpoint.empty()) state_->agent->load_checkpoint(checkpoint);
  } else if (policy != Policy::OffloadOnly) {
    state_->baseline = baselines::make_policy(policy_name(policy), state_->scn);
  }
  state_->cache.assign(static_cast<std::size_t>(cfg.tasks), 0);  // empty at t = 1
  state_->prev.assign(static_cast<std::size_t>(cfg.users), 0);
}

Run::~Run() = default;
Run::Run(Run&&) noexcept = default;
Run& Run::operator=(Run&&) noexcept = default;

std::int64_t Run::slot() const { return state_->t; }
std::int64_t Run::total_slots() const { return state_->total; }
bool Run::done() const { return state_->t >= state_->total; }
const SimConfig& Run::config() const { return state_->cfg; }
const Scenario& Run::scenario() const { return state_->scn; }
const CacheState& Run::cache() const { return state_->cache; }
const Agent* Run::agent() const { return state_->agent.get(); }
Policy Run::policy() const { return state_->policy; }

SlotRecord Run::step() {
  State& st = *state_;
  if (done()) throw std::runtime_error("the run has already passed its horizon");
  const std::int64_t t = ++st.t;
  const std::uint64_t seed = st.seed;
  const Scenario& scn = st.scn;

  Rng requests_rng = Rng::stream(seed, Stream::Requests, static_cast<std::uint64_t>(t));
  const RequestState mu = env::sample_requests(st.prev, st.model, requests_rng);
  Rng fading_rng = Rng::stream(seed, Stream::Fading, static_cast<std::uint64_t>(t));
  const SlotRealization slot = env::sample_fading(scn, fading_rng);

  check_cache_capacity(st.cache, scn);
  Rng arbiter = Rng::stream(seed, Stream::ArbiterMain, static_cast<std::uint64_t>(t));
  const game::GameOutcome outcome = game::solve_ne(scn, mu, st.cache, slot, arbiter);
  audit_decision(scn, mu, outcome.decision, st.cache, slot);
  audit_energy(scn, mu, outcome.decision, st.cache, slot, outcome.energy);

  double energy_no_cache = outcome.energy;
  if (st.policy != Policy::OffloadOnly) {
    Rng arbiter_cf = Rng::stream(seed, Stream::ArbiterCf, static_cast<std::uint64_t>(t));
    const CacheState empty(st.cache.size(), 0);
    energy_no_cache = game::solve_ne(scn, mu, empty, slot, arbiter_cf).energy;
  }
  const double reward = energy_no_cache - outcome.energy;

  SlotRecord rec;
  rec.slot = t;
  rec.energy = outcome.energy;
  rec.energy_no_cache = energy_no_cache;
  rec.reward = reward;
  rec.ne_iterations = outcome.iterations;
  rec.cache_hits = count_cache_hits(mu, st.cache);

  CacheUpdate update(st.cache.size(), 0);
  if (st.policy == Policy::Proposed) {
    if (t <= st.cfg.train_slots) {
      if (st.has_pending)
        st.agent->store(Transition{st.pending_state, st.pending_action, reward, mu});
      if (st.agent->ready()) {
        Rng replay_rng = Rng::stream(seed, Stream::Replay, static_cast<std::uint64_t>(t));
        rec.loss = st.agent->train_step(replay_rng);
      }
      st.agent->maybe_copy_target(t);
      Rng explore_rng = Rng::stream(seed, Stream::Exploration, static_cast<std::uint64_t>(t));
      const double eps = st.cfg.agent.epsilon_at(t);
      const CacheState next = st.agent->select_action(mu, eps, explore_rng);
      st.pending_state = mu;
      st.pending_action = next;
      st.has_pending = true;
      update = as_update(next, st.cache);
    } else {
      update = st.agent->infer_update(mu, st.cache);
      st.has_pending = false;
    }
  } else if (st.baseline) {
    update = st.baseline->slot_update(mu, st.cache, t);
  }

  check_cache_update(update, st.cache, scn);
  st.cache = apply_update(st.cache, update);
  st.prev = mu;
  return rec;
}

RunResult run_experiment(const SimConfig& cfg_in, Policy policy, std::uint64_t seed,
                         const std::string& out_dir, const std::string& checkpoint) {
  Run run(cfg_in, policy, seed, checkpoint);
  const SimConfig& cfg = run.config();
  const std::int64_t total = run.total_slots();

  RunResult result;
  result.records.reserve(static_cast<std::size_t>(total));
  while (!run.done()) result.records.push_back(run.step());

  const std::int64_t window = cfg.eval_slots > 0 ? cfg.eval_slots : total;
  double sum = 0;
  for (std::int64_t i = total - window; i < total; ++i)
    sum += result.records[static_cast<std::size_t>(i)].energy;
  result.summary_energy = sum / static_cast<double>(window);

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    const std::string base = policy_name(policy) + "_s" + std::to_string(seed);
    result.metrics_path = (fs::path(out_dir) / (base + ".csv")).string();
    std::ofstream os(result.metrics_path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write metrics file: " + result.metrics_path);
    os << kHeader;
    for (const auto& rec : result.records) os << record_row(rec);
    os << "summary," << fmt(result.summary_energy) << "," << fmt(window) << ",,,,\n";
    if (!os) throw std::runtime_error("metrics write failed: " + result.metrics_path);
    if (policy == Policy::Proposed) {
      result.checkpoint_path = (fs::path(out_dir) / (base + ".scaa")).string();
      run.agent()->save_checkpoint(result.checkpoint_path);
    }
  }
  return result;
}

SweepResult run_sweep(const SimConfig& base, const std::string& axis,
                      const std::vector<double>& grid, const std::vector<Policy>& policies,
                      const std::vector<std::uint64_t>& seeds, const std::string& out_dir,
                      int jobs) {
  if (grid.empty() || policies.empty() || seeds.empty())
    throw std::invalid_argument("sweep needs a grid, policies and seeds");

  SweepResult result;
  for (double value : grid)
    for (Policy p : policies)
      for (std::uint64_t s : seeds) {
        SweepCell cell;
        cell.axis = axis;
        cell.value = value;
        cell.policy = p;
        cell.seed = s;
        result.cells.push_back(cell);
      }

  const std::string runs_dir = out_dir.empty() ? "" : (fs::path(out_dir) / "runs").string();
  std::atomic<std::size_t> cursor{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= result.cells.size()) return;
      SweepCell& cell = result.cells[i];
      try {
        SimConfig cfg = base;
        apply_axis(cfg, axis, cell.value);
        std::string cell_dir;
        if (!runs_dir.empty()) cell_dir = (fs::path(runs_dir) / ("cell" + std::to_string(i))).string();
        const RunResult run = run_experiment(cfg, cell.policy, cell.seed, cell_dir);
        cell.summary_energy = run.summary_energy;
        cell.metrics_path = run.metrics_path;
      } catch (const std::exception& e) {
        cell.failed = true;
        cell.error = e.what();
      }
    }
  };

  int n = jobs > 0 ? jobs : static_cast<int>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  n = std::min<int>(n, static_cast<int>(result.cells.size()));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  for (const auto& cell : result.cells)
    if (cell.failed) ++result.failures;

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    result.table_path = (fs::path(out_dir) / ("sweep_" + axis + ".csv")).string();
    std::ofstream os(result.table_path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write sweep table: " + result.table_path);
    os << "axis,value,policy,seeds,mean_energy_j,sd_energy_j\n";
    for (double value : grid) {
      for (Policy p : policies) {
        std::vector<double> summaries;
        for (const auto& cell : result.cells)
          if (cell.value == value && cell.policy == p && !cell.failed)
            summaries.push_back(cell.summary_energy);
        if (summaries.empty()) continue;
        double mean = 0;
        for (double v : summaries) mean += v;
        mean /= static_cast<double>(summaries.size());
        double var = 0;
        for (double v : summaries) var += (v - mean) * (v - mean);
        const double sd =
            summaries.size() > 1 ? std::sqrt(var / static_cast<double>(summaries.size() - 1)) : 0.0;
        os << axis << "," << fmt(value) << "," << policy_name(p) << ","
           << summaries.size() << "," << fmt(mean) << "," << fmt(sd) << "\n";
      }
    }
  }
  return result;
}

std::vector<double> moving_average(const std::vector<double>& series, std::size_t window) {
  if (window == 0) throw std::invalid_argument("window must be positive");
  if (window > series.size())
    throw std::invalid_argument("window longer than the series");
  std::vector<double> out;
  out.reserve(series.size() - window + 1);
  double acc = 0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    acc += series[i];
    if (i + 1 >= window) {
      out.push_back(acc / static_cast<double>(window));
      acc -= series[i + 1 - window];
    }
  }
  return out;
}

double metrics_file_summary(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open metrics file: " + path);
  std::string line;
  std::getline(is, line);  // header
  std::vector<double> energies;
  double recorded_mean = 0;
  std::int64_t window = 0;
  bool have_summary = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto first = line.find(',');
    const auto second = line.find(',', first + 1);
    const std::string head = line.substr(0, first);
    if (head == "summary") {
      recorded_mean = std::stod(line.substr(first + 1, second - first - 1));
      const auto third = line.find(',', second + 1);
      window = std::stoll(line.substr(second + 1, third - second - 1));
      have_summary = true;
    } else {
      energies.push_back(std::stod(line.substr(first + 1, second - first - 1)));
    }
  }
  if (!have_summary) throw std::runtime_error("metrics file lacks a summary row: " + path);
  if (window < 1 || static_cast<std::size_t>(window) > energies.size())
    throw std::runtime_error("metrics summary window is inconsistent: " + path);
  double sum = 0;
  for (std::size_t i = energies.size() - static_cast<std::size_t>(window); i < energies.size(); ++i)
    sum += energies[i];
  const double mean = sum / static_cast<double>(window);
  if (!(std::abs(mean - recorded_mean) <= 1e-12 * std::max(1.0, std::abs(mean))))
    throw std::runtime_error("metrics summary row disagrees with the data rows: " + path);
  return mean;
}

}  // namespace mecsim::harness
