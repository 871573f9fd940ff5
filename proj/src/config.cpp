#include "mecsim/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace mecsim {

using nlohmann::json;

SimConfig SimConfig::profile_defaults(const std::string& name) {
  SimConfig cfg;  // field initialisers carry the paper-table2 values
  cfg.profile = name;
  if (name == "paper-table2") return cfg;
  if (name == "desk-consistent") {
    // a cell size at which local computing, cached and non-cached
    // offloading are all live trade-offs; wider cells dilute the
    // per-channel bandwidth until offloading stops paying
    cfg.users = 10;
    cfg.tasks = 20;
    cfg.channels = 5;
    cfg.slot_seconds = 5.0;
    cfg.input_min_bytes = 1e6;
    cfg.input_max_bytes = 2e6;
    cfg.software_min_bytes = 10e6;
    cfg.software_max_bytes = 50e6;
    cfg.cycles_min = 2e8;
    cfg.cycles_max = 9e8;
    cfg.cache_bytes = 150e6;
    cfg.train_slots = 3000;
    cfg.eval_slots = 500;
    // joule-scale rewards sit deep in the Huber quadratic branch; the
    // reference rate of 1e-4 cannot move the network within a run
    cfg.agent.learning_rate = 0.03;
    return cfg;
  }
  throw std::invalid_argument("unknown profile: " + name +
                              " (expected paper-table2 or desk-consistent)");
}

namespace {

template <typename T>
void pick(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

void SimConfig::apply_json_text(const std::string& text) {
  const json j = json::parse(text);
  if (j.contains("profile")) {
    const auto name = j.at("profile").get<std::string>();
    if (name != profile) *this = profile_defaults(name);
  }
  pick(j, "users", users);
  pick(j, "tasks", tasks);
  pick(j, "channels", channels);
  pick(j, "bandwidth_hz", bandwidth_hz);
  pick(j, "cache_bytes", cache_bytes);
  pick(j, "slot_seconds", slot_seconds);
  pick(j, "noise_w", noise_w);
  pick(j, "edge_cpu_hz", edge_cpu_hz);
  pick(j, "user_cpu_hz", user_cpu_hz);
  pick(j, "tx_power_w", tx_power_w);
  pick(j, "path_loss_exp", path_loss_exp);
  pick(j, "energy_coeff", energy_coeff);
  pick(j, "cell_meters", cell_meters);
  pick(j, "strict_feasibility", strict_feasibility);
  pick(j, "input_min_bytes", input_min_bytes);
  pick(j, "input_max_bytes", input_max_bytes);
  pick(j, "software_min_bytes", software_min_bytes);
  pick(j, "software_max_bytes", software_max_bytes);
  pick(j, "cycles_min", cycles_min);
  pick(j, "cycles_max", cycles_max);
  pick(j, "idle_prob", idle_prob);
  pick(j, "zipf_exp", zipf_exp);
  pick(j, "neighbors", neighbors);
  pick(j, "train_slots", train_slots);
  pick(j, "eval_slots", eval_slots);
  pick(j, "discount", agent.discount);
  pick(j, "eps_start", agent.eps_start);
  pick(j, "eps_end", agent.eps_end);
  pick(j, "eps_decay_slots", agent.eps_decay_slots);
  pick(j, "target_copy_period", agent.target_copy_period);
  pick(j, "batch_size", agent.batch_size);
  pick(j, "learning_rate", agent.learning_rate);
  pick(j, "replay_capacity", agent.replay_capacity);
  pick(j, "knapsack_unit_bytes", agent.knapsack_unit_bytes);
  pick(j, "hidden_units", agent.hidden_units);
}

SimConfig SimConfig::from_json_file(const std::string& path, const std::string& profile_override) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream buf;
  buf << is.rdbuf();
  const std::string text = buf.str();

  std::string profile = profile_override;
  if (profile.empty()) {
    const json j = json::parse(text);
    profile = j.contains("profile") ? j.at("profile").get<std::string>() : "paper-table2";
  }
  SimConfig cfg = profile_defaults(profile);
  cfg.apply_json_text(text);
  cfg.profile = profile;
  return cfg;
}

std::string SimConfig::to_json_text() const {
  json j;
  j["profile"] = profile;
  j["users"] = users;
  j["tasks"] = tasks;
  j["channels"] = channels;
  j["bandwidth_hz"] = bandwidth_hz;
  j["cache_bytes"] = cache_bytes;
  j["slot_seconds"] = slot_seconds;
  j["noise_w"] = noise_w;
  j["edge_cpu_hz"] = edge_cpu_hz;
  j["user_cpu_hz"] = user_cpu_hz;
  j["tx_power_w"] = tx_power_w;
  j["path_loss_exp"] = path_loss_exp;
  j["energy_coeff"] = energy_coeff;
  j["cell_meters"] = cell_meters;
  j["strict_feasibility"] = strict_feasibility;
  j["input_min_bytes"] = input_min_bytes;
  j["input_max_bytes"] = input_max_bytes;
  j["software_min_bytes"] = software_min_bytes;
  j["software_max_bytes"] = software_max_bytes;
  j["cycles_min"] = cycles_min;
  j["cycles_max"] = cycles_max;
  j["idle_prob"] = idle_prob;
  j["zipf_exp"] = zipf_exp;
  j["neighbors"] = neighbors;
  j["train_slots"] = train_slots;
  j["eval_slots"] = eval_slots;
  j["discount"] = agent.discount;
  j["eps_start"] = agent.eps_start;
  j["eps_end"] = agent.eps_end;
  j["eps_decay_slots"] = agent.eps_decay_slots;
  j["target_copy_period"] = agent.target_copy_period;
  j["batch_size"] = agent.batch_size;
  j["learning_rate"] = agent.learning_rate;
  j["replay_capacity"] = agent.replay_capacity;
  j["knapsack_unit_bytes"] = agent.knapsack_unit_bytes;
  j["hidden_units"] = agent.hidden_units;
  return j.dump(2) + "\n";
}

SystemConfig SimConfig::system() const {
  SystemConfig sys;
  sys.users = users;
  sys.tasks = tasks;
  sys.channels = channels;
  sys.bandwidth_hz = bandwidth_hz;
  sys.cache_bytes = cache_bytes;
  sys.slot_seconds = slot_seconds;
  sys.noise_w = noise_w;
  sys.edge_cpu_hz = edge_cpu_hz;
  sys.user_cpu_hz = user_cpu_hz;
  sys.path_loss_exp = path_loss_exp;
  sys.energy_coeff = energy_coeff;
  sys.strict_feasibility = strict_feasibility;
  return sys;
}

RequestModel SimConfig::request_model() const {
  return RequestModel(tasks, idle_prob, zipf_exp, neighbors);
}

void SimConfig::validate() const {
  system().validate();
  agent.validate();
  if (cell_meters <= 0) throw std::invalid_argument("cell size must be positive");
  if (!(input_min_bytes > 0 && input_min_bytes <= input_max_bytes))
    throw std::invalid_argument("input size range is empty or non-positive");
  if (!(software_min_bytes > 0 && software_min_bytes <= software_max_bytes))
    throw std::invalid_argument("software size range is empty or non-positive");
  if (!(cycles_min > 0 && cycles_min <= cycles_max))
    throw std::invalid_argument("cycle range is empty or non-positive");
  if (train_slots < 0 || eval_slots < 0 || total_slots() < 1)
    throw std::invalid_argument("a run needs at least one slot");
  request_model();  // validates (idle_prob, zipf_exp, neighbors)
  if (strict_feasibility && cycles_max / slot_seconds > user_cpu_hz)
    throw std::invalid_argument("strict feasibility: tasks exceed the device CPU within a slot");
}

Scenario build_scenario(const SimConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Scenario scn;
  scn.cfg = cfg.system();

  Rng placement = Rng::stream(seed, Stream::Placement);
  scn.users.reserve(static_cast<std::size_t>(cfg.users));
  for (int k = 1; k <= cfg.users; ++k) {
    const double half = cfg.cell_meters / 2;
    const double x = placement.uniform(-half, half);
    const double y = placement.uniform(-half, half);
    User u;
    u.id = k;
    u.distance_m = std::max(1.0, std::hypot(x, y));  // base station at the centre
    u.tx_power_w = cfg.tx_power_w;
    u.cpu_hz = cfg.user_cpu_hz;
    scn.users.push_back(u);
  }

  Rng taskgen = Rng::stream(seed, Stream::TaskGen);
  scn.tasks.reserve(static_cast<std::size_t>(cfg.tasks));
  for (int f = 1; f <= cfg.tasks; ++f) {
    Task t;
    t.id = f;
    t.input_bytes = taskgen.uniform(cfg.input_min_bytes, cfg.input_max_bytes);
    t.software_bytes = taskgen.uniform(cfg.software_min_bytes, cfg.software_max_bytes);
    t.cycles = taskgen.uniform(cfg.cycles_min, cfg.cycles_max);
    scn.tasks.push_back(t);
  }

  scn.validate();
  return scn;
}

void apply_axis(SimConfig& cfg, const std::string& axis, double value) {
  if (axis == "cache_bytes") {
    cfg.cache_bytes = value;
  } else if (axis == "users") {
    cfg.users = static_cast<int>(value);
  } else if (axis == "tasks") {
    cfg.tasks = static_cast<int>(value);
  } else if (axis == "channels") {
    cfg.channels = static_cast<int>(value);
  } else if (axis == "idle_prob") {
    cfg.idle_prob = value;
  } else if (axis == "zipf_exp") {
    cfg.zipf_exp = value;
  } else if (axis == "neighbors") {
    cfg.neighbors = static_cast<int>(value);
  } else if (axis == "input_max_bytes") {
    cfg.input_max_bytes = value;
  } else if (axis == "software_max_bytes") {
    cfg.software_max_bytes = value;
  } else if (axis == "cycles_max") {
    cfg.cycles_max = value;
  } else {
    throw std::invalid_argument("unknown sweep axis: " + axis);
  }
}

}  // namespace mecsim
