#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mecsim/baselines.hpp"
#include "mecsim/config.hpp"
#include "mecsim/ddqn.hpp"
#include "mecsim/env.hpp"
#include "mecsim/game.hpp"
#include "mecsim/harness.hpp"
#include "mecsim/knapsack.hpp"
#include "mecsim/scaa.hpp"

namespace py = pybind11;
using namespace mecsim;

PYBIND11_MODULE(_mecsim, m) {
  m.doc() = "Edge-cell simulator: offloading game, value-network caching agent, baselines";

  py::class_<Task>(m, "Task")
      .def(py::init<>())
      .def_readwrite("id", &Task::id)
      .def_readwrite("input_bytes", &Task::input_bytes)
      .def_readwrite("software_bytes", &Task::software_bytes)
      .def_readwrite("cycles", &Task::cycles);

  py::class_<User>(m, "User")
      .def(py::init<>())
      .def_readwrite("id", &User::id)
      .def_readwrite("distance_m", &User::distance_m)
      .def_readwrite("tx_power_w", &User::tx_power_w)
      .def_readwrite("cpu_hz", &User::cpu_hz);

  py::class_<SystemConfig>(m, "SystemConfig")
      .def_readonly("users", &SystemConfig::users)
      .def_readonly("tasks", &SystemConfig::tasks)
      .def_readonly("channels", &SystemConfig::channels)
      .def_readonly("bandwidth_hz", &SystemConfig::bandwidth_hz)
      .def_readonly("cache_bytes", &SystemConfig::cache_bytes)
      .def_readonly("slot_seconds", &SystemConfig::slot_seconds);

  py::class_<SlotRealization>(m, "SlotRealization")
      .def_readonly("fading", &SlotRealization::fading)
      .def_readonly("gain", &SlotRealization::gain);

  py::class_<RequestModel>(m, "RequestModel")
      .def(py::init<int, double, double, int>(), py::arg("tasks"), py::arg("idle_prob"),
           py::arg("zipf_exp"), py::arg("neighbors"))
      .def("transition_prob", &RequestModel::transition_prob)
      .def("transition_matrix", &RequestModel::transition_matrix);

  py::class_<Scenario>(m, "Scenario")
      .def_readonly("cfg", &Scenario::cfg)
      .def_readonly("tasks", &Scenario::tasks)
      .def_readonly("users", &Scenario::users)
      .def("total_software_bytes", &Scenario::total_software_bytes);

  py::class_<AgentConfig>(m, "AgentConfig")
      .def(py::init<>())
      .def_readwrite("discount", &AgentConfig::discount)
      .def_readwrite("eps_start", &AgentConfig::eps_start)
      .def_readwrite("eps_end", &AgentConfig::eps_end)
      .def_readwrite("eps_decay_slots", &AgentConfig::eps_decay_slots)
      .def_readwrite("target_copy_period", &AgentConfig::target_copy_period)
      .def_readwrite("batch_size", &AgentConfig::batch_size)
      .def_readwrite("learning_rate", &AgentConfig::learning_rate)
      .def_readwrite("replay_capacity", &AgentConfig::replay_capacity)
      .def_readwrite("knapsack_unit_bytes", &AgentConfig::knapsack_unit_bytes)
      .def_readwrite("hidden_units", &AgentConfig::hidden_units);

  py::class_<SimConfig>(m, "SimConfig")
      .def(py::init<>())
      .def_static("profile_defaults", &SimConfig::profile_defaults, py::arg("name"))
      .def_static("from_json_file", &SimConfig::from_json_file, py::arg("path"),
                  py::arg("profile_override") = "")
      .def("to_json_text", &SimConfig::to_json_text)
      .def("validate", &SimConfig::validate)
      .def_readwrite("profile", &SimConfig::profile)
      .def_readwrite("users", &SimConfig::users)
      .def_readwrite("tasks", &SimConfig::tasks)
      .def_readwrite("channels", &SimConfig::channels)
      .def_readwrite("bandwidth_hz", &SimConfig::bandwidth_hz)
      .def_readwrite("cache_bytes", &SimConfig::cache_bytes)
      .def_readwrite("slot_seconds", &SimConfig::slot_seconds)
      .def_readwrite("noise_w", &SimConfig::noise_w)
      .def_readwrite("edge_cpu_hz", &SimConfig::edge_cpu_hz)
      .def_readwrite("user_cpu_hz", &SimConfig::user_cpu_hz)
      .def_readwrite("tx_power_w", &SimConfig::tx_power_w)
      .def_readwrite("path_loss_exp", &SimConfig::path_loss_exp)
      .def_readwrite("energy_coeff", &SimConfig::energy_coeff)
      .def_readwrite("cell_meters", &SimConfig::cell_meters)
      .def_readwrite("strict_feasibility", &SimConfig::strict_feasibility)
      .def_readwrite("input_min_bytes", &SimConfig::input_min_bytes)
      .def_readwrite("input_max_bytes", &SimConfig::input_max_bytes)
      .def_readwrite("software_min_bytes", &SimConfig::software_min_bytes)
      .def_readwrite("software_max_bytes", &SimConfig::software_max_bytes)
      .def_readwrite("cycles_min", &SimConfig::cycles_min)
      .def_readwrite("cycles_max", &SimConfig::cycles_max)
      .def_readwrite("idle_prob", &SimConfig::idle_prob)
      .def_readwrite("zipf_exp", &SimConfig::zipf_exp)
      .def_readwrite("neighbors", &SimConfig::neighbors)
      .def_readwrite("train_slots", &SimConfig::train_slots)
      .def_readwrite("eval_slots", &SimConfig::eval_slots)
      .def_readwrite("agent", &SimConfig::agent);

  m.def("build_scenario", &build_scenario, py::arg("config"), py::arg("seed"));

  m.def(
      "sample_requests",
      [](const RequestState& prev, const RequestModel& model, std::uint64_t seed) {
        Rng rng(seed);
        return env::sample_requests(prev, model, rng);
      },
      py::arg("prev"), py::arg("model"), py::arg("seed"));
  m.def(
      "sample_fading",
      [](const Scenario& scn, std::uint64_t seed) {
        Rng rng(seed);
        return env::sample_fading(scn, rng);
      },
      py::arg("scenario"), py::arg("seed"));
  m.def("uplink_rate", &env::uplink_rate, py::arg("scenario"), py::arg("user"), py::arg("alpha"),
        py::arg("slot"));
  m.def("local_energy", &env::local_energy, py::arg("scenario"), py::arg("task_id"));
  m.def("offload_delay", &env::offload_delay);
  m.def("offload_energy", &env::offload_energy);
  m.def("user_energy", &env::user_energy);
  m.def("system_energy", &env::system_energy);

  py::class_<game::BoundTerms>(m, "BoundTerms")
      .def_readonly("delta_max", &game::BoundTerms::delta_max)
      .def_readonly("delta_min", &game::BoundTerms::delta_min)
      .def_readonly("v_max", &game::BoundTerms::v_max)
      .def_readonly("v_min", &game::BoundTerms::v_min)
      .def_readonly("min_decrement_eps", &game::BoundTerms::min_decrement_eps);
  py::class_<game::GameOutcome>(m, "GameOutcome")
      .def_readonly("decision", &game::GameOutcome::decision)
      .def_readonly("iterations", &game::GameOutcome::iterations)
      .def_readonly("potential_trace", &game::GameOutcome::potential_trace)
      .def_readonly("energy", &game::GameOutcome::energy)
      .def_readonly("bound_terms", &game::GameOutcome::bound_terms);

  m.def(
      "solve_ne",
      [](const Scenario& scn, const RequestState& mu, const CacheState& cache,
         const SlotRealization& slot, std::uint64_t arbiter_seed) {
        Rng rng(arbiter_seed);
        return game::solve_ne(scn, mu, cache, slot, rng);
      },
      py::arg("scenario"), py::arg("requests"), py::arg("cache"), py::arg("slot"),
      py::arg("arbiter_seed"));
  m.def("potential", &game::potential);
  m.def("interference", &game::interference);
  m.def("threshold", &game::threshold);
  m.def("iteration_bound", &game::iteration_bound);

  m.def("knapsack_solve", &knapsack::solve, py::arg("values"), py::arg("sizes_bytes"),
        py::arg("capacity_bytes"), py::arg("unit_bytes") = 1e6);
  m.def("knapsack_max_value", &knapsack::max_value, py::arg("values"), py::arg("sizes_bytes"),
        py::arg("capacity_bytes"), py::arg("unit_bytes") = 1e6);
  m.def("knapsack_brute_force", &knapsack::brute_force, py::arg("values"),
        py::arg("sizes_bytes"), py::arg("capacity_bytes"));

  py::class_<InputEncoding>(m, "InputEncoding")
      .def_readonly("active", &InputEncoding::active)
      .def_readonly("request", &InputEncoding::request);
  m.def("encode_state", &encode_state, py::arg("requests"));
  m.def("huber_loss", [](double q, double target) {
    const auto r = huber_loss(q, target);
    return py::make_tuple(r.loss, r.dloss_dq);
  });

  py::class_<ScaaNetwork>(m, "ScaaNetwork")
      .def(py::init([](int users, int tasks, int hidden, std::uint64_t seed) {
             Rng rng(seed);
             return ScaaNetwork(users, tasks, hidden, rng);
           }),
           py::arg("users"), py::arg("tasks"), py::arg("hidden"), py::arg("seed"))
      .def("values", &ScaaNetwork::values)
      .def("forward", &ScaaNetwork::forward)
      .def("save", &ScaaNetwork::save)
      .def_static("load", &ScaaNetwork::load)
      .def_property_readonly("users", &ScaaNetwork::users)
      .def_property_readonly("tasks", &ScaaNetwork::tasks)
      .def_property_readonly("hidden", &ScaaNetwork::hidden);

  py::enum_<harness::Policy>(m, "Policy")
      .value("PROPOSED", harness::Policy::Proposed)
      .value("LRU", harness::Policy::Lru)
      .value("LFU", harness::Policy::Lfu)
      .value("FIFO", harness::Policy::Fifo)
      .value("LMP", harness::Policy::Lmp)
      .value("OFFLOAD_ONLY", harness::Policy::OffloadOnly);
  m.def("policy_from_name", &harness::policy_from_name);

  py::class_<harness::SlotRecord>(m, "SlotRecord")
      .def_readonly("slot", &harness::SlotRecord::slot)
      .def_readonly("energy", &harness::SlotRecord::energy)
      .def_readonly("energy_no_cache", &harness::SlotRecord::energy_no_cache)
      .def_readonly("reward", &harness::SlotRecord::reward)
      .def_readonly("ne_iterations", &harness::SlotRecord::ne_iterations)
      .def_readonly("cache_hits", &harness::SlotRecord::cache_hits)
      .def_readonly("loss", &harness::SlotRecord::loss);
  py::class_<harness::RunResult>(m, "RunResult")
      .def_readonly("records", &harness::RunResult::records)
      .def_readonly("summary_energy", &harness::RunResult::summary_energy)
      .def_readonly("metrics_path", &harness::RunResult::metrics_path)
      .def_readonly("checkpoint_path", &harness::RunResult::checkpoint_path);

  py::class_<harness::Run>(m, "Run")
      .def(py::init<const SimConfig&, harness::Policy, std::uint64_t, const std::string&>(),
           py::arg("config"), py::arg("policy"), py::arg("seed"), py::arg("checkpoint") = "")
      .def("step", &harness::Run::step, py::call_guard<py::gil_scoped_release>())
      .def("done", &harness::Run::done)
      .def_property_readonly("slot", &harness::Run::slot)
      .def_property_readonly("total_slots", &harness::Run::total_slots)
      .def_property_readonly("cache", &harness::Run::cache)
      .def_property_readonly("scenario", &harness::Run::scenario);

  m.def("run_experiment", &harness::run_experiment, py::arg("config"), py::arg("policy"),
        py::arg("seed"), py::arg("out_dir") = "", py::arg("checkpoint") = "",
        py::call_guard<py::gil_scoped_release>());
  m.def("moving_average", &harness::moving_average, py::arg("series"), py::arg("window") = 20);
  m.def("metrics_file_summary", &harness::metrics_file_summary, py::arg("path"));
}
