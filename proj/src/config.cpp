#include "delaygp/config.hpp"

#include "delaygp/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace delaygp {

namespace {

using nlohmann::json;
using Setter = std::function<void(ExperimentConfig&, const json&)>;

template <class T>
T as(const json& v, const std::string& key) {
  const auto numeric = [](const json& e) { return e.is_number(); };
  bool ok = numeric(v);
  if constexpr (std::is_same_v<T, std::vector<double>>) ok = v.is_array() && std::all_of(v.begin(), v.end(), numeric);
  if (!ok) throw ConfigError("config key \"" + key + "\" must be numeric");
  return v.get<T>();
}

template <class T>
Setter field(T ExperimentConfig::*member, std::string key) {
  return [member, key](ExperimentConfig& cfg, const json& v) {
    if constexpr (std::is_same_v<T, double> || std::is_same_v<T, std::vector<double>>) {
      cfg.*member = as<T>(v, key);
    } else if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError("config key \"" + key + "\" must be a boolean");
      cfg.*member = v.get<bool>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError("config key \"" + key + "\" must be a string");
      cfg.*member = v.get<std::string>();
    } else if constexpr (std::is_same_v<T, std::vector<std::size_t>>) {
      if (!v.is_array()) throw ConfigError("config key \"" + key + "\" must be an array");
      T out;
      for (const json& e : v) {
        if (!e.is_number_unsigned()) throw ConfigError("config key \"" + key + "\" needs nonnegative integers");
        out.push_back(e.get<std::size_t>());
      }
      cfg.*member = out;
    } else {
      if (!v.is_number_integer()) throw ConfigError("config key \"" + key + "\" must be an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (!v.is_number_unsigned()) throw ConfigError("config key \"" + key + "\" must be nonnegative");
      }
      cfg.*member = v.get<T>();
    }
  };
}

ExperimentKind parse_kind(const std::string& s) {
  if (s == "delay-sweep") return ExperimentKind::delay_sweep;
  if (s == "dataset-sweep") return ExperimentKind::dataset_sweep;
  if (s == "online-trigger") return ExperimentKind::online_trigger;
  if (s == "tradeoff" || s == "tradeoff-sweep") return ExperimentKind::tradeoff;
  throw ConfigError("unknown experiment kind \"" + s + "\"");
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    t["experiment"] = [](ExperimentConfig& c, const json& v) {
      if (!v.is_string()) throw ConfigError("config key \"experiment\" must be a string");
      c.kind = parse_kind(v.get<std::string>());
    };
    t["plant"] = field(&ExperimentConfig::plant, "plant");
    t["order"] = field(&ExperimentConfig::order, "order");
    t["dim"] = field(&ExperimentConfig::dim, "dim");
    t["reference_amplitude"] = field(&ExperimentConfig::reference_amplitude, "reference_amplitude");
    t["reference_omega"] = field(&ExperimentConfig::reference_omega, "reference_omega");
    t["gains"] = field(&ExperimentConfig::gains, "gains");
    t["signal_std"] = [](ExperimentConfig& c, const json& v) { c.kernel.signal_std = as<double>(v, "signal_std"); };
    t["lengthscale"] = [](ExperimentConfig& c, const json& v) { c.kernel.lengthscale = as<double>(v, "lengthscale"); };
    t["noise_std"] = field(&ExperimentConfig::noise_std, "noise_std");
    t["initial_layout"] = [](ExperimentConfig& c, const json& v) {
      const std::string s = v.is_string() ? v.get<std::string>() : "";
      if (s == "grid") {
        c.initial_layout = InitialLayout::grid;
      } else if (s == "uniform") {
        c.initial_layout = InitialLayout::uniform;
      } else {
        throw ConfigError("initial_layout must be \"grid\" or \"uniform\"");
      }
    };
    t["n0"] = field(&ExperimentConfig::n0, "n0");
    t["delays"] = field(&ExperimentConfig::delays, "delays");
    t["baseline"] = field(&ExperimentConfig::baseline, "baseline");
    t["n0_sweep"] = field(&ExperimentConfig::n0_sweep, "n0_sweep");
    t["delay_per_sample"] = field(&ExperimentConfig::delay_per_sample, "delay_per_sample");
    t["online_delay_bounds"] = field(&ExperimentConfig::online_delay_bounds, "online_delay_bounds");
    t["capacity"] = field(&ExperimentConfig::capacity, "capacity");
    t["offline_delay"] = field(&ExperimentConfig::offline_delay, "offline_delay");
    t["delta_bar_1"] = field(&ExperimentConfig::delta_bar_1, "delta_bar_1");
    t["delta_bar_2"] = field(&ExperimentConfig::delta_bar_2, "delta_bar_2");
    t["confidence"] = field(&ExperimentConfig::confidence, "confidence");
    t["tau"] = field(&ExperimentConfig::tau, "tau");
    t["grid_step"] = field(&ExperimentConfig::grid_step, "grid_step");
    t["lipschitz_safety"] = field(&ExperimentConfig::lipschitz_safety, "lipschitz_safety");
    t["certify"] = field(&ExperimentConfig::certify, "certify");
    t["horizon"] = field(&ExperimentConfig::horizon, "horizon");
    t["dt"] = field(&ExperimentConfig::dt, "dt");
    t["reps"] = field(&ExperimentConfig::reps, "reps");
    t["seed"] = field(&ExperimentConfig::seed, "seed");
    t["out_dir"] = field(&ExperimentConfig::out_dir, "out_dir");
    t["write_traces"] = field(&ExperimentConfig::write_traces, "write_traces");
    return t;
  }();
  return table;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig cfg;
  for (const auto& [key, value] : doc.items()) {
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError("unknown config key \"" + key + "\"");
    it->second(cfg, value);
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string dump_config(const ExperimentConfig& cfg) {
  json j;
  j["experiment"] = to_string(cfg.kind);
  j["plant"] = cfg.plant;
  j["order"] = cfg.order;
  j["dim"] = cfg.dim;
  j["reference_amplitude"] = cfg.reference_amplitude;
  j["reference_omega"] = cfg.reference_omega;
  j["gains"] = cfg.gains;
  j["signal_std"] = cfg.kernel.signal_std;
  j["lengthscale"] = cfg.kernel.lengthscale;
  j["noise_std"] = cfg.noise_std;
  j["initial_layout"] = to_string(cfg.initial_layout);
  j["n0"] = cfg.n0;
  j["delays"] = cfg.delays;
  j["baseline"] = cfg.baseline;
  j["n0_sweep"] = cfg.n0_sweep;
  j["delay_per_sample"] = cfg.delay_per_sample;
  j["online_delay_bounds"] = cfg.online_delay_bounds;
  j["capacity"] = cfg.capacity;
  j["offline_delay"] = cfg.offline_delay;
  j["delta_bar_1"] = cfg.delta_bar_1;
  j["delta_bar_2"] = cfg.delta_bar_2;
  j["confidence"] = cfg.confidence;
  j["tau"] = cfg.tau;
  j["grid_step"] = cfg.grid_step;
  j["lipschitz_safety"] = cfg.lipschitz_safety;
  j["certify"] = cfg.certify;
  j["horizon"] = cfg.horizon;
  j["dt"] = cfg.dt;
  j["reps"] = cfg.reps;
  j["seed"] = cfg.seed;
  j["out_dir"] = cfg.out_dir;
  j["write_traces"] = cfg.write_traces;
  return j.dump(2) + "\n";
}

std::string tradeoff_to_json(const TradeoffReport& r) {
  json j;
  j["delta_bar_1"] = r.delta_bar_1;
  j["delta_bar_2"] = r.delta_bar_2;
  j["delta_tilde"] = r.delta_tilde;
  j["eta_tilde"] = r.eta_tilde;
  j["e_bar_1"] = r.e_bar_1;
  j["e_bar_2"] = r.e_bar_2;
  j["first_rhs"] = r.first_rhs;
  j["first_holds"] = r.first_holds;
  j["second_rhs"] = r.second_rhs;
  j["second_holds"] = r.second_holds;
  j["offline_certified"] = r.offline_certified;
  j["verdict"] = r.offline_certified ? "offline certified" : "no certificate";
  return j.dump(2) + "\n";
}

TradeoffReport tradeoff_from_json(const std::string& json_text) {
  try {
    const json j = json::parse(json_text);
    TradeoffReport r;
    r.delta_bar_1 = j.at("delta_bar_1").get<double>();
    r.delta_bar_2 = j.at("delta_bar_2").get<double>();
    r.delta_tilde = j.at("delta_tilde").get<double>();
    r.eta_tilde = j.at("eta_tilde").get<double>();
    r.e_bar_1 = j.at("e_bar_1").get<double>();
    r.e_bar_2 = j.at("e_bar_2").get<double>();
    r.first_rhs = j.at("first_rhs").get<double>();
    r.first_holds = j.at("first_holds").get<bool>();
    r.second_rhs = j.at("second_rhs").get<double>();
    r.second_holds = j.at("second_holds").get<bool>();
    r.offline_certified = j.at("offline_certified").get<bool>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed trade-off report: ") + e.what());
  }
}

}  // namespace delaygp
