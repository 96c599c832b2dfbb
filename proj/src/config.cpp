#include "jumpflux/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace jumpflux {

using json = nlohmann::ordered_json;

json default_config() {
  return json::parse(R"({
    "experiment": {"id": "custom", "kind": "convergence"},
    "domain": {"left": 0.0, "right": 1.0},
    "randfield": {
      "smoothness": null,
      "variance": null,
      "correlation_length": null,
      "n_quad": 1024,
      "cutoff": 0,
      "energy_fraction": 0.999
    },
    "jumpfield": {
      "preset": "alternating_exponential",
      "delta": null,
      "jumps": null,
      "outer": null,
      "inner": null,
      "width": null
    },
    "initial": {"kind": "sine", "kappa": 0.3, "left": 1.0, "right": 0.0, "x0": 0.5},
    "solver": {
      "integrators": ["forward_euler"],
      "cfl": 0.9,
      "t_end": 1.0,
      "newton_tol": 1e-10,
      "newton_max_iter": 50,
      "implicit_dt": 0.0,
      "output_times": []
    },
    "mesh": {
      "strategies": ["equidistant", "jump_adapted", "wave_cell"],
      "levels": [64, 128, 256, 512],
      "reference_factor": 4,
      "reference_strategy": "wave_cell",
      "strategy": "wave_cell",
      "cells": 256
    },
    "sampling": {
      "samples": 1,
      "seed": 0,
      "threads": 0,
      "norms": ["L1", "L2"],
      "record_wallclock": true,
      "realizations": 4,
      "grid_points": 1001
    },
    "sweep": {"axis": "jump_distance", "values": null},
    "entropy": {
      "enabled": false,
      "alpha_min": 0.001,
      "alpha_max": 1.0,
      "alpha_count": 16,
      "branch": "plus",
      "test_functions": [
        {"id": "bump_left", "x0": 0.25, "rx": 0.2, "t0": 0.5, "rt": 0.4},
        {"id": "bump_centre", "x0": 0.5, "rx": 0.2, "t0": 0.5, "rt": 0.4},
        {"id": "bump_right", "x0": 0.75, "rx": 0.2, "t0": 0.5, "rt": 0.4}
      ]
    }
  })");
}

namespace {

void merge_checked(json& base, const json& user, const std::string& path) {
  if (!user.is_object()) throw std::invalid_argument("config: '" + path + "' must be an object");
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string key = path.empty() ? it.key() : path + "." + it.key();
    if (!base.contains(it.key())) throw std::invalid_argument("config: unknown key '" + key + "'");
    json& slot = base[it.key()];
    if (slot.is_object())
      merge_checked(slot, it.value(), key);
    else
      slot = it.value();
  }
}

template <class T>
T get(const json& doc, const char* section, const char* key) {
  const json& v = doc.at(section).at(key);
  try {
    return v.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw std::invalid_argument(std::string("config: '") + section + "." + key + "' has the wrong type");
  }
}

double smoothness_from_json(const json& v) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "infinity") return CovarianceSpec::kInfiniteSmoothness;
    throw std::invalid_argument("config: randfield.smoothness must be a number or \"inf\"");
  }
  if (!v.is_number()) throw std::invalid_argument("config: randfield.smoothness must be a number or \"inf\"");
  return v.get<double>();
}

json smoothness_to_json(double nu) { return std::isinf(nu) ? json("inf") : json(nu); }

template <class T, class F>
std::vector<T> list_of(const json& doc, const char* section, const char* key, F convert) {
  const json& v = doc.at(section).at(key);
  if (!v.is_array()) throw std::invalid_argument(std::string("config: '") + section + "." + key + "' must be a list");
  std::vector<T> out;
  for (const auto& item : v) out.push_back(convert(item));
  return out;
}

}  // namespace

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw std::invalid_argument("override '" + assignment + "' is not of the form key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;

  json* node = &doc;
  std::stringstream path(key);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(path, part, '.')) parts.push_back(part);
  for (std::size_t k = 0; k < parts.size(); ++k) {
    if (!node->is_object() || !node->contains(parts[k]))
      throw std::invalid_argument("override: unknown key '" + key + "'");
    node = &(*node)[parts[k]];
  }
  *node = value;
}

RunConfig resolve_config(const json& user, const std::vector<std::string>& overrides) {
  json doc = default_config();
  merge_checked(doc, user, "");
  for (const auto& o : overrides) apply_override(doc, o);

  RunConfig rc;
  rc.experiment_id = get<std::string>(doc, "experiment", "id");
  rc.kind = get<std::string>(doc, "experiment", "kind");
  if (rc.kind != "convergence" && rc.kind != "time_to_error")
    throw std::invalid_argument("config: experiment.kind must be 'convergence' or 'time_to_error'");

  ExperimentSpec& spec = rc.spec;
  const Interval domain{get<double>(doc, "domain", "left"), get<double>(doc, "domain", "right")};
  if (!(domain.right > domain.left)) throw std::invalid_argument("config: domain.right must exceed domain.left");

  PresetSpec preset = PresetSpec::defaults(get<std::string>(doc, "jumpfield", "preset"));
  preset.domain = domain;
  json& rf = doc["randfield"];
  json& jf = doc["jumpfield"];
  if (!rf["smoothness"].is_null()) preset.covariance.smoothness = smoothness_from_json(rf["smoothness"]);
  if (!rf["variance"].is_null()) preset.covariance.variance = get<double>(doc, "randfield", "variance");
  if (!rf["correlation_length"].is_null())
    preset.covariance.correlation_length = get<double>(doc, "randfield", "correlation_length");
  preset.covariance.domain = domain;
  preset.n_quad = get<int>(doc, "randfield", "n_quad");
  preset.cutoff = get<int>(doc, "randfield", "cutoff");
  preset.energy_fraction = get<double>(doc, "randfield", "energy_fraction");
  if (!jf["delta"].is_null()) preset.delta = get<double>(doc, "jumpfield", "delta");
  if (!jf["jumps"].is_null()) preset.jumps = get<int>(doc, "jumpfield", "jumps");
  if (!jf["outer"].is_null()) preset.outer = get<double>(doc, "jumpfield", "outer");
  if (!jf["inner"].is_null()) preset.inner = get<double>(doc, "jumpfield", "inner");
  if (!jf["width"].is_null()) preset.width = get<double>(doc, "jumpfield", "width");
  preset.covariance.validate();
  if (preset.n_quad < 1 || preset.cutoff < 0 || !(preset.energy_fraction > 0.0 && preset.energy_fraction <= 1.0))
    throw std::invalid_argument("config: randfield quadrature settings out of range");
  rf["smoothness"] = smoothness_to_json(preset.covariance.smoothness);
  rf["variance"] = preset.covariance.variance;
  rf["correlation_length"] = preset.covariance.correlation_length;
  jf["delta"] = preset.delta;
  jf["jumps"] = preset.jumps;
  jf["outer"] = preset.outer;
  jf["inner"] = preset.inner;
  jf["width"] = preset.width;
  spec.preset = preset;

  const std::string ic = get<std::string>(doc, "initial", "kind");
  if (ic == "sine")
    spec.initial.kind = InitialCondition::Kind::Sine;
  else if (ic == "riemann")
    spec.initial.kind = InitialCondition::Kind::Riemann;
  else
    throw std::invalid_argument("config: initial.kind must be 'sine' or 'riemann'");
  spec.initial.kappa = get<double>(doc, "initial", "kappa");
  spec.initial.left = get<double>(doc, "initial", "left");
  spec.initial.right = get<double>(doc, "initial", "right");
  spec.initial.x0 = get<double>(doc, "initial", "x0");

  auto str = [](const json& v) {
    if (!v.is_string()) throw std::invalid_argument("config: expected a string list entry");
    return v.get<std::string>();
  };
  spec.integrators = list_of<Integrator>(doc, "solver", "integrators",
                                         [&](const json& v) { return integrator_from_string(str(v)); });
  spec.solver.integrator = spec.integrators.empty() ? Integrator::ForwardEuler : spec.integrators.front();
  spec.solver.cfl_number = get<double>(doc, "solver", "cfl");
  spec.solver.t_end = get<double>(doc, "solver", "t_end");
  spec.solver.newton_tol = get<double>(doc, "solver", "newton_tol");
  spec.solver.newton_max_iter = get<int>(doc, "solver", "newton_max_iter");
  spec.solver.implicit_dt = get<double>(doc, "solver", "implicit_dt");
  spec.solver.output_times = list_of<double>(doc, "solver", "output_times", [](const json& v) {
    if (!v.is_number()) throw std::invalid_argument("config: solver.output_times must hold numbers");
    return v.get<double>();
  });

  spec.strategies = list_of<MeshStrategy>(doc, "mesh", "strategies",
                                          [&](const json& v) { return mesh_strategy_from_string(str(v)); });
  spec.levels = list_of<int>(doc, "mesh", "levels", [](const json& v) {
    if (!v.is_number_integer()) throw std::invalid_argument("config: mesh.levels must hold integers");
    return v.get<int>();
  });
  spec.reference_factor = get<int>(doc, "mesh", "reference_factor");
  spec.reference_strategy = mesh_strategy_from_string(get<std::string>(doc, "mesh", "reference_strategy"));
  rc.solve_strategy = mesh_strategy_from_string(get<std::string>(doc, "mesh", "strategy"));
  rc.solve_cells = get<int>(doc, "mesh", "cells");
  if (rc.solve_cells < 1) throw std::invalid_argument("config: mesh.cells must be positive");

  spec.samples = get<int>(doc, "sampling", "samples");
  spec.seed = get<std::uint64_t>(doc, "sampling", "seed");
  spec.threads = get<int>(doc, "sampling", "threads");
  spec.norms = list_of<ErrorNorm>(doc, "sampling", "norms",
                                  [&](const json& v) { return error_norm_from_string(str(v)); });
  spec.record_wallclock = get<bool>(doc, "sampling", "record_wallclock");
  rc.realizations = get<int>(doc, "sampling", "realizations");
  rc.grid_points = get<int>(doc, "sampling", "grid_points");
  if (rc.realizations < 1 || rc.grid_points < 2)
    throw std::invalid_argument("config: sampling.realizations >= 1 and sampling.grid_points >= 2 required");
  spec.validate();

  rc.sweep_axis = sweep_axis_from_string(get<std::string>(doc, "sweep", "axis"));
  if (doc["sweep"]["values"].is_null()) {
    rc.sweep_values = default_sweep_values(rc.sweep_axis);
    json values = json::array();
    for (double v : rc.sweep_values) values.push_back(std::isinf(v) ? json("inf") : json(v));
    doc["sweep"]["values"] = values;
  } else {
    rc.sweep_values = list_of<double>(doc, "sweep", "values", [](const json& v) {
      return v.is_string() ? smoothness_from_json(v) : v.get<double>();
    });
  }

  EntropySettings& es = rc.entropy;
  es.enabled = get<bool>(doc, "entropy", "enabled");
  es.alpha_min = get<double>(doc, "entropy", "alpha_min");
  es.alpha_max = get<double>(doc, "entropy", "alpha_max");
  es.alpha_count = get<int>(doc, "entropy", "alpha_count");
  const std::string branch = get<std::string>(doc, "entropy", "branch");
  if (branch != "plus" && branch != "minus") throw std::invalid_argument("config: entropy.branch must be plus or minus");
  es.branch = branch == "plus" ? Branch::Plus : Branch::Minus;
  const json bump_keys = {{"id", ""}, {"x0", 0.0}, {"rx", 0.0}, {"t0", 0.0}, {"rt", 0.0}};
  for (const auto& item : doc["entropy"]["test_functions"]) {
    json b = bump_keys;
    merge_checked(b, item, "entropy.test_functions[]");
    es.test_functions.push_back({b["id"].get<std::string>(), b["x0"].get<double>(), b["rx"].get<double>(),
                                 b["t0"].get<double>(), b["rt"].get<double>()});
  }

  rc.resolved = doc;
  return rc;
}

RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path.string() + "'");
  json user = json::parse(in, nullptr, false, true);
  if (user.is_discarded()) throw std::runtime_error("config file '" + path.string() + "' is not valid JSON");
  return resolve_config(user, overrides);
}

}  // namespace jumpflux
