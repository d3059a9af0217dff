#include "swarmgoal/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace swarmgoal::harness {

namespace {

using nlohmann::json;

double parse_double(std::string_view key, std::string_view text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end)
    throw std::invalid_argument(std::string(key) + ": not a number: '" +
                                std::string(text) + "'");
  return v;
}

long long as_integer(std::string_view key, double v) {
  if (!std::isfinite(v) || v != std::floor(v) ||
      std::fabs(v) > 9.007199254740992e15)
    throw std::invalid_argument(std::string(key) + ": expected an integer");
  return static_cast<long long>(v);
}

Boundary parse_boundary(std::string_view v) {
  if (v == "periodic") return Boundary::periodic;
  if (v == "free" || v == "none") return Boundary::free;
  throw std::invalid_argument("boundary: expected 'periodic' or 'free'");
}

Controller parse_controller(std::string_view v) {
  if (v == "constant_noise" || v == "constant") return Controller::constant_noise;
  if (v == "conditional_noise" || v == "conditional")
    return Controller::conditional_noise;
  if (v == "planner") return Controller::planner;
  throw std::invalid_argument(
      "controller: expected 'constant_noise', 'conditional_noise' or 'planner'");
}

}  // namespace

const std::vector<std::string>& field_names() {
  static const std::vector<std::string> names = {
      "L",        "n",          "sigma",      "r",
      "gamma",    "b",          "v",          "epsilon",
      "dt",       "trial_time", "boundary",   "turn_speed",
      "controller", "seed",     "measure_window_fraction", "grid_cells"};
  return names;
}

WorldConfig preset(std::string_view name) {
  WorldConfig c;
  c.preset = std::string(name);
  if (name == "fig2") return c;
  if (name == "fig3-match") {
    c.L = 1.2;
    c.r = 0.1564;
    c.v = 0.1;
    c.b = 0.15;
    c.turn_speed = 1.039;
    c.epsilon = 0.08;
    c.trial_time = 300.0;
    c.boundary = Boundary::free;
    c.measure_window_fraction = 0.75;
    c.n = 8;
    return c;
  }
  if (name == "fig4-local") {
    c.b = 2.5;
    c.controller = Controller::conditional_noise;
    return c;
  }
  if (name == "fig4-planner") {
    c.controller = Controller::planner;
    c.dt = 2.667;
    c.b = 1.333;
    c.grid_cells = 30;
    return c;
  }
  throw std::invalid_argument("unknown preset '" + std::string(name) + "'");
}

std::vector<std::string> preset_names() {
  return {"fig2", "fig3-match", "fig4-local", "fig4-planner"};
}

void set_numeric_field(WorldConfig& c, std::string_view key, double v) {
  if (key == "L") c.L = v;
  else if (key == "n") c.n = static_cast<int>(as_integer(key, v));
  else if (key == "sigma") c.sigma = v;
  else if (key == "r") c.r = v;
  else if (key == "gamma") c.gamma = v;
  else if (key == "b") c.b = v;
  else if (key == "v") c.v = v;
  else if (key == "epsilon") c.epsilon = v;
  else if (key == "dt") c.dt = v;
  else if (key == "trial_time") c.trial_time = v;
  else if (key == "turn_speed") c.turn_speed = v;
  else if (key == "seed") {
    const long long s = as_integer(key, v);
    if (s < 0) throw std::invalid_argument("seed: must be >= 0");
    c.seed = static_cast<std::uint64_t>(s);
  } else if (key == "measure_window_fraction") c.measure_window_fraction = v;
  else if (key == "grid_cells") c.grid_cells = static_cast<int>(as_integer(key, v));
  else
    throw std::invalid_argument("unknown or non-numeric key '" + std::string(key) + "'");
}

void set_field(WorldConfig& c, std::string_view key, std::string_view value) {
  if (key == "boundary") {
    c.boundary = parse_boundary(value);
  } else if (key == "controller") {
    c.controller = parse_controller(value);
  } else if (key == "preset") {
    c.preset = std::string(value);
  } else if (key == "seed") {
    std::uint64_t s = 0;
    const auto* end = value.data() + value.size();
    const auto res = std::from_chars(value.data(), end, s);
    if (res.ec != std::errc() || res.ptr != end)
      throw std::invalid_argument("seed: expected a nonnegative integer");
    c.seed = s;
  } else {
    set_numeric_field(c, key, parse_double(key, value));
  }
}

WorldConfig parse_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config parse error: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");

  WorldConfig c;
  if (auto it = j.find("preset"); it != j.end()) {
    if (!it->is_string()) throw std::invalid_argument("preset: expected a string");
    c = preset(it->get<std::string>());
  }
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    if (key == "preset") continue;
    const auto& names = field_names();
    if (std::find(names.begin(), names.end(), key) == names.end())
      throw std::invalid_argument("unknown key '" + key + "'");
    const json& v = it.value();
    if (key == "boundary" || key == "controller") {
      if (!v.is_string()) throw std::invalid_argument(key + ": expected a string");
      set_field(c, key, v.get<std::string>());
    } else if (key == "seed") {
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
        throw std::invalid_argument("seed: expected a nonnegative integer");
      c.seed = v.get<std::uint64_t>();
    } else {
      if (!v.is_number()) throw std::invalid_argument(key + ": expected a number");
      set_numeric_field(c, key, v.get<double>());
    }
  }
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("invalid config: ") + e.what());
  }
  return c;
}

WorldConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_json(const WorldConfig& c) {
  json j;
  const auto names = preset_names();
  if (std::find(names.begin(), names.end(), c.preset) != names.end())
    j["preset"] = c.preset;
  j["L"] = c.L;
  j["n"] = c.n;
  j["sigma"] = c.sigma;
  j["r"] = c.r;
  j["gamma"] = c.gamma;
  j["b"] = c.b;
  j["v"] = c.v;
  j["epsilon"] = c.epsilon;
  j["dt"] = c.dt;
  j["trial_time"] = c.trial_time;
  j["boundary"] = to_string(c.boundary);
  j["turn_speed"] = c.turn_speed;
  j["controller"] = to_string(c.controller);
  j["seed"] = c.seed;
  j["measure_window_fraction"] = c.measure_window_fraction;
  j["grid_cells"] = c.grid_cells;
  return j.dump(2);
}

}  // namespace swarmgoal::harness
