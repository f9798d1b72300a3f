#include "nwsps/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "nwsps/emitter.hpp"

namespace nwsps::config {

namespace {

using nlohmann::json;

FieldSpec num(std::string path, double value, bool assumption, double min = -INFINITY, bool min_exclusive = false,
              double max = INFINITY) {
  FieldSpec f;
  f.path = std::move(path);
  f.kind = Kind::number;
  f.fallback = value;
  f.assumption = assumption;
  f.min = min;
  f.min_exclusive = min_exclusive;
  f.max = max;
  return f;
}

FieldSpec positive(std::string path, double value, bool assumption) {
  return num(std::move(path), value, assumption, 0.0, true);
}

FieldSpec fraction(std::string path, double value, bool assumption, bool allow_zero = false) {
  return num(std::move(path), value, assumption, 0.0, !allow_zero, 1.0);
}

FieldSpec integer(std::string path, std::int64_t value, bool assumption, double min = 0.0) {
  FieldSpec f;
  f.path = std::move(path);
  f.kind = Kind::integer;
  f.fallback = value;
  f.assumption = assumption;
  f.min = min;
  return f;
}

FieldSpec boolean(std::string path, bool value, bool assumption) {
  FieldSpec f;
  f.path = std::move(path);
  f.kind = Kind::boolean;
  f.fallback = value;
  f.assumption = assumption;
  return f;
}

FieldSpec text(std::string path, std::string value, bool assumption, std::vector<std::string> choices = {}) {
  FieldSpec f;
  f.path = std::move(path);
  f.kind = Kind::text;
  f.fallback = std::move(value);
  f.assumption = assumption;
  f.choices = std::move(choices);
  return f;
}

FieldSpec list(std::string path, std::vector<double> value, bool assumption) {
  FieldSpec f;
  f.path = std::move(path);
  f.kind = Kind::number_list;
  f.fallback = std::move(value);
  f.assumption = assumption;
  return f;
}

void add_common(std::vector<FieldSpec>& s, const std::string& scenario) {
  s.push_back(text("scenario", scenario, false));
  FieldSpec version = integer("version", 1, false, 1.0);
  version.max = 1.0;
  s.push_back(version);
  s.push_back(integer("seed", 1, false));
  s.push_back(text("output_dir", "out/" + scenario, false));
}

struct WireDefaults {
  double wavelength;
  double n;
  double k;
  bool k_assumed;
};

void add_scene(std::vector<FieldSpec>& s, const WireDefaults& d) {
  s.push_back(num("wavelength", d.wavelength, false, 300e-9, false, 700e-9));
  s.push_back(positive("geometry.wire_length", 7.5e-6, false));
  s.push_back(positive("geometry.wire_diameter", 280e-9, false));
  s.push_back(num("geometry.wire_n", d.n, true, 1.0));
  s.push_back(num("geometry.wire_k", d.k, d.k_assumed, 0.0));
  s.push_back(num("geometry.background_index", 1.0, true, 1.0));
  s.push_back(boolean("geometry.layered_substrate", false, true));
  s.push_back(num("geometry.substrate_index", 1.46, true, 1.0));
  s.push_back(num("geometry.pmma_index", 1.49, true, 1.0));
  s.push_back(positive("geometry.pmma_thickness", 100e-9, true));
  s.push_back(num("resolution.cells_per_wavelength", 20.0, true, 20.0));
  s.push_back(positive("resolution.steady_tolerance", 1e-3, true));
  s.push_back(integer("resolution.max_steps", 400000, true, 1.0));
  s.push_back(integer("resolution.pml_cells", 10, true, 1.0));
}

void add_chain(std::vector<FieldSpec>& s) {
  s.push_back(fraction("budget.coupling", 0.07, false));
  s.push_back(text("budget.coupling_source", "measured", false, {"measured", "fdtd"}));
  s.push_back(fraction("budget.facet_overlap", 0.6, true));
  s.push_back(positive("budget.sigma_scale", 1e-2, true));
  s.push_back(positive("budget.emitter_wavelength", 585e-9, false));
  s.push_back(fraction("budget.quantum_efficiency", 0.73, false));
  s.push_back(fraction("budget.collection", 0.5, true));
  s.push_back(fraction("budget.optics", 0.517, true));
  s.push_back(fraction("budget.detector", 0.6, true));
  s.push_back(positive("budget.free_space_waist", 800e-9, false));
  s.push_back(fraction("budget.mode_matching", 0.151, true));
}

std::map<std::string, std::vector<FieldSpec>> build_schemas() {
  std::map<std::string, std::vector<FieldSpec>> m;
  {
    auto& s = m["passive"];
    add_common(s, "passive");
    add_scene(s, {405e-9, 2.4, 0.0032, true});
    s.push_back(positive("beam.waist", 800e-9, false));
    s.push_back(num("beam.offset_x", 150e-9, true));
    s.push_back(positive("beam.height", 440e-9, true));
    s.push_back(num("beam.off_wire_offset", -1.2e-6, true));
    s.push_back(num("emitter.facet_offset", 50e-9, true, 0.0));
    add_chain(s);
    s.push_back(fraction("measured.relative_efficiency", 0.007, false));
    s.push_back(positive("measured.direct_counts", 1e5, true));
    s.push_back(integer("output.field_stride", 4, true, 1.0));
  }
  {
    auto& s = m["active"];
    add_common(s, "active");
    // k from the measured 377 nm attenuation 3e3 1/cm
    add_scene(s, {377e-9, 2.45, 0.009, false});
    s.push_back(num("source.offset_x", 200e-9, true));
    s.push_back(num("source.offset_y", 0.0, true));
    s.push_back(positive("monitor.guided_offset", 1.0e-6, true));
    s.push_back(fraction("measured.relative_efficiency", 0.011, false));
    s.push_back(fraction("measured.spot_overlap", 0.35, false));
    s.push_back(positive("measured.direct_counts", 1e5, true));
    s.push_back(num("attenuation.alpha_377_per_cm", 3000.0, false, 0.0));
    s.push_back(num("attenuation.alpha_385_per_cm", 2100.0, false, 0.0));
    s.push_back(integer("output.field_stride", 4, true, 1.0));
  }
  {
    auto& s = m["reverse"];
    add_common(s, "reverse");
    add_scene(s, {585e-9, 2.0, 0.0, true});
    s.push_back(list("cluster.x_offsets", {50e-9, 200e-9, 350e-9}, true));
    s.push_back(list("cluster.y_offsets", {-150e-9, 0.0, 150e-9}, true));
    s.push_back(positive("monitor.guided_offset", 3.0e-6, true));
  }
  {
    auto& s = m["hbt"];
    add_common(s, "hbt");
    s.push_back(fraction("emitter.quantum_efficiency", 0.73, false, true));
    s.push_back(positive("emitter.lifetime", 20e-9, true));
    s.push_back(positive("emitter.wavelength", 585e-9, false));
    s.push_back(positive("emitter.sigma_scale", 1e-2, true));
    s.push_back(boolean("emitter.blinking", false, true));
    s.push_back(num("emitter.on_to_off_rate", 0.0, true, 0.0));
    s.push_back(num("emitter.off_to_on_rate", 0.0, true, 0.0));
    s.push_back(positive("pump.period", 200e-9, true));
    s.push_back(positive("pump.pulse_width", 50e-12, false));
    s.push_back(num("pump.excitation_probability", 0.5, true, 0.0, true, 0.999999));
    s.push_back(integer("pump.pulses", 1000000, true, 1.0));
    s.push_back(fraction("background.signal_fraction", 0.894, true));
    s.push_back(fraction("detector.efficiency", 0.6, true));
    s.push_back(num("detector.dark_rate", 100.0, true, 0.0));
    s.push_back(num("detector.jitter_ps", 350.0, true, 0.0));
    s.push_back(num("detector.dead_time_ps", 50000.0, true, 0.0));
    s.push_back(integer("analysis.bin_width_ps", 512, true, 1.0));
    s.push_back(positive("analysis.tau_max_periods", 5.0, true));
    s.push_back(num("analysis.window_fraction", 0.25, true, 0.0, true, 0.5));
    s.push_back(boolean("controls.enabled", true, false));
    s.push_back(positive("controls.coherent_mean_photons", 0.3, true));
    s.push_back(text("input.tags_a", "", false));
    s.push_back(text("input.tags_b", "", false));
    s.push_back(boolean("output.write_timestamps", true, false));
  }
  {
    auto& s = m["modes"];
    add_common(s, "modes");
    s.push_back(positive("waveguide.diameter", 280e-9, false));
    s.push_back(num("waveguide.n_core", 2.4, true, 1.0));
    s.push_back(num("waveguide.n_clad", 1.0, false, 1.0));
    s.push_back(positive("waveguide.wavelength", 405e-9, false));
    s.push_back(integer("waveguide.nu_max", 8, false));
  }
  {
    auto& s = m["fit"];
    add_common(s, "fit");
    s.push_back(text("input.csv", "", false));
    s.push_back(positive("input.wavelength", 377e-9, false));
    s.push_back(num("synthetic.alpha_377_per_cm", 3000.0, false, 0.0));
    s.push_back(num("synthetic.alpha_385_per_cm", 2100.0, false, 0.0));
    s.push_back(positive("synthetic.amplitude", 100.0, true));
    s.push_back(num("synthetic.offset", 10.0, true, 0.0));
    s.push_back(integer("synthetic.points", 15, true, 4.0));
    s.push_back(positive("synthetic.length", 7e-6, false));
    s.push_back(num("synthetic.noise", 0.02, true, 0.0));
    s.push_back(integer("synthetic.trials", 100, true, 1.0));
    s.push_back(num("bulk.n", 2.45, true, 1.0));
    s.push_back(num("bulk.k_377", 0.0252, false, 0.0));
    s.push_back(num("bulk.k_385", 0.0211, false, 0.0));
  }
  {
    auto& s = m["budget"];
    add_common(s, "budget");
    s.push_back(positive("geometry.wire_length", 7.5e-6, false));
    s.push_back(positive("geometry.wire_diameter", 280e-9, false));
    s.push_back(num("geometry.wire_k", 0.0032, true, 0.0));
    s.push_back(positive("geometry.pump_wavelength", 405e-9, false));
    add_chain(s);
    s.push_back(fraction("measured.passive_relative", 0.007, false));
    s.push_back(fraction("measured.active_relative", 0.011, false));
    s.push_back(fraction("measured.spot_overlap", 0.35, false));
  }
  {
    auto& s = m["free_space"];
    add_common(s, "free_space");
    s.push_back(positive("geometry.wire_length", 7.5e-6, false));
    s.push_back(positive("geometry.wire_diameter", 280e-9, false));
    s.push_back(num("geometry.wire_k", 0.0032, true, 0.0));
    s.push_back(positive("geometry.pump_wavelength", 405e-9, false));
    add_chain(s);
  }
  return m;
}

const std::map<std::string, std::vector<FieldSpec>>& schemas() {
  static const auto m = build_schemas();
  return m;
}

std::string where(const YAML::Mark& mark) {
  if (mark.is_null()) return "";
  return " at line " + std::to_string(mark.line + 1) + ", column " + std::to_string(mark.column + 1);
}

ConfigError error_at(const std::string& msg, const std::string& field, const YAML::Mark& mark) {
  if (mark.is_null()) return ConfigError(msg, field);
  return ConfigError(msg + where(mark), field, mark.line + 1, mark.column + 1);
}

void check_range(const FieldSpec& f, double v, const std::function<ConfigError(const std::string&)>& fail) {
  if (!std::isfinite(v)) throw fail("field " + f.path + " must be finite");
  const bool low = f.min_exclusive ? !(v > f.min) : !(v >= f.min);
  if (low) {
    std::ostringstream os;
    os << "field " << f.path << " must be " << (f.min_exclusive ? "> " : ">= ") << f.min << " (got " << v << ")";
    throw fail(os.str());
  }
  if (v > f.max) {
    std::ostringstream os;
    os << "field " << f.path << " must be <= " << f.max << " (got " << v << ")";
    throw fail(os.str());
  }
}

json check_json(const FieldSpec& f, const json& value, const std::function<ConfigError(const std::string&)>& fail) {
  switch (f.kind) {
    case Kind::number:
      if (!value.is_number()) throw fail("field " + f.path + " expects a number");
      check_range(f, value.get<double>(), fail);
      return value.get<double>();
    case Kind::integer: {
      if (!value.is_number()) throw fail("field " + f.path + " expects an integer");
      const double d = value.get<double>();
      if (d != std::floor(d) || std::abs(d) > 9.0e15) throw fail("field " + f.path + " expects an integer");
      check_range(f, d, fail);
      return static_cast<std::int64_t>(d);
    }
    case Kind::boolean:
      if (!value.is_boolean()) throw fail("field " + f.path + " expects true or false");
      return value;
    case Kind::text:
      if (!value.is_string()) throw fail("field " + f.path + " expects a string");
      if (!f.choices.empty() && std::find(f.choices.begin(), f.choices.end(), value.get<std::string>()) == f.choices.end()) {
        std::string opts;
        for (const auto& c : f.choices) opts += (opts.empty() ? "" : ", ") + c;
        throw fail("field " + f.path + " must be one of: " + opts);
      }
      return value;
    case Kind::number_list: {
      if (!value.is_array() || value.empty()) throw fail("field " + f.path + " expects a non-empty list of numbers");
      json out = json::array();
      for (const auto& v : value) {
        if (!v.is_number()) throw fail("field " + f.path + " expects a non-empty list of numbers");
        check_range(f, v.get<double>(), fail);
        out.push_back(v.get<double>());
      }
      return out;
    }
  }
  return value;
}

json scalar_json(const FieldSpec& f, const YAML::Node& node) {
  const auto fail = [&](const std::string& m) { return error_at(m, f.path, node.Mark()); };
  try {
    switch (f.kind) {
      case Kind::number:
      case Kind::integer:
        if (!node.IsScalar()) throw fail("field " + f.path + " expects a number");
        return check_json(f, node.as<double>(), fail);
      case Kind::boolean:
        if (!node.IsScalar()) throw fail("field " + f.path + " expects true or false");
        return check_json(f, node.as<bool>(), fail);
      case Kind::text:
        if (!node.IsScalar()) throw fail("field " + f.path + " expects a string");
        return check_json(f, node.as<std::string>(), fail);
      case Kind::number_list: {
        if (!node.IsSequence()) throw fail("field " + f.path + " expects a list of numbers");
        json arr = json::array();
        for (const auto& item : node) {
          if (!item.IsScalar()) throw error_at("field " + f.path + " expects a list of numbers", f.path, item.Mark());
          try {
            arr.push_back(item.as<double>());
          } catch (const YAML::BadConversion&) {
            throw error_at("field " + f.path + " expects a list of numbers", f.path, item.Mark());
          }
        }
        return check_json(f, arr, fail);
      }
    }
  } catch (const YAML::BadConversion&) {
    const char* what = f.kind == Kind::boolean ? "true or false" : f.kind == Kind::text ? "a string" : "a number";
    throw fail("field " + f.path + " expects " + what);
  }
  return nullptr;
}

void walk(const YAML::Node& node, const std::string& prefix, const std::vector<FieldSpec>& fields,
          std::map<std::string, json>& out) {
  for (const auto& kv : node) {
    const std::string key = kv.first.as<std::string>();
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    const FieldSpec* leaf = nullptr;
    bool is_section = false;
    for (const auto& f : fields) {
      if (f.path == path) leaf = &f;
      if (f.path.rfind(path + ".", 0) == 0) is_section = true;
    }
    if (leaf) {
      if (out.count(path)) throw error_at("duplicate key '" + path + "'", path, kv.first.Mark());
      out[path] = scalar_json(*leaf, kv.second);
    } else if (is_section) {
      if (!kv.second.IsMap()) throw error_at("section '" + path + "' must be a mapping", path, kv.second.Mark());
      walk(kv.second, path, fields, out);
    } else {
      throw error_at("unknown key '" + path + "'", path, kv.first.Mark());
    }
  }
}

}  // namespace

ConfigError::ConfigError(const std::string& what, std::string field, int line, int column)
    : InvalidArgument(what), field_(std::move(field)), line_(line), column_(column) {}

const std::vector<std::string>& scenario_kinds() {
  static const std::vector<std::string> kinds{"passive", "active", "reverse", "hbt", "modes", "fit", "budget", "free_space"};
  return kinds;
}

const std::vector<FieldSpec>& schema(const std::string& scenario) {
  const auto it = schemas().find(scenario);
  if (it == schemas().end()) {
    std::string opts;
    for (const auto& k : scenario_kinds()) opts += (opts.empty() ? "" : ", ") + k;
    throw ConfigError("unknown scenario '" + scenario + "' (expected one of: " + opts + ")", "scenario");
  }
  return it->second;
}

const FieldSpec& Config::spec(const std::string& path) const {
  for (const auto& f : schema(scenario_))
    if (f.path == path) return f;
  throw ConfigError("scenario '" + scenario_ + "' has no field '" + path + "'", path);
}

double Config::number(const std::string& path) const { return values_.at(spec(path).path).get<double>(); }
std::int64_t Config::integer(const std::string& path) const { return values_.at(spec(path).path).get<std::int64_t>(); }
bool Config::flag(const std::string& path) const { return values_.at(spec(path).path).get<bool>(); }
std::string Config::text(const std::string& path) const { return values_.at(spec(path).path).get<std::string>(); }
std::vector<double> Config::numbers(const std::string& path) const {
  return values_.at(spec(path).path).get<std::vector<double>>();
}

void Config::set(const std::string& path, const json& value) {
  const FieldSpec& f = spec(path);
  if (f.path == "scenario") throw ConfigError("the scenario kind cannot be overridden", path);
  values_[f.path] = check_json(f, value, [&](const std::string& m) { return ConfigError(m, f.path); });
  user_.insert(f.path);
}

json Config::echo() const {
  json fields = json::object();
  for (const auto& f : schema(scenario_)) {
    const bool user = user_.count(f.path) != 0;
    fields[f.path] = {{"value", values_.at(f.path)}, {"source", user ? "user" : "default"},
                      {"assumption", f.assumption && !user}};
  }
  return fields;
}

std::vector<std::string> Config::assumptions() const {
  std::vector<std::string> out;
  for (const auto& f : schema(scenario_))
    if (f.assumption && !user_.count(f.path)) out.push_back(f.path);
  return out;
}

std::string Config::hash() const {
  json v = values_;
  v.erase("output_dir");
  return emitter::fnv1a_hex(v.dump());
}

Config default_config(const std::string& scenario) {
  Config c;
  c.scenario_ = scenario;
  for (const auto& f : schema(scenario)) c.values_[f.path] = f.fallback;
  c.user_.insert("scenario");
  return c;
}

Config parse_config(const std::string& yaml_text, const std::string& source_name) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(source_name + ": parse error: " + e.msg + where(e.mark), "", e.mark.line + 1, e.mark.column + 1);
  }
  if (!root.IsMap()) throw ConfigError(source_name + ": top level must be a mapping", "");
  const YAML::Node kind = root["scenario"];
  if (!kind) throw ConfigError(source_name + ": missing required key 'scenario'", "scenario");
  if (!kind.IsScalar()) throw error_at(source_name + ": 'scenario' must be a string", "scenario", kind.Mark());
  const std::string scenario = kind.as<std::string>();
  try {
    schema(scenario);
  } catch (const ConfigError& e) {
    throw error_at(source_name + ": " + e.what(), "scenario", kind.Mark());
  }
  Config c = default_config(scenario);
  std::map<std::string, json> given;
  try {
    walk(root, "", schema(scenario), given);
  } catch (const ConfigError& e) {
    throw ConfigError(source_name + ": " + e.what(), e.field(), e.line(), e.column());
  }
  for (auto& [path, value] : given) {
    c.values_[path] = value;
    c.user_.insert(path);
  }
  return c;
}

Config load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path + "'", "");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

json parse_value(const FieldSpec& spec, const std::string& text) {
  switch (spec.kind) {
    case Kind::number:
    case Kind::integer: {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(text, &used);
      } catch (const std::logic_error&) {
        used = 0;
      }
      if (used == 0 || used != text.size()) throw ConfigError("field " + spec.path + " expects a number", spec.path);
      return v;
    }
    case Kind::boolean:
      if (text == "true") return true;
      if (text == "false") return false;
      throw ConfigError("field " + spec.path + " expects true or false", spec.path);
    case Kind::text:
      return text;
    case Kind::number_list: {
      json arr = json::array();
      std::stringstream ss(text);
      std::string item;
      while (std::getline(ss, item, ';')) arr.push_back(parse_value(num(spec.path, 0.0, false), item));
      return arr;
    }
  }
  return nullptr;
}

}  // namespace nwsps::config
