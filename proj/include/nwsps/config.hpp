#pragma once

#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "nwsps/error.hpp"

namespace nwsps::config {

// Config problem with an optional source position (1-based; 0 = unknown).
class ConfigError : public InvalidArgument {
public:
  ConfigError(const std::string& what, std::string field, int line = 0, int column = 0);
  const std::string& field() const noexcept { return field_; }
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }
  const char* kind() const noexcept override { return "config_error"; }

private:
  std::string field_;
  int line_;
  int column_;
};

enum class Kind { number, integer, boolean, text, number_list };

struct FieldSpec {
  std::string path;  // dotted, e.g. "geometry.wire_diameter"
  Kind kind = Kind::number;
  nlohmann::json fallback;
  bool assumption = false;  // default not taken from a measurement
  double min = -INFINITY;
  double max = INFINITY;
  bool min_exclusive = false;
  std::vector<std::string> choices;  // for text fields, empty = any
};

const std::vector<std::string>& scenario_kinds();
// Fields accepted by a scenario, including the common ones.
const std::vector<FieldSpec>& schema(const std::string& scenario);

class Config {
public:
  const std::string& scenario() const { return scenario_; }
  double number(const std::string& path) const;
  std::int64_t integer(const std::string& path) const;
  bool flag(const std::string& path) const;
  std::string text(const std::string& path) const;
  std::vector<double> numbers(const std::string& path) const;
  bool user_set(const std::string& path) const { return user_.count(path) != 0; }

  // Validated override; marks the field user-set.
  void set(const std::string& path, const nlohmann::json& value);

  // path -> {value, source: "user"|"default", assumption}
  nlohmann::json echo() const;
  // Defaulted assumption fields.
  std::vector<std::string> assumptions() const;
  // Resolved values keyed by path (sorted).
  const nlohmann::json& values() const { return values_; }
  // FNV-1a of the resolved values.
  std::string hash() const;

private:
  friend Config parse_config(const std::string&, const std::string&);
  friend Config default_config(const std::string&);
  const FieldSpec& spec(const std::string& path) const;

  std::string scenario_;
  nlohmann::json values_ = nlohmann::json::object();
  std::set<std::string> user_;
};

Config parse_config(const std::string& yaml_text, const std::string& source_name = "<config>");
Config load_config(const std::string& path);
Config default_config(const std::string& scenario);

// Parse a scalar given on the command line into the field's type.
nlohmann::json parse_value(const FieldSpec& spec, const std::string& text);

}  // namespace nwsps::config
