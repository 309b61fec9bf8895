#pragma once

// Configuration loading and result serialization for the command-line tool.
//
// Run configurations are JSON documents with up to four top-level keys:
//
//   {
//     "params":  {"lambda": 1.0, "c": 1.25, "theta": 0.2, "eta": 0.1, "beta": 1.0},
//     "claims":  {"kind": "exponential", "rate": 1.0},
//     "command_options": { ... per-command settings, same names as the flags ... },
//     "output":  {"json": "result.json", "csv": "table.csv"}
//   }
//
// Claim distributions are discriminated by "kind":
//   {"kind": "exponential", "rate": r}
//   {"kind": "gamma", "shape": k, "rate": r}
//   {"kind": "uniform", "width": b}
//   {"kind": "empirical", "atoms": [...], "weights": [...]}
//
// All numeric output is written with 12 significant digits.  Files are
// written to a temporary sibling first and atomically renamed into place,
// so a failed run never leaves a partial output file behind.

#include <unistd.h>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ruinopt/distributions.hpp"
#include "ruinopt/errors.hpp"
#include "ruinopt/model.hpp"
#include "ruinopt/retention.hpp"

namespace ruinopt {

using nlohmann::json;

struct OutputSpec {
  std::string json_path;  // empty -> write JSON to stdout
  std::string csv_path;   // empty -> no CSV output
};

struct RunConfig {
  ModelParams params{};
  ClaimDistribution claims = Exponential{1.0};
  json command_options = json::object();
  OutputSpec output{};
};

namespace detail {

inline std::string json_type_name(const json& j) {
  if (j.is_null()) return "null";
  if (j.is_boolean()) return "boolean";
  if (j.is_number()) return "number";
  if (j.is_string()) return "string";
  if (j.is_array()) return "array";
  if (j.is_object()) return "object";
  return "value";
}

inline const json& require_field(const json& obj, const std::string& where,
                                 const std::string& key) {
  if (!obj.is_object()) {
    throw ConfigError("config field " + where + ": expected an object, got " +
                      json_type_name(obj));
  }
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw ConfigError("config field " + where + "." + key + ": missing");
  }
  return *it;
}

inline double require_number(const json& obj, const std::string& where,
                             const std::string& key) {
  const json& v = require_field(obj, where, key);
  if (!v.is_number()) {
    throw ConfigError("config field " + where + "." + key +
                      ": expected a number, got " + json_type_name(v));
  }
  return v.get<double>();
}

inline std::vector<double> require_number_array(const json& obj,
                                                const std::string& where,
                                                const std::string& key) {
  const json& v = require_field(obj, where, key);
  if (!v.is_array()) {
    throw ConfigError("config field " + where + "." + key +
                      ": expected an array, got " + json_type_name(v));
  }
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) {
      throw ConfigError("config field " + where + "." + key + "[" +
                        std::to_string(i) + "]: expected a number, got " +
                        json_type_name(v[i]));
    }
    out.push_back(v[i].get<double>());
  }
  return out;
}

}  // namespace detail

// --- parsing ---------------------------------------------------------------

inline ModelParams parse_params(const json& j, const std::string& where = "params") {
  ModelParams p;
  p.lambda = detail::require_number(j, where, "lambda");
  p.c = detail::require_number(j, where, "c");
  p.theta = detail::require_number(j, where, "theta");
  p.eta = detail::require_number(j, where, "eta");
  p.beta = detail::require_number(j, where, "beta");
  return p;
}

inline ClaimDistribution parse_claims(const json& j, const std::string& where = "claims") {
  const json& kind_field = detail::require_field(j, where, "kind");
  if (!kind_field.is_string()) {
    throw ConfigError("config field " + where + ".kind: expected a string, got " +
                      detail::json_type_name(kind_field));
  }
  const std::string kind = kind_field.get<std::string>();
  if (kind == "exponential") {
    return Exponential{detail::require_number(j, where, "rate")};
  }
  if (kind == "gamma") {
    return GammaClaims{detail::require_number(j, where, "shape"),
                       detail::require_number(j, where, "rate")};
  }
  if (kind == "uniform") {
    return UniformClaims{detail::require_number(j, where, "width")};
  }
  if (kind == "empirical") {
    return make_empirical(detail::require_number_array(j, where, "atoms"),
                          detail::require_number_array(j, where, "weights"));
  }
  throw ConfigError("config field " + where + ".kind: unknown claim kind \"" + kind +
                    "\" (expected exponential, gamma, uniform, or empirical)");
}

// Retention specifications accept either a compact string
// ("full", "zero", "quota:0.5", "stoploss:1.2", "optimal") or an object
// ({"kind": "quota_share", "proportion": 0.5}, ..., {"kind": "tabulated",
// "grid": [...], "values": [...]}).  "optimal" is resolved by the caller
// because it depends on the model being simulated.
struct RetentionSpec {
  bool optimal = false;          // resolved against the chosen model
  RetentionFunction retention = Full{};
};

inline RetentionSpec parse_retention_spec(const json& j,
                                          const std::string& where = "retention") {
  RetentionSpec spec;
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "optimal") {
      spec.optimal = true;
      return spec;
    }
    if (s == "full") {
      spec.retention = Full{};
      return spec;
    }
    if (s == "zero") {
      spec.retention = Zero{};
      return spec;
    }
    const auto colon = s.find(':');
    if (colon != std::string::npos) {
      const std::string head = s.substr(0, colon);
      const std::string tail = s.substr(colon + 1);
      double value = 0.0;
      try {
        std::size_t used = 0;
        value = std::stod(tail, &used);
        if (used != tail.size()) throw std::invalid_argument("trailing characters");
      } catch (const std::exception&) {
        throw ConfigError("config field " + where + ": cannot parse \"" + tail +
                          "\" as a number in retention \"" + s + "\"");
      }
      if (head == "quota") {
        spec.retention = QuotaShare{value};
        return spec;
      }
      if (head == "stoploss") {
        spec.retention = StopLoss{value};
        return spec;
      }
    }
    throw ConfigError("config field " + where + ": unknown retention \"" + s +
                      "\" (expected optimal, full, zero, quota:<q>, or stoploss:<d>)");
  }
  if (!j.is_object()) {
    throw ConfigError("config field " + where +
                      ": expected a string or object, got " + detail::json_type_name(j));
  }
  const json& kind_field = detail::require_field(j, where, "kind");
  if (!kind_field.is_string()) {
    throw ConfigError("config field " + where + ".kind: expected a string, got " +
                      detail::json_type_name(kind_field));
  }
  const std::string kind = kind_field.get<std::string>();
  if (kind == "optimal") {
    spec.optimal = true;
    return spec;
  }
  if (kind == "full") {
    spec.retention = Full{};
    return spec;
  }
  if (kind == "zero") {
    spec.retention = Zero{};
    return spec;
  }
  if (kind == "quota_share") {
    spec.retention = QuotaShare{detail::require_number(j, where, "proportion")};
    return spec;
  }
  if (kind == "stop_loss") {
    spec.retention = StopLoss{detail::require_number(j, where, "deductible")};
    return spec;
  }
  if (kind == "diffusion_optimal") {
    spec.retention = DiffusionOptimal{detail::require_number(j, where, "alpha"),
                                      detail::require_number(j, where, "theta"),
                                      detail::require_number(j, where, "eta")};
    return spec;
  }
  if (kind == "classical_optimal") {
    spec.retention = ClassicalOptimal{detail::require_number(j, where, "rho"),
                                      detail::require_number(j, where, "theta"),
                                      detail::require_number(j, where, "eta")};
    return spec;
  }
  if (kind == "tabulated") {
    Tabulated t;
    t.grid = detail::require_number_array(j, where, "grid");
    t.values = detail::require_number_array(j, where, "values");
    spec.retention = std::move(t);
    return spec;
  }
  throw ConfigError("config field " + where + ".kind: unknown retention kind \"" +
                    kind + "\"");
}

inline json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError("cannot parse " + origin + ": " + e.what());
  }
}

inline json load_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("cannot open config file \"" + path + "\"");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_json_text(buf.str(), "config file \"" + path + "\"");
}

inline RunConfig parse_run_config(const json& doc) {
  if (!doc.is_object()) {
    throw ConfigError("config root: expected an object, got " +
                      detail::json_type_name(doc));
  }
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const std::string& key = it.key();
    if (key != "params" && key != "claims" && key != "command_options" &&
        key != "output") {
      throw ConfigError("config field " + key +
                        ": unknown top-level key (expected params, claims, "
                        "command_options, or output)");
    }
  }
  RunConfig cfg;
  cfg.params = parse_params(detail::require_field(doc, "config", "params"));
  cfg.claims = parse_claims(detail::require_field(doc, "config", "claims"));
  if (doc.contains("command_options")) {
    const json& opts = doc["command_options"];
    if (!opts.is_object()) {
      throw ConfigError("config field command_options: expected an object, got " +
                        detail::json_type_name(opts));
    }
    cfg.command_options = opts;
  }
  if (doc.contains("output")) {
    const json& out = doc["output"];
    if (!out.is_object()) {
      throw ConfigError("config field output: expected an object, got " +
                        detail::json_type_name(out));
    }
    if (out.contains("json")) {
      if (!out["json"].is_string()) {
        throw ConfigError("config field output.json: expected a string, got " +
                          detail::json_type_name(out["json"]));
      }
      cfg.output.json_path = out["json"].get<std::string>();
    }
    if (out.contains("csv")) {
      if (!out["csv"].is_string()) {
        throw ConfigError("config field output.csv: expected a string, got " +
                          detail::json_type_name(out["csv"]));
      }
      cfg.output.csv_path = out["csv"].get<std::string>();
    }
  }
  return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
  return parse_run_config(load_json_file(path));
}

// --- serialization ----------------------------------------------------------

// Formats a double with 12 significant digits ("%.12g").  Non-finite values
// have no JSON representation and indicate a reporting bug upstream.
inline std::string format_number(double x) {
  if (!std::isfinite(x)) {
    throw NumericalFailure("cannot serialize non-finite number to JSON/CSV");
  }
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return std::string(buf);
}

namespace detail {

inline void append_json_string(std::string& out, const std::string& s) {
  out.push_back('"');
  for (char ch : s) {
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(ch) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", static_cast<unsigned>(ch));
          out += buf;
        } else {
          out.push_back(ch);
        }
    }
  }
  out.push_back('"');
}

inline void dump_json_12(const json& j, std::string& out, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent * depth), ' ');
  const std::string pad_in(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  switch (j.type()) {
    case json::value_t::null: out += "null"; return;
    case json::value_t::boolean: out += (j.get<bool>() ? "true" : "false"); return;
    case json::value_t::number_integer:
      out += std::to_string(j.get<std::int64_t>());
      return;
    case json::value_t::number_unsigned:
      out += std::to_string(j.get<std::uint64_t>());
      return;
    case json::value_t::number_float: out += format_number(j.get<double>()); return;
    case json::value_t::string: append_json_string(out, j.get<std::string>()); return;
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line; arrays holding containers nest.
      bool scalar_only = true;
      for (const auto& v : j) {
        if (v.is_array() || v.is_object()) {
          scalar_only = false;
          break;
        }
      }
      out.push_back('[');
      bool first = true;
      for (const auto& v : j) {
        if (!first) out.push_back(',');
        if (!scalar_only) {
          out.push_back('\n');
          out += pad_in;
        } else if (!first) {
          out.push_back(' ');
        }
        dump_json_12(v, out, indent, depth + 1);
        first = false;
      }
      if (!scalar_only) {
        out.push_back('\n');
        out += pad;
      }
      out.push_back(']');
      return;
    }
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out.push_back('{');
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out.push_back(',');
        out.push_back('\n');
        out += pad_in;
        append_json_string(out, it.key());
        out += ": ";
        dump_json_12(it.value(), out, indent, depth + 1);
        first = false;
      }
      out.push_back('\n');
      out += pad;
      out.push_back('}');
      return;
    }
    default:
      throw NumericalFailure("cannot serialize binary/discarded JSON value");
  }
}

}  // namespace detail

inline std::string dump_json_12(const json& j, int indent = 2) {
  std::string out;
  detail::dump_json_12(j, out, indent, 0);
  out.push_back('\n');
  return out;
}

// Writes `content` to `path` atomically: the bytes go to a temporary sibling
// file which is renamed over the target only after a successful write, so
// failures never leave a truncated file at `path`.
inline void write_text_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path parent = target.parent_path().empty() ? fs::path(".")
                                                       : target.parent_path();
  std::error_code ec;
  fs::create_directories(parent, ec);  // best effort; open error reported below
  const fs::path tmp = parent / (target.filename().string() + ".tmp" +
                                 std::to_string(static_cast<unsigned long>(::getpid())));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw ConfigError("cannot open output file \"" + tmp.string() + "\" for writing");
    }
    out << content;
    out.flush();
    if (!out) {
      fs::remove(tmp, ec);
      throw ConfigError("failed while writing output file \"" + tmp.string() + "\"");
    }
  }
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw ConfigError("cannot move output into place at \"" + path + "\"");
  }
}

// CSV table: a header row plus rows of 12-significant-digit numbers.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  void add_row(std::initializer_list<double> values) {
    rows.emplace_back(values);
  }

  std::string to_string() const {
    std::string out;
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (i) out.push_back(',');
      out += header[i];
    }
    out.push_back('\n');
    for (const auto& row : rows) {
      if (row.size() != header.size()) {
        throw NumericalFailure("CSV row width does not match header");
      }
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out.push_back(',');
        out += format_number(row[i]);
      }
      out.push_back('\n');
    }
    return out;
  }
};

// --- serialization of domain objects ---------------------------------------

inline json params_to_json(const ModelParams& p) {
  return json{{"lambda", p.lambda}, {"c", p.c}, {"theta", p.theta},
              {"eta", p.eta}, {"beta", p.beta}};
}

inline json claims_to_json(const ClaimDistribution& dist) {
  return std::visit(
      [](const auto& d) -> json {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Exponential>) {
          return json{{"kind", "exponential"}, {"rate", d.rate}};
        } else if constexpr (std::is_same_v<T, GammaClaims>) {
          return json{{"kind", "gamma"}, {"shape", d.shape}, {"rate", d.rate}};
        } else if constexpr (std::is_same_v<T, UniformClaims>) {
          return json{{"kind", "uniform"}, {"width", d.width}};
        } else {
          return json{{"kind", "empirical"}, {"atoms", d.atoms}, {"weights", d.weights}};
        }
      },
      dist);
}

inline json retention_to_json(const RetentionFunction& ret) {
  return std::visit(
      [](const auto& r) -> json {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, Full>) {
          return json{{"kind", "full"}};
        } else if constexpr (std::is_same_v<T, Zero>) {
          return json{{"kind", "zero"}};
        } else if constexpr (std::is_same_v<T, QuotaShare>) {
          return json{{"kind", "quota_share"}, {"proportion", r.proportion}};
        } else if constexpr (std::is_same_v<T, StopLoss>) {
          return json{{"kind", "stop_loss"}, {"deductible", r.deductible}};
        } else if constexpr (std::is_same_v<T, DiffusionOptimal>) {
          return json{{"kind", "diffusion_optimal"}, {"alpha", r.alpha},
                      {"theta", r.theta}, {"eta", r.eta}};
        } else if constexpr (std::is_same_v<T, ClassicalOptimal>) {
          return json{{"kind", "classical_optimal"}, {"rho", r.rho},
                      {"theta", r.theta}, {"eta", r.eta}};
        } else {
          return json{{"kind", "tabulated"}, {"grid", r.grid}, {"values", r.values}};
        }
      },
      ret);
}

}  // namespace ruinopt
