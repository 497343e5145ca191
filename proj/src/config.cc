/*
 * Copyright 2026 The RegTop-k Simulator Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "regtopk/config.h"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "regtopk/rng.h"

namespace regtopk {
namespace {

std::string Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> SplitComma(std::string_view s) {
  std::vector<std::string> out;
  if (Trim(s).empty()) return out;
  std::size_t pos = 0;
  while (true) {
    const auto comma = s.find(',', pos);
    out.push_back(Trim(s.substr(pos, comma == std::string_view::npos ? s.npos : comma - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

double ParseDouble(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw ConfigError("config key '" + key + "': expected a finite number, got '" + v + "'");
  }
  return out;
}

std::uint64_t ParseUnsigned(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw ConfigError("config key '" + key + "': expected a non-negative integer, got '" + v + "'");
  }
  return out;
}

bool ParseBool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config key '" + key + "': expected true/false, got '" + v + "'");
}

std::vector<double> ParseDoubleList(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& cell : SplitComma(v)) out.push_back(ParseDouble(key, cell));
  return out;
}

std::string JoinDoubles(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += FormatDouble(v[i]);
  }
  return out;
}

const ConfigMap& BaseDefaults() {
  static const ConfigMap defaults = {
      {"problem", "linear_regression"},
      {"N", "20"},
      {"J", "100"},
      {"D_n", "500"},
      {"U", "0"},
      {"sigma2", "5"},
      {"h2", "1"},
      {"eps2", "0.5"},
      {"homogeneous", "false"},
      {"sparsifier", "regtopk"},
      {"mu", "0.5"},
      {"c_unselected", "1"},
      {"y_exponent", "1"},
      {"zero_tolerance", "1e-12"},
      {"k", "60"},
      {"eta", "0.01"},
      {"iterations", "2500"},
      {"weights", "uniform"},
      {"seed", "1"},
      {"trace_level", "gap_only"},
      {"threads", "1"},
      {"sweep.S_values", "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1"},
      {"sweep.repeats", "10"},
      {"oracle.a_local", "4,3,2,1"},
      {"oracle.z_known", ""},
      {"oracle.family", "tanh_sech2"},
      {"oracle.mu", "0.5"},
      {"oracle.scale_with_gradient", "true"},
      {"oracle.omega", "0.5"},
      {"oracle.k", "2"},
      {"oracle.samples", "100000"},
      {"oracle.p0_mean", ""},
      {"oracle.p0_var", ""},
  };
  return defaults;
}

ConfigMap FromJson(const nlohmann::json& j) {
  const nlohmann::json& obj = j.contains("config") ? j.at("config") : j;
  if (!obj.is_object()) throw ConfigError("JSON config must be an object");
  ConfigMap out;
  for (const auto& [key, value] : obj.items()) {
    if (value.is_string()) {
      out[key] = value.get<std::string>();
    } else if (value.is_boolean()) {
      out[key] = value.get<bool>() ? "true" : "false";
    } else if (value.is_number_integer() || value.is_number_unsigned()) {
      out[key] = value.dump();
    } else if (value.is_number_float()) {
      out[key] = FormatDouble(value.get<double>());
    } else {
      throw ConfigError("JSON config key '" + key + "' must be a scalar");
    }
  }
  return out;
}

}  // namespace

std::string FormatDouble(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

Subcommand ParseSubcommand(std::string_view name) {
  if (name == "gen-data") return Subcommand::kGenData;
  if (name == "run") return Subcommand::kRun;
  if (name == "sweep") return Subcommand::kSweep;
  if (name == "toy") return Subcommand::kToy;
  if (name == "oracle") return Subcommand::kOracle;
  throw ConfigError("unknown subcommand '" + std::string(name) +
                    "' (valid: gen-data, run, sweep, toy, oracle)");
}

std::string ToString(Subcommand cmd) {
  switch (cmd) {
    case Subcommand::kGenData: return "gen-data";
    case Subcommand::kRun: return "run";
    case Subcommand::kSweep: return "sweep";
    case Subcommand::kToy: return "toy";
    case Subcommand::kOracle: return "oracle";
  }
  return "?";
}

ConfigMap DefaultConfig(Subcommand cmd) {
  ConfigMap m = BaseDefaults();
  if (cmd == Subcommand::kToy) {
    m["problem"] = "logistic_toy";
    m["k"] = "1";
    m["eta"] = "0.9";
    m["iterations"] = "100";
  }
  return m;
}

std::vector<std::string> ValidKeys() {
  std::vector<std::string> keys;
  for (const auto& [k, v] : BaseDefaults()) keys.push_back(k);
  return keys;
}

ConfigMap ParseConfigText(std::string_view text) {
  ConfigMap out;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (Trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = Trim(std::string_view(line).substr(0, eq));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    out[key] = Trim(std::string_view(line).substr(eq + 1));
  }
  return out;
}

ConfigMap ParseConfigFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();
  // A CSV artifact carries its config on a "# config=" preamble line.
  if (text.starts_with("# regtopk ")) {
    const auto at = text.find("\n# config=");
    if (at == std::string::npos) throw ConfigError("'" + path + "' has no embedded config");
    const auto start = at + 10;
    text = text.substr(start, text.find('\n', start) - start);
  }
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config file '" + path + "': " + e.what());
    }
    return FromJson(j);
  }
  return ParseConfigText(text);
}

ConfigMap ParseOverrides(const std::vector<std::string>& tokens) {
  ConfigMap out;
  for (const auto& tok : tokens) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError("override '" + tok + "' is not of the form key=value");
    }
    out[Trim(std::string_view(tok).substr(0, eq))] = Trim(std::string_view(tok).substr(eq + 1));
  }
  return out;
}

void Merge(ConfigMap& base, const ConfigMap& layer) {
  const ConfigMap& known = BaseDefaults();
  for (const auto& [key, value] : layer) {
    if (!known.contains(key)) {
      std::string valid;
      for (const auto& [k, v] : known) valid += (valid.empty() ? "" : ", ") + k;
      throw ConfigError("unknown config key '" + key + "'; valid keys: " + valid);
    }
    base[key] = value;
  }
}

Settings Resolve(const ConfigMap& map) {
  ConfigMap m = BaseDefaults();
  Merge(m, map);
  auto get = [&](const char* key) -> const std::string& { return m.at(key); };
  auto num = [&](const char* key) { return ParseDouble(key, get(key)); };
  auto uns = [&](const char* key) { return ParseUnsigned(key, get(key)); };

  Settings s;
  ExperimentConfig& e = s.experiment;
  const std::string& problem = get("problem");
  if (problem == "linear_regression") {
    e.problem = ProblemKind::kLinearRegression;
  } else if (problem == "logistic_toy") {
    e.problem = ProblemKind::kLogisticToy;
  } else {
    throw ConfigError("problem must be linear_regression or logistic_toy, got '" + problem + "'");
  }
  e.data.num_workers = uns("N");
  e.data.dim = uns("J");
  e.data.rows_per_worker = uns("D_n");
  e.data.mean_of_means = num("U");
  e.data.sigma2 = num("sigma2");
  e.data.h2 = num("h2");
  e.data.eps2 = num("eps2");
  e.data.homogeneous = ParseBool("homogeneous", get("homogeneous"));

  const std::string& sp = get("sparsifier");
  if (sp == "none") {
    e.sparsifier = SparsifierKind::kNone;
  } else if (sp == "topk") {
    e.sparsifier = SparsifierKind::kTopK;
  } else if (sp == "regtopk") {
    e.sparsifier = SparsifierKind::kRegTopK;
  } else {
    throw ConfigError("sparsifier must be none, topk or regtopk, got '" + sp + "'");
  }
  e.regtopk.mu = num("mu");
  e.regtopk.c_unselected = num("c_unselected");
  e.regtopk.y_exponent = num("y_exponent");
  e.regtopk.zero_tolerance = num("zero_tolerance");
  e.k = uns("k");
  e.eta = num("eta");
  e.iterations = uns("iterations");
  if (get("weights") != "uniform") e.weights = ParseDoubleList("weights", get("weights"));
  e.seed = uns("seed");
  const std::string& tl = get("trace_level");
  if (tl == "gap_only") {
    e.trace_level = TraceLevel::kGapOnly;
  } else if (tl == "full") {
    e.trace_level = TraceLevel::kFull;
  } else {
    throw ConfigError("trace_level must be gap_only or full, got '" + tl + "'");
  }
  s.threads = uns("threads");
  if (s.threads < 1) throw ConfigError("threads must be >= 1");

  s.sweep_sparsities = ParseDoubleList("sweep.S_values", get("sweep.S_values"));
  s.sweep_repeats = uns("sweep.repeats");

  PosteriorQuery& q = s.oracle;
  q.a_local = ParseDoubleList("oracle.a_local", get("oracle.a_local"));
  for (const auto& cell : SplitComma(get("oracle.z_known"))) {
    const auto colon = cell.find(':');
    if (colon == std::string::npos) {
      throw ConfigError("oracle.z_known entries must be index:value, got '" + cell + "'");
    }
    const auto idx = ParseUnsigned("oracle.z_known", Trim(cell.substr(0, colon)));
    q.z_known[idx] = ParseDouble("oracle.z_known", Trim(cell.substr(colon + 1)));
  }
  const std::string& fam = get("oracle.family");
  if (fam == "tanh_sech2") {
    q.model.family = InnovationFamily::kTanhSech2;
  } else if (fam == "gaussian") {
    q.model.family = InnovationFamily::kGaussian;
  } else {
    throw ConfigError("oracle.family must be tanh_sech2 or gaussian, got '" + fam + "'");
  }
  q.model.mu = num("oracle.mu");
  q.model.scale_with_gradient =
      ParseBool("oracle.scale_with_gradient", get("oracle.scale_with_gradient"));
  if (!get("oracle.p0_mean").empty()) q.model.p0_mean = num("oracle.p0_mean");
  if (!get("oracle.p0_var").empty()) q.model.p0_var = num("oracle.p0_var");
  q.omega = num("oracle.omega");
  q.k = uns("oracle.k");
  q.samples = uns("oracle.samples");
  q.seed = e.seed;

  try {
    e.Validate();
  } catch (const ParameterError& err) {
    throw ConfigError(err.what());
  }
  return s;
}

ConfigMap Canonicalize(const Settings& s) {
  const ExperimentConfig& e = s.experiment;
  const PosteriorQuery& q = s.oracle;
  ConfigMap m;
  m["problem"] = ToString(e.problem);
  m["N"] = std::to_string(e.data.num_workers);
  m["J"] = std::to_string(e.data.dim);
  m["D_n"] = std::to_string(e.data.rows_per_worker);
  m["U"] = FormatDouble(e.data.mean_of_means);
  m["sigma2"] = FormatDouble(e.data.sigma2);
  m["h2"] = FormatDouble(e.data.h2);
  m["eps2"] = FormatDouble(e.data.eps2);
  m["homogeneous"] = e.data.homogeneous ? "true" : "false";
  m["sparsifier"] = ToString(e.sparsifier);
  m["mu"] = FormatDouble(e.regtopk.mu);
  m["c_unselected"] = FormatDouble(e.regtopk.c_unselected);
  m["y_exponent"] = FormatDouble(e.regtopk.y_exponent);
  m["zero_tolerance"] = FormatDouble(e.regtopk.zero_tolerance);
  m["k"] = std::to_string(e.k);
  m["eta"] = FormatDouble(e.eta);
  m["iterations"] = std::to_string(e.iterations);
  m["weights"] = e.weights.empty() ? "uniform" : JoinDoubles(e.weights);
  m["seed"] = std::to_string(e.seed);
  m["trace_level"] = ToString(e.trace_level);
  m["threads"] = std::to_string(s.threads);
  m["sweep.S_values"] = JoinDoubles(s.sweep_sparsities);
  m["sweep.repeats"] = std::to_string(s.sweep_repeats);
  m["oracle.a_local"] = JoinDoubles(q.a_local);
  std::string z;
  for (const auto& [j, v] : q.z_known) {
    z += (z.empty() ? "" : ",") + std::to_string(j) + ":" + FormatDouble(v);
  }
  m["oracle.z_known"] = z;
  m["oracle.family"] = q.model.family == InnovationFamily::kGaussian ? "gaussian" : "tanh_sech2";
  m["oracle.mu"] = FormatDouble(q.model.mu);
  m["oracle.scale_with_gradient"] = q.model.scale_with_gradient ? "true" : "false";
  m["oracle.omega"] = FormatDouble(q.omega);
  m["oracle.k"] = std::to_string(q.k);
  m["oracle.samples"] = std::to_string(q.samples);
  m["oracle.p0_mean"] = q.model.p0_mean ? FormatDouble(*q.model.p0_mean) : "";
  m["oracle.p0_var"] = q.model.p0_var ? FormatDouble(*q.model.p0_var) : "";
  return m;
}

std::string RunId(const ConfigMap& canonical, std::uint64_t seed) {
  std::string flat;
  for (const auto& [k, v] : canonical) {
    if (k == "threads") continue;  // never changes results
    flat += k;
    flat += '=';
    flat += v;
    flat += '\n';
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(Fnv1a64(flat)));
  return "s" + std::to_string(seed) + "-" + hex;
}

}  // namespace regtopk
