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

#ifndef REGTOPK_CONFIG_H_
#define REGTOPK_CONFIG_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "regtopk/bayes_oracle.h"
#include "regtopk/harness.h"

namespace regtopk {

inline constexpr std::string_view kVersion = "1.0.0";
// Bumped whenever a CSV/JSONL column layout changes.
inline constexpr int kTraceFormatVersion = 1;

// Flat key -> value view of every setting. Keys are listed in README.md.
using ConfigMap = std::map<std::string, std::string>;

// Bad key or value in a config file or override. Maps to a usage error.
class ConfigError : public ParameterError {
 public:
  using ParameterError::ParameterError;
};

struct Settings {
  ExperimentConfig experiment;
  std::vector<double> sweep_sparsities;
  std::size_t sweep_repeats = 10;
  std::size_t threads = 1;
  PosteriorQuery oracle;
};

enum class Subcommand { kGenData, kRun, kSweep, kToy, kOracle };

Subcommand ParseSubcommand(std::string_view name);
std::string ToString(Subcommand cmd);

// Defaults as strings; `toy` starts from the logistic example (k=1, eta=0.9).
ConfigMap DefaultConfig(Subcommand cmd);

std::vector<std::string> ValidKeys();

// "key = value" lines; blank lines and '#' comments are skipped.
ConfigMap ParseConfigText(std::string_view text);
// The flat text format, a JSON object (a config.json written by a previous
// run, whose "config" member is used), or a CSV artifact with its preamble.
ConfigMap ParseConfigFile(const std::string& path);
// "key=value" tokens from the command line.
ConfigMap ParseOverrides(const std::vector<std::string>& tokens);

// Copies `layer` over `base`; unknown keys raise ConfigError listing the valid ones.
void Merge(ConfigMap& base, const ConfigMap& layer);

Settings Resolve(const ConfigMap& map);
// Canonical string form of resolved settings (shortest round-trip numbers).
ConfigMap Canonicalize(const Settings& settings);

// "s<seed>-<16 hex digits of FNV-1a over the canonical config>"
std::string RunId(const ConfigMap& canonical, std::uint64_t seed);

std::string FormatDouble(double v);

}  // namespace regtopk

#endif  // REGTOPK_CONFIG_H_
