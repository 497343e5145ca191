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

// regtopk: run sparsified distributed SGD experiments and write trace artifacts.
//
//   regtopk <gen-data|run|sweep|toy|oracle> [--config FILE] [--out DIR]
//           [--seed N] [key=value ...]
//
// Exit status: 0 success, 1 other failure, 2 usage or config error,
// 3 numeric divergence. Failures print one tab-separated line to stderr:
//   error<TAB><kind><TAB><message>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "regtopk/config.h"
#include "regtopk/errors.h"
#include "regtopk/harness.h"
#include "regtopk/problems.h"
#include "regtopk/trace_io.h"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitUsage = 2;
constexpr int kExitDivergence = 3;

int Fail(int code, const std::string& kind, std::string message) {
  for (char& c : message) {
    if (c == '\n' || c == '\r' || c == '\t') c = ' ';
  }
  std::cerr << "error\t" << kind << '\t' << message << '\n';
  return code;
}

std::ofstream OpenOut(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

void WriteJson(const fs::path& path, const nlohmann::json& j) {
  auto out = OpenOut(path);
  out << j.dump(2) << '\n';
}

struct RunContext {
  regtopk::Subcommand cmd;
  regtopk::Settings settings;
  regtopk::ConfigMap canonical;
  fs::path dir;
};

void GenData(const RunContext& ctx) {
  const auto& e = ctx.settings.experiment;
  regtopk::GenConfig g = e.data;
  g.seed = e.seed;
  const auto datasets = regtopk::GenerateDatasets(g);
  for (std::size_t n = 0; n < datasets.size(); ++n) {
    char name[32];
    std::snprintf(name, sizeof(name), "worker_%03zu.csv", n);
    auto out = OpenOut(ctx.dir / name);
    regtopk::WriteDatasetCsv(out, datasets[n]);
  }
}

int Run(const RunContext& ctx) {
  const auto& e = ctx.settings.experiment;
  std::vector<regtopk::RoundTrace> rounds;
  int code = kExitOk;
  std::string failure;
  try {
    rounds = regtopk::RunExperiment(e).rounds;
  } catch (const regtopk::DivergenceError& err) {
    rounds = err.partial();
    code = kExitDivergence;
    failure = err.what();
  }
  {
    auto out = OpenOut(ctx.dir / "trace.csv");
    regtopk::WriteTraceCsv(out, rounds, ctx.canonical);
  }
  if (e.trace_level == regtopk::TraceLevel::kFull) {
    auto out = OpenOut(ctx.dir / "full_trace.jsonl");
    regtopk::WriteFullTraceJsonl(out, rounds, ctx.canonical);
  }
  if (code != kExitOk) return Fail(code, "divergence", failure);
  return kExitOk;
}

void Sweep(const RunContext& ctx) {
  const auto& s = ctx.settings;
  const auto rows =
      regtopk::SparsitySweep(s.experiment, s.sweep_sparsities, s.sweep_repeats, s.threads);
  auto out = OpenOut(ctx.dir / "sweep.csv");
  regtopk::WriteSweepCsv(out, regtopk::ToString(s.experiment.sparsifier), rows, ctx.canonical);
}

void Toy(const RunContext& ctx) {
  regtopk::ExperimentConfig e = ctx.settings.experiment;
  auto run = [&](regtopk::SparsifierKind kind) {
    e.sparsifier = kind;
    return regtopk::RunExperiment(e).rounds;
  };
  const auto none = run(regtopk::SparsifierKind::kNone);
  const auto topk = run(regtopk::SparsifierKind::kTopK);
  const auto reg = run(regtopk::SparsifierKind::kRegTopK);
  auto out = OpenOut(ctx.dir / "toy.csv");
  regtopk::WriteToyCsv(out, none, topk, reg, ctx.canonical);
}

void Oracle(const RunContext& ctx) {
  const auto& s = ctx.settings;
  const auto report = regtopk::RankingAgreement(s.oracle, s.experiment.regtopk, s.threads);
  WriteJson(ctx.dir / "oracle.json", regtopk::OracleReportJson(report, ctx.canonical));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparsified distributed SGD simulator (Top-k and RegTop-k)", "regtopk"};
  std::string subcommand;
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
  app.add_option("subcommand", subcommand, "gen-data | run | sweep | toy | oracle")->required();
  app.add_option("overrides", overrides, "key=value config overrides");
  app.add_option("--config", config_path, "flat key=value file, config.json or CSV artifact");
  app.add_option("--out", out_dir, "output directory (default: out)");
  app.add_option("--seed", seed, "overrides the seed key");
  app.set_version_flag("--version", "regtopk " + std::string(regtopk::kVersion));

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return Fail(kExitUsage, "usage", e.what());
  }

  RunContext ctx;
  try {
    ctx.cmd = regtopk::ParseSubcommand(subcommand);
    regtopk::ConfigMap map = regtopk::DefaultConfig(ctx.cmd);
    if (!config_path.empty()) regtopk::Merge(map, regtopk::ParseConfigFile(config_path));
    regtopk::Merge(map, regtopk::ParseOverrides(overrides));
    if (seed) map["seed"] = std::to_string(*seed);
    ctx.settings = regtopk::Resolve(map);
    const auto problem = ctx.settings.experiment.problem;
    if (ctx.cmd == regtopk::Subcommand::kGenData &&
        problem != regtopk::ProblemKind::kLinearRegression) {
      throw regtopk::ConfigError("gen-data requires problem=linear_regression");
    }
    if (ctx.cmd == regtopk::Subcommand::kToy && problem != regtopk::ProblemKind::kLogisticToy) {
      throw regtopk::ConfigError("toy requires problem=logistic_toy");
    }
    ctx.canonical = regtopk::Canonicalize(ctx.settings);
  } catch (const regtopk::ParameterError& e) {
    return Fail(kExitUsage, "config", e.what());
  } catch (const regtopk::InputError& e) {
    return Fail(kExitUsage, "config", e.what());
  }

  try {
    const std::uint64_t run_seed = ctx.settings.experiment.seed;
    const std::string run_id = regtopk::RunId(ctx.canonical, run_seed);
    ctx.dir = fs::path(out_dir) / run_id;
    fs::create_directories(ctx.dir);
    WriteJson(ctx.dir / "config.json",
              regtopk::RunMetadata(regtopk::ToString(ctx.cmd), ctx.canonical, run_seed, run_id));
    int code = kExitOk;
    switch (ctx.cmd) {
      case regtopk::Subcommand::kGenData: GenData(ctx); break;
      case regtopk::Subcommand::kRun: code = Run(ctx); break;
      case regtopk::Subcommand::kSweep: Sweep(ctx); break;
      case regtopk::Subcommand::kToy: Toy(ctx); break;
      case regtopk::Subcommand::kOracle: Oracle(ctx); break;
    }
    std::cout << ctx.dir.string() << '\n';
    return code;
  } catch (const regtopk::DivergenceError& e) {
    return Fail(kExitDivergence, "divergence", e.what());
  } catch (const regtopk::ParameterError& e) {
    return Fail(kExitUsage, "config", e.what());
  } catch (const regtopk::NumericalError& e) {
    return Fail(kExitOther, "numerical", e.what());
  } catch (const std::exception& e) {
    return Fail(kExitOther, "runtime", e.what());
  }
}
