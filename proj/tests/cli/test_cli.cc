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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "regtopk/problems.h"

namespace fs = std::filesystem;

namespace {

struct Result {
  int status = -1;
  std::string out;  // stdout, trailing newline removed
  std::string err;
};

fs::path Scratch(const std::string& name) {
  const fs::path p = fs::path(REGTOPK_TEST_TMP) / "cli" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Result Cli(const std::string& args, const fs::path& scratch) {
  const fs::path err = scratch / "stderr.txt";
  const std::string cmd =
      std::string("\"") + REGTOPK_CLI + "\" " + args + " 2>\"" + err.string() + "\"";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  for (std::size_t n; (n = std::fread(buf, 1, sizeof(buf), pipe)) > 0;) r.out.append(buf, n);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  while (!r.out.empty() && r.out.back() == '\n') r.out.pop_back();
  r.err = Slurp(err);
  return r;
}

std::vector<std::vector<std::string>> CsvRows(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(Slurp(p));
  for (std::string line; std::getline(in, line);) {
    if (line.starts_with("#")) continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

const std::string kSmall = "N=2 J=4 D_n=20 k=3 iterations=40";

}  // namespace

TEST_CASE("run twice with the same seed gives byte-identical traces") {
  const fs::path s = Scratch("determinism");
  const auto a = Cli("run --out \"" + (s / "a").string() + "\" sparsifier=none " + kSmall, s);
  const auto b = Cli("run --out \"" + (s / "b").string() + "\" sparsifier=none " + kSmall, s);
  REQUIRE(a.status == 0);
  REQUIRE(b.status == 0);
  CHECK(fs::path(a.out).filename() == fs::path(b.out).filename());
  CHECK(Slurp(fs::path(a.out) / "trace.csv") == Slurp(fs::path(b.out) / "trace.csv"));
  CHECK(Slurp(fs::path(a.out) / "config.json") == Slurp(fs::path(b.out) / "config.json"));
}

TEST_CASE("re-running from an embedded config reproduces the artifacts") {
  const fs::path s = Scratch("rerun");
  const auto first =
      Cli("run --out \"" + (s / "a").string() + "\" trace_level=full sparsifier=regtopk " + kSmall, s);
  REQUIRE(first.status == 0);
  const fs::path dir(first.out);
  for (const char* source : {"config.json", "trace.csv"}) {
    const auto again = Cli("run --out \"" + (s / source).string() + "\" --config \"" +
                               (dir / source).string() + "\"",
                           s);
    REQUIRE(again.status == 0);
    CHECK(Slurp(fs::path(again.out) / "trace.csv") == Slurp(dir / "trace.csv"));
    CHECK(Slurp(fs::path(again.out) / "full_trace.jsonl") == Slurp(dir / "full_trace.jsonl"));
    CHECK(Slurp(fs::path(again.out) / "config.json") == Slurp(dir / "config.json"));
  }
}

TEST_CASE("config.json carries the resolved config, version and seed") {
  const fs::path s = Scratch("metadata");
  const auto r = Cli("run --out \"" + s.string() + "\" --seed 7 " + kSmall, s);
  REQUIRE(r.status == 0);
  const auto j = nlohmann::json::parse(Slurp(fs::path(r.out) / "config.json"));
  CHECK(j["seed"] == 7);
  CHECK(j["config"]["seed"] == "7");
  CHECK(j["config"]["N"] == "2");
  CHECK(j["version"].is_string());
  CHECK(j["run_id"] == fs::path(r.out).filename().string());
  CHECK(fs::path(r.out).filename().string().starts_with("s7-"));
}

TEST_CASE("flag and file precedence") {
  const fs::path s = Scratch("precedence");
  {
    std::ofstream(s / "exp.cfg") << "# experiment\nk = 2\niterations = 5\nN = 2\nJ = 4\nD_n = 20\n";
  }
  const auto r = Cli("run --out \"" + s.string() + "\" --config \"" + (s / "exp.cfg").string() +
                         "\" k=1 seed=3 --seed 4",
                     s);
  REQUIRE(r.status == 0);
  const auto j = nlohmann::json::parse(Slurp(fs::path(r.out) / "config.json"));
  CHECK(j["config"]["k"] == "1");
  CHECK(j["config"]["iterations"] == "5");
  CHECK(j["seed"] == 4);
}

TEST_CASE("unknown keys are usage errors listing the valid keys") {
  const fs::path s = Scratch("unknown");
  const auto r = Cli("run --out \"" + s.string() + "\" learning_rate=0.1", s);
  CHECK(r.status == 2);
  CHECK(r.out.empty());
  CHECK(r.err.starts_with("error\tconfig\t"));
  CHECK(r.err.find("learning_rate") != std::string::npos);
  CHECK(r.err.find("sparsifier") != std::string::npos);
  CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);
}

TEST_CASE("bad usage exits 2") {
  const fs::path s = Scratch("usage");
  CHECK(Cli("train", s).status == 2);
  CHECK(Cli("", s).status == 2);
  CHECK(Cli("run k=0", s).status == 2);
  CHECK(Cli("run --config /nonexistent/file.cfg", s).status == 2);
  CHECK(Cli("run --bogus", s).status == 2);
}

TEST_CASE("divergence exits 3 and keeps the partial trace") {
  const fs::path s = Scratch("divergence");
  const auto r = Cli("run --out \"" + s.string() + "\" sparsifier=none eta=10 N=2 J=4 D_n=20", s);
  CHECK(r.status == 3);
  CHECK(r.err.starts_with("error\tdivergence\t"));
  const auto rows = CsvRows(fs::path(r.out) / "trace.csv");
  CHECK(rows.size() > 1);
  CHECK(rows.size() < 2501);
}

TEST_CASE("toy writes the loss table") {
  const fs::path s = Scratch("toy");
  const auto r = Cli("toy --out \"" + s.string() + "\"", s);
  REQUIRE(r.status == 0);
  const auto rows = CsvRows(fs::path(r.out) / "toy.csv");
  REQUIRE(rows.size() == 102);
  CHECK(rows[0] == std::vector<std::string>{"t", "loss_none", "loss_topk", "loss_regtopk"});
  for (std::size_t i = 1; i <= 50; ++i) CHECK(rows[i][2] == rows[1][2]);
  CHECK(std::stod(rows[21][3]) < std::stod(rows[21][2]));
}

TEST_CASE("gen-data writes one readable dataset per worker") {
  const fs::path s = Scratch("gendata");
  const auto r = Cli("gen-data --out \"" + s.string() + "\" N=3 J=5 D_n=7 k=2 seed=11", s);
  REQUIRE(r.status == 0);
  regtopk::GenConfig g;
  g.num_workers = 3;
  g.dim = 5;
  g.rows_per_worker = 7;
  g.seed = 11;
  const auto expected = regtopk::GenerateDatasets(g);
  for (std::size_t n = 0; n < 3; ++n) {
    std::ifstream in(fs::path(r.out) / ("worker_00" + std::to_string(n) + ".csv"));
    REQUIRE(in);
    const auto ds = regtopk::ReadDatasetCsv(in);
    CHECK(ds.x == expected[n].x);
    CHECK(ds.y == expected[n].y);
  }
  CHECK(fs::exists(fs::path(r.out) / "config.json"));
}

TEST_CASE("sweep writes the sparsity table") {
  const fs::path s = Scratch("sweep");
  const auto r = Cli("sweep --out \"" + s.string() + "\" " + kSmall +
                         " sweep.S_values=0.25,1 sweep.repeats=2 threads=2 sparsifier=topk",
                     s);
  REQUIRE(r.status == 0);
  const auto rows = CsvRows(fs::path(r.out) / "sweep.csv");
  REQUIRE(rows.size() == 3);
  CHECK(rows[1][0] == "topk");
  CHECK(rows[1][1] == "0.25");
  CHECK(rows[1][2] == "1");
  CHECK(rows[2][2] == "4");
  CHECK(rows[2][4] == "2");
}

TEST_CASE("oracle writes a json report") {
  const fs::path s = Scratch("oracle");
  const auto r = Cli("oracle --out \"" + s.string() + "\" oracle.samples=5000", s);
  REQUIRE(r.status == 0);
  const auto j = nlohmann::json::parse(Slurp(fs::path(r.out) / "oracle.json"));
  CHECK(j["posterior"].size() == 4);
  CHECK(j["standard_error"].size() == 4);
  CHECK(j["overlap"].get<double>() == 1.0);
  double total = 0.0;
  for (const auto& p : j["posterior"]) total += p.get<double>();
  CHECK(total == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("help and version exit 0") {
  const fs::path s = Scratch("help");
  const auto h = Cli("--help", s);
  CHECK(h.status == 0);
  CHECK(h.out.find("--config") != std::string::npos);
  const auto v = Cli("--version", s);
  CHECK(v.status == 0);
  CHECK(v.out.starts_with("regtopk "));
}
