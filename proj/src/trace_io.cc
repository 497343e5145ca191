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

#include "regtopk/trace_io.h"

#include <cmath>
#include <ostream>

namespace regtopk {
namespace {

std::string Cell(double v) { return std::isnan(v) ? "nan" : FormatDouble(v); }

void WriteCsvPreamble(std::ostream& out, const char* kind, const ConfigMap& canonical) {
  out << "# regtopk " << kind << " format_version=" << kTraceFormatVersion << '\n';
  out << "# config=" << ConfigJson(canonical).dump() << '\n';
}

nlohmann::json MaskSupport(const Mask& m) {
  nlohmann::json arr = nlohmann::json::array();
  for (std::size_t j : m.Support()) arr.push_back(j);
  return arr;
}

}  // namespace

nlohmann::json ConfigJson(const ConfigMap& canonical) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : canonical) j[k] = v;
  return j;
}

nlohmann::json RunMetadata(const std::string& subcommand, const ConfigMap& canonical,
                           std::uint64_t seed, const std::string& run_id) {
  nlohmann::json j;
  j["format_version"] = kTraceFormatVersion;
  j["version"] = std::string(kVersion);
  j["subcommand"] = subcommand;
  j["seed"] = seed;
  j["run_id"] = run_id;
  j["config"] = ConfigJson(canonical);
  return j;
}

void WriteTraceCsv(std::ostream& out, std::span<const RoundTrace> rounds,
                   const ConfigMap& canonical) {
  WriteCsvPreamble(out, "trace", canonical);
  out << "t,delta,loss,bytes\n";
  for (const auto& r : rounds) {
    out << r.t << ',' << Cell(r.delta) << ',' << Cell(r.loss) << ',' << Cell(r.bytes_estimate)
        << '\n';
  }
}

void WriteFullTraceJsonl(std::ostream& out, std::span<const RoundTrace> rounds,
                         const ConfigMap& canonical) {
  nlohmann::json header;
  header["type"] = "header";
  header["format_version"] = kTraceFormatVersion;
  header["config"] = ConfigJson(canonical);
  out << header.dump() << '\n';
  for (const auto& r : rounds) {
    nlohmann::json line;
    line["t"] = r.t;
    line["delta"] = r.delta;
    line["loss"] = r.loss;
    line["bytes"] = r.bytes_estimate;
    line["theta"] = r.theta;
    if (r.aggregation_target) line["aggregation_target"] = *r.aggregation_target;
    nlohmann::json workers = nlohmann::json::array();
    for (const auto& w : r.per_worker) {
      nlohmann::json idx = nlohmann::json::array();
      nlohmann::json val = nlohmann::json::array();
      for (const auto& e : w.payload.entries) {
        idx.push_back(e.index);
        val.push_back(e.value);
      }
      workers.push_back({{"indices", idx},
                         {"values", val},
                         {"mask", MaskSupport(w.mask)},
                         {"accumulated", w.accumulated}});
    }
    if (!r.per_worker.empty()) line["workers"] = workers;
    out << line.dump() << '\n';
  }
}

void WriteSweepCsv(std::ostream& out, const std::string& sparsifier,
                   std::span<const SweepRow> rows, const ConfigMap& canonical) {
  WriteCsvPreamble(out, "sweep", canonical);
  out << "sparsifier,S,k,mean_delta,repeats\n";
  for (const auto& r : rows) {
    out << sparsifier << ',' << Cell(r.sparsity) << ',' << r.k << ',' << Cell(r.mean_delta)
        << ',' << r.deltas.size() << '\n';
  }
}

void WriteToyCsv(std::ostream& out, std::span<const RoundTrace> none,
                 std::span<const RoundTrace> topk, std::span<const RoundTrace> regtopk,
                 const ConfigMap& canonical) {
  WriteCsvPreamble(out, "toy", canonical);
  out << "t,loss_none,loss_topk,loss_regtopk\n";
  for (std::size_t i = 0; i < none.size(); ++i) {
    out << none[i].t << ',' << Cell(none[i].loss) << ',' << Cell(topk[i].loss) << ','
        << Cell(regtopk[i].loss) << '\n';
  }
}

nlohmann::json OracleReportJson(const AgreementReport& report, const ConfigMap& canonical) {
  nlohmann::json j;
  j["format_version"] = kTraceFormatVersion;
  j["config"] = ConfigJson(canonical);
  j["samples"] = report.posterior.samples;
  j["posterior"] = report.posterior.probability;
  j["standard_error"] = report.posterior.standard_error;
  j["counts"] = report.posterior.counts;
  j["oracle_topk"] = MaskSupport(report.oracle_mask);
  j["regtopk_score"] = report.regtopk_score;
  j["regtopk_topk"] = MaskSupport(report.regtopk_mask);
  j["overlap"] = report.overlap;
  j["rank_correlation"] =
      report.rank_correlation ? nlohmann::json(*report.rank_correlation) : nlohmann::json();
  return j;
}

}  // namespace regtopk
