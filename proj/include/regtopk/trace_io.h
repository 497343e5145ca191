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

#ifndef REGTOPK_TRACE_IO_H_
#define REGTOPK_TRACE_IO_H_

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "regtopk/bayes_oracle.h"
#include "regtopk/config.h"
#include "regtopk/harness.h"

namespace regtopk {

// Every artifact starts with the resolved config so it can be reproduced.
// CSV files carry it on '#' comment lines ahead of the column header.

nlohmann::json ConfigJson(const ConfigMap& canonical);

// {"format_version", "version", "subcommand", "seed", "run_id", "config"}
nlohmann::json RunMetadata(const std::string& subcommand, const ConfigMap& canonical,
                           std::uint64_t seed, const std::string& run_id);

// Columns: t,delta,loss,bytes
void WriteTraceCsv(std::ostream& out, std::span<const RoundTrace> rounds,
                   const ConfigMap& canonical);

// Line 1 is a header object; then one object per round with per-worker
// payloads as parallel index/value arrays.
void WriteFullTraceJsonl(std::ostream& out, std::span<const RoundTrace> rounds,
                         const ConfigMap& canonical);

// Columns: sparsifier,S,k,mean_delta,repeats
void WriteSweepCsv(std::ostream& out, const std::string& sparsifier,
                   std::span<const SweepRow> rows, const ConfigMap& canonical);

// Columns: t,loss_none,loss_topk,loss_regtopk
void WriteToyCsv(std::ostream& out, std::span<const RoundTrace> none,
                 std::span<const RoundTrace> topk, std::span<const RoundTrace> regtopk,
                 const ConfigMap& canonical);

nlohmann::json OracleReportJson(const AgreementReport& report, const ConfigMap& canonical);

}  // namespace regtopk

#endif  // REGTOPK_TRACE_IO_H_
