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

#ifndef REGTOPK_HARNESS_H_
#define REGTOPK_HARNESS_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "regtopk/errors.h"
#include "regtopk/problems.h"
#include "regtopk/sparsify.h"

namespace regtopk {

enum class ProblemKind { kLinearRegression, kLogisticToy };
enum class SparsifierKind { kNone, kTopK, kRegTopK };
enum class TraceLevel { kGapOnly, kFull };

std::string ToString(ProblemKind kind);
std::string ToString(SparsifierKind kind);
std::string ToString(TraceLevel level);

struct ExperimentConfig {
  ProblemKind problem = ProblemKind::kLinearRegression;
  GenConfig data;                      // used for linear regression only
  SparsifierKind sparsifier = SparsifierKind::kTopK;
  RegTopKParams regtopk;
  std::size_t k = 60;                  // entries kept per worker
  double eta = 0.01;
  std::size_t iterations = 2500;
  std::vector<double> weights;         // empty means uniform 1/N
  std::uint64_t seed = 1;              // drives data generation
  TraceLevel trace_level = TraceLevel::kGapOnly;

  std::size_t Dim() const;
  std::size_t NumWorkers() const;
  std::vector<double> ResolvedWeights() const;
  double SparsityFactor() const { return static_cast<double>(k) / static_cast<double>(Dim()); }
  // Throws ParameterError on any violated invariant.
  void Validate() const;
};

struct WorkerRoundTrace {
  DenseVector accumulated;
  SparsePayload payload;
  Mask mask;
};

// Entry t describes model theta^t and, for t < T, the round executed from it.
struct RoundTrace {
  std::int64_t t = 0;
  double delta = 0.0;           // ||theta^t - theta*||; NaN for the logistic toy
  double loss = 0.0;            // global loss at theta^t
  double bytes_estimate = 0.0;  // per worker for round t; 0 on the terminal entry
  DenseVector theta;
  std::vector<WorkerRoundTrace> per_worker;           // trace_level = full
  std::optional<DenseVector> aggregation_target;      // trace_level = full
};

struct ExperimentResult {
  std::vector<RoundTrace> rounds;       // T + 1 entries
  std::optional<DenseVector> optimum;   // regression only
};

// Thrown when the loss becomes non-finite or exceeds the divergence bound.
// Carries the trace recorded up to the failure.
class DivergenceError : public NumericalError {
 public:
  DivergenceError(const std::string& what, std::vector<RoundTrace> partial)
      : NumericalError(what), partial_(std::move(partial)) {}
  const std::vector<RoundTrace>& partial() const { return partial_; }

 private:
  std::vector<RoundTrace> partial_;
};

inline constexpr double kDivergenceLoss = 1e12;

// sum_n w_n * dense(payload_n), accumulated in worker order.
DenseVector Aggregate(std::span<const SparsePayload> payloads,
                      std::span<const double> weights, std::size_t dim);

// theta - eta * g
DenseVector SgdUpdate(std::span<const double> theta, std::span<const double> g, double eta);

// Bits per worker per round: k (64 + ceil(log2 J)), reported in bytes.
double PayloadBytes(std::size_t k, std::size_t dim);

ExperimentResult RunExperiment(const ExperimentConfig& cfg);

// Per-round agreement of the workers' masks: |intersection| / k for two
// workers, mean pairwise Jaccard index for more. Needs a full trace.
std::vector<double> MaskOverlap(std::span<const RoundTrace> rounds);

struct SweepRow {
  double sparsity = 0.0;
  std::size_t k = 0;
  double mean_delta = 0.0;
  std::vector<double> deltas;  // final gap of each repeat
};

// For each S: k = max(1, round(S J)); runs `repeats` seeds derived from
// base.seed and averages delta^T. Repeats run on up to `threads` threads;
// the table does not depend on the thread count.
std::vector<SweepRow> SparsitySweep(const ExperimentConfig& base,
                                    std::span<const double> sparsities,
                                    std::size_t repeats, std::size_t threads = 1);

}  // namespace regtopk

#endif  // REGTOPK_HARNESS_H_
