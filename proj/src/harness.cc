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

#include "regtopk/harness.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "regtopk/rng.h"

namespace regtopk {
namespace {

double Norm2Diff(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

SparsePayload DensePayload(const DenseVector& g) {
  SparsePayload p;
  p.entries.reserve(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) p.entries.push_back({j, g[j]});
  return p;
}

// Local objectives of one experiment, indexed by worker.
class Workers {
 public:
  explicit Workers(const ExperimentConfig& cfg) : problem_(cfg.problem) {
    if (problem_ == ProblemKind::kLinearRegression) {
      GenConfig gen = cfg.data;
      gen.seed = cfg.seed;
      const auto datasets = GenerateDatasets(gen);
      optimum_ = GlobalOptimum(datasets);
      objectives_.reserve(datasets.size());
      for (const auto& ds : datasets) objectives_.emplace_back(ds);
    } else {
      points_ = LogisticToy::Points();
    }
  }

  std::size_t size() const {
    return problem_ == ProblemKind::kLinearRegression ? objectives_.size() : points_.size();
  }

  DenseVector Gradient(std::size_t n, std::span<const double> theta) const {
    if (problem_ == ProblemKind::kLinearRegression) return objectives_[n].Gradient(theta);
    return LogisticGradient(theta, points_[n]);
  }

  double Loss(std::span<const double> theta, std::span<const double> weights) const {
    double total = 0.0;
    for (std::size_t n = 0; n < size(); ++n) {
      const double f = problem_ == ProblemKind::kLinearRegression
                           ? objectives_[n].Loss(theta)
                           : LogisticLoss(theta, points_[n]);
      total += weights[n] * f;
    }
    return total;
  }

  DenseVector InitialModel(std::size_t dim) const {
    if (problem_ == ProblemKind::kLogisticToy) return LogisticToy::InitialModel();
    return DenseVector(dim, 0.0);
  }

  const std::optional<DenseVector>& optimum() const { return optimum_; }

 private:
  ProblemKind problem_;
  std::vector<LinearObjective> objectives_;
  std::vector<DenseVector> points_;
  std::optional<DenseVector> optimum_;
};

}  // namespace

std::string ToString(ProblemKind kind) {
  return kind == ProblemKind::kLinearRegression ? "linear_regression" : "logistic_toy";
}

std::string ToString(SparsifierKind kind) {
  switch (kind) {
    case SparsifierKind::kNone: return "none";
    case SparsifierKind::kTopK: return "topk";
    case SparsifierKind::kRegTopK: return "regtopk";
  }
  return "?";
}

std::string ToString(TraceLevel level) {
  return level == TraceLevel::kFull ? "full" : "gap_only";
}

std::size_t ExperimentConfig::Dim() const {
  return problem == ProblemKind::kLogisticToy ? 2 : data.dim;
}

std::size_t ExperimentConfig::NumWorkers() const {
  return problem == ProblemKind::kLogisticToy ? 2 : data.num_workers;
}

std::vector<double> ExperimentConfig::ResolvedWeights() const {
  if (!weights.empty()) return weights;
  return std::vector<double>(NumWorkers(), 1.0 / static_cast<double>(NumWorkers()));
}

void ExperimentConfig::Validate() const {
  if (problem == ProblemKind::kLinearRegression) data.Validate();
  const std::size_t dim = Dim();
  if (sparsifier != SparsifierKind::kNone && (k < 1 || k > dim)) {
    throw ParameterError("k = " + std::to_string(k) + " outside [1, " + std::to_string(dim) + "]");
  }
  if (!(eta > 0.0) || !std::isfinite(eta)) throw ParameterError("eta must be > 0");
  if (sparsifier == SparsifierKind::kRegTopK) regtopk.Validate();
  if (!weights.empty()) {
    if (weights.size() != NumWorkers()) {
      throw ParameterError("weights: expected " + std::to_string(NumWorkers()) + " entries");
    }
    double sum = 0.0;
    for (double w : weights) {
      if (!(w > 0.0 && w <= 1.0)) throw ParameterError("weights must lie in (0, 1]");
      sum += w;
    }
    if (std::fabs(sum - 1.0) > 1e-12) throw ParameterError("weights must sum to 1");
  }
}

DenseVector Aggregate(std::span<const SparsePayload> payloads,
                      std::span<const double> weights, std::size_t dim) {
  if (payloads.size() != weights.size()) {
    throw InputError("aggregate: " + std::to_string(payloads.size()) + " payloads but " +
                     std::to_string(weights.size()) + " weights");
  }
  DenseVector g(dim, 0.0);
  for (std::size_t n = 0; n < payloads.size(); ++n) {
    for (const auto& e : payloads[n].entries) {
      if (e.index >= dim) {
        throw InputError("aggregate: index " + std::to_string(e.index) +
                         " out of range for dimension " + std::to_string(dim));
      }
      g[e.index] += weights[n] * e.value;
    }
  }
  return g;
}

DenseVector SgdUpdate(std::span<const double> theta, std::span<const double> g, double eta) {
  if (theta.size() != g.size()) throw InputError("sgd update: length mismatch");
  if (!(eta > 0.0)) throw ParameterError("eta must be > 0");
  DenseVector out(theta.size());
  for (std::size_t j = 0; j < theta.size(); ++j) out[j] = theta[j] - eta * g[j];
  return out;
}

double PayloadBytes(std::size_t k, std::size_t dim) {
  std::size_t index_bits = 0;
  while ((std::size_t{1} << index_bits) < dim) ++index_bits;
  return static_cast<double>(k * (64 + index_bits)) / 8.0;
}

ExperimentResult RunExperiment(const ExperimentConfig& cfg) {
  cfg.Validate();
  const Workers workers(cfg);
  const std::size_t dim = cfg.Dim();
  const std::size_t num_workers = workers.size();
  const std::vector<double> weights = cfg.ResolvedWeights();
  const bool full = cfg.trace_level == TraceLevel::kFull;
  const double bytes = cfg.sparsifier == SparsifierKind::kNone
                           ? static_cast<double>(dim) * 8.0
                           : PayloadBytes(cfg.k, dim);

  std::vector<WorkerState> states;
  states.reserve(num_workers);
  for (std::size_t n = 0; n < num_workers; ++n) {
    states.push_back(WorkerState::Initial(dim, weights[n]));
  }

  ExperimentResult result;
  result.optimum = workers.optimum();
  result.rounds.reserve(cfg.iterations + 1);

  DenseVector theta = workers.InitialModel(dim);
  std::optional<DenseVector> prev_global;
  std::vector<SparsePayload> payloads(num_workers);

  auto record = [&](std::int64_t t) -> RoundTrace& {
    RoundTrace& tr = result.rounds.emplace_back();
    tr.t = t;
    tr.theta = theta;
    tr.loss = workers.Loss(theta, weights);
    tr.delta = result.optimum ? Norm2Diff(theta, *result.optimum)
                              : std::numeric_limits<double>::quiet_NaN();
    if (!std::isfinite(tr.loss) || tr.loss > kDivergenceLoss) {
      throw DivergenceError("loss " + std::to_string(tr.loss) + " at round " +
                                std::to_string(t) + " exceeds the divergence bound",
                            std::move(result.rounds));
    }
    return tr;
  };

  for (std::size_t t = 0; t < cfg.iterations; ++t) {
    RoundTrace& tr = record(static_cast<std::int64_t>(t));
    tr.bytes_estimate = bytes;
    if (full) tr.per_worker.resize(num_workers);
    DenseVector target(full ? dim : 0, 0.0);

    for (std::size_t n = 0; n < num_workers; ++n) {
      DenseVector g = workers.Gradient(n, theta);
      if (cfg.sparsifier == SparsifierKind::kNone) {
        payloads[n] = DensePayload(g);
        if (full) {
          tr.per_worker[n] = {g, payloads[n], Mask(std::vector<bool>(dim, true))};
        }
      } else {
        StepResult step =
            cfg.sparsifier == SparsifierKind::kTopK
                ? TopKStep(states[n], g, cfg.k)
                : RegTopKStep(states[n], g,
                              prev_global ? std::optional<std::span<const double>>(*prev_global)
                                          : std::nullopt,
                              cfg.k, cfg.regtopk);
        states[n] = std::move(step.state);
        payloads[n] = std::move(step.payload);
        if (full) {
          tr.per_worker[n] = {*states[n].prev_accumulated, payloads[n], *states[n].prev_mask};
        }
      }
      if (full) {
        const DenseVector& a = tr.per_worker[n].accumulated;
        for (std::size_t j = 0; j < dim; ++j) target[j] += weights[n] * a[j];
      }
    }
    if (full) tr.aggregation_target = std::move(target);

    DenseVector global = Aggregate(payloads, weights, dim);
    theta = SgdUpdate(theta, global, cfg.eta);
    prev_global = std::move(global);
  }
  record(static_cast<std::int64_t>(cfg.iterations));
  return result;
}

std::vector<double> MaskOverlap(std::span<const RoundTrace> rounds) {
  std::vector<double> out;
  for (const auto& tr : rounds) {
    if (tr.per_worker.empty()) {
      // The terminal entry never carries worker data.
      if (&tr == &rounds.back() && !out.empty()) break;
      throw StateError("mask overlap needs a full trace (round " + std::to_string(tr.t) + ")");
    }
    const auto& w = tr.per_worker;
    if (w.size() == 1) {
      out.push_back(1.0);
      continue;
    }
    auto intersect = [](const Mask& a, const Mask& b) {
      std::size_t c = 0;
      for (std::size_t j = 0; j < a.size(); ++j) c += (a[j] && b[j]) ? 1 : 0;
      return c;
    };
    if (w.size() == 2) {
      const double k = static_cast<double>(w[0].mask.Count());
      out.push_back(static_cast<double>(intersect(w[0].mask, w[1].mask)) / k);
      continue;
    }
    double sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t a = 0; a < w.size(); ++a) {
      for (std::size_t b = a + 1; b < w.size(); ++b) {
        const std::size_t inter = intersect(w[a].mask, w[b].mask);
        const std::size_t uni = w[a].mask.Count() + w[b].mask.Count() - inter;
        sum += uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
        ++pairs;
      }
    }
    out.push_back(sum / static_cast<double>(pairs));
  }
  return out;
}

std::vector<SweepRow> SparsitySweep(const ExperimentConfig& base,
                                    std::span<const double> sparsities,
                                    std::size_t repeats, std::size_t threads) {
  if (repeats < 1) throw ParameterError("repeats must be >= 1");
  const std::size_t dim = base.Dim();

  std::vector<SweepRow> rows;
  for (double s : sparsities) {
    if (!(s > 0.0 && s <= 1.0)) throw ParameterError("sparsity must lie in (0, 1]");
    SweepRow row;
    row.sparsity = s;
    row.k = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(s * static_cast<double>(dim))));
    row.k = std::min(row.k, dim);
    row.deltas.assign(repeats, 0.0);
    rows.push_back(std::move(row));
  }

  const std::size_t jobs = rows.size() * repeats;
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(jobs);
  auto work = [&] {
    for (std::size_t job = next++; job < jobs; job = next++) {
      const std::size_t r = job / repeats;
      const std::size_t rep = job % repeats;
      ExperimentConfig cfg = base;
      cfg.k = rows[r].k;
      cfg.seed = DeriveSeed(base.seed, rep);
      cfg.trace_level = TraceLevel::kGapOnly;
      try {
        rows[r].deltas[rep] = RunExperiment(cfg).rounds.back().delta;
      } catch (...) {
        errors[job] = std::current_exception();
      }
    }
  };
  const std::size_t n_threads = std::clamp<std::size_t>(threads, 1, jobs);
  std::vector<std::thread> pool;
  for (std::size_t i = 1; i < n_threads; ++i) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  for (auto& row : rows) {
    row.mean_delta = std::accumulate(row.deltas.begin(), row.deltas.end(), 0.0) /
                     static_cast<double>(repeats);
  }
  return rows;
}

}  // namespace regtopk
