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

#include <cmath>
#include <vector>

#include "regtopk/errors.h"
#include "regtopk/harness.h"

namespace {

using regtopk::DenseVector;
using regtopk::ExperimentConfig;
using regtopk::Mask;
using regtopk::SparsePayload;
using regtopk::SparsifierKind;

ExperimentConfig SmallRegression() {
  ExperimentConfig c;
  c.data.num_workers = 3;
  c.data.dim = 6;
  c.data.rows_per_worker = 30;
  c.k = 2;
  c.iterations = 50;
  c.seed = 5;
  return c;
}

ExperimentConfig Toy(SparsifierKind kind) {
  ExperimentConfig c;
  c.problem = regtopk::ProblemKind::kLogisticToy;
  c.sparsifier = kind;
  c.k = 1;
  c.eta = 0.9;
  c.iterations = 60;
  return c;
}

SparsePayload Payload(std::vector<regtopk::SparseEntry> e) { return SparsePayload{std::move(e)}; }

}  // namespace

TEST_CASE("opposite payloads cancel in the aggregate") {
  const std::vector<SparsePayload> p = {Payload({{0, -73.6}}), Payload({{0, 73.6}})};
  const std::vector<double> w = {0.5, 0.5};
  CHECK(regtopk::Aggregate(p, w, 2) == DenseVector{0, 0});
}

TEST_CASE("disjoint supports aggregate to the weighted union") {
  const std::vector<SparsePayload> p = {Payload({{0, 2.0}}), Payload({{2, 4.0}})};
  const std::vector<double> w = {0.25, 0.75};
  CHECK(regtopk::Aggregate(p, w, 3) == DenseVector{0.5, 0, 3.0});
}

TEST_CASE("full payloads aggregate to the weighted mean") {
  const std::vector<SparsePayload> p = {Payload({{0, 1.0}, {1, 2.0}}),
                                        Payload({{0, 3.0}, {1, -2.0}})};
  const std::vector<double> w = {0.5, 0.5};
  CHECK(regtopk::Aggregate(p, w, 2) == DenseVector{2.0, 0.0});
}

TEST_CASE("aggregate validates its inputs") {
  const std::vector<SparsePayload> p = {Payload({{5, 1.0}})};
  const std::vector<double> w = {1.0};
  CHECK_THROWS_AS(regtopk::Aggregate(p, w, 2), regtopk::InputError);
  const std::vector<double> w2 = {0.5, 0.5};
  CHECK_THROWS_AS(regtopk::Aggregate(p, w2, 6), regtopk::InputError);
}

TEST_CASE("sgd update") {
  CHECK(regtopk::SgdUpdate(DenseVector{1, 2}, DenseVector{0, 0}, 0.5) == DenseVector{1, 2});
  CHECK(regtopk::SgdUpdate(DenseVector{0, 0}, DenseVector{1, 0}, 0.9) == DenseVector{-0.9, 0});
}

TEST_CASE("payload bytes") {
  CHECK(regtopk::PayloadBytes(60, 100) == 60.0 * 71.0 / 8.0);
  CHECK(regtopk::PayloadBytes(3, 4) == 3.0 * 66.0 / 8.0);
  CHECK(regtopk::PayloadBytes(1, 2) == 65.0 / 8.0);
  CHECK(regtopk::PayloadBytes(1, 1) == 8.0);
}

TEST_CASE("trace layout") {
  ExperimentConfig c = SmallRegression();
  const auto r = regtopk::RunExperiment(c);
  REQUIRE(r.rounds.size() == c.iterations + 1);
  REQUIRE(r.optimum);
  for (std::size_t t = 0; t < r.rounds.size(); ++t) CHECK(r.rounds[t].t == static_cast<long>(t));
  CHECK(r.rounds.front().bytes_estimate == regtopk::PayloadBytes(2, 6));
  CHECK(r.rounds.back().bytes_estimate == 0.0);
  CHECK(r.rounds.front().theta == DenseVector(6, 0.0));
  CHECK(r.rounds.front().per_worker.empty());
  c.sparsifier = SparsifierKind::kNone;
  CHECK(regtopk::RunExperiment(c).rounds.front().bytes_estimate == 48.0);
}

TEST_CASE("k = J matches the dense pipeline bit for bit") {
  for (auto problem : {regtopk::ProblemKind::kLinearRegression, regtopk::ProblemKind::kLogisticToy}) {
    ExperimentConfig c = problem == regtopk::ProblemKind::kLogisticToy ? Toy(SparsifierKind::kNone)
                                                                        : SmallRegression();
    c.k = c.Dim();
    c.sparsifier = SparsifierKind::kNone;
    const auto dense = regtopk::RunExperiment(c);
    for (auto kind : {SparsifierKind::kTopK, SparsifierKind::kRegTopK}) {
      c.sparsifier = kind;
      const auto sparse = regtopk::RunExperiment(c);
      REQUIRE(sparse.rounds.size() == dense.rounds.size());
      for (std::size_t t = 0; t < dense.rounds.size(); ++t) {
        CHECK(sparse.rounds[t].theta == dense.rounds[t].theta);
      }
    }
  }
}

TEST_CASE("full trace bookkeeping") {
  ExperimentConfig c = SmallRegression();
  c.sparsifier = SparsifierKind::kRegTopK;
  c.trace_level = regtopk::TraceLevel::kFull;
  const auto r = regtopk::RunExperiment(c);
  const auto w = c.ResolvedWeights();
  for (std::size_t t = 0; t + 1 < r.rounds.size(); ++t) {
    const auto& tr = r.rounds[t];
    REQUIRE(tr.per_worker.size() == 3);
    REQUIRE(tr.aggregation_target);
    std::vector<SparsePayload> payloads;
    DenseVector target(6, 0.0);
    for (std::size_t n = 0; n < 3; ++n) {
      const auto& wt = tr.per_worker[n];
      CHECK(wt.payload.size() == c.k);
      CHECK(wt.mask.Count() == c.k);
      const DenseVector sent = wt.payload.ToDense(6);
      for (std::size_t j = 0; j < 6; ++j) {
        CHECK(sent[j] == (wt.mask[j] ? wt.accumulated[j] : 0.0));
        target[j] += w[n] * wt.accumulated[j];
      }
      payloads.push_back(wt.payload);
    }
    CHECK(target == *tr.aggregation_target);
    const DenseVector g = regtopk::Aggregate(payloads, w, 6);
    CHECK(regtopk::SgdUpdate(tr.theta, g, c.eta) == r.rounds[t + 1].theta);
  }
}

TEST_CASE("without drops the aggregate equals the aggregation target") {
  ExperimentConfig c = SmallRegression();
  c.sparsifier = SparsifierKind::kTopK;
  c.k = 6;
  c.trace_level = regtopk::TraceLevel::kFull;
  const auto r = regtopk::RunExperiment(c);
  for (std::size_t t = 0; t + 1 < r.rounds.size(); ++t) {
    const auto& tr = r.rounds[t];
    const DenseVector next =
        regtopk::SgdUpdate(tr.theta, *tr.aggregation_target, c.eta);
    CHECK(next == r.rounds[t + 1].theta);
  }
}

TEST_CASE("dense gradient descent shrinks the gap monotonically") {
  ExperimentConfig c = SmallRegression();
  c.sparsifier = SparsifierKind::kNone;
  c.iterations = 300;
  const auto r = regtopk::RunExperiment(c);
  for (std::size_t t = 1; t < r.rounds.size(); ++t) {
    CHECK(r.rounds[t].delta < r.rounds[t - 1].delta);
  }
}

TEST_CASE("top-1 stalls on the logistic toy while regtop-1 moves") {
  const auto topk = regtopk::RunExperiment(Toy(SparsifierKind::kTopK));
  for (std::size_t t = 0; t <= 50; ++t) {
    CHECK(topk.rounds[t].theta == regtopk::LogisticToy::InitialModel());
  }
  CHECK(std::isnan(topk.rounds[0].delta));
  const auto reg = regtopk::RunExperiment(Toy(SparsifierKind::kRegTopK));
  CHECK(reg.rounds[2].theta != regtopk::LogisticToy::InitialModel());
  CHECK(reg.rounds[50].loss < topk.rounds[50].loss);
}

TEST_CASE("mask overlap") {
  auto round_with = [](std::vector<std::vector<bool>> masks) {
    regtopk::RoundTrace tr;
    for (auto& m : masks) tr.per_worker.push_back({{}, {}, Mask(m)});
    return tr;
  };
  const std::vector<regtopk::RoundTrace> same = {round_with({{true, false}, {true, false}})};
  CHECK(regtopk::MaskOverlap(same) == std::vector<double>{1.0});
  const std::vector<regtopk::RoundTrace> disjoint = {round_with({{true, false}, {false, true}})};
  CHECK(regtopk::MaskOverlap(disjoint) == std::vector<double>{0.0});
  const std::vector<regtopk::RoundTrace> three = {
      round_with({{true, true, false}, {true, true, false}, {false, true, true}})};
  // Jaccard: 1, 1/3, 1/3.
  CHECK(regtopk::MaskOverlap(three)[0] == doctest::Approx(5.0 / 9.0));

  ExperimentConfig c = SmallRegression();
  CHECK_THROWS_AS(regtopk::MaskOverlap(regtopk::RunExperiment(c).rounds), regtopk::StateError);
  c.trace_level = regtopk::TraceLevel::kFull;
  CHECK(regtopk::MaskOverlap(regtopk::RunExperiment(c).rounds).size() == c.iterations);
}

TEST_CASE("divergence raises with the partial trace") {
  ExperimentConfig c = SmallRegression();
  c.sparsifier = SparsifierKind::kNone;
  c.eta = 5.0;
  c.iterations = 500;
  try {
    regtopk::RunExperiment(c);
    FAIL("expected divergence");
  } catch (const regtopk::DivergenceError& e) {
    CHECK_FALSE(e.partial().empty());
    CHECK(e.partial().size() < 500);
  }
}

TEST_CASE("config validation") {
  ExperimentConfig c = SmallRegression();
  c.k = 7;
  CHECK_THROWS_AS(regtopk::RunExperiment(c), regtopk::ParameterError);
  c = SmallRegression();
  c.weights = {0.5, 0.5, 0.5};
  CHECK_THROWS_AS(c.Validate(), regtopk::ParameterError);
  c.weights = {0.5, 0.5};
  CHECK_THROWS_AS(c.Validate(), regtopk::ParameterError);
  c = SmallRegression();
  c.eta = 0.0;
  CHECK_THROWS_AS(c.Validate(), regtopk::ParameterError);
  c = SmallRegression();
  c.sparsifier = SparsifierKind::kNone;
  c.k = 0;
  CHECK_NOTHROW(c.Validate());
}

TEST_CASE("non-uniform weights") {
  ExperimentConfig c = SmallRegression();
  c.weights = {0.5, 0.25, 0.25};
  c.sparsifier = SparsifierKind::kNone;
  c.iterations = 2000;
  const auto r = regtopk::RunExperiment(c);
  // The weighted objective has a different minimiser, so the gap to the
  // uniform optimum settles at a positive value.
  CHECK(r.rounds.back().delta > 1e-6);
  CHECK(std::isfinite(r.rounds.back().loss));
}

TEST_CASE("sweep is deterministic and independent of the thread count") {
  ExperimentConfig c = SmallRegression();
  c.sparsifier = SparsifierKind::kTopK;
  const std::vector<double> s = {0.1, 0.5, 1.0};
  const auto a = regtopk::SparsitySweep(c, s, 3, 1);
  const auto b = regtopk::SparsitySweep(c, s, 3, 4);
  REQUIRE(a.size() == 3);
  CHECK(a[0].k == 1);
  CHECK(a[1].k == 3);
  CHECK(a[2].k == 6);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].deltas == b[i].deltas);
    CHECK(a[i].mean_delta == b[i].mean_delta);
  }
  // S = 1 reproduces the dense baseline.
  c.sparsifier = SparsifierKind::kNone;
  const auto dense = regtopk::SparsitySweep(c, std::vector<double>{1.0}, 3, 2);
  CHECK(dense[0].deltas == a[2].deltas);
  CHECK_THROWS_AS(regtopk::SparsitySweep(c, std::vector<double>{0.0}, 1), regtopk::ParameterError);
  CHECK_THROWS_AS(regtopk::SparsitySweep(c, s, 0), regtopk::ParameterError);
}
