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

#ifndef REGTOPK_BAYES_ORACLE_H_
#define REGTOPK_BAYES_ORACLE_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "regtopk/sparsify.h"

namespace regtopk {

// Monte Carlo estimate of the exact top-k posterior on tiny instances.
//
// The network aggregate is modelled as a_j = omega * a_local_j + z_j + xi_j,
// where z_j is the (known or p0-distributed) contribution of the other
// workers and xi_j is the round-to-round innovation. P_j is the probability
// that a_j lands among the k largest magnitudes, i.e. the mass of the
// feasible region F_j^k under that model.

enum class InnovationFamily { kTanhSech2, kGaussian };

struct InnovationModel {
  InnovationFamily family = InnovationFamily::kTanhSech2;
  // Scale. tanh_sech2: p(xi) = (1 / 2mu)(1 - tanh^2(xi / mu)); gaussian: sd = mu.
  double mu = 0.5;
  // Standard deviation proportional to max(|a_local_j|, kScaleFloor).
  bool scale_with_gradient = true;
  // Prior p0 of unknown z entries. Unset fields fall back to mean 0 and the
  // empirical variance of the known entries (1 when that is unavailable).
  std::optional<double> p0_mean;
  std::optional<double> p0_var;

  static constexpr double kScaleFloor = 1e-6;

  void Validate() const;
  // Density of the unscaled innovation.
  double Density(double xi) const;
};

// Partial map index -> known z_j.
using KnownEntries = std::map<std::size_t, double>;

// True iff |a_j| is among the k largest magnitudes (ties to the lower index).
bool FeasibleIndicator(std::span<const double> a, std::size_t j, std::size_t k);

struct PosteriorEstimate {
  std::vector<std::uint64_t> counts;   // samples in which j was feasible
  std::uint64_t samples = 0;
  std::vector<double> probability;     // counts / samples
  std::vector<double> standard_error;  // sqrt(P (1 - P) / samples)

  // Exactly k: every sample contributes k feasible indices.
  double Total() const;
};

struct PosteriorQuery {
  DenseVector a_local;
  KnownEntries z_known;
  InnovationModel model;
  double omega = 0.5;
  std::size_t k = 1;
  std::uint64_t samples = 10000;
  std::uint64_t seed = 1;
};

// Samples are drawn in fixed-size batches with per-batch substreams, so the
// estimate is identical for any `threads`.
PosteriorEstimate McPosterior(const PosteriorQuery& query, std::size_t threads = 1);

struct AgreementReport {
  PosteriorEstimate posterior;
  Mask oracle_mask;        // top-k of the posterior estimate
  DenseVector regtopk_score;
  Mask regtopk_mask;       // top-k of the RegTop-k score
  double overlap = 0.0;    // |oracle ∩ regtopk| / k
  // Spearman correlation of P_j and |score_j| over entries with known z;
  // absent when fewer than two such entries exist.
  std::optional<double> rank_correlation;
};

// Compares the oracle's top-k with RegTop-k's on the same inputs. Known z_j
// plays the role of the previous aggregate of the other workers, giving
// distortion z_j / (omega a_j); unknown entries are uninformative.
AgreementReport RankingAgreement(const PosteriorQuery& query, const RegTopKParams& params,
                                 std::size_t threads = 1);

}  // namespace regtopk

#endif  // REGTOPK_BAYES_ORACLE_H_
