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

#include "regtopk/bayes_oracle.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>
#include <thread>

#include "regtopk/errors.h"
#include "regtopk/rng.h"

namespace regtopk {
namespace {

constexpr std::uint64_t kBatch = 4096;

struct ResolvedPrior {
  double mean;
  double sd;
};

ResolvedPrior ResolvePrior(const PosteriorQuery& q) {
  double var = 1.0;
  if (q.z_known.size() >= 2) {
    double mean = 0.0;
    for (const auto& [j, z] : q.z_known) mean += z;
    mean /= static_cast<double>(q.z_known.size());
    double ss = 0.0;
    for (const auto& [j, z] : q.z_known) ss += (z - mean) * (z - mean);
    ss /= static_cast<double>(q.z_known.size());
    if (ss > 0.0) var = ss;
  }
  if (q.model.p0_var) var = *q.model.p0_var;
  return {q.model.p0_mean.value_or(0.0), std::sqrt(var)};
}

double SampleInnovation(const InnovationModel& m, CounterRng& rng) {
  if (m.family == InnovationFamily::kGaussian) return m.mu * rng.NextNormal();
  // CDF 1/2 (1 + tanh(x / mu)) inverts to mu * atanh(2u - 1).
  const double u = rng.NextOpenUniform();
  return 0.5 * m.mu * std::log(u / (1.0 - u));
}

void ValidateQuery(const PosteriorQuery& q) {
  const std::size_t dim = q.a_local.size();
  if (dim == 0) throw InputError("oracle: empty a_local");
  if (q.k < 1 || q.k > dim) throw ParameterError("oracle: k outside [1, J]");
  if (q.samples < 1) throw ParameterError("oracle: samples must be >= 1");
  if (!(q.omega > 0.0 && q.omega <= 1.0)) throw ParameterError("oracle: omega must lie in (0, 1]");
  for (double a : q.a_local) {
    if (!std::isfinite(a)) throw InputError("oracle: non-finite a_local");
  }
  for (const auto& [j, z] : q.z_known) {
    if (j >= dim) throw InputError("oracle: known index " + std::to_string(j) + " out of range");
    if (!std::isfinite(z)) throw InputError("oracle: non-finite known z");
  }
  q.model.Validate();
}

double Spearman(const std::vector<double>& x, const std::vector<double>& y) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
      std::size_t e = i;
      while (e + 1 < idx.size() && v[idx[e + 1]] == v[idx[i]]) ++e;
      const double avg = 0.5 * static_cast<double>(i + e);  // mean rank of the tie group
      for (std::size_t m = i; m <= e; ++m) r[idx[m]] = avg;
      i = e + 1;
    }
    return r;
  };
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

void InnovationModel::Validate() const {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw ParameterError("innovation mu must be > 0");
  if (p0_var && !(*p0_var >= 0.0)) throw ParameterError("p0 variance must be >= 0");
}

double InnovationModel::Density(double xi) const {
  if (family == InnovationFamily::kGaussian) {
    const double z = xi / mu;
    return std::exp(-0.5 * z * z) / (mu * std::sqrt(2.0 * std::numbers::pi));
  }
  const double th = std::tanh(xi / mu);
  return (1.0 - th * th) / (2.0 * mu);
}

bool FeasibleIndicator(std::span<const double> a, std::size_t j, std::size_t k) {
  if (j >= a.size()) throw InputError("feasible indicator: index out of range");
  if (k < 1 || k > a.size()) throw ParameterError("feasible indicator: k outside [1, J]");
  // Rank of j under (magnitude desc, index asc): count entries ordered before it.
  const double mj = std::fabs(a[j]);
  std::size_t ahead = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double mi = std::fabs(a[i]);
    if (mi > mj || (mi == mj && i < j)) ++ahead;
  }
  return ahead < k;
}

double PosteriorEstimate::Total() const {
  const std::uint64_t sum = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
  return static_cast<double>(sum) / static_cast<double>(samples);
}

PosteriorEstimate McPosterior(const PosteriorQuery& q, std::size_t threads) {
  ValidateQuery(q);
  const std::size_t dim = q.a_local.size();
  const ResolvedPrior prior = ResolvePrior(q);

  std::vector<double> known(dim, 0.0);
  std::vector<bool> is_known(dim, false);
  for (const auto& [j, z] : q.z_known) {
    known[j] = z;
    is_known[j] = true;
  }
  std::vector<double> scale(dim, 1.0);
  if (q.model.scale_with_gradient) {
    for (std::size_t j = 0; j < dim; ++j) {
      scale[j] = std::max(std::fabs(q.a_local[j]), InnovationModel::kScaleFloor);
    }
  }

  const std::uint64_t batches = (q.samples + kBatch - 1) / kBatch;
  std::vector<std::vector<std::uint64_t>> batch_counts(batches);
  std::atomic<std::uint64_t> next{0};
  auto work = [&] {
    std::vector<double> a(dim);
    for (std::uint64_t b = next++; b < batches; b = next++) {
      CounterRng rng = CounterRng::Substream(q.seed, b, "oracle");
      const std::uint64_t n = std::min(kBatch, q.samples - b * kBatch);
      std::vector<std::uint64_t> counts(dim, 0);
      for (std::uint64_t s = 0; s < n; ++s) {
        for (std::size_t j = 0; j < dim; ++j) {
          const double z = is_known[j] ? known[j] : prior.mean + prior.sd * rng.NextNormal();
          a[j] = q.omega * q.a_local[j] + z + scale[j] * SampleInnovation(q.model, rng);
        }
        const Mask m = TopKSelect(a, q.k);
        for (std::size_t j = 0; j < dim; ++j) counts[j] += m[j] ? 1 : 0;
      }
      batch_counts[b] = std::move(counts);
    }
  };
  const std::size_t n_threads =
      std::clamp<std::size_t>(threads, 1, static_cast<std::size_t>(batches));
  std::vector<std::thread> pool;
  for (std::size_t i = 1; i < n_threads; ++i) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  PosteriorEstimate est;
  est.samples = q.samples;
  est.counts.assign(dim, 0);
  for (const auto& bc : batch_counts) {
    for (std::size_t j = 0; j < dim; ++j) est.counts[j] += bc[j];
  }
  const double total = static_cast<double>(q.samples);
  for (std::size_t j = 0; j < dim; ++j) {
    const double p = static_cast<double>(est.counts[j]) / total;
    est.probability.push_back(p);
    est.standard_error.push_back(std::sqrt(p * (1.0 - p) / total));
  }
  return est;
}

AgreementReport RankingAgreement(const PosteriorQuery& q, const RegTopKParams& params,
                                 std::size_t threads) {
  params.Validate();
  AgreementReport r;
  r.posterior = McPosterior(q, threads);
  r.oracle_mask = TopKSelect(r.posterior.probability, q.k);

  const std::size_t dim = q.a_local.size();
  Distortion d;
  d.value.assign(dim, 0.0);
  d.informative.assign(dim, false);
  for (const auto& [j, z] : q.z_known) {
    const double own = q.omega * q.a_local[j];
    if (std::fabs(own) < params.zero_tolerance) continue;
    d.value[j] = z / own;
    d.informative[j] = true;
  }
  r.regtopk_score = RegTopKScore(q.a_local, d, params);
  r.regtopk_mask = TopKSelect(r.regtopk_score, q.k);

  std::size_t inter = 0;
  for (std::size_t j = 0; j < dim; ++j) inter += (r.oracle_mask[j] && r.regtopk_mask[j]) ? 1 : 0;
  r.overlap = static_cast<double>(inter) / static_cast<double>(q.k);

  if (q.z_known.size() >= 2) {
    std::vector<double> p, s;
    for (const auto& [j, z] : q.z_known) {
      p.push_back(r.posterior.probability[j]);
      s.push_back(std::fabs(r.regtopk_score[j]));
    }
    r.rank_correlation = Spearman(p, s);
  }
  return r;
}

}  // namespace regtopk
