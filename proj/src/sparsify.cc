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

#include "regtopk/sparsify.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "regtopk/errors.h"

namespace regtopk {
namespace {

void CheckFinite(std::span<const double> x, const char* what) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i])) {
      throw InputError(std::string(what) + ": non-finite entry at index " +
                       std::to_string(i));
    }
  }
}

void CheckLength(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw InputError(std::string(what) + ": length " + std::to_string(got) +
                     ", expected " + std::to_string(want));
  }
}

// Builds the payload and successor state once the mask is known.
StepResult Commit(const WorkerState& state, DenseVector accumulated, Mask mask) {
  StepResult out;
  const std::size_t dim = accumulated.size();
  out.payload.entries.reserve(mask.Count());
  DenseVector error(dim);
  for (std::size_t j = 0; j < dim; ++j) {
    if (mask[j]) {
      out.payload.entries.push_back({j, accumulated[j]});
      error[j] = 0.0;
    } else {
      error[j] = accumulated[j];
    }
  }
  out.state.error = std::move(error);
  out.state.prev_mask = std::move(mask);
  out.state.prev_accumulated = std::move(accumulated);
  out.state.weight = state.weight;
  out.state.round = state.round + 1;
  return out;
}

DenseVector Accumulate(const WorkerState& state, std::span<const double> gradient) {
  CheckLength(gradient.size(), state.dim(), "gradient");
  CheckFinite(gradient, "gradient");
  DenseVector a(gradient.size());
  for (std::size_t j = 0; j < a.size(); ++j) a[j] = state.error[j] + gradient[j];
  return a;
}

}  // namespace

std::size_t Mask::Count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), true));
}

std::vector<std::size_t> Mask::Support() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i]) out.push_back(i);
  }
  return out;
}

DenseVector SparsePayload::ToDense(std::size_t dim) const {
  DenseVector out(dim, 0.0);
  for (const auto& e : entries) {
    if (e.index >= dim) {
      throw InputError("payload index " + std::to_string(e.index) +
                       " out of range for dimension " + std::to_string(dim));
    }
    out[e.index] = e.value;
  }
  return out;
}

WorkerState WorkerState::Initial(std::size_t dim, double weight) {
  if (dim == 0) throw ParameterError("dimension must be >= 1");
  if (!(weight > 0.0 && weight <= 1.0)) {
    throw ParameterError("worker weight must lie in (0, 1], got " +
                         std::to_string(weight));
  }
  WorkerState s;
  s.error.assign(dim, 0.0);
  s.weight = weight;
  return s;
}

void RegTopKParams::Validate() const {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw ParameterError("mu must be > 0");
  if (!(c_unselected > 0.0 && c_unselected <= 1.0)) {
    throw ParameterError("c_unselected must lie in (0, 1]");
  }
  if (!(y_exponent > 0.0 && y_exponent <= 1.0)) {
    throw ParameterError("y_exponent must lie in (0, 1]");
  }
  if (!(zero_tolerance > 0.0)) throw ParameterError("zero_tolerance must be > 0");
}

Mask TopKSelect(std::span<const double> x, std::size_t k) {
  if (x.empty()) throw InputError("top-k of an empty vector");
  if (k < 1 || k > x.size()) {
    throw ParameterError("k = " + std::to_string(k) + " outside [1, " +
                         std::to_string(x.size()) + "]");
  }
  CheckFinite(x, "top-k input");

  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto before = [&x](std::size_t a, std::size_t b) {
    const double ma = std::fabs(x[a]);
    const double mb = std::fabs(x[b]);
    if (ma != mb) return ma > mb;
    return a < b;
  };
  if (k < x.size()) {
    std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k - 1),
                     order.end(), before);
  }
  Mask mask(x.size());
  for (std::size_t i = 0; i < k; ++i) mask.Set(order[i]);
  return mask;
}

StepResult TopKStep(const WorkerState& state, std::span<const double> gradient,
                    std::size_t k) {
  DenseVector a = Accumulate(state, gradient);
  Mask mask = TopKSelect(a, k);
  return Commit(state, std::move(a), std::move(mask));
}

Distortion PosteriorDistortion(const WorkerState& state,
                               std::span<const double> prev_global,
                               std::span<const double> accumulated,
                               const RegTopKParams& params) {
  if (state.round < 1 || !state.prev_mask || !state.prev_accumulated) {
    throw StateError("posterior distortion needs a previous round");
  }
  const std::size_t dim = state.dim();
  CheckLength(prev_global.size(), dim, "previous aggregate");
  CheckLength(accumulated.size(), dim, "accumulated gradient");

  const Mask& prev_mask = *state.prev_mask;
  const DenseVector& prev_acc = *state.prev_accumulated;
  const double w = state.weight;

  Distortion d;
  d.value.assign(dim, 0.0);
  d.informative.assign(dim, false);
  for (std::size_t j = 0; j < dim; ++j) {
    if (!prev_mask[j]) continue;
    const double own_now = w * accumulated[j];
    if (std::fabs(own_now) < params.zero_tolerance) continue;
    d.value[j] = (prev_global[j] - w * prev_acc[j]) / own_now;
    d.informative[j] = true;
  }
  return d;
}

DenseVector RegTopKScore(std::span<const double> accumulated,
                         const Distortion& distortion,
                         const RegTopKParams& params) {
  const std::size_t dim = accumulated.size();
  CheckLength(distortion.value.size(), dim, "distortion");
  CheckLength(distortion.informative.size(), dim, "distortion flags");

  DenseVector score(dim);
  for (std::size_t j = 0; j < dim; ++j) {
    const double a = accumulated[j];
    // |a|^1 is returned unchanged by the fast path so y = 1 is exact.
    const double magnitude =
        params.y_exponent == 1.0 ? a : std::copysign(std::pow(std::fabs(a), params.y_exponent), a);
    const double likelihood =
        distortion.informative[j]
            ? std::tanh(std::fabs(1.0 + distortion.value[j]) / params.mu)
            : params.c_unselected;
    score[j] = magnitude * likelihood;
  }
  return score;
}

StepResult RegTopKStep(const WorkerState& state, std::span<const double> gradient,
                       const std::optional<std::span<const double>>& prev_global,
                       std::size_t k, const RegTopKParams& params) {
  params.Validate();
  if (state.round == 0) return TopKStep(state, gradient, k);
  if (!prev_global) {
    throw StateError("RegTop-k round " + std::to_string(state.round) +
                     " requires the previous aggregate");
  }
  DenseVector a = Accumulate(state, gradient);
  const Distortion d = PosteriorDistortion(state, *prev_global, a, params);
  const DenseVector score = RegTopKScore(a, d, params);
  Mask mask = TopKSelect(score, k);
  return Commit(state, std::move(a), std::move(mask));
}

}  // namespace regtopk
