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

#ifndef REGTOPK_SPARSIFY_H_
#define REGTOPK_SPARSIFY_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace regtopk {

// Dense real vector of fixed length J: gradients, models, scores.
using DenseVector = std::vector<double>;

// Selection mask over J coordinates.
class Mask {
 public:
  Mask() = default;
  explicit Mask(std::size_t size) : bits_(size, false) {}
  explicit Mask(std::vector<bool> bits) : bits_(std::move(bits)) {}

  std::size_t size() const { return bits_.size(); }
  bool operator[](std::size_t i) const { return bits_[i]; }
  void Set(std::size_t i, bool value = true) { bits_[i] = value; }

  // Number of selected coordinates.
  std::size_t Count() const;
  // Selected indices in increasing order.
  std::vector<std::size_t> Support() const;

  const std::vector<bool>& bits() const { return bits_; }

  friend bool operator==(const Mask&, const Mask&) = default;

 private:
  std::vector<bool> bits_;
};

struct SparseEntry {
  std::size_t index = 0;
  double value = 0.0;

  friend bool operator==(const SparseEntry&, const SparseEntry&) = default;
};

// What a worker transmits: (index, value) pairs, indices strictly increasing.
struct SparsePayload {
  std::vector<SparseEntry> entries;

  std::size_t size() const { return entries.size(); }
  // Scatters the entries into a zero vector of length `dim`.
  DenseVector ToDense(std::size_t dim) const;

  friend bool operator==(const SparsePayload&, const SparsePayload&) = default;
};

// Per-worker sparsifier memory. Owned by exactly one worker.
struct WorkerState {
  DenseVector error;                             // carried sparsification error
  std::optional<Mask> prev_mask;                 // support sent last round
  std::optional<DenseVector> prev_accumulated;   // accumulated gradient of last round
  double weight = 1.0;                           // aggregation weight omega_n in (0, 1]
  std::int64_t round = 0;

  // Round-0 state: zero error, no history.
  static WorkerState Initial(std::size_t dim, double weight);

  std::size_t dim() const { return error.size(); }
};

struct RegTopKParams {
  double mu = 0.5;               // regularizer scale
  double c_unselected = 1.0;     // likelihood assigned to entries without history
  double y_exponent = 1.0;       // magnitude exponent of the prior
  double zero_tolerance = 1e-12; // |omega * a_j| below this carries no information

  // Throws ParameterError unless mu > 0, c in (0,1], y in (0,1], tol > 0.
  void Validate() const;
};

// Per-entry distortion with a flag telling whether it carries information.
// Uninformative entries stand for the "infinitely distorted" case and use
// RegTopKParams::c_unselected in place of the tanh regularizer.
struct Distortion {
  DenseVector value;
  std::vector<bool> informative;
};

struct StepResult {
  SparsePayload payload;
  WorkerState state;
};

// Indices of the k largest |x_i|; ties go to the lower index.
// Throws ParameterError for k outside [1, J], InputError for non-finite x.
Mask TopKSelect(std::span<const double> x, std::size_t k);

// Error-feedback Top-k: a = error + gradient, send the top-k of a, keep the rest.
StepResult TopKStep(const WorkerState& state, std::span<const double> gradient,
                    std::size_t k);

// Posterior distortion of the current accumulated gradient given the
// aggregate broadcast last round. Requires state.round >= 1.
Distortion PosteriorDistortion(const WorkerState& state,
                               std::span<const double> prev_global,
                               std::span<const double> accumulated,
                               const RegTopKParams& params);

// Ranking score: sign(a) |a|^y tanh(|1 + delta| / mu) for informative entries,
// sign(a) |a|^y c_unselected otherwise.
DenseVector RegTopKScore(std::span<const double> accumulated,
                         const Distortion& distortion,
                         const RegTopKParams& params);

// RegTop-k step. Round 0 is plain TopKStep; later rounds need prev_global.
// The payload always carries accumulated values, never scores.
StepResult RegTopKStep(const WorkerState& state, std::span<const double> gradient,
                       const std::optional<std::span<const double>>& prev_global,
                       std::size_t k, const RegTopKParams& params);

}  // namespace regtopk

#endif  // REGTOPK_SPARSIFY_H_
