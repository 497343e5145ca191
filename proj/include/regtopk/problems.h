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

#ifndef REGTOPK_PROBLEMS_H_
#define REGTOPK_PROBLEMS_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "regtopk/sparsify.h"

namespace regtopk {

// One worker's least-squares data: rows of X are data points.
struct LinearDataset {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;

  std::size_t rows() const { return static_cast<std::size_t>(x.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(x.cols()); }
  void Validate() const;
};

// Synthetic Gaussian linear-model generator:
//   u_n ~ N(U, sigma2), t_n ~ N(u_n 1, h2 I), x ~ N(0, I), y = X t_n + e,
//   e ~ N(0, eps2 I).
// `homogeneous` shares t_1 across workers and forces eps2 = 0.
struct GenConfig {
  std::size_t num_workers = 20;
  std::size_t dim = 100;
  std::size_t rows_per_worker = 500;
  double mean_of_means = 0.0;  // U
  double sigma2 = 5.0;
  double h2 = 1.0;
  double eps2 = 0.5;
  bool homogeneous = false;
  std::uint64_t seed = 1;

  void Validate() const;
};

std::vector<LinearDataset> GenerateDatasets(const GenConfig& cfg);

// (1/D) ||X theta - y||^2
double LinRegLoss(std::span<const double> theta, const LinearDataset& ds);
// (2/D) X^T (X theta - y)
DenseVector LinRegGradient(std::span<const double> theta, const LinearDataset& ds);

// Solves (sum X^T X) theta = sum X^T y. Cholesky first, column-pivoted QR
// when the factorization fails. Throws NumericalError on a singular system.
DenseVector GlobalOptimum(std::span<const LinearDataset> datasets);

// Precomputed Gram form of one worker's objective. Gradient and loss cost
// O(J^2) instead of O(D J); used by the simulator on the hot path.
class LinearObjective {
 public:
  explicit LinearObjective(const LinearDataset& ds);

  double Loss(std::span<const double> theta) const;
  DenseVector Gradient(std::span<const double> theta) const;
  std::size_t dim() const { return static_cast<std::size_t>(gram_.rows()); }

 private:
  Eigen::MatrixXd gram_;   // (2/D) X^T X
  Eigen::VectorXd xty_;    // (2/D) X^T y
  double yty_;             // (1/D) y^T y
  double inv_rows_;
};

// log(1 + exp(-<theta, x>)), evaluated without overflow.
double LogisticLoss(std::span<const double> theta, std::span<const double> x);
// -sigma(-<theta, x>) x with a sign-branched sigmoid.
DenseVector LogisticGradient(std::span<const double> theta, std::span<const double> x);

// Two-worker cancellation example: x_1 = [100, 1], x_2 = [-100, 1], labels 1.
struct LogisticToy {
  static constexpr double kFeature = 100.0;
  static std::vector<DenseVector> Points();
  static DenseVector InitialModel();  // [0, 1]
  // Mean of the two workers' losses.
  static double Loss(std::span<const double> theta);
};

// Dataset CSV: "J,D" header line, then D rows of X, then one row holding y.
void WriteDatasetCsv(std::ostream& out, const LinearDataset& ds);
LinearDataset ReadDatasetCsv(std::istream& in);

}  // namespace regtopk

#endif  // REGTOPK_PROBLEMS_H_
