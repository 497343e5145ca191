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

#include "regtopk/problems.h"

#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "regtopk/errors.h"
#include "regtopk/rng.h"

namespace regtopk {
namespace {

Eigen::Map<const Eigen::VectorXd> AsEigen(std::span<const double> v) {
  return {v.data(), static_cast<Eigen::Index>(v.size())};
}

DenseVector ToDense(const Eigen::VectorXd& v) {
  return DenseVector(v.data(), v.data() + v.size());
}

void CheckDim(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw InputError(std::string(what) + ": dimension " + std::to_string(got) +
                     ", expected " + std::to_string(want));
  }
}

double Dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// sigma(-z) = 1 / (1 + e^z), branched so exp never overflows.
double SigmoidOfNegative(double z) {
  if (z >= 0.0) {
    const double e = std::exp(-z);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(z));
}

std::vector<double> ParseRow(const std::string& line) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    std::size_t comma = line.find(',', pos);
    if (comma == std::string::npos) comma = line.size();
    const std::string cell = line.substr(pos, comma - pos);
    double v = 0.0;
    const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
      throw InputError("dataset CSV: bad number '" + cell + "'");
    }
    out.push_back(v);
    pos = comma + 1;
  }
  return out;
}

}  // namespace

void LinearDataset::Validate() const {
  if (x.rows() < 1 || x.cols() < 1) throw InputError("dataset must have D >= 1 and J >= 1");
  if (y.size() != x.rows()) throw InputError("dataset label count differs from row count");
  if (!x.allFinite() || !y.allFinite()) throw InputError("dataset has non-finite entries");
}

void GenConfig::Validate() const {
  if (num_workers < 1 || dim < 1 || rows_per_worker < 1) {
    throw ParameterError("N, J and D_n must all be >= 1");
  }
  if (!(sigma2 >= 0.0) || !(h2 >= 0.0) || !(eps2 >= 0.0)) {
    throw ParameterError("variances must be >= 0");
  }
  if (!std::isfinite(mean_of_means)) throw ParameterError("U must be finite");
}

std::vector<LinearDataset> GenerateDatasets(const GenConfig& cfg) {
  cfg.Validate();
  const auto rows = static_cast<Eigen::Index>(cfg.rows_per_worker);
  const auto dim = static_cast<Eigen::Index>(cfg.dim);
  const double noise_sd = cfg.homogeneous ? 0.0 : std::sqrt(cfg.eps2);

  auto draw_model = [&](std::uint64_t worker) {
    CounterRng rng = CounterRng::Substream(cfg.seed, worker, "model");
    const double u = cfg.mean_of_means + std::sqrt(cfg.sigma2) * rng.NextNormal();
    Eigen::VectorXd t(dim);
    for (Eigen::Index j = 0; j < dim; ++j) t(j) = u + std::sqrt(cfg.h2) * rng.NextNormal();
    return t;
  };
  const Eigen::VectorXd shared = cfg.homogeneous ? draw_model(0) : Eigen::VectorXd();

  std::vector<LinearDataset> out;
  out.reserve(cfg.num_workers);
  for (std::size_t n = 0; n < cfg.num_workers; ++n) {
    LinearDataset ds;
    ds.x.resize(rows, dim);
    CounterRng features = CounterRng::Substream(cfg.seed, n, "features");
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < dim; ++j) ds.x(i, j) = features.NextNormal();
    }
    const Eigen::VectorXd t = cfg.homogeneous ? shared : draw_model(n);
    ds.y = ds.x * t;
    if (noise_sd > 0.0) {
      CounterRng noise = CounterRng::Substream(cfg.seed, n, "noise");
      for (Eigen::Index i = 0; i < rows; ++i) ds.y(i) += noise_sd * noise.NextNormal();
    }
    out.push_back(std::move(ds));
  }
  return out;
}

double LinRegLoss(std::span<const double> theta, const LinearDataset& ds) {
  CheckDim(theta.size(), ds.dim(), "theta");
  const Eigen::VectorXd r = ds.x * AsEigen(theta) - ds.y;
  return r.squaredNorm() / static_cast<double>(ds.rows());
}

DenseVector LinRegGradient(std::span<const double> theta, const LinearDataset& ds) {
  CheckDim(theta.size(), ds.dim(), "theta");
  const Eigen::VectorXd r = ds.x * AsEigen(theta) - ds.y;
  const Eigen::VectorXd g = (2.0 / static_cast<double>(ds.rows())) * (ds.x.transpose() * r);
  return ToDense(g);
}

DenseVector GlobalOptimum(std::span<const LinearDataset> datasets) {
  if (datasets.empty()) throw InputError("no datasets");
  const auto dim = static_cast<Eigen::Index>(datasets.front().dim());
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
  for (const auto& ds : datasets) {
    CheckDim(ds.dim(), static_cast<std::size_t>(dim), "dataset");
    gram.noalias() += ds.x.transpose() * ds.x;
    rhs.noalias() += ds.x.transpose() * ds.y;
  }

  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() == Eigen::Success) {
    const Eigen::VectorXd theta = llt.solve(rhs);
    if (theta.allFinite()) return ToDense(theta);
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(gram);
  if (qr.rank() < dim) {
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(gram);
    const auto& s = svd.singularValues();
    const double cond = s(s.size() - 1) > 0.0 ? s(0) / s(s.size() - 1)
                                              : std::numeric_limits<double>::infinity();
    throw NumericalError("normal equations are singular (rank " +
                         std::to_string(qr.rank()) + " of " + std::to_string(dim) +
                         ", condition estimate " + std::to_string(cond) + ")");
  }
  return ToDense(qr.solve(rhs));
}

LinearObjective::LinearObjective(const LinearDataset& ds) {
  ds.Validate();
  inv_rows_ = 1.0 / static_cast<double>(ds.rows());
  gram_ = (2.0 * inv_rows_) * (ds.x.transpose() * ds.x);
  xty_ = (2.0 * inv_rows_) * (ds.x.transpose() * ds.y);
  yty_ = inv_rows_ * ds.y.squaredNorm();
}

double LinearObjective::Loss(std::span<const double> theta) const {
  CheckDim(theta.size(), dim(), "theta");
  const auto t = AsEigen(theta);
  // (1/D)(t'X'Xt - 2 t'X'y + y'y) with the stored 2/D scaling folded back.
  return 0.5 * t.dot(gram_ * t) - t.dot(xty_) + yty_;
}

DenseVector LinearObjective::Gradient(std::span<const double> theta) const {
  CheckDim(theta.size(), dim(), "theta");
  Eigen::VectorXd g = gram_ * AsEigen(theta);
  g -= xty_;
  return ToDense(g);
}

double LogisticLoss(std::span<const double> theta, std::span<const double> x) {
  CheckDim(theta.size(), x.size(), "theta");
  const double z = Dot(theta, x);
  // log(1 + e^{-z})
  if (z >= 0.0) return std::log1p(std::exp(-z));
  return -z + std::log1p(std::exp(z));
}

DenseVector LogisticGradient(std::span<const double> theta, std::span<const double> x) {
  CheckDim(theta.size(), x.size(), "theta");
  const double s = SigmoidOfNegative(Dot(theta, x));
  DenseVector g(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) g[j] = -s * x[j];
  return g;
}

std::vector<DenseVector> LogisticToy::Points() {
  return {{kFeature, 1.0}, {-kFeature, 1.0}};
}

DenseVector LogisticToy::InitialModel() { return {0.0, 1.0}; }

double LogisticToy::Loss(std::span<const double> theta) {
  const auto pts = Points();
  return 0.5 * (LogisticLoss(theta, pts[0]) + LogisticLoss(theta, pts[1]));
}

void WriteDatasetCsv(std::ostream& out, const LinearDataset& ds) {
  ds.Validate();
  char buf[32];
  auto put = [&](double v) {
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.write(buf, res.ptr - buf);
  };
  out << ds.dim() << ',' << ds.rows() << '\n';
  for (Eigen::Index i = 0; i < ds.x.rows(); ++i) {
    for (Eigen::Index j = 0; j < ds.x.cols(); ++j) {
      if (j) out << ',';
      put(ds.x(i, j));
    }
    out << '\n';
  }
  for (Eigen::Index i = 0; i < ds.y.size(); ++i) {
    if (i) out << ',';
    put(ds.y(i));
  }
  out << '\n';
}

LinearDataset ReadDatasetCsv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("dataset CSV: missing header");
  const auto header = ParseRow(line);
  if (header.size() != 2 || header[0] < 1 || header[1] < 1 ||
      header[0] != std::floor(header[0]) || header[1] != std::floor(header[1])) {
    throw InputError("dataset CSV: header must be 'J,D'");
  }
  const auto dim = static_cast<Eigen::Index>(header[0]);
  const auto rows = static_cast<Eigen::Index>(header[1]);

  LinearDataset ds;
  ds.x.resize(rows, dim);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (!std::getline(in, line)) throw InputError("dataset CSV: truncated X");
    const auto row = ParseRow(line);
    if (static_cast<Eigen::Index>(row.size()) != dim) {
      throw InputError("dataset CSV: row " + std::to_string(i) + " has wrong width");
    }
    for (Eigen::Index j = 0; j < dim; ++j) ds.x(i, j) = row[static_cast<std::size_t>(j)];
  }
  if (!std::getline(in, line)) throw InputError("dataset CSV: missing y row");
  const auto labels = ParseRow(line);
  if (static_cast<Eigen::Index>(labels.size()) != rows) {
    throw InputError("dataset CSV: y row has wrong length");
  }
  ds.y = Eigen::Map<const Eigen::VectorXd>(labels.data(), rows);
  ds.Validate();
  return ds;
}

}  // namespace regtopk
