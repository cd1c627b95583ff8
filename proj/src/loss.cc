// SPDX-License-Identifier: Apache-2.0

#include "crossview/loss.h"

#include <cmath>

#include "crossview/error.h"

namespace crossview {
namespace {

void CheckSquare(const Matrix& d) {
  const size_t n = d.size();
  if (n < 2) throw Error(ErrorCode::kNonSquare, "need at least a 2x2 matrix");
  for (const auto& row : d) {
    if (row.size() != n) {
      throw Error(ErrorCode::kNonSquare, "distance matrix is not square");
    }
  }
}

double Sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

double Softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

template <typename T>
Matrix DistanceMatrix(const std::vector<BasicVolume<T>>& ground,
                      const std::vector<BasicVolume<T>>& aerial) {
  if (ground.size() != aerial.size() || ground.size() < 2) {
    throw Error(ErrorCode::kShapeMismatch,
                "distance matrix needs two equal lists of >= 2 volumes");
  }
  const size_t n = ground.size();
  Matrix d(n, std::vector<double>(n));
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      d[i][j] = MatchPair(aerial[j], ground[i]).distance;
    }
  }
  return d;
}

template <typename T>
std::vector<std::vector<int>> OrientationMatrix(
    const std::vector<BasicVolume<T>>& ground,
    const std::vector<BasicVolume<T>>& aerial) {
  const size_t n = ground.size();
  std::vector<std::vector<int>> o(n, std::vector<int>(aerial.size()));
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < aerial.size(); ++j) {
      o[i][j] = MatchPair(aerial[j], ground[i]).orientation;
    }
  }
  return o;
}

double GroundToAerialLoss(const Matrix& d, double alpha) {
  CheckSquare(d);
  const size_t n = d.size();
  double sum = 0.0;
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      if (j != i) sum += Softplus(alpha * (d[i][i] - d[i][j]));
    }
  }
  return sum / static_cast<double>(n * (n - 1));
}

double AerialToGroundLoss(const Matrix& d, double alpha) {
  CheckSquare(d);
  const size_t n = d.size();
  double sum = 0.0;
  for (size_t j = 0; j < n; ++j) {
    for (size_t i = 0; i < n; ++i) {
      if (i != j) sum += Softplus(alpha * (d[j][j] - d[i][j]));
    }
  }
  return sum / static_cast<double>(n * (n - 1));
}

double TripletLoss(const Matrix& d, const LossConfig& cfg) {
  if (!std::isfinite(cfg.alpha)) {
    throw Error(ErrorCode::kInvalidArgument, "alpha must be finite");
  }
  const double g2a = GroundToAerialLoss(d, cfg.alpha);
  if (!cfg.symmetric) return g2a;
  return 0.5 * (g2a + AerialToGroundLoss(d, cfg.alpha));
}

Matrix TripletLossGrad(const Matrix& d, const LossConfig& cfg) {
  CheckSquare(d);
  const size_t n = d.size();
  const double weight = (cfg.symmetric ? 0.5 : 1.0) /
                        static_cast<double>(n * (n - 1));
  Matrix g(n, std::vector<double>(n, 0.0));
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      // ground query i, negative aerial j
      const double s = Sigmoid(cfg.alpha * (d[i][i] - d[i][j]));
      g[i][i] += weight * cfg.alpha * s;
      g[i][j] -= weight * cfg.alpha * s;
      if (cfg.symmetric) {
        // aerial query j, negative ground i
        const double t = Sigmoid(cfg.alpha * (d[j][j] - d[i][j]));
        g[j][j] += weight * cfg.alpha * t;
        g[i][j] -= weight * cfg.alpha * t;
      }
    }
  }
  return g;
}

template Matrix DistanceMatrix<float>(const std::vector<FeatureVolume>&,
                                      const std::vector<FeatureVolume>&);
template Matrix DistanceMatrix<double>(
    const std::vector<BasicVolume<double>>&,
    const std::vector<BasicVolume<double>>&);
template std::vector<std::vector<int>> OrientationMatrix<float>(
    const std::vector<FeatureVolume>&, const std::vector<FeatureVolume>&);
template std::vector<std::vector<int>> OrientationMatrix<double>(
    const std::vector<BasicVolume<double>>&,
    const std::vector<BasicVolume<double>>&);

}  // namespace crossview
