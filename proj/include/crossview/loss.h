// SPDX-License-Identifier: Apache-2.0

#ifndef CROSSVIEW_LOSS_H_
#define CROSSVIEW_LOSS_H_

#include <vector>

#include "crossview/feature_volume.h"
#include "crossview/matching.h"

namespace crossview {

struct LossConfig {
  double alpha = 10.0;
  bool symmetric = true;
};

using Matrix = std::vector<std::vector<double>>;

// log(1 + exp(x)) without overflow.
double Softplus(double x);

// D[i][j] = MatchPair(aerial[j], ground[i]).distance.
template <typename T>
Matrix DistanceMatrix(const std::vector<BasicVolume<T>>& ground,
                      const std::vector<BasicVolume<T>>& aerial);

// Orientation (aerial crop start) used for each D[i][j].
template <typename T>
std::vector<std::vector<int>> OrientationMatrix(
    const std::vector<BasicVolume<T>>& ground,
    const std::vector<BasicVolume<T>>& aerial);

// Ground-to-aerial: mean over i, j != i of softplus(alpha (D_ii - D_ij)).
double GroundToAerialLoss(const Matrix& d, double alpha);
// Aerial-to-ground: mean over j, i != j of softplus(alpha (D_jj - D_ij)).
double AerialToGroundLoss(const Matrix& d, double alpha);
// Mean of both directions when symmetric, otherwise ground-to-aerial only.
double TripletLoss(const Matrix& d, const LossConfig& cfg);
// dLoss/dD for TripletLoss.
Matrix TripletLossGrad(const Matrix& d, const LossConfig& cfg);

}  // namespace crossview

#endif  // CROSSVIEW_LOSS_H_
