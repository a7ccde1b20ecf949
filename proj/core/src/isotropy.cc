// Copyright 2026 The embshape Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "embshape/evaluate.h"

namespace embshape {

double iso_score(const Matrix& x) {
  if (x.rows() < 2) throw InvalidArgument("isoscore: needs at least 2 rows");
  if (x.cols() < 2) throw InvalidArgument("isoscore: undefined for 1 dimension");
  if (!x.allFinite()) throw InvalidArgument("isoscore: non-finite input");
  const double d = static_cast<double>(x.cols());
  Matrix centered = x.rowwise() - x.colwise().mean();
  Matrix cov = centered.transpose() * centered / static_cast<double>(x.rows());
  // Variances along the principal axes.
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov, Eigen::EigenvaluesOnly);
  Vector sigma = eig.eigenvalues().cwiseMax(0.0);
  double norm = sigma.norm();
  if (norm == 0.0) throw InvalidArgument("isoscore: all rows are identical");
  Vector sigma_hat = sigma * (std::sqrt(d) / norm);
  double defect = (sigma_hat.array() - 1.0).matrix().norm() /
                  std::sqrt(2.0 * (d - std::sqrt(d)));
  double utilized =
      std::pow(d - defect * defect * (d - std::sqrt(d)), 2.0) / d;
  double score = (utilized - 1.0) / (d - 1.0);
  return std::clamp(score, 0.0, 1.0);
}

}  // namespace embshape
