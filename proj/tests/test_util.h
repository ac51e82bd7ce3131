#pragma once

#include <Eigen/Dense>

#include "sparse_lqr/disturbance.h"
#include "sparse_lqr/lqr_core.h"

namespace sparse_lqr::testing {

inline Eigen::MatrixXd RandomMatrix(Rng& rng, int rows, int cols,
                                    double scale = 1.0) {
  Eigen::MatrixXd M(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) M(i, j) = scale * (2.0 * rng.Uniform() - 1.0);
  }
  return M;
}

// M Mᵀ + shift·I.
inline Eigen::MatrixXd RandomSpd(Rng& rng, int n, double shift) {
  const Eigen::MatrixXd M = RandomMatrix(rng, n, n);
  return M * M.transpose() + shift * Eigen::MatrixXd::Identity(n, n);
}

// Random model with PD cost matrices, so every P_t is invertible.
inline SystemModel RandomModel(Rng& rng, int n, int m, int T) {
  SystemModel model;
  model.A = RandomMatrix(rng, n, n, 0.8);
  model.B = RandomMatrix(rng, n, m);
  model.Q = RandomSpd(rng, n, 0.1);
  model.Q_T = RandomSpd(rng, n, 0.5);
  model.R = RandomSpd(rng, m, 0.2);
  model.T = T;
  return model;
}

inline SystemModel ScalarModel(double a, double b, double q, double q_T,
                               double r, int T) {
  SystemModel model;
  model.A = Eigen::MatrixXd::Constant(1, 1, a);
  model.B = Eigen::MatrixXd::Constant(1, 1, b);
  model.Q = Eigen::MatrixXd::Constant(1, 1, q);
  model.Q_T = Eigen::MatrixXd::Constant(1, 1, q_T);
  model.R = Eigen::MatrixXd::Constant(1, 1, r);
  model.T = T;
  return model;
}

inline Eigen::VectorXd Vec(std::initializer_list<double> xs) {
  Eigen::VectorXd v(xs.size());
  int i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

}  // namespace sparse_lqr::testing
