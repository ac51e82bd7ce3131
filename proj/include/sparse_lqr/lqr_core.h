#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace sparse_lqr {

namespace tolerance {
// Relative to max(1, ‖M‖).
inline constexpr double kPsd = 1e-8;
inline constexpr double kPd = 1e-10;
inline constexpr double kSym = 1e-9;
}  // namespace tolerance

/// Linear time-invariant dynamics x⁺ = A x + B u + d with quadratic stage
/// cost xᵀQx + uᵀRu, terminal cost xᵀQ_T x, and horizon T steps.
struct SystemModel {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::MatrixXd Q;
  Eigen::MatrixXd Q_T;
  Eigen::MatrixXd R;
  int T = 0;

  int state_dim() const { return static_cast<int>(A.rows()); }
  int input_dim() const { return static_cast<int>(B.cols()); }
};

/// Checks shapes, symmetry, and definiteness. Q and Q_T must be PSD, R must
/// be PD, and T ≥ 1. Returns the model unchanged.
///
/// Throws DimensionError naming the offending matrix, or DefinitenessError
/// carrying the violating eigenvalue.
SystemModel ValidateModel(SystemModel model);

/// Backward Riccati sweep and everything derived from it. Immutable once
/// built; safe to share read-only between concurrent rollouts.
struct RiccatiData {
  // The dynamics the sweep was computed for.
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  // P[t], t = 0..T. P[T] = Q_T.
  std::vector<Eigen::MatrixXd> P;
  // Indexed t = 0..T-1.
  std::vector<Eigen::MatrixXd> K;  // (BᵀP_{t+1}B + R)⁻¹BᵀP_{t+1}A
  std::vector<Eigen::MatrixXd> S;  // P_{t+1} − P_{t+1}B(BᵀP_{t+1}B + R)⁻¹BᵀP_{t+1}
  std::vector<Eigen::MatrixXd> F;  // B(R + BᵀP_{t+1}B)⁻¹Bᵀ
  std::vector<Eigen::MatrixXd> G;  // (R + BᵀP_{t+1}B)⁻¹Bᵀ, the feedforward map
  // σ_max(A − B K_t).
  std::vector<double> closed_loop_norm;
  double gamma_hat = 0.0;
  double p_hat = 1.0;

  int horizon() const { return static_cast<int>(P.size()) - 1; }
  int state_dim() const { return static_cast<int>(P.front().rows()); }
  bool margin_ok() const { return gamma_hat > 0.0; }
  // Number of steps with σ_max(A − B K_t) ≥ 1.
  int unstable_steps() const;
};

/// Runs P_T = Q_T and, for t = T−1 down to 0,
///   K_t = (BᵀP_{t+1}B + R)⁻¹BᵀP_{t+1}A
///   P_t = Aᵀ S_t A + Q,  S_t = P_{t+1} − P_{t+1}B(BᵀP_{t+1}B + R)⁻¹BᵀP_{t+1}
/// symmetrizing each P_t. Fills gamma_hat and p_hat.
///
/// Throws NumericalError (with the condition number) if BᵀP_{t+1}B + R
/// cannot be factored.
RiccatiData RiccatiBackward(const SystemModel& model);

/// 1 − max_t σ_max(A − B K_t). May be ≤ 0; callers report that as a violated
/// stability assumption rather than failing. Equals 1 for an empty gain list.
double StabilityMargin(const RiccatiData& riccati, const SystemModel& model);

// σ_max(A − B K_t) for every gain in the sequence.
std::vector<double> ClosedLoopNorms(const RiccatiData& riccati,
                                    const SystemModel& model);

/// max(1, max_t σ_max(P_t)).
double PHatBound(const RiccatiData& riccati);

// Largest singular value.
double SpectralNorm(const Eigen::MatrixXd& M);

// Smallest eigenvalue of the symmetric part of M.
double MinEigenvalue(const Eigen::MatrixXd& M);

/// Inverse of a symmetric positive definite matrix through a Cholesky
/// factorization. Throws NumericalError if the smallest eigenvalue is below
/// tolerance::kPd; `what` names the matrix in the message.
Eigen::MatrixXd InverseSpd(const Eigen::MatrixXd& M, const std::string& what);

}  // namespace sparse_lqr
