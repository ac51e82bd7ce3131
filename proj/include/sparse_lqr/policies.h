#pragma once

#include <vector>

#include <Eigen/Dense>

#include "sparse_lqr/disturbance.h"
#include "sparse_lqr/lqr_core.h"

namespace sparse_lqr {

/// u = −K_t x. Requires 0 ≤ t < T.
Eigen::VectorXd BlindAction(int t, const Eigen::VectorXd& x,
                            const RiccatiData& riccati);

// ---------------------------------------------------------------------------
// Clairvoyant (offline) policy.

/// Linear and constant terms of the offline cost-to-go
///   V_t(x) = xᵀP_t x + v_tᵀx + q_t,
/// indexed t = 0..T with v_T = 0, q_T = 0.
struct OfflineAuxiliary {
  std::vector<Eigen::VectorXd> v;
  std::vector<double> q;
};

/// Backward recurrences driven by d_t (zero off the disturbance set):
///   v_t = 2AᵀS_t d_t + AᵀS_t P_{t+1}⁻¹ v_{t+1}
///   q_t = q_{t+1} + d_tᵀS_t d_t + v_{t+1}ᵀP_{t+1}⁻¹S_t d_t
///         − ¼ v_{t+1}ᵀ F_t v_{t+1}
/// Note the constant term uses S_t (not S_{t+1}); that is the placement for
/// which the realized cost of the offline rollout equals V_0(x_0).
///
/// P_{t+1} is inverted only where v_{t+1} ≠ 0; throws NumericalError if it is
/// not positive definite there.
OfflineAuxiliary OfflinePrecompute(const DisturbanceScenario& scenario,
                                   const RiccatiData& riccati);

/// u_t = −K_t x − (BᵀP_{t+1}B + R)⁻¹Bᵀ(P_{t+1} d_t + ½ v_{t+1}).
Eigen::VectorXd OfflineAction(int t, const Eigen::VectorXd& x,
                              const OfflineAuxiliary& aux,
                              const DisturbanceScenario& scenario,
                              const RiccatiData& riccati);

/// V_t(x) = xᵀP_t x + v_tᵀx + q_t for 0 ≤ t ≤ T.
double OfflineCostToGo(int t, const Eigen::VectorXd& x,
                       const OfflineAuxiliary& aux,
                       const RiccatiData& riccati);

// ---------------------------------------------------------------------------
// Disturbance-aware policy.
//
// The policy knows the disturbance values and their order but not when they
// occur. With k disturbances remaining, the next one is w_k (reverse
// chronological numbering) and occurs at step t with probability p_t^k. The
// expected cost-to-go is
//   J_t^k(x) = xᵀP_t x + 2 (r_t^k)ᵀx + c_t^k,
// with r_T^k = 0, c_T^k = 0, and for t < T, writing P = P_{t+1}, p = p_t^k,
//   r̃ = (1 − p) r_{t+1}^k + p r_{t+1}^{k−1}
//   c̃ = (1 − p) c_{t+1}^k + p c_{t+1}^{k−1}
//   g  = r̃ + p P w_k
//   r_t^k = Aᵀ(I − F_t P)ᵀ g
//   c_t^k = c̃ − gᵀF_t g + p w_kᵀP w_k + 2p (r_{t+1}^{k−1})ᵀw_k.
// The mixing weight inside r̃ is the probability at the current step t: it is
// the weight of the two branches of the expectation taken at step t.

class DisturbanceAwareTables {
 public:
  DisturbanceAwareTables(int horizon, int max_k, int state_dim,
                         std::vector<Eigen::VectorXd> next_values,
                         ProbabilityModel prob);

  int horizon() const { return horizon_; }
  int max_k() const { return max_k_; }
  int state_dim() const { return state_dim_; }

  // r_t^k and c_t^k for 0 ≤ t ≤ T, 0 ≤ k ≤ max_k.
  auto r(int t, int k) { return r_.col(Index(t, k)); }
  auto r(int t, int k) const { return r_.col(Index(t, k)); }
  double& c(int t, int k) { return c_[Index(t, k)]; }
  double c(int t, int k) const { return c_[Index(t, k)]; }

  // w_k for 1 ≤ k ≤ max_k.
  const Eigen::VectorXd& w(int k) const { return next_values_.at(k - 1); }
  const std::vector<Eigen::VectorXd>& next_values() const {
    return next_values_;
  }

  // p_t^k for 0 ≤ t < T.
  double p(int t, int k) const { return prob_(t, k, horizon_); }
  const ProbabilityModel& probability_model() const { return prob_; }

  /// g_t^k = r̃_{t+1}^k + p_t^k P_{t+1} w_k, the drive term of the action and
  /// of the r recursion. Zero when k = 0.
  Eigen::VectorXd Drive(int t, int k, const RiccatiData& riccati) const;

 private:
  Eigen::Index Index(int t, int k) const {
    return static_cast<Eigen::Index>(t) * (max_k_ + 1) + k;
  }

  int horizon_;
  int max_k_;
  int state_dim_;
  std::vector<Eigen::VectorXd> next_values_;
  ProbabilityModel prob_;
  Eigen::MatrixXd r_;  // n × (T+1)(max_k+1), column per (t, k)
  std::vector<double> c_;
};

/// Fills the r and c grids backward in t for every k = 0..max_k.
/// `next_values[k−1]` is w_k; it must hold at least max_k vectors.
DisturbanceAwareTables DaPrecompute(std::vector<Eigen::VectorXd> next_values,
                                    const ProbabilityModel& prob,
                                    const RiccatiData& riccati, int max_k);

/// u = −K_t x − (R + BᵀP_{t+1}B)⁻¹Bᵀ(p_t^k P_{t+1} w_k + r̃_{t+1}^k).
/// Throws std::out_of_range if k is outside [0, max_k].
Eigen::VectorXd DaAction(int t, const Eigen::VectorXd& x, int k_remaining,
                         const DisturbanceAwareTables& tables,
                         const RiccatiData& riccati);

/// J_t^k(x) = xᵀP_t x + 2(r_t^k)ᵀx + c_t^k.
double DaExpectedCost(int t, const Eigen::VectorXd& x, int k,
                      const DisturbanceAwareTables& tables,
                      const RiccatiData& riccati);

}  // namespace sparse_lqr
