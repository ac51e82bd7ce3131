#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "sparse_lqr/lqr_core.h"

namespace sparse_lqr {

/// Serial runs the reference loop; Parallel runs the same per-item work
/// under OpenMP. Both produce identical results.
enum class Execution { kSerial, kParallel };

/// Extra cost of the blind policy caused by D disturbances of norm ≤ ŵ:
///   2·D·ŵ·P̂·(‖x0‖ + ŵ + D·ŵ·P̂).
/// Throws std::invalid_argument for negative inputs or p_hat < 1.
double DisturbanceCostBound(int D, double w_hat, double x0_norm, double p_hat);

/// Gap between the undisturbed blind cost and the offline cost:
///   2‖x0‖·D·P̂·ŵ + D²·ŵ·P̂·(3ŵ + (3P̂ŵ + γ⁻²)‖B‖²/λ_min(R)).
/// Throws AssumptionViolated if gamma ≤ 0.
double NominalGapBound(int D, double w_hat, double x0_norm, double p_hat,
                     double gamma, double norm_B, double lambda_min_R);

/// Regret of the blind policy against the offline policy:
///   2DŵP̂(2‖x0‖ + ŵ) + D²ŵ²(2P̂² + 3P̂) + D²ŵP̂(3P̂ŵ + γ⁻²)‖B‖²/λ_min(R).
/// Algebraically equal to DisturbanceCostBound + NominalGapBound.
double RegretBound(int D, double w_hat, double x0_norm, double p_hat,
                     double gamma, double norm_B, double lambda_min_R);

struct BoundReport {
  double p_hat = 1.0;
  double gamma_hat = 0.0;
  double lambda_min_R = 0.0;
  double norm_B = 0.0;
  double norm_x0 = 0.0;
  int D_count = 0;
  double w_hat = 0.0;
  // Empty when the stability margin is not positive.
  std::optional<double> regret_bound;
  double disturbance_bound = 0.0;
  std::optional<double> nominal_bound;
  bool margin_ok = false;
  // Steps with σ_max(A − B K_t) ≥ 1.
  int unstable_steps = 0;
};

BoundReport MakeBoundReport(const SystemModel& model,
                            const RiccatiData& riccati, int D, double w_hat,
                            const Eigen::VectorXd& x0);

struct VerificationRow {
  int trial = 0;
  int D = 0;
  double w_hat = 0.0;
  double emp_blind_vs_offline = 0.0;   // |J^w − V^w|
  double emp_blind_vs_nominal = 0.0;   // |J^w − J|
  double emp_nominal_vs_offline = 0.0; // |J − V^w|
  std::optional<double> regret_bound;
  double disturbance_bound = 0.0;
  std::optional<double> nominal_bound;
  std::optional<double> regret_ratio;
  double disturbance_ratio = 0.0;
  std::optional<double> nominal_ratio;
  // Some ratio was 0/0 and is reported as 0.
  bool degenerate_ratio = false;
  bool margin_ok = false;
};

struct VerificationTable {
  BoundReport report;
  std::vector<VerificationRow> rows;
  std::optional<double> max_regret_ratio;
  double max_disturbance_ratio = 0.0;
  std::optional<double> max_nominal_ratio;

  // Every applicable ratio is ≤ 1.
  bool AllWithinBounds() const;
};

struct VerifyOptions {
  bool override_assumption_check = false;
  // Coordinates that receive disturbance mass; empty means all.
  std::vector<int> active_coordinates;
  Execution execution = Execution::kParallel;
};

/// Samples `trials` scenarios (trial i uses seed + i, sphere-surface values
/// of norm w_hat at uniformly random times) and compares the three empirical
/// cost gaps against their bounds.
///
/// Throws AssumptionViolated when the stability margin is not positive unless
/// options.override_assumption_check is set. With the override, the
/// disturbance-cost bound is still checked and the regret and nominal-gap
/// bounds are reported as not applicable.
VerificationTable VerifyBounds(const SystemModel& model,
                               const RiccatiData& riccati, int trials, int D,
                               double w_hat, const Eigen::VectorXd& x0,
                               std::uint64_t seed,
                               const VerifyOptions& options = {});

}  // namespace sparse_lqr
