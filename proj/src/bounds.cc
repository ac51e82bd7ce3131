#include "sparse_lqr/bounds.h"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "sparse_lqr/disturbance.h"
#include "sparse_lqr/errors.h"
#include "sparse_lqr/simulator.h"

namespace sparse_lqr {

namespace {

void CheckCommon(int D, double w_hat, double x0_norm, double p_hat) {
  if (D < 0 || w_hat < 0.0 || x0_norm < 0.0) {
    throw std::invalid_argument("bound inputs must be nonnegative");
  }
  if (!(p_hat >= 1.0)) {
    throw std::invalid_argument("p_hat must be >= 1");
  }
}

void CheckGamma(double gamma) {
  if (!(gamma > 0.0)) {
    std::ostringstream msg;
    msg << "stability margin gamma = " << gamma
        << " is not positive; bound not applicable";
    throw AssumptionViolated(msg.str());
  }
}

// emp / bound with 0/0 → 0.
double Ratio(double emp, double bound, bool& degenerate) {
  if (bound == 0.0) {
    if (emp == 0.0) {
      degenerate = true;
      return 0.0;
    }
    return std::numeric_limits<double>::infinity();
  }
  return emp / bound;
}

VerificationRow EvaluateTrial(const SystemModel& model,
                              const RiccatiData& riccati,
                              const BoundReport& report, int trial, int D,
                              double w_hat, const Eigen::VectorXd& x0,
                              std::uint64_t seed,
                              const std::vector<int>& coords) {
  SamplingSpec spec;
  spec.count = D;
  spec.w_hat = w_hat;
  spec.law = ValueLaw::kSphereSurface;
  spec.active_coordinates = coords;
  const DisturbanceScenario scenario =
      SampleScenario(seed + static_cast<std::uint64_t>(trial), spec, model);
  const RegretSample s = EmpiricalRegret(scenario, x0, model, riccati);

  VerificationRow row;
  row.trial = trial;
  row.D = D;
  row.w_hat = w_hat;
  row.emp_blind_vs_offline = std::abs(s.blind_disturbed - s.offline_disturbed);
  row.emp_blind_vs_nominal = std::abs(s.blind_disturbed - s.blind_nominal);
  row.emp_nominal_vs_offline = std::abs(s.blind_nominal - s.offline_disturbed);
  row.regret_bound = report.regret_bound;
  row.disturbance_bound = report.disturbance_bound;
  row.nominal_bound = report.nominal_bound;
  row.margin_ok = report.margin_ok;
  row.disturbance_ratio = Ratio(row.emp_blind_vs_nominal, row.disturbance_bound, row.degenerate_ratio);
  if (row.regret_bound) {
    row.regret_ratio =
        Ratio(row.emp_blind_vs_offline, *row.regret_bound, row.degenerate_ratio);
  }
  if (row.nominal_bound) {
    row.nominal_ratio =
        Ratio(row.emp_nominal_vs_offline, *row.nominal_bound, row.degenerate_ratio);
  }
  return row;
}

}  // namespace

double DisturbanceCostBound(int D, double w_hat, double x0_norm, double p_hat) {
  CheckCommon(D, w_hat, x0_norm, p_hat);
  return 2.0 * D * w_hat * p_hat * (x0_norm + w_hat + D * w_hat * p_hat);
}

double NominalGapBound(int D, double w_hat, double x0_norm, double p_hat,
                     double gamma, double norm_B, double lambda_min_R) {
  CheckCommon(D, w_hat, x0_norm, p_hat);
  CheckGamma(gamma);
  if (!(lambda_min_R > 0.0)) {
    throw std::invalid_argument("lambda_min(R) must be positive");
  }
  const double d = D;
  return 2.0 * x0_norm * d * p_hat * w_hat +
         d * d * w_hat * p_hat *
             (3.0 * w_hat + (3.0 * p_hat * w_hat + 1.0 / (gamma * gamma)) *
                                norm_B * norm_B / lambda_min_R);
}

double RegretBound(int D, double w_hat, double x0_norm, double p_hat,
                     double gamma, double norm_B, double lambda_min_R) {
  CheckCommon(D, w_hat, x0_norm, p_hat);
  CheckGamma(gamma);
  if (!(lambda_min_R > 0.0)) {
    throw std::invalid_argument("lambda_min(R) must be positive");
  }
  const double d = D;
  const double first = 2.0 * d * w_hat * p_hat * (2.0 * x0_norm + w_hat);
  const double second =
      d * d * w_hat * w_hat * (2.0 * p_hat * p_hat + 3.0 * p_hat);
  const double third = d * d * w_hat * p_hat *
                       (3.0 * p_hat * w_hat + 1.0 / (gamma * gamma)) *
                       norm_B * norm_B / lambda_min_R;
  return first + second + third;
}

BoundReport MakeBoundReport(const SystemModel& model,
                            const RiccatiData& riccati, int D, double w_hat,
                            const Eigen::VectorXd& x0) {
  BoundReport report;
  report.p_hat = riccati.p_hat;
  report.gamma_hat = riccati.gamma_hat;
  report.lambda_min_R = MinEigenvalue(model.R);
  report.norm_B = SpectralNorm(model.B);
  report.norm_x0 = x0.norm();
  report.D_count = D;
  report.w_hat = w_hat;
  report.margin_ok = riccati.margin_ok();
  report.unstable_steps = riccati.unstable_steps();
  report.disturbance_bound = DisturbanceCostBound(D, w_hat, report.norm_x0, report.p_hat);
  if (report.margin_ok) {
    report.regret_bound = RegretBound(D, w_hat, report.norm_x0, report.p_hat,
                                report.gamma_hat, report.norm_B,
                                report.lambda_min_R);
    report.nominal_bound = NominalGapBound(D, w_hat, report.norm_x0, report.p_hat,
                                report.gamma_hat, report.norm_B,
                                report.lambda_min_R);
  }
  return report;
}

bool VerificationTable::AllWithinBounds() const {
  if (max_disturbance_ratio > 1.0) return false;
  if (max_regret_ratio && *max_regret_ratio > 1.0) return false;
  if (max_nominal_ratio && *max_nominal_ratio > 1.0) return false;
  return true;
}

VerificationTable VerifyBounds(const SystemModel& model,
                               const RiccatiData& riccati, int trials, int D,
                               double w_hat, const Eigen::VectorXd& x0,
                               std::uint64_t seed,
                               const VerifyOptions& options) {
  if (trials < 0) throw std::invalid_argument("trials must be >= 0");
  if (!riccati.margin_ok() && !options.override_assumption_check) {
    std::ostringstream msg;
    msg << "stability margin gamma_hat = " << riccati.gamma_hat << " ("
        << riccati.unstable_steps()
        << " steps with ||A - B K_t|| >= 1); pass the override to check the "
           "bound that does not need it";
    throw AssumptionViolated(msg.str());
  }

  VerificationTable table;
  table.report = MakeBoundReport(model, riccati, D, w_hat, x0);
  table.rows.resize(trials);

  if (options.execution == Execution::kParallel) {
    // Per-trial seeds make the rows independent of scheduling.
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < trials; ++i) {
      try {
        table.rows[i] = EvaluateTrial(model, riccati, table.report, i, D,
                                      w_hat, x0, seed,
                                      options.active_coordinates);
      } catch (...) {
#pragma omp critical(sparse_lqr_verify_failure)
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  } else {
    for (int i = 0; i < trials; ++i) {
      table.rows[i] = EvaluateTrial(model, riccati, table.report, i, D, w_hat,
                                    x0, seed, options.active_coordinates);
    }
  }

  if (table.report.regret_bound) table.max_regret_ratio = 0.0;
  if (table.report.nominal_bound) table.max_nominal_ratio = 0.0;
  for (const auto& row : table.rows) {
    table.max_disturbance_ratio = std::max(table.max_disturbance_ratio, row.disturbance_ratio);
    if (row.regret_ratio) table.max_regret_ratio = std::max(*table.max_regret_ratio, *row.regret_ratio);
    if (row.nominal_ratio) table.max_nominal_ratio = std::max(*table.max_nominal_ratio, *row.nominal_ratio);
  }
  return table;
}

}  // namespace sparse_lqr
