// The OpenMP loops must reproduce the serial reference exactly, whatever the
// thread count or schedule.

#include <sstream>

#include <gtest/gtest.h>

#include "sparse_lqr/bounds.h"
#include "sparse_lqr/experiments.h"
#include "test_util.h"

namespace sparse_lqr {
namespace {

TEST(ParallelConsistency, VerifyBoundsRowsIdentical) {
  const ExperimentConfig config = BuiltinStudyConfig();
  const RiccatiData riccati = RiccatiBackward(config.model);
  VerifyOptions options;
  options.override_assumption_check = true;
  options.active_coordinates = config.disturbances.active_coordinates;

  options.execution = Execution::kSerial;
  const auto serial = VerifyBounds(config.model, riccati, 64, 4, 0.3,
                                   config.x0, 42, options);
  options.execution = Execution::kParallel;
  const auto parallel = VerifyBounds(config.model, riccati, 64, 4, 0.3,
                                     config.x0, 42, options);

  std::ostringstream a, b;
  WriteBoundsCsv(a, {serial});
  WriteBoundsCsv(b, {parallel});
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(serial.max_disturbance_ratio, parallel.max_disturbance_ratio);
}

TEST(ParallelConsistency, StableModelAllBounds) {
  const SystemModel model = testing::ScalarModel(0.6, 1, 1, 1, 0.5, 60);
  const RiccatiData riccati = RiccatiBackward(model);
  VerifyOptions options;
  options.execution = Execution::kSerial;
  const auto serial =
      VerifyBounds(model, riccati, 50, 3, 0.4, testing::Vec({2.0}), 9, options);
  options.execution = Execution::kParallel;
  const auto parallel =
      VerifyBounds(model, riccati, 50, 3, 0.4, testing::Vec({2.0}), 9, options);
  ASSERT_EQ(serial.rows.size(), parallel.rows.size());
  for (size_t i = 0; i < serial.rows.size(); ++i) {
    EXPECT_EQ(serial.rows[i].emp_blind_vs_offline,
              parallel.rows[i].emp_blind_vs_offline);
    EXPECT_EQ(serial.rows[i].regret_ratio, parallel.rows[i].regret_ratio);
    EXPECT_EQ(serial.rows[i].nominal_ratio, parallel.rows[i].nominal_ratio);
  }
}

TEST(ParallelConsistency, SweepAndDiagnosticsIdentical) {
  ExperimentConfig config = BuiltinStudyConfig();
  config.sweep.horizons = {50, 100, 200, 400, 600};
  config.sweep.budgets = {0, 1, 3, 5};

  std::ostringstream s1, s2, d1, d2;
  WriteSweepCsv(s1, RunSweep(config, Execution::kSerial));
  WriteSweepCsv(s2, RunSweep(config, Execution::kParallel));
  EXPECT_EQ(s1.str(), s2.str());
  WriteDiagnosticsCsv(d1, RunConvergenceDiagnostics(config, Execution::kSerial));
  WriteDiagnosticsCsv(d2,
                      RunConvergenceDiagnostics(config, Execution::kParallel));
  EXPECT_EQ(d1.str(), d2.str());
}

// One precompute per horizon serves every budget: the row for k must not
// depend on which larger budgets share the table.
TEST(ParallelConsistency, SharedTablesMatchPerPairBuild) {
  ExperimentConfig config = BuiltinStudyConfig();
  config.sweep.horizons = {300};
  config.sweep.budgets = {1, 2, 3, 4};
  const SweepResult shared = RunSweep(config, Execution::kSerial);
  for (const auto& row : shared.rows) {
    ExperimentConfig single = config;
    single.sweep.budgets = {row.k};
    const SweepResult alone = RunSweep(single, Execution::kSerial);
    ASSERT_EQ(alone.rows.size(), 1u);
    EXPECT_EQ(alone.rows[0].norm_diff, row.norm_diff) << "k=" << row.k;
  }
}

TEST(ParallelConsistency, ErrorsPropagateFromWorkers) {
  ExperimentConfig config = BuiltinStudyConfig();
  config.disturbances.law = ValueLaw::kFixedList;
  config.disturbances.values = {testing::Vec({0.1, 0, 0, 0})};
  config.sweep.budgets = {1, 2};  // needs two values
  EXPECT_THROW(RunSweep(config, Execution::kParallel), std::invalid_argument);
}

}  // namespace
}  // namespace sparse_lqr
