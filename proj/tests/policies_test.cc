#include "sparse_lqr/policies.h"

#include <cmath>

#include <gtest/gtest.h>

#include "oracles/scenario_tree.h"
#include "oracles/stacked_lq.h"
#include "sparse_lqr/experiments.h"
#include "sparse_lqr/simulator.h"
#include "test_util.h"

namespace sparse_lqr {
namespace {

using testing::RandomMatrix;
using testing::RandomModel;
using testing::ScalarModel;
using testing::Vec;

DisturbanceScenario Scalar(int T, std::vector<int> times,
                           std::vector<double> values) {
  DisturbanceScenario s;
  s.horizon = T;
  s.times = std::move(times);
  for (double v : values) {
    s.values.push_back(Vec({v}));
    s.w_hat = std::max(s.w_hat, std::abs(v));
  }
  return s;
}

std::vector<Eigen::VectorXd> DenseSchedule(const DisturbanceScenario& s,
                                           int n) {
  std::vector<Eigen::VectorXd> d;
  for (int t = 0; t < s.horizon; ++t) d.push_back(DisturbanceAt(s, t, n));
  return d;
}

DisturbanceScenario RandomScenario(Rng& rng, int n, int T, int max_count) {
  SystemModel shape;
  shape.A = Eigen::MatrixXd::Identity(n, n);
  shape.T = T;
  SamplingSpec spec;
  spec.count = static_cast<int>(rng.Below(max_count + 1));
  spec.w_hat = 0.2 + rng.Uniform();
  return SampleScenario(rng.Below(1u << 30), spec, shape);
}

// ---------------------------------------------------------------------------
// Offline policy.

// A = B = Q = R = Q_T = 1, T = 2, d_1 = 1: S_1 = 0.5, S_0 = 0.6, P_1 = 1.5.
TEST(Offline, ScalarHandComputed) {
  const SystemModel model = ScalarModel(1, 1, 1, 1, 1, 2);
  const RiccatiData ric = RiccatiBackward(model);
  const DisturbanceScenario s = Scalar(2, {1}, {1.0});
  const OfflineAuxiliary aux = OfflinePrecompute(s, ric);
  EXPECT_NEAR(aux.v[2](0), 0.0, 1e-15);
  EXPECT_NEAR(aux.v[1](0), 1.0, 1e-15);
  EXPECT_NEAR(aux.v[0](0), 0.4, 1e-15);
  EXPECT_NEAR(OfflineAction(0, Vec({0.0}), aux, s, ric)(0), -0.2, 1e-15);
}

TEST(Offline, EmptyScenarioIsBlind) {
  Rng rng(2);
  const SystemModel model = RandomModel(rng, 3, 2, 10);
  const RiccatiData ric = RiccatiBackward(model);
  DisturbanceScenario s;
  s.horizon = 10;
  const OfflineAuxiliary aux = OfflinePrecompute(s, ric);
  const Eigen::VectorXd x = RandomMatrix(rng, 3, 1);
  for (int t = 0; t < 10; ++t) {
    EXPECT_EQ(OfflineAction(t, x, aux, s, ric), BlindAction(t, x, ric));
    EXPECT_EQ(aux.q[t], 0.0);
  }
}

// The realized offline cost equals V_0(x0) and both match the brute-force
// optimum over all input sequences.
TEST(Offline, MatchesStackedOptimum) {
  Rng rng(21);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 1 + static_cast<int>(rng.Below(3));
    const int m = 1 + static_cast<int>(rng.Below(2));
    const int T = 3 + static_cast<int>(rng.Below(8));
    const SystemModel model = RandomModel(rng, n, m, T);
    const RiccatiData ric = RiccatiBackward(model);
    const DisturbanceScenario s = RandomScenario(rng, n, T, std::min(T, 4));
    const Eigen::VectorXd x0 = RandomMatrix(rng, n, 1, 2.0);
    const OfflineAuxiliary aux = OfflinePrecompute(s, ric);
    const RolloutResult run = Rollout(OfflinePolicy{ric, aux}, s, x0, model);
    const auto oracle = oracle::SolveStacked(model, x0, DenseSchedule(s, n));

    const double scale = std::max(1.0, std::abs(oracle.cost));
    EXPECT_NEAR(run.total_cost, oracle.cost, 1e-8 * scale) << trial;
    EXPECT_NEAR(OfflineCostToGo(0, x0, aux, ric), oracle.cost, 1e-8 * scale);
    for (int t = 0; t < T; ++t) {
      EXPECT_LE((run.controls[t] - oracle.U.segment(m * t, m)).norm(),
                1e-7 * std::max(1.0, oracle.U.norm()));
    }
  }
}

TEST(Offline, HorizonMismatchThrows) {
  const RiccatiData ric = RiccatiBackward(ScalarModel(1, 1, 1, 1, 1, 4));
  EXPECT_THROW(OfflinePrecompute(Scalar(5, {1}, {0.1}), ric),
               std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Disturbance-aware policy: reductions.

TEST(DisturbanceAware, ZeroProbabilityIsBlind) {
  Rng rng(4);
  const SystemModel model = RandomModel(rng, 3, 2, 12);
  const RiccatiData ric = RiccatiBackward(model);
  std::vector<Eigen::VectorXd> w = {RandomMatrix(rng, 3, 1),
                                    RandomMatrix(rng, 3, 1)};
  const auto tables = DaPrecompute(w, ProbabilityModel::Zero(12, 2), ric, 2);
  for (int t = 0; t < 12; ++t) {
    const Eigen::VectorXd x = RandomMatrix(rng, 3, 1);
    for (int k = 0; k <= 2; ++k) {
      EXPECT_LE((DaAction(t, x, k, tables, ric) - BlindAction(t, x, ric))
                    .cwiseAbs()
                    .maxCoeff(),
                1e-12);
      EXPECT_EQ(tables.r(t, k).norm(), 0.0);
      EXPECT_EQ(tables.c(t, k), 0.0);
    }
  }
}

TEST(DisturbanceAware, NoneRemainingIsBlind) {
  Rng rng(6);
  const SystemModel model = RandomModel(rng, 2, 1, 9);
  const RiccatiData ric = RiccatiBackward(model);
  const auto tables = DaPrecompute({RandomMatrix(rng, 2, 1)},
                                   ProbabilityModel::Uniform(), ric, 1);
  for (int t = 0; t < 9; ++t) {
    const Eigen::VectorXd x = RandomMatrix(rng, 2, 1);
    EXPECT_EQ(DaAction(t, x, 0, tables, ric), BlindAction(t, x, ric));
  }
  EXPECT_THROW(DaAction(0, Vec({0, 0}), 2, tables, ric), std::out_of_range);
}

// With a probability model that is certain about the schedule, the DA policy
// is the offline policy and r_t^k = ½ v_t along the realized path.
TEST(DisturbanceAware, CertainModelIsOffline) {
  Rng rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + static_cast<int>(rng.Below(2));
    const int T = 5 + static_cast<int>(rng.Below(20));
    const SystemModel model = RandomModel(rng, n, 1, T);
    const RiccatiData ric = RiccatiBackward(model);
    const DisturbanceScenario s = RandomScenario(rng, n, T, 4);
    const int K = s.size();
    const OfflineAuxiliary aux = OfflinePrecompute(s, ric);
    const auto tables = DaPrecompute(ReverseChronological(s),
                                     ProbabilityModel::Certain(s), ric, K);
    const Eigen::VectorXd x0 = RandomMatrix(rng, n, 1);
    const RolloutResult da =
        Rollout(DisturbanceAwarePolicy{ric, tables}, s, x0, model);
    const RolloutResult off = Rollout(OfflinePolicy{ric, aux}, s, x0, model);
    EXPECT_FALSE(da.model_mismatch);
    for (int t = 0; t < T; ++t) {
      EXPECT_LE((da.controls[t] - off.controls[t]).norm(), 1e-8) << t;
      const int k = RemainingCount(s, t);
      EXPECT_LE((tables.r(t, k) - 0.5 * aux.v[t]).norm(),
                1e-8 * std::max(1.0, aux.v[t].norm()));
    }
    EXPECT_NEAR(DaExpectedCost(0, x0, K, tables, ric),
                OfflineCostToGo(0, x0, aux, ric),
                1e-8 * std::max(1.0, off.total_cost));
  }
}

// ---------------------------------------------------------------------------
// Disturbance-aware policy against the exhaustive scenario tree.

struct TreeCase {
  oracle::ScalarSystem sys;
  std::vector<double> w;  // w[k−1] = w_k
  ProbabilityModel prob = ProbabilityModel::Uniform();
};

TreeCase RandomTreeCase(Rng& rng, bool tabled) {
  TreeCase c;
  c.sys.a = 2.0 * rng.Uniform() - 1.0 + (rng.Uniform() < 0.3 ? 1.0 : 0.0);
  c.sys.b = 2.0 * rng.Uniform() - 1.0;
  c.sys.q = rng.Uniform();
  c.sys.q_T = 0.1 + rng.Uniform();
  c.sys.r = 0.1 + rng.Uniform();
  c.sys.T = 1 + static_cast<int>(rng.Below(4));
  const int K = 1 + static_cast<int>(rng.Below(2));
  for (int k = 0; k < K; ++k) c.w.push_back(2.0 * rng.Uniform() - 1.0);
  if (tabled) {
    std::vector<std::vector<double>> grid(c.sys.T, std::vector<double>(K + 1));
    for (auto& row : grid) {
      for (int k = 1; k <= K; ++k) {
        const double u = rng.Uniform();
        row[k] = u < 0.15 ? 0.0 : (u > 0.85 ? 1.0 : rng.Uniform());
      }
    }
    c.prob = ProbabilityModel::Table(grid);
  }
  return c;
}

void CheckAgainstTree(const TreeCase& c) {
  const int K = static_cast<int>(c.w.size());
  const SystemModel model =
      ScalarModel(c.sys.a, c.sys.b, c.sys.q, c.sys.q_T, c.sys.r, c.sys.T);
  const RiccatiData ric = RiccatiBackward(model);
  std::vector<Eigen::VectorXd> w;
  for (double v : c.w) w.push_back(Vec({v}));
  const auto tables = DaPrecompute(w, c.prob, ric, K);
  const int T = c.sys.T;
  const auto prob = [&](int t, int k) { return c.prob(t, k, T); };
  const auto root = oracle::BuildTree(c.sys, c.w, prob, 0, K);

  oracle::ForEachNode(*root, [&](const oracle::TreeNode& node) {
    for (double x : {-1.3, 0.0, 0.7}) {
      const Eigen::VectorXd xv = Vec({x});
      const double expected = node.value(x);
      EXPECT_NEAR(DaExpectedCost(node.t, xv, node.k, tables, ric), expected,
                  1e-8 * std::max(1.0, std::abs(expected)))
          << "t=" << node.t << " k=" << node.k << " x=" << x;
      if (node.t < T) {
        const double u = node.gain * x + node.offset;
        EXPECT_NEAR(DaAction(node.t, xv, node.k, tables, ric)(0), u,
                    1e-8 * std::max(1.0, std::abs(u)));
      }
    }
  });
}

TEST(DisturbanceAware, MatchesScenarioTreeUniform) {
  Rng rng(31);
  for (int i = 0; i < 60; ++i) CheckAgainstTree(RandomTreeCase(rng, false));
}

TEST(DisturbanceAware, MatchesScenarioTreeTabled) {
  Rng rng(32);
  for (int i = 0; i < 60; ++i) CheckAgainstTree(RandomTreeCase(rng, true));
}

// The expected cost is the probability-weighted average of realized rollout
// costs over every possible schedule.
TEST(DisturbanceAware, ExpectedCostIsPathAverage) {
  Rng rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2, T = 6, K = 2;
    const SystemModel model = RandomModel(rng, n, 1, T);
    const RiccatiData ric = RiccatiBackward(model);
    std::vector<Eigen::VectorXd> w = {RandomMatrix(rng, n, 1),
                                      RandomMatrix(rng, n, 1)};
    const auto tables = DaPrecompute(w, ProbabilityModel::Uniform(), ric, K);
    const Eigen::VectorXd x0 = RandomMatrix(rng, n, 1);

    std::vector<oracle::Path> paths;
    oracle::EnumeratePaths(
        T, [T](int t, int k) { return UniformConditional(t, k, T); }, 0, K,
        {}, paths);
    double average = 0.0;
    for (const auto& path : paths) {
      DisturbanceScenario s;
      s.horizon = T;
      s.times = path.times;
      s.values = {w[1], w[0]};  // chronological: w_2 first
      s.w_hat = std::max(w[0].norm(), w[1].norm());
      const RolloutResult run =
          Rollout(DisturbanceAwarePolicy{ric, tables}, s, x0, model);
      EXPECT_FALSE(run.model_mismatch);
      average += path.weight * run.total_cost;
    }
    EXPECT_NEAR(DaExpectedCost(0, x0, K, tables, ric), average,
                1e-9 * std::max(1.0, average));
  }
}

// ---------------------------------------------------------------------------
// Linear-term behaviour on the double integrator.

TEST(DisturbanceAware, LinearTermDecaysWithHorizon) {
  const ExperimentConfig config = BuiltinStudyConfig();
  const auto w = SweepValues(config, 1);
  double previous = std::numeric_limits<double>::infinity();
  double r_max_first = 0.0;
  for (int T : {200, 400, 800}) {
    const RiccatiData ric = RiccatiBackward(DoubleIntegratorModel(0.005, T));
    const auto tables = DaPrecompute(w, ProbabilityModel::Uniform(), ric, 1);
    const double r0 = tables.r(0, 1).norm();
    EXPECT_LT(r0, previous) << "T=" << T;
    previous = r0;
    double r_max = 0.0;
    for (int t = 0; t <= T; ++t) r_max = std::max(r_max, tables.r(t, 1).norm());
    if (T == 200) r_max_first = r_max;
    // The supremum does not grow with the horizon.
    EXPECT_LE(r_max, r_max_first * (1.0 + 1e-9));
  }
}

}  // namespace
}  // namespace sparse_lqr
