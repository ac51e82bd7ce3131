#include "sparse_lqr/policies.h"

#include <stdexcept>
#include <string>

#include "sparse_lqr/errors.h"

namespace sparse_lqr {

namespace {

void CheckStep(int t, int T) {
  if (t < 0 || t >= T) {
    throw std::out_of_range("step " + std::to_string(t) + " outside [0, " +
                            std::to_string(T) + ")");
  }
}

void CheckTime(int t, int T) {
  if (t < 0 || t > T) {
    throw std::out_of_range("time " + std::to_string(t) + " outside [0, " +
                            std::to_string(T) + "]");
  }
}

}  // namespace

Eigen::VectorXd BlindAction(int t, const Eigen::VectorXd& x,
                            const RiccatiData& riccati) {
  CheckStep(t, riccati.horizon());
  return -riccati.K[t] * x;
}

OfflineAuxiliary OfflinePrecompute(const DisturbanceScenario& scenario,
                                   const RiccatiData& riccati) {
  const int T = riccati.horizon();
  const int n = riccati.state_dim();
  if (scenario.horizon != T) {
    throw std::invalid_argument("scenario horizon " +
                                std::to_string(scenario.horizon) +
                                " does not match model horizon " +
                                std::to_string(T));
  }
  ValidateScenario(scenario, n);
  const Eigen::MatrixXd At = riccati.A.transpose();

  OfflineAuxiliary aux;
  aux.v.assign(T + 1, Eigen::VectorXd::Zero(n));
  aux.q.assign(T + 1, 0.0);

  // Chronological index of the latest disturbance not yet consumed.
  int next = scenario.size() - 1;
  for (int t = T - 1; t >= 0; --t) {
    const Eigen::VectorXd& v_next = aux.v[t + 1];
    const bool disturbed = next >= 0 && scenario.times[next] == t;
    const bool carried = !v_next.isZero(0.0);
    if (!disturbed && !carried) continue;

    const Eigen::MatrixXd& S = riccati.S[t];
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    double q = aux.q[t + 1];
    Eigen::MatrixXd P_inv;
    if (carried) {
      P_inv = InverseSpd(riccati.P[t + 1], "P_" + std::to_string(t + 1));
      v.noalias() += At * (S * (P_inv * v_next));
      q -= 0.25 * v_next.dot(riccati.F[t] * v_next);
    }
    if (disturbed) {
      const Eigen::VectorXd& d = scenario.values[next];
      const Eigen::VectorXd Sd = S * d;
      v.noalias() += 2.0 * (At * Sd);
      q += d.dot(Sd);
      if (carried) q += v_next.dot(P_inv * Sd);
      --next;
    }
    aux.v[t] = std::move(v);
    aux.q[t] = q;
  }
  return aux;
}

Eigen::VectorXd OfflineAction(int t, const Eigen::VectorXd& x,
                              const OfflineAuxiliary& aux,
                              const DisturbanceScenario& scenario,
                              const RiccatiData& riccati) {
  CheckStep(t, riccati.horizon());
  const Eigen::VectorXd d = DisturbanceAt(scenario, t, riccati.state_dim());
  return -riccati.K[t] * x -
         riccati.G[t] * (riccati.P[t + 1] * d + 0.5 * aux.v[t + 1]);
}

double OfflineCostToGo(int t, const Eigen::VectorXd& x,
                       const OfflineAuxiliary& aux,
                       const RiccatiData& riccati) {
  CheckTime(t, riccati.horizon());
  return x.dot(riccati.P[t] * x) + aux.v[t].dot(x) + aux.q[t];
}

DisturbanceAwareTables::DisturbanceAwareTables(
    int horizon, int max_k, int state_dim,
    std::vector<Eigen::VectorXd> next_values, ProbabilityModel prob)
    : horizon_(horizon),
      max_k_(max_k),
      state_dim_(state_dim),
      next_values_(std::move(next_values)),
      prob_(std::move(prob)),
      r_(Eigen::MatrixXd::Zero(
          state_dim, static_cast<Eigen::Index>(horizon + 1) * (max_k + 1))),
      c_(static_cast<std::size_t>(horizon + 1) * (max_k + 1), 0.0) {}

Eigen::VectorXd DisturbanceAwareTables::Drive(
    int t, int k, const RiccatiData& riccati) const {
  if (k == 0) return Eigen::VectorXd::Zero(state_dim_);
  const double p = this->p(t, k);
  Eigen::VectorXd g = (1.0 - p) * r(t + 1, k) + p * r(t + 1, k - 1);
  if (p != 0.0) g.noalias() += p * (riccati.P[t + 1] * w(k));
  return g;
}

DisturbanceAwareTables DaPrecompute(std::vector<Eigen::VectorXd> next_values,
                                    const ProbabilityModel& prob,
                                    const RiccatiData& riccati, int max_k) {
  const int T = riccati.horizon();
  const int n = riccati.state_dim();
  if (max_k < 0) throw std::invalid_argument("max_k must be >= 0");
  if (static_cast<int>(next_values.size()) < max_k) {
    throw std::invalid_argument("need " + std::to_string(max_k) +
                                " disturbance values, got " +
                                std::to_string(next_values.size()));
  }
  next_values.resize(max_k);
  for (const auto& w : next_values) {
    if (w.size() != n) {
      throw DimensionError("disturbance value has dimension " +
                           std::to_string(w.size()) + ", expected " +
                           std::to_string(n));
    }
  }
  prob.CheckCovers(T, max_k);

  DisturbanceAwareTables tables(T, max_k, n, std::move(next_values), prob);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  for (int t = T - 1; t >= 0; --t) {
    const Eigen::MatrixXd& P = riccati.P[t + 1];
    const Eigen::MatrixXd& F = riccati.F[t];
    // Aᵀ(I − F_t P_{t+1})ᵀ
    const Eigen::MatrixXd U = riccati.A.transpose() * (I - F * P).transpose();
    for (int k = 1; k <= max_k; ++k) {
      const double p = tables.p(t, k);
      const Eigen::VectorXd g = tables.Drive(t, k, riccati);
      double c = (1.0 - p) * tables.c(t + 1, k) + p * tables.c(t + 1, k - 1) -
                 g.dot(F * g);
      if (p != 0.0) {
        const Eigen::VectorXd& w = tables.w(k);
        c += p * w.dot(P * w) + 2.0 * p * tables.r(t + 1, k - 1).dot(w);
      }
      tables.r(t, k) = U * g;
      tables.c(t, k) = c;
    }
  }
  return tables;
}

Eigen::VectorXd DaAction(int t, const Eigen::VectorXd& x, int k_remaining,
                         const DisturbanceAwareTables& tables,
                         const RiccatiData& riccati) {
  CheckStep(t, riccati.horizon());
  if (k_remaining < 0 || k_remaining > tables.max_k()) {
    throw std::out_of_range("k_remaining " + std::to_string(k_remaining) +
                            " outside [0, " + std::to_string(tables.max_k()) +
                            "]");
  }
  if (k_remaining == 0) return BlindAction(t, x, riccati);
  return -riccati.K[t] * x -
         riccati.G[t] * tables.Drive(t, k_remaining, riccati);
}

double DaExpectedCost(int t, const Eigen::VectorXd& x, int k,
                      const DisturbanceAwareTables& tables,
                      const RiccatiData& riccati) {
  CheckTime(t, riccati.horizon());
  if (k < 0 || k > tables.max_k()) {
    throw std::out_of_range("k " + std::to_string(k) + " outside [0, " +
                            std::to_string(tables.max_k()) + "]");
  }
  return x.dot(riccati.P[t] * x) + 2.0 * tables.r(t, k).dot(x) +
         tables.c(t, k);
}

}  // namespace sparse_lqr
