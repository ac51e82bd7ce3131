#pragma once

#include <functional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "sparse_lqr/disturbance.h"
#include "sparse_lqr/lqr_core.h"
#include "sparse_lqr/policies.h"

namespace sparse_lqr {

enum class PolicyKind { kBlind, kDisturbanceAware, kOffline };

std::string ToString(PolicyKind kind);

// Policies borrow their precomputed data; the referents must outlive any
// rollout that uses them.
struct BlindPolicy {
  std::reference_wrapper<const RiccatiData> riccati;
};

struct DisturbanceAwarePolicy {
  std::reference_wrapper<const RiccatiData> riccati;
  std::reference_wrapper<const DisturbanceAwareTables> tables;
};

struct OfflinePolicy {
  std::reference_wrapper<const RiccatiData> riccati;
  std::reference_wrapper<const OfflineAuxiliary> aux;
};

using Policy = std::variant<BlindPolicy, DisturbanceAwarePolicy, OfflinePolicy>;

PolicyKind KindOf(const Policy& policy);

struct RolloutResult {
  PolicyKind policy = PolicyKind::kBlind;
  std::vector<Eigen::VectorXd> states;    // T + 1
  std::vector<Eigen::VectorXd> controls;  // T
  std::vector<double> stage_costs;        // T + 1, last is terminal
  std::vector<bool> disturbed;            // T, true where d_t ≠ 0 was applied
  double total_cost = 0.0;
  // Disturbance-aware rollouts only: the scenario is impossible under the
  // policy's probability model, or its values differ from the policy's.
  bool model_mismatch = false;
};

/// Simulates x_{t+1} = A x_t + B u_t + d_t for t = 0..T−1 under `policy`,
/// charging x_tᵀQx_t + u_tᵀRu_t per step and x_TᵀQ_T x_T at the end.
///
/// For the disturbance-aware policy the simulator owns the remaining-count
/// k, starting at |D| and decrementing after each realized disturbance; the
/// policy never sees the schedule. The offline policy reads d_t from the
/// scenario. Throws DimensionError if x0 does not match the model.
RolloutResult Rollout(const Policy& policy, const DisturbanceScenario& scenario,
                      const Eigen::VectorXd& x0, const SystemModel& model);

struct RegretSample {
  double blind_disturbed = 0.0;    // J^w
  double blind_nominal = 0.0;      // J, no disturbances
  double offline_disturbed = 0.0;  // V^w
  double regret = 0.0;             // J^w − V^w
};

/// Three realized costs on the same scenario and the blind policy's regret.
RegretSample EmpiricalRegret(const DisturbanceScenario& scenario,
                             const Eigen::VectorXd& x0,
                             const SystemModel& model,
                             const RiccatiData& riccati);

}  // namespace sparse_lqr
