#include "sparse_lqr/simulator.h"

#include <string>

#include "sparse_lqr/errors.h"

namespace sparse_lqr {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

const RiccatiData& RiccatiOf(const Policy& policy) {
  return std::visit([](const auto& p) -> const RiccatiData& { return p.riccati; },
                    policy);
}

bool SameValues(const std::vector<Eigen::VectorXd>& a,
                const std::vector<Eigen::VectorXd>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return false;
  }
  return true;
}

}  // namespace

std::string ToString(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kBlind:
      return "blind";
    case PolicyKind::kDisturbanceAware:
      return "disturbance_aware";
    case PolicyKind::kOffline:
      return "offline";
  }
  return "unknown";
}

PolicyKind KindOf(const Policy& policy) {
  return std::visit(
      Overloaded{
          [](const BlindPolicy&) { return PolicyKind::kBlind; },
          [](const DisturbanceAwarePolicy&) {
            return PolicyKind::kDisturbanceAware;
          },
          [](const OfflinePolicy&) { return PolicyKind::kOffline; },
      },
      policy);
}

RolloutResult Rollout(const Policy& policy, const DisturbanceScenario& scenario,
                      const Eigen::VectorXd& x0, const SystemModel& model) {
  const int T = model.T;
  const int n = model.state_dim();
  if (x0.size() != n) {
    throw DimensionError("initial state has dimension " +
                         std::to_string(x0.size()) + ", model has " +
                         std::to_string(n));
  }
  if (scenario.horizon != T) {
    throw std::invalid_argument("scenario horizon " +
                                std::to_string(scenario.horizon) +
                                " does not match model horizon " +
                                std::to_string(T));
  }
  const RiccatiData& riccati = RiccatiOf(policy);
  if (riccati.horizon() != T) {
    throw std::invalid_argument("policy was precomputed for horizon " +
                                std::to_string(riccati.horizon()));
  }

  RolloutResult out;
  out.policy = KindOf(policy);
  out.states.reserve(T + 1);
  out.controls.reserve(T);
  out.stage_costs.reserve(T + 1);
  out.disturbed.reserve(T);

  int k_remaining = scenario.size();
  if (const auto* da = std::get_if<DisturbanceAwarePolicy>(&policy)) {
    const DisturbanceAwareTables& tables = da->tables;
    if (k_remaining > tables.max_k()) {
      throw std::out_of_range("scenario has " + std::to_string(k_remaining) +
                              " disturbances, tables cover " +
                              std::to_string(tables.max_k()));
    }
    out.model_mismatch =
        !SameValues(ReverseChronological(scenario), tables.next_values());
  }

  Eigen::VectorXd x = x0;
  int next = 0;
  for (int t = 0; t < T; ++t) {
    const bool hit = next < scenario.size() && scenario.times[next] == t;
    const Eigen::VectorXd u = std::visit(
        Overloaded{
            [&](const BlindPolicy& p) { return BlindAction(t, x, p.riccati); },
            [&](const DisturbanceAwarePolicy& p) {
              const double prob = p.tables.get().p(t, k_remaining);
              if ((hit && prob == 0.0) || (!hit && prob == 1.0)) {
                out.model_mismatch = true;
              }
              return DaAction(t, x, k_remaining, p.tables, p.riccati);
            },
            [&](const OfflinePolicy& p) {
              return OfflineAction(t, x, p.aux, scenario, p.riccati);
            },
        },
        policy);

    out.stage_costs.push_back(x.dot(model.Q * x) + u.dot(model.R * u));
    out.states.push_back(x);
    Eigen::VectorXd x_next = model.A * x + model.B * u;
    if (hit) {
      x_next += scenario.values[next];
      ++next;
      --k_remaining;
    }
    out.controls.push_back(u);
    out.disturbed.push_back(hit);
    x = std::move(x_next);
  }
  out.stage_costs.push_back(x.dot(model.Q_T * x));
  out.states.push_back(std::move(x));

  out.total_cost = 0.0;
  for (double c : out.stage_costs) out.total_cost += c;
  return out;
}

RegretSample EmpiricalRegret(const DisturbanceScenario& scenario,
                             const Eigen::VectorXd& x0,
                             const SystemModel& model,
                             const RiccatiData& riccati) {
  DisturbanceScenario nominal;
  nominal.horizon = scenario.horizon;
  nominal.w_hat = scenario.w_hat;

  const OfflineAuxiliary aux = OfflinePrecompute(scenario, riccati);
  RegretSample sample;
  sample.blind_disturbed =
      Rollout(BlindPolicy{riccati}, scenario, x0, model).total_cost;
  sample.blind_nominal =
      Rollout(BlindPolicy{riccati}, nominal, x0, model).total_cost;
  sample.offline_disturbed =
      Rollout(OfflinePolicy{riccati, aux}, scenario, x0, model).total_cost;
  sample.regret = sample.blind_disturbed - sample.offline_disturbed;
  return sample;
}

}  // namespace sparse_lqr
