#include "sparse_lqr/experiments.h"

#include <algorithm>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "sparse_lqr/policies.h"

namespace sparse_lqr {

namespace {

// Runs body(i) for i in [0, count), serially or under OpenMP, rethrowing the
// first exception on the calling thread.
template <class Body>
void ForEachIndex(int count, Execution execution, Body&& body) {
  if (execution == Execution::kSerial) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < count; ++i) {
    try {
      body(i);
    } catch (...) {
#pragma omp critical(sparse_lqr_experiment_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

std::vector<int> SortedUnique(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

// Tables for every budget up to max_k at horizon T. Row k of the grid only
// depends on rows ≤ k, so one precompute serves every budget in the sweep.
struct HorizonTables {
  RiccatiData riccati;
  DisturbanceAwareTables tables;
};

HorizonTables BuildHorizon(const ExperimentConfig& config, int T, int max_k,
                           const std::vector<Eigen::VectorXd>& values) {
  SystemModel model = config.model;
  model.T = T;
  RiccatiData riccati = RiccatiBackward(model);
  DisturbanceAwareTables tables =
      DaPrecompute(values, config.probability, riccati, max_k);
  return {std::move(riccati), std::move(tables)};
}

void RequireSweepable(const ExperimentConfig& config) {
  if (config.probability.kind() != ProbabilityModel::Kind::kUniformConditional &&
      SortedUnique(config.sweep.horizons).size() > 1) {
    throw std::invalid_argument(
        "a probability table is tied to one horizon; sweeps over several "
        "horizons need the uniform conditional model");
  }
}

std::string Na() { return "NA"; }

std::string Opt(const std::optional<double>& x) {
  return x ? FormatReal(*x) : Na();
}

}  // namespace

DisturbanceScenario TrajectoryScenario(const ExperimentConfig& config) {
  ValidateConfig(config);
  const auto& spec = config.disturbances;
  const int T = config.model.T;
  const int n = config.model.state_dim();

  SamplingSpec sampling;
  sampling.count = spec.count;
  sampling.w_hat = spec.w_hat;
  sampling.law = spec.law;
  sampling.active_coordinates = spec.active_coordinates;
  if (spec.law == ValueLaw::kFixedList) {
    sampling.fixed_values.assign(spec.values.begin(),
                                 spec.values.begin() + spec.count);
  }
  DisturbanceScenario scenario =
      SampleScenario(config.seed, sampling, config.model);
  if (spec.placement == Placement::kMidpoint) {
    for (int j = 0; j < spec.count; ++j) {
      scenario.times[j] = static_cast<int>(
          (static_cast<long long>(j) + 1) * T / (spec.count + 1));
    }
  } else if (spec.placement == Placement::kFixed) {
    scenario.times = spec.times;
  }
  ValidateScenario(scenario, n);
  return scenario;
}

std::vector<Eigen::VectorXd> SweepValues(const ExperimentConfig& config,
                                         int count) {
  const auto& spec = config.disturbances;
  if (spec.law == ValueLaw::kFixedList) {
    if (static_cast<int>(spec.values.size()) < count) {
      throw std::invalid_argument("fixed_list has " +
                                  std::to_string(spec.values.size()) +
                                  " values, sweep needs " +
                                  std::to_string(count));
    }
    return {spec.values.begin(), spec.values.begin() + count};
  }
  Rng rng(config.seed);
  std::vector<Eigen::VectorXd> values;
  values.reserve(count);
  for (int k = 0; k < count; ++k) {
    values.push_back(SampleSphere(rng, config.model.state_dim(), spec.w_hat,
                                  spec.active_coordinates));
  }
  return values;
}

TrajectoryExperiment RunTrajectoryExperiment(const ExperimentConfig& config) {
  TrajectoryExperiment exp;
  exp.scenario = TrajectoryScenario(config);
  const RiccatiData riccati = RiccatiBackward(config.model);
  const OfflineAuxiliary aux = OfflinePrecompute(exp.scenario, riccati);
  const DisturbanceAwareTables tables =
      DaPrecompute(ReverseChronological(exp.scenario), config.probability,
                   riccati, exp.scenario.size());

  exp.runs[0] =
      Rollout(BlindPolicy{riccati}, exp.scenario, config.x0, config.model);
  exp.runs[1] = Rollout(DisturbanceAwarePolicy{riccati, tables}, exp.scenario,
                        config.x0, config.model);
  exp.runs[2] = Rollout(OfflinePolicy{riccati, aux}, exp.scenario, config.x0,
                        config.model);
  return exp;
}

SweepResult RunSweep(const ExperimentConfig& config, Execution execution) {
  RequireSweepable(config);
  const auto horizons = SortedUnique(config.sweep.horizons);
  const auto budgets = SortedUnique(config.sweep.budgets);
  const int max_k = budgets.back();
  const auto values = SweepValues(config, max_k);

  std::vector<std::vector<SweepRow>> per_horizon(horizons.size());
  ForEachIndex(static_cast<int>(horizons.size()), execution, [&](int i) {
    const int T = horizons[i];
    const int usable_k = std::min(max_k, T);
    const HorizonTables h = BuildHorizon(config, T, usable_k, values);
    const Eigen::VectorXd u_blind = BlindAction(0, config.x0, h.riccati);
    for (int k : budgets) {
      if (k > T) continue;
      const Eigen::VectorXd u_da =
          DaAction(0, config.x0, k, h.tables, h.riccati);
      per_horizon[i].push_back({T, k, (u_da - u_blind).norm()});
    }
  });

  SweepResult result;
  for (const auto& rows : per_horizon) {
    result.rows.insert(result.rows.end(), rows.begin(), rows.end());
  }
  result.skipped_pairs =
      static_cast<int>(horizons.size() * budgets.size() - result.rows.size());
  return result;
}

DiagnosticsResult RunConvergenceDiagnostics(const ExperimentConfig& config,
                                            Execution execution) {
  RequireSweepable(config);
  const auto horizons = SortedUnique(config.sweep.horizons);
  const auto budgets = SortedUnique(config.sweep.budgets);
  const int max_k = budgets.back();
  const auto values = SweepValues(config, max_k);

  std::vector<std::vector<DiagnosticsRow>> per_horizon(horizons.size());
  ForEachIndex(static_cast<int>(horizons.size()), execution, [&](int i) {
    const int T = horizons[i];
    const HorizonTables h =
        BuildHorizon(config, T, std::min(max_k, T), values);
    for (int k : budgets) {
      if (k > T) continue;
      DiagnosticsRow row{T, k, h.tables.r(0, k).norm(), 0.0};
      for (int t = 0; t <= T; ++t) {
        row.r_max_norm = std::max(row.r_max_norm, h.tables.r(t, k).norm());
      }
      per_horizon[i].push_back(row);
    }
  });

  DiagnosticsResult result;
  for (const auto& rows : per_horizon) {
    result.rows.insert(result.rows.end(), rows.begin(), rows.end());
  }
  result.skipped_pairs =
      static_cast<int>(horizons.size() * budgets.size() - result.rows.size());
  for (int k : budgets) result.r0_crossing[k] = std::nullopt;
  for (const auto& row : result.rows) {
    auto& crossing = result.r0_crossing[row.k];
    if (!crossing && row.r0_norm < kR0Threshold) crossing = row.T;
  }
  return result;
}

std::vector<VerificationTable> RunBoundVerification(
    const ExperimentConfig& config, Execution execution) {
  ValidateConfig(config);
  const RiccatiData riccati = RiccatiBackward(config.model);
  VerifyOptions options;
  options.override_assumption_check = config.override_assumption_check;
  options.active_coordinates = config.disturbances.active_coordinates;
  options.execution = execution;

  std::vector<VerificationTable> tables;
  for (int D : config.verify.budgets) {
    tables.push_back(VerifyBounds(config.model, riccati, config.verify.trials,
                                  D, config.disturbances.w_hat, config.x0,
                                  config.seed, options));
  }
  return tables;
}

std::string FormatReal(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void WriteTrajectoryCsv(std::ostream& out, const TrajectoryExperiment& exp) {
  const auto& first = exp.runs[0];
  const int n = static_cast<int>(first.states.front().size());
  const int m =
      first.controls.empty() ? 0 : static_cast<int>(first.controls[0].size());
  const int T = static_cast<int>(first.controls.size());

  out << "t,policy";
  for (int i = 0; i < n; ++i) out << ",x" << i;
  for (int j = 0; j < m; ++j) out << ",u" << j;
  out << ",stage_cost,disturbed\n";
  for (int t = 0; t <= T; ++t) {
    for (const auto& run : exp.runs) {
      out << t << ',' << ToString(run.policy);
      for (int i = 0; i < n; ++i) out << ',' << FormatReal(run.states[t](i));
      for (int j = 0; j < m; ++j) {
        out << ',' << (t < T ? FormatReal(run.controls[t](j)) : Na());
      }
      out << ',' << FormatReal(run.stage_costs[t]) << ','
          << (t < T && run.disturbed[t] ? 1 : 0) << '\n';
    }
  }
}

void WriteSweepCsv(std::ostream& out, const SweepResult& result) {
  out << "T,k,norm_diff\n";
  for (const auto& row : result.rows) {
    out << row.T << ',' << row.k << ',' << FormatReal(row.norm_diff) << '\n';
  }
}

void WriteDiagnosticsCsv(std::ostream& out, const DiagnosticsResult& result) {
  out << "T,k,r0_norm,r_max_norm\n";
  for (const auto& row : result.rows) {
    out << row.T << ',' << row.k << ',' << FormatReal(row.r0_norm) << ','
        << FormatReal(row.r_max_norm) << '\n';
  }
}

void WriteBoundsCsv(std::ostream& out,
                    const std::vector<VerificationTable>& tables) {
  out << "trial,D,w_hat,emp_blind_vs_offline,emp_blind_vs_nominal,"
         "emp_nominal_vs_offline,thm3,thm4,thm5,ratio3,ratio4,ratio5,"
         "assumption1_ok,degenerate_ratio\n";
  const auto write_row = [&](const std::string& trial,
                             const VerificationRow& row) {
    out << trial << ',' << row.D << ',' << FormatReal(row.w_hat) << ','
        << FormatReal(row.emp_blind_vs_offline) << ','
        << FormatReal(row.emp_blind_vs_nominal) << ','
        << FormatReal(row.emp_nominal_vs_offline) << ',' << Opt(row.regret_bound)
        << ',' << FormatReal(row.disturbance_bound) << ',' << Opt(row.nominal_bound) << ','
        << Opt(row.regret_ratio) << ',' << FormatReal(row.disturbance_ratio) << ','
        << Opt(row.nominal_ratio) << ',' << (row.margin_ok ? 1 : 0) << ','
        << (row.degenerate_ratio ? 1 : 0) << '\n';
  };
  for (const auto& table : tables) {
    for (const auto& row : table.rows) {
      write_row(std::to_string(row.trial), row);
    }
  }
  for (const auto& table : tables) {
    if (table.rows.empty()) continue;
    VerificationRow summary;
    summary.D = table.report.D_count;
    summary.w_hat = table.report.w_hat;
    summary.regret_bound = table.report.regret_bound;
    summary.disturbance_bound = table.report.disturbance_bound;
    summary.nominal_bound = table.report.nominal_bound;
    summary.margin_ok = table.report.margin_ok;
    summary.regret_ratio = table.max_regret_ratio;
    summary.disturbance_ratio = table.max_disturbance_ratio;
    summary.nominal_ratio = table.max_nominal_ratio;
    for (const auto& row : table.rows) {
      summary.emp_blind_vs_offline =
          std::max(summary.emp_blind_vs_offline, row.emp_blind_vs_offline);
      summary.emp_blind_vs_nominal =
          std::max(summary.emp_blind_vs_nominal, row.emp_blind_vs_nominal);
      summary.emp_nominal_vs_offline =
          std::max(summary.emp_nominal_vs_offline, row.emp_nominal_vs_offline);
      summary.degenerate_ratio |= row.degenerate_ratio;
    }
    write_row("max", summary);
  }
}

nlohmann::json ArtifactMetadata(const ExperimentConfig& config,
                                const std::string& artifact,
                                nlohmann::json extra) {
  nlohmann::json meta = {
      {"artifact", artifact},
      {"config_hash", ConfigHash(config)},
      {"seed", config.seed},
      {"version", kVersion},
      {"value_law", ToString(config.disturbances.law)},
      {"placement", ToString(config.disturbances.placement)},
      {"horizon", config.model.T},
  };
  for (auto& [key, value] : extra.items()) meta[key] = value;
  return meta;
}

std::string WriteArtifact(const std::string& dir, const std::string& name,
                          const std::string& csv, const nlohmann::json& meta) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const fs::path csv_path = fs::path(dir) / (name + ".csv");
  const fs::path meta_path = fs::path(dir) / (name + ".meta.json");
  {
    std::ofstream out(csv_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + csv_path.string());
    out << csv;
  }
  {
    std::ofstream out(meta_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + meta_path.string());
    out << meta.dump(2) << '\n';
  }
  return csv_path.string();
}

}  // namespace sparse_lqr
