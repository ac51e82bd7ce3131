// Command-line front end for the sparse-disturbance LQR experiments.
//
//   sparse-lqr simulate      trajectory.csv   blind / disturbance-aware / offline
//   sparse-lqr sweep         sweep.csv        ‖u_0^da − u_0^blind‖ over (T, k)
//   sparse-lqr diagnose      diagnostics.csv  ‖r_0^k‖ and max_t ‖r_t^k‖ over (T, k)
//   sparse-lqr verify-bounds bounds.csv       empirical gaps vs closed-form bounds
//   sparse-lqr show-model                     parsed config and Riccati summary
//
// Without --config the builtin double-integrator study is used.

#include <cstdint>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "sparse_lqr/errors.h"
#include "sparse_lqr/experiments.h"

namespace {

using namespace sparse_lqr;

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> trials;
  std::optional<int> horizon;
  std::optional<int> budget;
  bool override_assumption_check = false;
};

void AddCommonOptions(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "JSON experiment config");
  cmd->add_option("--seed", o.seed, "RNG seed");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--trials", o.trials, "Monte Carlo trials per budget")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--horizon", o.horizon, "Horizon T in steps")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--budget", o.budget, "Number of disturbances")
      ->check(CLI::NonNegativeNumber);
  cmd->add_flag("--override-assumption-check", o.override_assumption_check,
                "Run bound checks even if the stability margin is not "
                "positive");
}

std::vector<int> OneTo(int n) {
  std::vector<int> v(n);
  std::iota(v.begin(), v.end(), 1);
  return v;
}

ExperimentConfig Resolve(const Overrides& o, const std::string& command) {
  ExperimentConfig config =
      o.config_path.empty() ? BuiltinStudyConfig() : LoadConfig(o.config_path);
  if (o.seed) config.seed = *o.seed;
  if (o.out) config.output_dir = *o.out;
  if (o.trials) config.verify.trials = *o.trials;
  if (o.override_assumption_check) config.override_assumption_check = true;
  const bool sweeping = command == "sweep" || command == "diagnose";
  if (o.horizon) {
    if (sweeping) {
      config.sweep.horizons = {*o.horizon};
    } else {
      config.model.T = *o.horizon;
    }
  }
  if (o.budget) {
    if (sweeping) {
      config.sweep.budgets = OneTo(*o.budget);
      if (config.sweep.budgets.empty()) config.sweep.budgets = {0};
    } else if (command == "verify-bounds") {
      config.verify.budgets = {*o.budget};
    } else {
      config.disturbances.count = *o.budget;
    }
  }
  ValidateConfig(config);
  return config;
}

int Simulate(const ExperimentConfig& config) {
  const TrajectoryExperiment exp = RunTrajectoryExperiment(config);
  std::ostringstream csv;
  WriteTrajectoryCsv(csv, exp);
  nlohmann::json extra = {
      {"disturbance_times", exp.scenario.times},
      {"probability_model",
       config.probability.kind() == ProbabilityModel::Kind::kTable
           ? "table"
           : "uniform_conditional"},
      {"model_mismatch", exp.runs[1].model_mismatch},
  };
  for (const auto& run : exp.runs) {
    extra["total_cost"][ToString(run.policy)] = run.total_cost;
  }
  const auto path = WriteArtifact(
      config.output_dir, "trajectory", csv.str(),
      ArtifactMetadata(config, "trajectory", std::move(extra)));
  std::cout << "wrote " << path << "\n";
  for (const auto& run : exp.runs) {
    std::cout << "  " << ToString(run.policy) << " cost "
              << FormatReal(run.total_cost) << "\n";
  }
  return 0;
}

int Sweep(const ExperimentConfig& config) {
  const SweepResult result = RunSweep(config);
  std::ostringstream csv;
  WriteSweepCsv(csv, result);
  const auto path = WriteArtifact(
      config.output_dir, "sweep", csv.str(),
      ArtifactMetadata(config, "sweep",
                       {{"skipped_pairs", result.skipped_pairs}}));
  std::cout << "wrote " << path << " (" << result.rows.size() << " rows";
  if (result.skipped_pairs > 0) {
    std::cout << ", " << result.skipped_pairs << " pairs with k > T skipped";
  }
  std::cout << ")\n";
  return 0;
}

int Diagnose(const ExperimentConfig& config) {
  const DiagnosticsResult result = RunConvergenceDiagnostics(config);
  std::ostringstream csv;
  WriteDiagnosticsCsv(csv, result);
  nlohmann::json crossing = nlohmann::json::object();
  for (const auto& [k, T] : result.r0_crossing) {
    crossing[std::to_string(k)] = T ? nlohmann::json(*T) : nlohmann::json();
  }
  const auto path = WriteArtifact(
      config.output_dir, "diagnostics", csv.str(),
      ArtifactMetadata(config, "diagnostics",
                       {{"skipped_pairs", result.skipped_pairs},
                        {"r0_threshold", kR0Threshold},
                        {"r0_crossing_T", crossing}}));
  std::cout << "wrote " << path << "\n";
  return 0;
}

int VerifyBoundsCommand(const ExperimentConfig& config) {
  const auto tables = RunBoundVerification(config);
  std::ostringstream csv;
  WriteBoundsCsv(csv, tables);
  nlohmann::json extra = nlohmann::json::object();
  bool ok = true;
  if (!tables.empty()) {
    const auto& r = tables.front().report;
    extra = {{"gamma_hat", r.gamma_hat},
             {"p_hat", r.p_hat},
             {"lambda_min_R", r.lambda_min_R},
             {"norm_B", r.norm_B},
             {"assumption1_ok", r.margin_ok},
             {"unstable_steps", r.unstable_steps}};
  }
  for (const auto& table : tables) {
    ok = ok && table.AllWithinBounds();
    std::cout << "D=" << table.report.D_count
              << " max ratio disturbance_bound=" << FormatReal(table.max_disturbance_ratio)
              << " regret_bound="
              << (table.max_regret_ratio ? FormatReal(*table.max_regret_ratio) : "NA")
              << " nominal_bound="
              << (table.max_nominal_ratio ? FormatReal(*table.max_nominal_ratio) : "NA")
              << "\n";
  }
  extra["all_within_bounds"] = ok;
  const auto path =
      WriteArtifact(config.output_dir, "bounds", csv.str(),
                    ArtifactMetadata(config, "bounds", std::move(extra)));
  std::cout << "wrote " << path << "\n";
  return ok ? 0 : 2;
}

int ShowModel(const ExperimentConfig& config) {
  const RiccatiData riccati = RiccatiBackward(config.model);
  nlohmann::json doc = ConfigToJson(config);
  doc["riccati"] = {{"gamma_hat", riccati.gamma_hat},
                    {"p_hat", riccati.p_hat},
                    {"assumption1_ok", riccati.margin_ok()},
                    {"unstable_steps", riccati.unstable_steps()}};
  doc["config_hash"] = ConfigHash(config);
  std::cout << doc.dump(2) << "\n";
  if (!riccati.margin_ok()) {
    std::cerr << "warning: stability margin gamma_hat = " << riccati.gamma_hat
              << " is not positive (" << riccati.unstable_steps()
              << " steps); regret bounds that need it are not applicable\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-horizon LQR under sparse disturbances"};
  app.require_subcommand(1);

  Overrides o;
  struct Command {
    const char* name;
    const char* help;
    int (*run)(const ExperimentConfig&);
  };
  const Command commands[] = {
      {"simulate", "Roll out the three policies on one scenario", Simulate},
      {"sweep", "First-action distance over horizons and budgets", Sweep},
      {"diagnose", "Norms of the linear cost coefficients", Diagnose},
      {"verify-bounds", "Monte Carlo check of the regret bounds",
       VerifyBoundsCommand},
      {"show-model", "Print the validated config", ShowModel},
  };
  std::vector<std::pair<CLI::App*, const Command*>> subs;
  for (const auto& c : commands) {
    CLI::App* cmd = app.add_subcommand(c.name, c.help);
    AddCommonOptions(cmd, o);
    subs.emplace_back(cmd, &c);
  }

  CLI11_PARSE(app, argc, argv);

  for (const auto& [cmd, c] : subs) {
    if (!cmd->parsed()) continue;
    try {
      return c->run(Resolve(o, c->name));
    } catch (const AssumptionViolated& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 3;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    }
  }
  return 1;
}
