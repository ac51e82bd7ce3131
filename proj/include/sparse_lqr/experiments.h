#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "sparse_lqr/bounds.h"
#include "sparse_lqr/disturbance.h"
#include "sparse_lqr/lqr_core.h"
#include "sparse_lqr/simulator.h"

namespace sparse_lqr {

inline constexpr const char* kVersion = "0.1.0";

enum class Placement { kMidpoint, kRandom, kFixed };

std::string ToString(Placement placement);
Placement ParsePlacement(const std::string& name);

struct DisturbanceSpec {
  double w_hat = 0.3;
  int count = 1;
  ValueLaw law = ValueLaw::kSphereSurface;
  // Empty means all coordinates.
  std::vector<int> active_coordinates;
  // Chronological values for ValueLaw::kFixedList.
  std::vector<Eigen::VectorXd> values;
  // kMidpoint puts disturbance j at ⌊(j+1)·T/(count+1)⌋; kRandom draws a
  // uniform subset from the seed; kFixed uses `times`.
  Placement placement = Placement::kMidpoint;
  std::vector<int> times;
};

struct SweepSpec {
  std::vector<int> horizons;
  std::vector<int> budgets;
};

struct VerifySpec {
  std::vector<int> budgets;
  int trials = 0;
};

struct ExperimentConfig {
  SystemModel model;
  Eigen::VectorXd x0;
  DisturbanceSpec disturbances;
  ProbabilityModel probability = ProbabilityModel::Uniform();
  SweepSpec sweep;
  VerifySpec verify;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  bool override_assumption_check = false;
};

/// Planar double integrator with state [y, ẏ, z, ż] and Δt = 0.005:
/// Q = Q_T = diag(2, 1e-3, 1, 1e-3), R = diag(1e-2, 1e-2), T = 1000.
SystemModel DoubleIntegratorModel(double dt = 0.005, int T = 1000);

/// The double-integrator study: x0 = [1, 0, 1, 0], ŵ = 0.3 on the position
/// coordinates {0, 2}, uniform conditional probabilities, one disturbance at
/// T/2, sweep T ∈ {200, 400, …, 4000} × k ∈ {1, …, 10}, bound verification
/// for D ∈ {1, 2, 4} with 500 trials.
ExperimentConfig BuiltinStudyConfig();

/// Throws std::invalid_argument (or nlohmann::json exceptions for malformed
/// documents) if the config is inconsistent.
void ValidateConfig(const ExperimentConfig& config);
nlohmann::json ConfigToJson(const ExperimentConfig& config);
ExperimentConfig ConfigFromJson(const nlohmann::json& doc);
ExperimentConfig LoadConfig(const std::string& path);

/// FNV-1a 64 over the canonical JSON dump, as 16 hex digits.
std::string ConfigHash(const ExperimentConfig& config);

// ---------------------------------------------------------------------------

/// The scenario `simulate` uses: placement from the config, values per the law
/// (sphere values drawn from the config seed).
DisturbanceScenario TrajectoryScenario(const ExperimentConfig& config);

/// Values w_1, w_2, … (reverse-chronological numbering) used by the sweep
/// and the diagnostics. Identical for every horizon.
std::vector<Eigen::VectorXd> SweepValues(const ExperimentConfig& config,
                                         int count);

struct TrajectoryExperiment {
  DisturbanceScenario scenario;
  // blind, disturbance-aware, offline
  std::array<RolloutResult, 3> runs;
};

TrajectoryExperiment RunTrajectoryExperiment(const ExperimentConfig& config);

struct SweepRow {
  int T = 0;
  int k = 0;
  double norm_diff = 0.0;  // ‖u_0^da − u_0^blind‖ at x0
};

struct DiagnosticsRow {
  int T = 0;
  int k = 0;
  double r0_norm = 0.0;     // ‖r_0^k‖
  double r_max_norm = 0.0;  // max_t ‖r_t^k‖
};

struct SweepResult {
  std::vector<SweepRow> rows;
  int skipped_pairs = 0;  // (T, k) with k > T
};

struct DiagnosticsResult {
  std::vector<DiagnosticsRow> rows;
  int skipped_pairs = 0;
  // Smallest swept T with ‖r_0^k‖ below kR0Threshold, per k.
  std::map<int, std::optional<int>> r0_crossing;
};

inline constexpr double kR0Threshold = 1e-3;

SweepResult RunSweep(const ExperimentConfig& config,
                     Execution execution = Execution::kParallel);
DiagnosticsResult RunConvergenceDiagnostics(
    const ExperimentConfig& config,
    Execution execution = Execution::kParallel);
/// One table per D in config.verify.budgets.
std::vector<VerificationTable> RunBoundVerification(
    const ExperimentConfig& config,
    Execution execution = Execution::kParallel);

// ---------------------------------------------------------------------------
// CSV output. Reals use 17 significant digits; booleans are 0/1; values that
// do not apply are written as NA.

std::string FormatReal(double x);

void WriteTrajectoryCsv(std::ostream& out, const TrajectoryExperiment& exp);
void WriteSweepCsv(std::ostream& out, const SweepResult& result);
void WriteDiagnosticsCsv(std::ostream& out, const DiagnosticsResult& result);
/// Trial rows for every table followed by one summary row per table with
/// trial = "max" holding the column maxima.
void WriteBoundsCsv(std::ostream& out,
                    const std::vector<VerificationTable>& tables);

/// Metadata for a CSV artifact: config hash, seed, version, value law, plus
/// `extra`. Contains no timestamps.
nlohmann::json ArtifactMetadata(const ExperimentConfig& config,
                                const std::string& artifact,
                                nlohmann::json extra = nlohmann::json::object());

/// Writes `<dir>/<name>.csv` and `<dir>/<name>.meta.json`, creating `dir`.
/// Returns the CSV path.
std::string WriteArtifact(const std::string& dir, const std::string& name,
                          const std::string& csv, const nlohmann::json& meta);

}  // namespace sparse_lqr
