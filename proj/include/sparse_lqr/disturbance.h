#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "sparse_lqr/lqr_core.h"

namespace sparse_lqr {

/// Sparse additive disturbances stored chronologically: times[0] < times[1]
/// < … all in [0, horizon), values[j] applied at times[j], ‖values[j]‖ ≤ w_hat.
struct DisturbanceScenario {
  int horizon = 0;
  std::vector<int> times;
  std::vector<Eigen::VectorXd> values;
  double w_hat = 0.0;

  int size() const { return static_cast<int>(times.size()); }
  bool empty() const { return times.empty(); }
};

/// Throws std::invalid_argument if times are not strictly increasing within
/// [0, horizon), sizes disagree, a value has the wrong dimension, or a value
/// exceeds w_hat (with 1e-12 relative slack).
void ValidateScenario(const DisturbanceScenario& scenario, int state_dim);

/// Number of disturbances at time t or later.
int RemainingCount(const DisturbanceScenario& scenario, int t);

/// d_t: the scheduled value at t, or zero.
Eigen::VectorXd DisturbanceAt(const DisturbanceScenario& scenario, int t,
                              int state_dim);

/// Values in reverse-chronological order: element k−1 is the disturbance that
/// comes next when k remain, i.e. values[size − k].
std::vector<Eigen::VectorXd> ReverseChronological(
    const DisturbanceScenario& scenario);

/// min(1, k/(T − t)), and 0 when k = 0. Throws std::out_of_range unless
/// 0 ≤ t < T and k ≥ 0.
double UniformConditional(int t, int k, int T);

/// Probability p_t^k that a disturbance occurs at step t given k remain.
class ProbabilityModel {
 public:
  enum class Kind { kUniformConditional, kTable };

  static ProbabilityModel Uniform();
  /// grid[t][k] for t ∈ [0, T), k ∈ [0, max_k]. Requires grid[t][0] = 0 and
  /// entries in [0, 1]; throws std::invalid_argument otherwise.
  static ProbabilityModel Table(std::vector<std::vector<double>> grid);
  /// p ≡ 0 on a T × (max_k + 1) grid.
  static ProbabilityModel Zero(int T, int max_k);
  /// p_t^k = 1 exactly when the disturbance that is next with k remaining
  /// occurs at t, and 0 otherwise.
  static ProbabilityModel Certain(const DisturbanceScenario& scenario);

  Kind kind() const { return kind_; }
  const std::vector<std::vector<double>>& table() const { return table_; }

  /// Throws std::out_of_range outside the model's domain.
  double operator()(int t, int k, int T) const;

  /// Throws std::invalid_argument if a table does not cover (T, max_k).
  void CheckCovers(int T, int max_k) const;

 private:
  Kind kind_ = Kind::kUniformConditional;
  std::vector<std::vector<double>> table_;
};

/// Random stream used for every stochastic draw in the library.
///
/// The engine is std::mt19937_64 seeded with the 64-bit seed directly, whose
/// output sequence is fixed by the C++ standard. Conversions are done here
/// rather than with <random> distributions (which are implementation-defined):
///   Uniform():   (x >> 11) · 2⁻⁵³, in [0, 1)
///   Below(n):    rejection sampling of x against the largest multiple of n
///   Normal():    Box–Muller, sqrt(−2 ln(1 − u₁)) · cos(2π u₂), two draws
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double Uniform();
  std::uint64_t Below(std::uint64_t n);
  double Normal();

 private:
  std::mt19937_64 engine_;
};

enum class ValueLaw { kSphereSurface, kFixedList };

std::string ToString(ValueLaw law);
ValueLaw ParseValueLaw(const std::string& name);

struct SamplingSpec {
  int count = 0;
  double w_hat = 0.0;
  ValueLaw law = ValueLaw::kSphereSurface;
  // Coordinates that receive disturbance mass under kSphereSurface. Empty
  // means all n coordinates.
  std::vector<int> active_coordinates;
  // Chronological values for kFixedList; must have exactly `count` entries.
  std::vector<Eigen::VectorXd> fixed_values;
};

/// Uniform points on the radius-`radius` sphere spanned by `coords` (all
/// coordinates if empty); other entries are zero.
Eigen::VectorXd SampleSphere(Rng& rng, int state_dim, double radius,
                             const std::vector<int>& coords);

/// Draws a uniformly random `count`-subset of [0, T) (Floyd's algorithm) and
/// values according to `spec.law`. A pure function of the seed.
///
/// Throws std::invalid_argument if count > T or `spec` is inconsistent.
DisturbanceScenario SampleScenario(std::uint64_t seed, const SamplingSpec& spec,
                                   const SystemModel& model);

// Scenario documents: {"horizon", "w_hat", "times", "values"}.
nlohmann::json ScenarioToJson(const DisturbanceScenario& scenario);
DisturbanceScenario ScenarioFromJson(const nlohmann::json& doc);
void SaveScenario(const std::string& path, const DisturbanceScenario& scenario);
DisturbanceScenario LoadScenario(const std::string& path);

}  // namespace sparse_lqr
