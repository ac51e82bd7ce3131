#include "sparse_lqr/disturbance.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

#include "sparse_lqr/errors.h"

namespace sparse_lqr {

void ValidateScenario(const DisturbanceScenario& scenario, int state_dim) {
  if (scenario.times.size() != scenario.values.size()) {
    throw std::invalid_argument("scenario has " +
                                std::to_string(scenario.times.size()) +
                                " times but " +
                                std::to_string(scenario.values.size()) +
                                " values");
  }
  if (scenario.w_hat < 0.0 || !std::isfinite(scenario.w_hat)) {
    throw std::invalid_argument("scenario w_hat must be finite and >= 0");
  }
  for (int j = 0; j < scenario.size(); ++j) {
    const int t = scenario.times[j];
    if (t < 0 || t >= scenario.horizon) {
      throw std::invalid_argument("disturbance time " + std::to_string(t) +
                                  " outside [0, " +
                                  std::to_string(scenario.horizon) + ")");
    }
    if (j > 0 && t <= scenario.times[j - 1]) {
      throw std::invalid_argument(
          "disturbance times must be strictly increasing");
    }
    const auto& w = scenario.values[j];
    if (w.size() != state_dim) {
      throw DimensionError("disturbance value " + std::to_string(j) +
                           " has dimension " + std::to_string(w.size()) +
                           ", expected " + std::to_string(state_dim));
    }
    if (!w.allFinite() ||
        w.norm() > scenario.w_hat * (1.0 + 1e-12) + 1e-300) {
      std::ostringstream msg;
      msg << "disturbance value " << j << " has norm " << w.norm()
          << " > w_hat = " << scenario.w_hat;
      throw std::invalid_argument(msg.str());
    }
  }
}

int RemainingCount(const DisturbanceScenario& scenario, int t) {
  const auto it =
      std::lower_bound(scenario.times.begin(), scenario.times.end(), t);
  return static_cast<int>(scenario.times.end() - it);
}

Eigen::VectorXd DisturbanceAt(const DisturbanceScenario& scenario, int t,
                              int state_dim) {
  const auto it =
      std::lower_bound(scenario.times.begin(), scenario.times.end(), t);
  if (it != scenario.times.end() && *it == t) {
    return scenario.values[it - scenario.times.begin()];
  }
  return Eigen::VectorXd::Zero(state_dim);
}

std::vector<Eigen::VectorXd> ReverseChronological(
    const DisturbanceScenario& scenario) {
  return {scenario.values.rbegin(), scenario.values.rend()};
}

double UniformConditional(int t, int k, int T) {
  if (t < 0 || t >= T || k < 0) {
    throw std::out_of_range("uniform conditional model needs 0 <= t < T and "
                            "k >= 0 (t=" + std::to_string(t) +
                            ", k=" + std::to_string(k) +
                            ", T=" + std::to_string(T) + ")");
  }
  if (k == 0) return 0.0;
  return std::min(1.0, static_cast<double>(k) / static_cast<double>(T - t));
}

ProbabilityModel ProbabilityModel::Uniform() { return ProbabilityModel{}; }

ProbabilityModel ProbabilityModel::Table(
    std::vector<std::vector<double>> grid) {
  if (grid.empty()) throw std::invalid_argument("probability table is empty");
  const std::size_t width = grid.front().size();
  if (width == 0) {
    throw std::invalid_argument("probability table rows must include k = 0");
  }
  for (std::size_t t = 0; t < grid.size(); ++t) {
    if (grid[t].size() != width) {
      throw std::invalid_argument("probability table is ragged at t = " +
                                  std::to_string(t));
    }
    if (grid[t][0] != 0.0) {
      throw std::invalid_argument("probability table needs p[t][0] = 0 (t = " +
                                  std::to_string(t) + ")");
    }
    for (double p : grid[t]) {
      if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("probability table entry outside [0, 1]");
      }
    }
  }
  ProbabilityModel model;
  model.kind_ = Kind::kTable;
  model.table_ = std::move(grid);
  return model;
}

ProbabilityModel ProbabilityModel::Zero(int T, int max_k) {
  return Table(std::vector<std::vector<double>>(
      T, std::vector<double>(max_k + 1, 0.0)));
}

ProbabilityModel ProbabilityModel::Certain(
    const DisturbanceScenario& scenario) {
  const int count = scenario.size();
  std::vector<std::vector<double>> grid(scenario.horizon,
                                        std::vector<double>(count + 1, 0.0));
  for (int k = 1; k <= count; ++k) {
    grid[scenario.times[count - k]][k] = 1.0;
  }
  return Table(std::move(grid));
}

double ProbabilityModel::operator()(int t, int k, int T) const {
  if (kind_ == Kind::kUniformConditional) return UniformConditional(t, k, T);
  if (t < 0 || t >= static_cast<int>(table_.size()) || k < 0 ||
      k >= static_cast<int>(table_.front().size())) {
    throw std::out_of_range("probability table has no entry for (t=" +
                            std::to_string(t) + ", k=" + std::to_string(k) +
                            ")");
  }
  return table_[t][k];
}

void ProbabilityModel::CheckCovers(int T, int max_k) const {
  if (kind_ == Kind::kUniformConditional) return;
  if (static_cast<int>(table_.size()) != T ||
      static_cast<int>(table_.front().size()) < max_k + 1) {
    throw std::invalid_argument(
        "probability table is " + std::to_string(table_.size()) + "x" +
        std::to_string(table_.front().size()) + ", needs " +
        std::to_string(T) + "x" + std::to_string(max_k + 1));
  }
}

double Rng::Uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::Below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("Rng::Below needs n > 0");
  const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t limit = max - (max % n + 1) % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x > limit);
  return x % n;
}

double Rng::Normal() {
  const double u1 = Uniform();
  const double u2 = Uniform();
  return std::sqrt(-2.0 * std::log1p(-u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

std::string ToString(ValueLaw law) {
  return law == ValueLaw::kSphereSurface ? "sphere_surface" : "fixed_list";
}

ValueLaw ParseValueLaw(const std::string& name) {
  if (name == "sphere_surface") return ValueLaw::kSphereSurface;
  if (name == "fixed_list") return ValueLaw::kFixedList;
  throw std::invalid_argument("unknown value law '" + name + "'");
}

Eigen::VectorXd SampleSphere(Rng& rng, int state_dim, double radius,
                             const std::vector<int>& coords) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(state_dim);
  if (coords.empty()) {
    for (int i = 0; i < state_dim; ++i) w(i) = rng.Normal();
  } else {
    for (int i : coords) w(i) = rng.Normal();
  }
  const double norm = w.norm();
  // A zero draw has probability zero; guard anyway so the radius is exact.
  if (norm == 0.0) {
    w(coords.empty() ? 0 : coords.front()) = radius;
    return w;
  }
  return w * (radius / norm);
}

DisturbanceScenario SampleScenario(std::uint64_t seed, const SamplingSpec& spec,
                                   const SystemModel& model) {
  const int T = model.T;
  const int n = model.state_dim();
  if (spec.count < 0 || spec.count > T) {
    throw std::invalid_argument("cannot place " + std::to_string(spec.count) +
                                " disturbances in horizon " +
                                std::to_string(T));
  }
  if (spec.w_hat < 0.0) throw std::invalid_argument("w_hat must be >= 0");
  for (int i : spec.active_coordinates) {
    if (i < 0 || i >= n) {
      throw std::invalid_argument("active coordinate " + std::to_string(i) +
                                  " outside state dimension " +
                                  std::to_string(n));
    }
  }
  if (spec.law == ValueLaw::kFixedList &&
      static_cast<int>(spec.fixed_values.size()) != spec.count) {
    throw std::invalid_argument("fixed_list needs exactly " +
                                std::to_string(spec.count) + " values, got " +
                                std::to_string(spec.fixed_values.size()));
  }

  Rng rng(seed);
  // Floyd's algorithm: every count-subset of [0, T) is equally likely.
  std::set<int> chosen;
  for (int j = T - spec.count; j < T; ++j) {
    const int t = static_cast<int>(rng.Below(static_cast<std::uint64_t>(j) + 1));
    if (!chosen.insert(t).second) chosen.insert(j);
  }

  DisturbanceScenario scenario;
  scenario.horizon = T;
  scenario.w_hat = spec.w_hat;
  scenario.times.assign(chosen.begin(), chosen.end());
  scenario.values.reserve(spec.count);
  for (int j = 0; j < spec.count; ++j) {
    if (spec.law == ValueLaw::kFixedList) {
      scenario.values.push_back(spec.fixed_values[j]);
    } else {
      scenario.values.push_back(
          SampleSphere(rng, n, spec.w_hat, spec.active_coordinates));
    }
  }
  ValidateScenario(scenario, n);
  return scenario;
}

nlohmann::json ScenarioToJson(const DisturbanceScenario& scenario) {
  nlohmann::json values = nlohmann::json::array();
  for (const auto& w : scenario.values) {
    values.push_back(std::vector<double>(w.data(), w.data() + w.size()));
  }
  return {{"horizon", scenario.horizon},
          {"w_hat", scenario.w_hat},
          {"times", scenario.times},
          {"values", values}};
}

DisturbanceScenario ScenarioFromJson(const nlohmann::json& doc) {
  DisturbanceScenario scenario;
  scenario.horizon = doc.at("horizon").get<int>();
  scenario.w_hat = doc.at("w_hat").get<double>();
  scenario.times = doc.at("times").get<std::vector<int>>();
  for (const auto& row : doc.at("values")) {
    const auto v = row.get<std::vector<double>>();
    scenario.values.push_back(
        Eigen::Map<const Eigen::VectorXd>(v.data(), v.size()));
  }
  const int n = scenario.values.empty()
                    ? 0
                    : static_cast<int>(scenario.values.front().size());
  ValidateScenario(scenario, n);
  return scenario;
}

void SaveScenario(const std::string& path,
                  const DisturbanceScenario& scenario) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << ScenarioToJson(scenario).dump(2) << "\n";
}

DisturbanceScenario LoadScenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return ScenarioFromJson(nlohmann::json::parse(in));
}

}  // namespace sparse_lqr
