#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "sparse_lqr/experiments.h"

namespace sparse_lqr {

namespace {

using nlohmann::json;

json MatrixToJson(const Eigen::MatrixXd& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd MatrixFromJson(const json& doc, const char* name) {
  if (!doc.is_array() || doc.empty()) {
    throw std::invalid_argument(std::string("matrix ") + name +
                                " must be a nonempty array of rows");
  }
  const std::size_t cols = doc.front().size();
  Eigen::MatrixXd M(doc.size(), cols);
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto row = doc[i].get<std::vector<double>>();
    if (row.size() != cols) {
      throw std::invalid_argument(std::string("matrix ") + name +
                                  " has ragged rows");
    }
    for (std::size_t j = 0; j < cols; ++j) M(i, j) = row[j];
  }
  return M;
}

json VectorToJson(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd VectorFromJson(const json& doc) {
  const auto v = doc.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), v.size());
}

std::vector<int> Range(int first, int last, int step) {
  std::vector<int> out;
  for (int i = first; i <= last; i += step) out.push_back(i);
  return out;
}

}  // namespace

std::string ToString(Placement placement) {
  switch (placement) {
    case Placement::kMidpoint:
      return "midpoint";
    case Placement::kRandom:
      return "random";
    case Placement::kFixed:
      return "fixed";
  }
  return "unknown";
}

Placement ParsePlacement(const std::string& name) {
  if (name == "midpoint") return Placement::kMidpoint;
  if (name == "random") return Placement::kRandom;
  if (name == "fixed") return Placement::kFixed;
  throw std::invalid_argument("unknown placement '" + name + "'");
}

SystemModel DoubleIntegratorModel(double dt, int T) {
  SystemModel model;
  model.A = Eigen::MatrixXd::Identity(4, 4);
  model.A(0, 1) = dt;
  model.A(2, 3) = dt;
  model.B = Eigen::MatrixXd::Zero(4, 2);
  model.B(1, 0) = dt;
  model.B(3, 1) = dt;
  model.Q = Eigen::Vector4d(2.0, 1e-3, 1.0, 1e-3).asDiagonal();
  model.Q_T = model.Q;
  model.R = Eigen::Vector2d(1e-2, 1e-2).asDiagonal();
  model.T = T;
  return model;
}

ExperimentConfig BuiltinStudyConfig() {
  ExperimentConfig config;
  config.model = DoubleIntegratorModel();
  config.x0 = Eigen::Vector4d(1.0, 0.0, 1.0, 0.0);
  config.disturbances.w_hat = 0.3;
  config.disturbances.count = 1;
  config.disturbances.law = ValueLaw::kSphereSurface;
  config.disturbances.active_coordinates = {0, 2};
  config.disturbances.placement = Placement::kMidpoint;
  config.probability = ProbabilityModel::Uniform();
  config.sweep.horizons = Range(200, 4000, 200);
  config.sweep.budgets = Range(1, 10, 1);
  config.verify.budgets = {1, 2, 4};
  config.verify.trials = 500;
  config.seed = 42;
  config.output_dir = "out";
  return config;
}

void ValidateConfig(const ExperimentConfig& config) {
  ValidateModel(config.model);
  const int n = config.model.state_dim();
  const int T = config.model.T;
  if (config.x0.size() != n) {
    throw std::invalid_argument("x0 has dimension " +
                                std::to_string(config.x0.size()) +
                                ", model has " + std::to_string(n));
  }
  const auto& d = config.disturbances;
  if (d.w_hat < 0.0) throw std::invalid_argument("w_hat must be >= 0");
  if (d.count < 0 || d.count > T) {
    throw std::invalid_argument("disturbance count must lie in [0, T]");
  }
  for (int i : d.active_coordinates) {
    if (i < 0 || i >= n) {
      throw std::invalid_argument("active coordinate " + std::to_string(i) +
                                  " outside state dimension");
    }
  }
  if (d.law == ValueLaw::kFixedList) {
    if (static_cast<int>(d.values.size()) < d.count) {
      throw std::invalid_argument("fixed_list needs at least count values");
    }
    for (const auto& w : d.values) {
      if (w.size() != n) {
        throw std::invalid_argument("fixed disturbance value has wrong size");
      }
      if (w.norm() > d.w_hat * (1.0 + 1e-12)) {
        throw std::invalid_argument("fixed disturbance value exceeds w_hat");
      }
    }
  }
  if (d.placement == Placement::kFixed &&
      static_cast<int>(d.times.size()) != d.count) {
    throw std::invalid_argument("fixed placement needs exactly count times");
  }
  if (config.probability.kind() == ProbabilityModel::Kind::kTable) {
    config.probability.CheckCovers(T, d.count);
  }
  if (config.sweep.horizons.empty() || config.sweep.budgets.empty()) {
    throw std::invalid_argument("sweep ranges must be nonempty");
  }
  for (int h : config.sweep.horizons) {
    if (h < 1) throw std::invalid_argument("sweep horizons must be positive");
  }
  for (int k : config.sweep.budgets) {
    if (k < 0) throw std::invalid_argument("sweep budgets must be >= 0");
  }
  for (int k : config.verify.budgets) {
    if (k < 0 || k > T) {
      throw std::invalid_argument("verify budgets must lie in [0, T]");
    }
  }
  if (config.verify.trials < 0) {
    throw std::invalid_argument("trials must be >= 0");
  }
}

nlohmann::json ConfigToJson(const ExperimentConfig& config) {
  const auto& m = config.model;
  json values = json::array();
  for (const auto& w : config.disturbances.values) {
    values.push_back(VectorToJson(w));
  }
  json probability = {
      {"kind", config.probability.kind() ==
                       ProbabilityModel::Kind::kUniformConditional
                   ? "uniform_conditional"
                   : "table"}};
  if (config.probability.kind() == ProbabilityModel::Kind::kTable) {
    probability["table"] = config.probability.table();
  }
  return {
      {"model",
       {{"A", MatrixToJson(m.A)},
        {"B", MatrixToJson(m.B)},
        {"Q", MatrixToJson(m.Q)},
        {"Q_T", MatrixToJson(m.Q_T)},
        {"R", MatrixToJson(m.R)},
        {"T", m.T}}},
      {"x0", VectorToJson(config.x0)},
      {"disturbances",
       {{"w_hat", config.disturbances.w_hat},
        {"count", config.disturbances.count},
        {"value_law", ToString(config.disturbances.law)},
        {"active_coordinates", config.disturbances.active_coordinates},
        {"values", values},
        {"placement", ToString(config.disturbances.placement)},
        {"times", config.disturbances.times}}},
      {"probability", probability},
      {"sweep",
       {{"horizons", config.sweep.horizons},
        {"budgets", config.sweep.budgets}}},
      {"verify",
       {{"budgets", config.verify.budgets},
        {"trials", config.verify.trials}}},
      {"seed", config.seed},
      {"output_dir", config.output_dir},
      {"override_assumption_check", config.override_assumption_check},
  };
}

ExperimentConfig ConfigFromJson(const nlohmann::json& doc) {
  // Missing sections fall back to the builtin study.
  ExperimentConfig config = BuiltinStudyConfig();
  if (doc.contains("model")) {
    const auto& m = doc.at("model");
    config.model.A = MatrixFromJson(m.at("A"), "A");
    config.model.B = MatrixFromJson(m.at("B"), "B");
    config.model.Q = MatrixFromJson(m.at("Q"), "Q");
    config.model.Q_T = m.contains("Q_T") ? MatrixFromJson(m.at("Q_T"), "Q_T")
                                         : config.model.Q;
    config.model.R = MatrixFromJson(m.at("R"), "R");
    config.model.T = m.at("T").get<int>();
    // A custom model has no natural coordinate restriction.
    config.disturbances.active_coordinates.clear();
  }
  if (doc.contains("x0")) config.x0 = VectorFromJson(doc.at("x0"));
  if (doc.contains("disturbances")) {
    const auto& d = doc.at("disturbances");
    auto& spec = config.disturbances;
    spec.w_hat = d.value("w_hat", spec.w_hat);
    spec.count = d.value("count", spec.count);
    if (d.contains("value_law")) {
      spec.law = ParseValueLaw(d.at("value_law").get<std::string>());
    }
    if (d.contains("active_coordinates")) {
      spec.active_coordinates =
          d.at("active_coordinates").get<std::vector<int>>();
    }
    if (d.contains("values")) {
      spec.values.clear();
      for (const auto& row : d.at("values")) {
        spec.values.push_back(VectorFromJson(row));
      }
    }
    if (d.contains("placement")) {
      spec.placement = ParsePlacement(d.at("placement").get<std::string>());
    }
    if (d.contains("times")) spec.times = d.at("times").get<std::vector<int>>();
  }
  if (doc.contains("probability")) {
    const auto& p = doc.at("probability");
    const auto kind = p.at("kind").get<std::string>();
    if (kind == "uniform_conditional") {
      config.probability = ProbabilityModel::Uniform();
    } else if (kind == "table") {
      config.probability = ProbabilityModel::Table(
          p.at("table").get<std::vector<std::vector<double>>>());
    } else {
      throw std::invalid_argument("unknown probability kind '" + kind + "'");
    }
  }
  if (doc.contains("sweep")) {
    const auto& s = doc.at("sweep");
    if (s.contains("horizons")) {
      config.sweep.horizons = s.at("horizons").get<std::vector<int>>();
    }
    if (s.contains("budgets")) {
      config.sweep.budgets = s.at("budgets").get<std::vector<int>>();
    }
  }
  if (doc.contains("verify")) {
    const auto& v = doc.at("verify");
    if (v.contains("budgets")) {
      config.verify.budgets = v.at("budgets").get<std::vector<int>>();
    }
    config.verify.trials = v.value("trials", config.verify.trials);
  }
  config.seed = doc.value("seed", config.seed);
  config.output_dir = doc.value("output_dir", config.output_dir);
  config.override_assumption_check =
      doc.value("override_assumption_check", false);
  ValidateConfig(config);
  return config;
}

ExperimentConfig LoadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  return ConfigFromJson(nlohmann::json::parse(in));
}

std::string ConfigHash(const ExperimentConfig& config) {
  const std::string text = ConfigToJson(config).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace sparse_lqr
