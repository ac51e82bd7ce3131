#include "sparse_lqr/lqr_core.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sparse_lqr/errors.h"

namespace sparse_lqr {

namespace {

void RequireShape(const Eigen::MatrixXd& M, Eigen::Index rows,
                  Eigen::Index cols, const char* name) {
  if (M.rows() != rows || M.cols() != cols) {
    std::ostringstream msg;
    msg << "matrix " << name << " is " << M.rows() << "x" << M.cols()
        << ", expected " << rows << "x" << cols;
    throw DimensionError(msg.str());
  }
}

double Scale(const Eigen::MatrixXd& M) {
  return std::max(1.0, M.size() == 0 ? 0.0 : SpectralNorm(M));
}

void RequireSymmetric(const Eigen::MatrixXd& M, const char* name) {
  const double asym = (M - M.transpose()).cwiseAbs().maxCoeff();
  if (asym > tolerance::kSym * Scale(M)) {
    std::ostringstream msg;
    msg << "matrix " << name << " is not symmetric (max |M - M^T| = " << asym
        << ")";
    throw DefinitenessError(name, MinEigenvalue(M), msg.str());
  }
}

void RequireDefinite(const Eigen::MatrixXd& M, const char* name,
                     double lower_bound, const char* kind) {
  const double lambda = MinEigenvalue(M);
  if (lambda < lower_bound) {
    std::ostringstream msg;
    msg << "matrix " << name << " is not " << kind
        << " (min eigenvalue = " << lambda << ")";
    throw DefinitenessError(name, lambda, msg.str());
  }
}

}  // namespace

double SpectralNorm(const Eigen::MatrixXd& M) {
  if (M.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  return svd.singularValues()(0);
}

double MinEigenvalue(const Eigen::MatrixXd& M) {
  const Eigen::MatrixXd sym = 0.5 * (M + M.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym,
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

Eigen::MatrixXd InverseSpd(const Eigen::MatrixXd& M, const std::string& what) {
  const double lambda = MinEigenvalue(M);
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (lambda < tolerance::kPd || llt.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << what << " is not invertible as a positive definite matrix"
        << " (min eigenvalue = " << lambda << ")";
    throw NumericalError(msg.str());
  }
  return llt.solve(Eigen::MatrixXd::Identity(M.rows(), M.cols()));
}

SystemModel ValidateModel(SystemModel model) {
  const Eigen::Index n = model.A.rows();
  const Eigen::Index m = model.B.cols();
  if (n == 0) throw DimensionError("matrix A is empty");
  if (m == 0) throw DimensionError("matrix B has no columns");
  RequireShape(model.A, n, n, "A");
  RequireShape(model.B, n, m, "B");
  RequireShape(model.Q, n, n, "Q");
  RequireShape(model.Q_T, n, n, "Q_T");
  RequireShape(model.R, m, m, "R");
  if (model.T < 1) {
    throw std::invalid_argument("horizon T must be positive, got " +
                                std::to_string(model.T));
  }
  if (!model.A.allFinite() || !model.B.allFinite() || !model.Q.allFinite() ||
      !model.Q_T.allFinite() || !model.R.allFinite()) {
    throw std::invalid_argument("model contains non-finite entries");
  }

  RequireSymmetric(model.Q, "Q");
  RequireSymmetric(model.Q_T, "Q_T");
  RequireSymmetric(model.R, "R");
  RequireDefinite(model.Q, "Q", -tolerance::kPsd * Scale(model.Q),
                  "positive semidefinite");
  RequireDefinite(model.Q_T, "Q_T", -tolerance::kPsd * Scale(model.Q_T),
                  "positive semidefinite");
  RequireDefinite(model.R, "R", tolerance::kPd, "positive definite");
  return model;
}

int RiccatiData::unstable_steps() const {
  return static_cast<int>(std::count_if(closed_loop_norm.begin(),
                                        closed_loop_norm.end(),
                                        [](double s) { return s >= 1.0; }));
}

RiccatiData RiccatiBackward(const SystemModel& model) {
  ValidateModel(model);
  const int T = model.T;
  const auto& A = model.A;
  const auto& B = model.B;

  RiccatiData out;
  out.A = A;
  out.B = B;
  out.P.resize(T + 1);
  out.K.resize(T);
  out.S.resize(T);
  out.F.resize(T);
  out.G.resize(T);
  out.P[T] = model.Q_T;

  for (int t = T - 1; t >= 0; --t) {
    const Eigen::MatrixXd& P_next = out.P[t + 1];
    const Eigen::MatrixXd PB = P_next * B;
    const Eigen::MatrixXd H = model.R + B.transpose() * PB;
    Eigen::LLT<Eigen::MatrixXd> llt(H);
    if (llt.info() != Eigen::Success) {
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(H);
      const auto& sv = svd.singularValues();
      std::ostringstream msg;
      msg << "R + B^T P_" << (t + 1) << " B is not positive definite"
          << " (condition number " << sv(0) / sv(sv.size() - 1) << ")";
      throw NumericalError(msg.str());
    }
    Eigen::MatrixXd G = llt.solve(B.transpose());
    out.K[t] = G * P_next * A;
    out.S[t] = P_next - PB * G * P_next;
    out.F[t] = B * G;
    out.G[t] = std::move(G);

    Eigen::MatrixXd P = A.transpose() * out.S[t] * A + model.Q;
    out.P[t] = 0.5 * (P + P.transpose());
  }

  out.closed_loop_norm = ClosedLoopNorms(out, model);
  out.gamma_hat = StabilityMargin(out, model);
  out.p_hat = PHatBound(out);
  return out;
}

std::vector<double> ClosedLoopNorms(const RiccatiData& riccati,
                                    const SystemModel& model) {
  std::vector<double> norms(riccati.K.size());
  for (std::size_t t = 0; t < riccati.K.size(); ++t) {
    norms[t] = SpectralNorm(model.A - model.B * riccati.K[t]);
  }
  return norms;
}

double StabilityMargin(const RiccatiData& riccati, const SystemModel& model) {
  const auto norms = ClosedLoopNorms(riccati, model);
  double worst = 0.0;
  for (double s : norms) worst = std::max(worst, s);
  return 1.0 - worst;
}

double PHatBound(const RiccatiData& riccati) {
  double p_hat = 1.0;
  for (const auto& P : riccati.P) p_hat = std::max(p_hat, SpectralNorm(P));
  return p_hat;
}

}  // namespace sparse_lqr
