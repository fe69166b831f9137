#include "rffrc/ridge.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <string>

#include "rffrc/errors.hpp"

namespace rffrc {

namespace {

constexpr int kMaxJitterEscalations = 3;
constexpr double kResidualTolerance = 1e-8;

/// Solve (G + lambda I) W = C for SPD-up-to-roundoff G, escalating
/// lambda tenfold when the factorization fails or the solution does
/// not meet the residual bound.  G is the centered Gram matrix.
void solve_regularized(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& cross,
                       double lambda, RidgeModel& model) {
  const double cross_norm = cross.norm();
  double lambda_eff = lambda;
  for (int attempt = 0; attempt <= kMaxJitterEscalations; ++attempt) {
    Eigen::MatrixXd system = gram;
    system.diagonal().array() += lambda_eff;
    const Eigen::LLT<Eigen::MatrixXd> llt(system);
    if (llt.info() == Eigen::Success) {
      model.weights = llt.solve(cross);
      const double residual = (system * model.weights - cross).norm();
      if (residual <= kResidualTolerance * std::max(cross_norm, 1e-300)) {
        model.lambda_effective = lambda_eff;
        model.jitter_escalations = attempt;
        return;
      }
    }
    // Escalate: either the matrix was not numerically SPD or the
    // solution was too inaccurate (near-singular system).
    lambda_eff = lambda_eff > 0.0 ? lambda_eff * 10.0
                                  : 1e-12 * gram.diagonal().maxCoeff();
  }
  throw numeric_error(
      "ridge: Cholesky solve failed the residual bound even after " +
      std::to_string(kMaxJitterEscalations) + " jitter escalations");
}

void validate_lambda(double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw config_error("ridge: lambda must be finite and >= 0");
  }
}

}  // namespace

RidgeModel ridge_fit(const Eigen::MatrixXd& phi, const Eigen::MatrixXd& y,
                     double lambda) {
  validate_lambda(lambda);
  if (phi.rows() != y.rows()) throw config_error("ridge: row count mismatch");
  if (phi.rows() < 2) throw config_error("ridge: need at least two rows");

  RidgeModel model;
  model.lambda = lambda;
  model.feature_mean = phi.colwise().mean();
  model.target_mean = y.colwise().mean();
  const Eigen::MatrixXd phi_c = phi.rowwise() - model.feature_mean;
  const Eigen::MatrixXd y_c = y.rowwise() - model.target_mean;
  const Eigen::MatrixXd gram = phi_c.transpose() * phi_c;
  const Eigen::MatrixXd cross = phi_c.transpose() * y_c;
  solve_regularized(gram, cross, lambda, model);
  model.intercept = model.target_mean - model.feature_mean * model.weights;
  return model;
}

RidgeModel ridge_fit_moments(Eigen::MatrixXd gram, Eigen::MatrixXd cross,
                             const Eigen::RowVectorXd& feature_sum,
                             const Eigen::RowVectorXd& target_sum,
                             Eigen::Index n_rows, double lambda) {
  validate_lambda(lambda);
  if (gram.rows() != gram.cols() || gram.rows() != cross.rows() ||
      feature_sum.size() != gram.rows() || target_sum.size() != cross.cols()) {
    throw config_error("ridge: moment dimensions inconsistent");
  }
  if (n_rows < 2) throw config_error("ridge: need at least two rows");

  RidgeModel model;
  model.lambda = lambda;
  const double n = static_cast<double>(n_rows);
  model.feature_mean = feature_sum / n;
  model.target_mean = target_sum / n;
  // Center the accumulated moments:
  //   Phi_c^T Phi_c = Phi^T Phi - n * mean^T mean, likewise for cross.
  gram.noalias() -= n * model.feature_mean.transpose() * model.feature_mean;
  cross.noalias() -= n * model.feature_mean.transpose() * model.target_mean;
  solve_regularized(gram, cross, lambda, model);
  model.intercept = model.target_mean - model.feature_mean * model.weights;
  return model;
}

}  // namespace rffrc
