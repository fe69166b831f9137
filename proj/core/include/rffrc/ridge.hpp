#pragma once

#include <Eigen/Dense>

namespace rffrc {

/// Multi-output ridge regression with feature/target centering.
///
/// Given features Phi (n x m) and targets Y (n x d), both are centered
/// by their column means and the weights solve
///   (Phi_c^T Phi_c + lambda I) W = Phi_c^T Y_c
/// via Cholesky factorization.  The intercept restores the means:
///   b = mean(Y) - mean(Phi) W.
struct RidgeModel {
  Eigen::MatrixXd weights;       // m x d
  Eigen::RowVectorXd intercept;  // 1 x d
  Eigen::RowVectorXd feature_mean;
  Eigen::RowVectorXd target_mean;
  double lambda = 0.0;
  /// Ridge actually used: equals lambda unless jitter escalation was
  /// needed to make the Gram matrix factorizable.
  double lambda_effective = 0.0;
  int jitter_escalations = 0;

  Eigen::MatrixXd predict(const Eigen::MatrixXd& phi) const {
    return ((phi * weights).rowwise() + intercept).eval();
  }
};

/// Fit from explicit feature and target matrices.  Requires matching
/// row counts, n >= 2 and lambda >= 0.  If the Cholesky factorization
/// fails (or its solution misses the residual bound), lambda is
/// escalated tenfold up to three times before numeric_error is thrown.
/// The final solution always satisfies
///   ||(G + lambda I) W - Phi_c^T Y_c||_F <= 1e-8 ||Phi_c^T Y_c||_F.
RidgeModel ridge_fit(const Eigen::MatrixXd& phi, const Eigen::MatrixXd& y,
                     double lambda);

/// Fit from accumulated uncentered moments, for callers that build the
/// Gram matrix in row blocks without materializing Phi:
///   gram       = Phi^T Phi        (m x m)
///   cross      = Phi^T Y          (m x d)
///   feature_sum = column sums of Phi, target_sum = column sums of Y,
///   n_rows     = number of rows accumulated.
/// Centering is applied internally; the result matches ridge_fit on
/// the same data up to roundoff.
RidgeModel ridge_fit_moments(Eigen::MatrixXd gram, Eigen::MatrixXd cross,
                             const Eigen::RowVectorXd& feature_sum,
                             const Eigen::RowVectorXd& target_sum,
                             Eigen::Index n_rows, double lambda);

}  // namespace rffrc
