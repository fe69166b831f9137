#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace rffrc {

/// Random Fourier cosine feature map
///   phi(x) = sqrt(2/m) * cos(W^T x + b),
/// W_ij ~ N(0, 1/sigma^2) and b_j ~ U[0, 2*pi).  Inner products of
/// features approximate the Gaussian kernel
///   k(x, y) = exp(-||x - y||^2 / (2 sigma^2)).
///
/// Draw order (part of the reproducibility contract): W is filled one
/// input coordinate at a time, i.e. W(0,0), W(0,1), ..., W(0,m-1),
/// W(1,0), ..., then all m entries of b.
class FeatureMap {
 public:
  /// Draw a fresh map.  Requires input_dim >= 1, n_features >= 1,
  /// sigma > 0.
  static FeatureMap sample(Eigen::Index input_dim, Eigen::Index n_features,
                           double sigma, std::uint64_t seed);

  /// Rebuild a map from explicit weights, e.g. after deserialization.
  FeatureMap(Eigen::MatrixXd weights, Eigen::VectorXd offsets, double sigma);

  /// Map a batch of row vectors; result is rows(x) x m.  Work is done
  /// in row blocks of `block_rows` to bound scratch memory.
  Eigen::MatrixXd transform(const Eigen::MatrixXd& x,
                            Eigen::Index block_rows = 4096) const;

  /// Map a single row vector (the code path used step by step during
  /// closed-loop forecasting).
  Eigen::RowVectorXd transform_row(const Eigen::RowVectorXd& x) const;

  Eigen::Index input_dim() const { return weights_.rows(); }
  Eigen::Index n_features() const { return weights_.cols(); }
  double sigma() const { return sigma_; }
  /// sqrt(2/m), the amplitude bound of every feature.
  double amplitude() const { return amplitude_; }
  const Eigen::MatrixXd& weights() const { return weights_; }
  const Eigen::VectorXd& offsets() const { return offsets_; }

 private:
  Eigen::MatrixXd weights_;  // input_dim x m
  Eigen::VectorXd offsets_;  // m
  double sigma_ = 1.0;
  double amplitude_ = 0.0;
};

}  // namespace rffrc
