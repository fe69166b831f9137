#include "rffrc/feature_map.hpp"

#include <cmath>
#include <numbers>

#include "rffrc/errors.hpp"
#include "rffrc/rng.hpp"

namespace rffrc {

FeatureMap::FeatureMap(Eigen::MatrixXd weights, Eigen::VectorXd offsets,
                       double sigma)
    : weights_(std::move(weights)), offsets_(std::move(offsets)),
      sigma_(sigma) {
  if (weights_.rows() < 1 || weights_.cols() < 1) {
    throw config_error("feature map: empty weight matrix");
  }
  if (offsets_.size() != weights_.cols()) {
    throw config_error("feature map: offsets/weights size mismatch");
  }
  if (!(sigma_ > 0.0)) throw config_error("feature map: sigma must be > 0");
  amplitude_ = std::sqrt(2.0 / static_cast<double>(weights_.cols()));
}

FeatureMap FeatureMap::sample(Eigen::Index input_dim, Eigen::Index n_features,
                              double sigma, std::uint64_t seed) {
  if (input_dim < 1) throw config_error("feature map: input_dim must be >= 1");
  if (n_features < 1) {
    throw config_error("feature map: n_features must be >= 1");
  }
  if (!(sigma > 0.0)) throw config_error("feature map: sigma must be > 0");

  Rng rng(seed);
  Eigen::MatrixXd weights(input_dim, n_features);
  const double stddev = 1.0 / sigma;
  for (Eigen::Index i = 0; i < input_dim; ++i) {
    for (Eigen::Index j = 0; j < n_features; ++j) {
      weights(i, j) = rng.normal(0.0, stddev);
    }
  }
  Eigen::VectorXd offsets(n_features);
  for (Eigen::Index j = 0; j < n_features; ++j) {
    offsets[j] = rng.uniform(0.0, 2.0 * std::numbers::pi);
  }
  return FeatureMap(std::move(weights), std::move(offsets), sigma);
}

Eigen::MatrixXd FeatureMap::transform(const Eigen::MatrixXd& x,
                                      Eigen::Index block_rows) const {
  if (x.cols() != weights_.rows()) {
    throw config_error("feature map: input dimension mismatch");
  }
  if (block_rows < 1) block_rows = x.rows();
  Eigen::MatrixXd phi(x.rows(), weights_.cols());
  for (Eigen::Index start = 0; start < x.rows(); start += block_rows) {
    const Eigen::Index count = std::min(block_rows, x.rows() - start);
    phi.middleRows(start, count).noalias() =
        x.middleRows(start, count) * weights_;
    phi.middleRows(start, count) =
        (phi.middleRows(start, count).rowwise() + offsets_.transpose())
            .array()
            .cos() *
        amplitude_;
  }
  return phi;
}

Eigen::RowVectorXd FeatureMap::transform_row(const Eigen::RowVectorXd& x) const {
  if (x.size() != weights_.rows()) {
    throw config_error("feature map: input dimension mismatch");
  }
  Eigen::RowVectorXd phi = x * weights_;
  phi += offsets_.transpose();
  return phi.array().cos() * amplitude_;
}

}  // namespace rffrc
