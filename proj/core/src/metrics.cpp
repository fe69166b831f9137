#include "rffrc/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "rffrc/errors.hpp"

namespace rffrc {

Eigen::VectorXd nrmse(const Eigen::MatrixXd& pred,
                      const Eigen::MatrixXd& truth,
                      NrmseNormalization norm) {
  if (pred.rows() != truth.rows() || pred.cols() != truth.cols()) {
    throw config_error("nrmse: shape mismatch");
  }
  if (pred.rows() < 1) throw config_error("nrmse: empty input");
  Eigen::VectorXd result(pred.cols());
  for (Eigen::Index c = 0; c < pred.cols(); ++c) {
    const double rmse =
        std::sqrt((pred.col(c) - truth.col(c)).squaredNorm() /
                  static_cast<double>(pred.rows()));
    double normalizer = 0.0;
    switch (norm) {
      case NrmseNormalization::population_std: {
        const double mean = truth.col(c).mean();
        normalizer =
            std::sqrt((truth.col(c).array() - mean).square().mean());
        break;
      }
      case NrmseNormalization::range:
        normalizer = truth.col(c).maxCoeff() - truth.col(c).minCoeff();
        break;
    }
    result[c] = normalizer > 0.0 ? rmse / normalizer : rmse;
  }
  return result;
}

double mean_nrmse(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth,
                  NrmseNormalization norm) {
  return nrmse(pred, truth, norm).mean();
}

Eigen::Index valid_prediction_time(const Eigen::MatrixXd& pred,
                                   const Eigen::MatrixXd& truth,
                                   double theta) {
  if (pred.rows() != truth.rows() || pred.cols() != truth.cols()) {
    throw config_error("valid_prediction_time: shape mismatch");
  }
  if (!(theta > 0.0)) {
    throw config_error("valid_prediction_time: theta must be > 0");
  }
  const Eigen::Index horizon = pred.rows();
  if (horizon == 0) return 0;

  Eigen::VectorXd sigma(truth.cols());
  for (Eigen::Index c = 0; c < truth.cols(); ++c) {
    const double mean = truth.col(c).mean();
    sigma[c] = std::sqrt((truth.col(c).array() - mean).square().mean());
  }
  const double sigma_norm = sigma.norm();
  if (sigma_norm == 0.0) {
    throw numeric_error("valid_prediction_time: truth has zero variance");
  }

  for (Eigen::Index t = 0; t < horizon; ++t) {
    const double err = (pred.row(t) - truth.row(t)).norm() / sigma_norm;
    if (err > theta) return t + 1;  // 1-based index of the first crossing
  }
  return horizon;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw config_error("quantile: empty sample");
  if (q < 0.0 || q > 1.0) throw config_error("quantile: q outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(lo);
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] * (1.0 - frac) + values[lo + 1] * frac;
}

double median(std::vector<double> values) {
  return quantile(std::move(values), 0.5);
}

std::vector<SweepPoint> sweep(
    const std::vector<double>& axis_values,
    const std::vector<std::uint64_t>& seeds,
    const std::function<double(double, std::uint64_t)>& score) {
  if (seeds.empty()) throw config_error("sweep: need at least one seed");
  std::vector<SweepPoint> points;
  points.reserve(axis_values.size());
  for (const double value : axis_values) {
    std::vector<double> scores;
    scores.reserve(seeds.size());
    for (const std::uint64_t seed : seeds) {
      scores.push_back(score(value, seed));
    }
    SweepPoint point;
    point.axis_value = value;
    point.median_nrmse = quantile(scores, 0.5);
    point.q25 = quantile(scores, 0.25);
    point.q75 = quantile(scores, 0.75);
    points.push_back(point);
  }
  return points;
}

}  // namespace rffrc
