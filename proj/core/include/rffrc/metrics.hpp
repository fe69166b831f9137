#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

namespace rffrc {

/// Denominator used by the normalized RMSE.
enum class NrmseNormalization {
  population_std,  ///< per-channel population standard deviation (default)
  range,           ///< per-channel max - min
};

/// Per-channel normalized root-mean-square error of `pred` against
/// `truth` (same shape, rows = time).  Channels whose normalizer is
/// zero report the raw RMSE.
Eigen::VectorXd nrmse(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth,
                      NrmseNormalization norm = NrmseNormalization::population_std);

/// Mean of nrmse() over channels.
double mean_nrmse(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth,
                  NrmseNormalization norm = NrmseNormalization::population_std);

/// Valid prediction time of a closed-loop forecast: the last step
/// before the normalized error
///   e(t) = ||pred(t) - truth(t)||_2 / ||sigma_truth||_2
/// first strictly exceeds theta, reported as the 1-based index of that
/// first crossing; if the error never crosses, the horizon (number of
/// rows) is returned.  sigma_truth is the per-channel population
/// standard deviation of `truth`.
Eigen::Index valid_prediction_time(const Eigen::MatrixXd& pred,
                                   const Eigen::MatrixXd& truth, double theta);

/// Linear-interpolation quantile (the "linear" convention: the value
/// at fractional position (n-1)*q of the sorted sample).
double quantile(std::vector<double> values, double q);
double median(std::vector<double> values);

/// One point of a hyperparameter sweep: the median and interquartile
/// band of a score across seeds.
struct SweepPoint {
  double axis_value = 0.0;
  double median_nrmse = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
};

/// Evaluate `score(axis_value, seed)` for every axis value and seed;
/// one SweepPoint per axis value.  Deterministic given a deterministic
/// score function.
std::vector<SweepPoint> sweep(
    const std::vector<double>& axis_values,
    const std::vector<std::uint64_t>& seeds,
    const std::function<double(double, std::uint64_t)>& score);

}  // namespace rffrc
