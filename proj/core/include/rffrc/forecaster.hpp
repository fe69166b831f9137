#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rffrc/feature_map.hpp"
#include "rffrc/ridge.hpp"
#include "rffrc/time_series.hpp"

namespace rffrc {

/// Per-channel affine preconditioning applied before embedding and
/// undone on every prediction.  Statistics always come from the
/// training segment only.
enum class ScalingMode {
  none,      ///< use raw values
  minmax01,  ///< (x - min) / (max - min), the default
  zscore,    ///< (x - mean) / std
};

std::string to_string(ScalingMode mode);
ScalingMode scaling_mode_from_string(const std::string& name);

struct ForecasterConfig {
  int k = 5;                 ///< delay-embedding taps
  int n_features = 3000;     ///< random features m
  double lambda = 1e-6;      ///< ridge regularization
  double sigma = 2.0;        ///< kernel bandwidth of the feature map
  std::vector<int> observed; ///< input channels; empty = all
  std::vector<int> target;   ///< predicted channels; empty = all
  ScalingMode scaling = ScalingMode::minmax01;
  std::uint64_t seed = 1;
  Eigen::Index block_rows = 4096;  ///< training batch granularity
};

/// End-to-end forecaster: delay embedding -> random Fourier features
/// -> centered ridge readout, with one-step and closed-loop inference.
class Forecaster {
 public:
  /// Train on a series predicting its own next samples.
  static Forecaster train(const TimeSeries& series,
                          const ForecasterConfig& config);

  /// Train with distinct input and target series of identical shape
  /// (e.g. noisy inputs, clean targets).  Scaling statistics are taken
  /// from the input series.
  static Forecaster train(const TimeSeries& inputs, const TimeSeries& targets,
                          const ForecasterConfig& config);

  /// One-step-ahead predictions over a segment: row r predicts sample
  /// r+k of the segment, so the result has rows(segment)-k rows and
  /// one column per target channel, in original (unscaled) units.
  Eigen::MatrixXd predict_one_step(const Eigen::MatrixXd& segment) const;

  /// Closed-loop forecast.  The last k rows of `warmup` (full channel
  /// count, unscaled) seed the delay window; each emitted prediction
  /// is fed back in place of the next observation.  Requires the
  /// observed channels to be a subset of the target channels.
  /// horizon 0 yields an empty matrix.
  Eigen::MatrixXd rollout(const Eigen::MatrixXd& warmup,
                          Eigen::Index horizon) const;

  /// Like rollout but the delay window is refilled from `segment`
  /// (the truth) after every step.  Equivalent to predict_one_step;
  /// both share the per-row code path and agree bitwise.
  Eigen::MatrixXd rollout_teacher_forced(const Eigen::MatrixXd& segment) const;

  /// Mean over target channels of the one-step NRMSE on the training
  /// segment, recorded at fit time.
  double training_nrmse() const { return training_nrmse_mean_; }
  const Eigen::VectorXd& training_nrmse_per_channel() const {
    return training_nrmse_;
  }

  const ForecasterConfig& config() const { return config_; }
  const FeatureMap& feature_map() const { return feature_map_; }
  const RidgeModel& readout() const { return readout_; }
  const std::vector<std::string>& channel_names() const {
    return channel_names_;
  }
  double dt() const { return dt_; }
  Eigen::Index n_channels() const { return shift_.size(); }

  /// Resolved channel lists (never empty, unlike the config fields).
  const std::vector<int>& observed_channels() const { return observed_; }
  const std::vector<int>& target_channels() const { return target_; }
  const Eigen::VectorXd& scaling_shift() const { return shift_; }
  const Eigen::VectorXd& scaling_scale() const { return scale_; }

  /// Serialize to the RFRC binary container (see README for the exact
  /// layout).  Writing is atomic (temp file + rename).
  void save(const std::filesystem::path& path) const;

  /// Load a model saved by save().  Throws io_error on bad magic,
  /// unsupported version, or checksum mismatch (e.g. truncation).
  static Forecaster load(const std::filesystem::path& path);

 private:
  Forecaster(ForecasterConfig config, FeatureMap map, RidgeModel readout);

  /// Scale a raw sample row into model space / undo for predictions.
  Eigen::RowVectorXd predict_scaled_window(
      const Eigen::RowVectorXd& window) const;

  ForecasterConfig config_;
  FeatureMap feature_map_;
  RidgeModel readout_;
  Eigen::VectorXd shift_;  // per source channel
  Eigen::VectorXd scale_;
  Eigen::VectorXd training_nrmse_;
  double training_nrmse_mean_ = 0.0;
  std::vector<std::string> channel_names_;
  double dt_ = 1.0;
  // Resolved channel lists (config_ may say "all" via empty lists).
  std::vector<int> observed_;
  std::vector<int> target_;
  // Position of each observed channel inside target_, for feedback.
  std::vector<int> feedback_pos_;

  friend struct ForecasterIo;
};

}  // namespace rffrc
