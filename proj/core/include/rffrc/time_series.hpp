#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <vector>

namespace rffrc {

/// A uniformly sampled multichannel time series.  Row i of `values`
/// holds the sample at time i * dt; one column per channel.
struct TimeSeries {
  double dt = 1.0;
  std::vector<std::string> channel_names;
  Eigen::MatrixXd values;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index channels() const { return values.cols(); }
};

/// Serialize to CSV with header `t,<name1>,...`.  Every double is
/// written in shortest round-trip form, so read_csv recovers the exact
/// bit pattern.  The time column is i * dt.
std::string to_csv(const TimeSeries& series);

/// Atomically write `to_csv(series)` to `path` (temp file + rename).
void write_csv(const TimeSeries& series, const std::filesystem::path& path);

/// Atomically write arbitrary text to `path` (temp file in the same
/// directory + rename), so readers never observe a partial file.
void write_text_file(const std::filesystem::path& path,
                     const std::string& text);

/// Parse a CSV produced by to_csv (or any file with the same shape).
/// dt is recovered from the first two time stamps, 1.0 for a
/// single-row file.  Throws io_error on missing files, ragged rows,
/// non-numeric fields, or a header that does not start with `t`.
TimeSeries read_csv(const std::filesystem::path& path);
TimeSeries from_csv_text(const std::string& text);

/// Write a bare matrix as CSV with time column (first_index + i) * dt.
/// Convenience for segment-aligned artifact files (predictions,
/// errors); unlike write_csv it is not meant for bitwise round-trips.
void write_matrix_csv(const Eigen::MatrixXd& values,
                      const std::vector<std::string>& names, double dt,
                      Eigen::Index first_index,
                      const std::filesystem::path& path);

/// Delay embedding of a multichannel series.
///
/// For k taps the result has N-k+1 rows and C*k columns.  Row r
/// describes time t = r+k-1 as one block per channel, channels in
/// column order, and within each block the most recent value first:
///   [u_0(t), u_0(t-1), ..., u_0(t-k+1), u_1(t), ...]
/// Requires 1 <= k <= N.
Eigen::MatrixXd delay_embed(const Eigen::MatrixXd& u, int k);

/// Supervised one-step-ahead pairs built from a delay embedding.
/// inputs row r is the embedding of time r+k-1 over `observed`
/// channels; targets row r is u(r+k) restricted to `target` channels.
/// Both have N-k rows.  Empty channel lists mean "all channels".
struct TrainingPairs {
  Eigen::MatrixXd inputs;
  Eigen::MatrixXd targets;
};
TrainingPairs make_training_pairs(const Eigen::MatrixXd& u, int k,
                                  const std::vector<int>& observed = {},
                                  const std::vector<int>& target = {});

/// Contiguous chronological split [train | validation | test].
/// Segment sizes are floor(N*train_frac) and floor(N*val_frac) with
/// the remainder going to the last segment.  With swap_validation_test
/// the middle segment becomes the test set and the tail the
/// validation set; sizes are unchanged.
struct ChronologicalSplit {
  Eigen::MatrixXd train;
  Eigen::MatrixXd validation;
  Eigen::MatrixXd test;
  /// Row index of each segment's first sample in the source series.
  Eigen::Index train_offset = 0;
  Eigen::Index validation_offset = 0;
  Eigen::Index test_offset = 0;
};
ChronologicalSplit chronological_split(const Eigen::MatrixXd& u,
                                       double train_frac, double val_frac,
                                       bool swap_validation_test = false);

}  // namespace rffrc
