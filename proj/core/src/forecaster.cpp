#include "rffrc/forecaster.hpp"

#include <unistd.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cassert>
#include <cmath>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "rffrc/errors.hpp"
#include "rffrc/version.hpp"

namespace rffrc {

namespace {

std::vector<int> resolve_channels(const std::vector<int>& requested,
                                  Eigen::Index n_channels, const char* what) {
  std::vector<int> channels = requested;
  if (channels.empty()) {
    channels.resize(static_cast<std::size_t>(n_channels));
    for (std::size_t i = 0; i < channels.size(); ++i) {
      channels[i] = static_cast<int>(i);
    }
  }
  for (int ch : channels) {
    if (ch < 0 || ch >= n_channels) {
      throw config_error(std::string(what) + ": channel index " +
                         std::to_string(ch) + " out of range");
    }
  }
  return channels;
}

// CRC-64/XZ (reflected, polynomial 0xC96C5795D7870F42), used as the
// integrity trailer of the model container.
class Crc64 {
 public:
  Crc64() {
    for (std::uint64_t i = 0; i < 256; ++i) {
      std::uint64_t crc = i;
      for (int bit = 0; bit < 8; ++bit) {
        crc = (crc & 1) ? (crc >> 1) ^ 0xC96C5795D7870F42ull : crc >> 1;
      }
      table_[i] = crc;
    }
  }
  std::uint64_t compute(const unsigned char* data, std::size_t size) const {
    std::uint64_t crc = ~0ull;
    for (std::size_t i = 0; i < size; ++i) {
      crc = table_[(crc ^ data[i]) & 0xFF] ^ (crc >> 8);
    }
    return ~crc;
  }

 private:
  std::array<std::uint64_t, 256> table_;
};

void put_u32(std::string& out, std::uint32_t value) {
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
  }
}

void put_u64(std::string& out, std::uint64_t value) {
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
  }
}

void put_f64(std::string& out, double value) {
  put_u64(out, std::bit_cast<std::uint64_t>(value));
}

class Reader {
 public:
  Reader(const std::string& data, std::size_t limit)
      : data_(data), limit_(limit) {}
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(
               static_cast<unsigned char>(data_[pos_ + i]))
           << (8 * i);
    }
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(
               static_cast<unsigned char>(data_[pos_ + i]))
           << (8 * i);
    }
    pos_ += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string bytes(std::size_t count) {
    need(count);
    std::string s = data_.substr(pos_, count);
    pos_ += count;
    return s;
  }
  std::size_t pos() const { return pos_; }

 private:
  void need(std::size_t count) const {
    if (pos_ + count > limit_) {
      throw io_error("model file failed checksum (truncated)");
    }
  }
  const std::string& data_;
  std::size_t limit_;
  std::size_t pos_ = 0;
};

void atomic_write(const std::filesystem::path& path, const std::string& data) {
  const std::filesystem::path tmp =
      path.parent_path() /
      (path.filename().string() + ".tmp" + std::to_string(::getpid()));
  {
    std::ofstream stream(tmp, std::ios::binary | std::ios::trunc);
    if (!stream) throw io_error("cannot open for writing: " + tmp.string());
    stream.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!stream) throw io_error("short write: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw io_error("rename failed: " + path.string() + ": " + ec.message());
  }
}

}  // namespace

std::string to_string(ScalingMode mode) {
  switch (mode) {
    case ScalingMode::none: return "none";
    case ScalingMode::minmax01: return "minmax01";
    case ScalingMode::zscore: return "zscore";
  }
  return "minmax01";
}

ScalingMode scaling_mode_from_string(const std::string& name) {
  if (name == "none") return ScalingMode::none;
  if (name == "minmax01") return ScalingMode::minmax01;
  if (name == "zscore") return ScalingMode::zscore;
  throw config_error("unknown scaling mode '" + name +
                     "' (expected none, minmax01 or zscore)");
}

Forecaster::Forecaster(ForecasterConfig config, FeatureMap map,
                       RidgeModel readout)
    : config_(std::move(config)), feature_map_(std::move(map)),
      readout_(std::move(readout)) {}

Forecaster Forecaster::train(const TimeSeries& series,
                             const ForecasterConfig& config) {
  return train(series, series, config);
}

Forecaster Forecaster::train(const TimeSeries& inputs,
                             const TimeSeries& targets,
                             const ForecasterConfig& config) {
  if (inputs.rows() != targets.rows() ||
      inputs.channels() != targets.channels()) {
    throw config_error("train: input and target series shapes differ");
  }
  const Eigen::Index n_rows = inputs.rows();
  const Eigen::Index n_channels = inputs.channels();
  if (config.k < 1) throw config_error("train: k must be >= 1");
  if (n_rows <= config.k) {
    throw config_error("train: series must be longer than k");
  }
  if (config.n_features < 1) {
    throw config_error("train: n_features must be >= 1");
  }

  const std::vector<int> observed =
      resolve_channels(config.observed, n_channels, "observed");
  const std::vector<int> target =
      resolve_channels(config.target, n_channels, "target");

  // Per-channel affine preconditioning, statistics from the input
  // series (the training segment).
  Eigen::VectorXd shift = Eigen::VectorXd::Zero(n_channels);
  Eigen::VectorXd scale = Eigen::VectorXd::Ones(n_channels);
  for (Eigen::Index c = 0; c < n_channels; ++c) {
    const auto column = inputs.values.col(c).array();
    switch (config.scaling) {
      case ScalingMode::none:
        break;
      case ScalingMode::minmax01: {
        shift[c] = column.minCoeff();
        const double span = column.maxCoeff() - shift[c];
        scale[c] = span > 0.0 ? span : 1.0;
        break;
      }
      case ScalingMode::zscore: {
        shift[c] = column.mean();
        const double stddev = std::sqrt((column - shift[c]).square().mean());
        scale[c] = stddev > 0.0 ? stddev : 1.0;
        break;
      }
    }
  }

  const auto scale_matrix = [&](const Eigen::MatrixXd& raw) {
    Eigen::MatrixXd z = raw;
    for (Eigen::Index c = 0; c < n_channels; ++c) {
      z.col(c) = (z.col(c).array() - shift[c]) / scale[c];
    }
    return z;
  };
  const Eigen::MatrixXd z_inputs = scale_matrix(inputs.values);
  const Eigen::MatrixXd z_targets = scale_matrix(targets.values);

  TrainingPairs pairs;
  {
    // Embed observed channels of the scaled inputs; targets come from
    // the (possibly distinct) scaled target series.
    Eigen::MatrixXd obs_values(n_rows,
                               static_cast<Eigen::Index>(observed.size()));
    for (std::size_t i = 0; i < observed.size(); ++i) {
      obs_values.col(static_cast<Eigen::Index>(i)) =
          z_inputs.col(observed[i]);
    }
    const Eigen::MatrixXd embedded = delay_embed(obs_values, config.k);
    pairs.inputs = embedded.topRows(embedded.rows() - 1);
    pairs.targets.resize(n_rows - config.k,
                         static_cast<Eigen::Index>(target.size()));
    for (std::size_t i = 0; i < target.size(); ++i) {
      pairs.targets.col(static_cast<Eigen::Index>(i)) =
          z_targets.col(target[i]).segment(config.k, n_rows - config.k);
    }
  }

  const Eigen::Index input_dim =
      static_cast<Eigen::Index>(observed.size()) * config.k;
  FeatureMap map = FeatureMap::sample(input_dim, config.n_features,
                                      config.sigma, config.seed);

  // Accumulate uncentered moments in row blocks so the full feature
  // matrix never has to exist in memory.
  const Eigen::Index m = config.n_features;
  const Eigen::Index d_out = pairs.targets.cols();
  const Eigen::Index n = pairs.inputs.rows();
  const Eigen::Index block = std::max<Eigen::Index>(config.block_rows, 1);
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(m, m);
  Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(m, d_out);
  Eigen::RowVectorXd feature_sum = Eigen::RowVectorXd::Zero(m);
  Eigen::RowVectorXd target_sum = Eigen::RowVectorXd::Zero(d_out);
  for (Eigen::Index start = 0; start < n; start += block) {
    const Eigen::Index count = std::min(block, n - start);
    const Eigen::MatrixXd phi =
        map.transform(pairs.inputs.middleRows(start, count), count);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(phi.transpose(), 1.0);
    cross.noalias() += phi.transpose() * pairs.targets.middleRows(start, count);
    feature_sum += phi.colwise().sum();
    target_sum += pairs.targets.middleRows(start, count).colwise().sum();
  }
  gram.triangularView<Eigen::StrictlyUpper>() =
      gram.triangularView<Eigen::StrictlyLower>().transpose();

  RidgeModel readout = ridge_fit_moments(std::move(gram), std::move(cross),
                                         feature_sum, target_sum, n,
                                         config.lambda);

  Forecaster model(config, std::move(map), std::move(readout));
  model.shift_ = std::move(shift);
  model.scale_ = std::move(scale);
  model.channel_names_ = inputs.channel_names;
  model.dt_ = inputs.dt;
  model.observed_ = observed;
  model.target_ = target;
  model.feedback_pos_.clear();
  for (int ch : observed) {
    const auto it = std::find(target.begin(), target.end(), ch);
    model.feedback_pos_.push_back(
        it == target.end() ? -1
                           : static_cast<int>(it - target.begin()));
  }

  // One-step NRMSE on the training segment, in scaled space; NRMSE is
  // invariant under the per-channel affine scaling, so this equals the
  // value in original units.
  {
    Eigen::VectorXd sq_err = Eigen::VectorXd::Zero(d_out);
    for (Eigen::Index start = 0; start < n; start += block) {
      const Eigen::Index count = std::min(block, n - start);
      const Eigen::MatrixXd phi =
          model.feature_map_.transform(pairs.inputs.middleRows(start, count),
                                       count);
      const Eigen::MatrixXd pred = model.readout_.predict(phi);
      sq_err +=
          (pred - pairs.targets.middleRows(start, count)).array().square()
              .colwise().sum().matrix().transpose();
    }
    model.training_nrmse_.resize(d_out);
    for (Eigen::Index c = 0; c < d_out; ++c) {
      const double mean = pairs.targets.col(c).mean();
      const double stddev = std::sqrt(
          (pairs.targets.col(c).array() - mean).square().mean());
      const double rmse = std::sqrt(sq_err[c] / static_cast<double>(n));
      model.training_nrmse_[c] = stddev > 0.0 ? rmse / stddev : rmse;
    }
    model.training_nrmse_mean_ = model.training_nrmse_.mean();
  }
  return model;
}

Eigen::MatrixXd Forecaster::predict_one_step(
    const Eigen::MatrixXd& segment) const {
  if (segment.cols() != n_channels()) {
    throw config_error("predict_one_step: channel count mismatch");
  }
  const int k = config_.k;
  if (segment.rows() <= k) {
    throw config_error("predict_one_step: segment must be longer than k");
  }
  const Eigen::Index n_out = segment.rows() - k;
  const auto n_obs = static_cast<Eigen::Index>(observed_.size());
  const auto d_out = static_cast<Eigen::Index>(target_.size());

  // Scaled view of the observed channels only.
  Eigen::MatrixXd z(segment.rows(), n_obs);
  for (Eigen::Index i = 0; i < n_obs; ++i) {
    const int ch = observed_[static_cast<std::size_t>(i)];
    z.col(i) = (segment.col(ch).array() - shift_[ch]) / scale_[ch];
  }

  Eigen::MatrixXd predictions(n_out, d_out);
  Eigen::RowVectorXd window(n_obs * k);
  for (Eigen::Index r = 0; r < n_out; ++r) {
    const Eigen::Index t = r + k - 1;  // most recent sample in the window
    for (Eigen::Index i = 0; i < n_obs; ++i) {
      for (int j = 0; j < k; ++j) {
        window[i * k + j] = z(t - j, i);
      }
    }
    predictions.row(r) = predict_scaled_window(window);
  }
  for (Eigen::Index c = 0; c < d_out; ++c) {
    const int ch = target_[static_cast<std::size_t>(c)];
    predictions.col(c) =
        predictions.col(c).array() * scale_[ch] + shift_[ch];
  }
  return predictions;
}

Eigen::MatrixXd Forecaster::rollout(const Eigen::MatrixXd& warmup,
                                    Eigen::Index horizon) const {
  if (horizon < 0) throw config_error("rollout: horizon must be >= 0");
  if (warmup.cols() != n_channels()) {
    throw config_error("rollout: warmup channel count mismatch");
  }
  const int k = config_.k;
  if (warmup.rows() < k) {
    throw config_error("rollout: warmup must provide at least k rows");
  }
  for (std::size_t i = 0; i < observed_.size(); ++i) {
    if (feedback_pos_[i] < 0) {
      throw config_error(
          "rollout: closed loop requires every observed channel to be "
          "predicted (observed must be a subset of target)");
    }
  }
  const auto n_obs = static_cast<Eigen::Index>(observed_.size());
  const auto d_out = static_cast<Eigen::Index>(target_.size());

  // Scaled delay window, most recent first per channel block.
  Eigen::RowVectorXd window(n_obs * k);
  const Eigen::Index last = warmup.rows() - 1;
  for (Eigen::Index i = 0; i < n_obs; ++i) {
    const int ch = observed_[static_cast<std::size_t>(i)];
    for (int j = 0; j < k; ++j) {
      window[i * k + j] = (warmup(last - j, ch) - shift_[ch]) / scale_[ch];
    }
  }

  Eigen::MatrixXd predictions(horizon, d_out);
  for (Eigen::Index step = 0; step < horizon; ++step) {
    const Eigen::RowVectorXd scaled = predict_scaled_window(window);
    predictions.row(step) = scaled;
    // Feed predictions back: drop each channel's oldest tap, insert
    // the fresh value in front.
    for (Eigen::Index i = 0; i < n_obs; ++i) {
      for (int j = k - 1; j > 0; --j) {
        window[i * k + j] = window[i * k + j - 1];
      }
      window[i * k] = scaled[feedback_pos_[static_cast<std::size_t>(i)]];
    }
  }
  for (Eigen::Index c = 0; c < d_out; ++c) {
    const int ch = target_[static_cast<std::size_t>(c)];
    predictions.col(c) =
        predictions.col(c).array() * scale_[ch] + shift_[ch];
  }
  return predictions;
}

Eigen::MatrixXd Forecaster::rollout_teacher_forced(
    const Eigen::MatrixXd& segment) const {
  // Refilling the whole window from the truth before every step makes
  // each step exactly the one-step prediction of that window, so the
  // two operations share one code path and agree bitwise.
  return predict_one_step(segment);
}

Eigen::RowVectorXd Forecaster::predict_scaled_window(
    const Eigen::RowVectorXd& window) const {
  const Eigen::RowVectorXd phi = feature_map_.transform_row(window);
  return (phi * readout_.weights) + readout_.intercept;
}

// --- serialization ----------------------------------------------------

struct ForecasterIo {
  static std::string serialize(const Forecaster& model) {
    nlohmann::json meta;
    meta["format"] = "rffrc-model";
    meta["library_version"] = kVersion;
    meta["k"] = model.config_.k;
    meta["m"] = model.config_.n_features;
    meta["lambda"] = model.config_.lambda;
    meta["sigma"] = model.config_.sigma;
    meta["scaling"] = to_string(model.config_.scaling);
    meta["seed"] = model.config_.seed;
    meta["observed"] = model.observed_;
    meta["target"] = model.target_;
    meta["channel_names"] = model.channel_names_;
    meta["dt"] = model.dt_;
    meta["n_channels"] = model.n_channels();
    meta["input_dim"] = model.feature_map_.input_dim();
    meta["lambda_effective"] = model.readout_.lambda_effective;
    meta["jitter_escalations"] = model.readout_.jitter_escalations;
    meta["training_nrmse_mean"] = model.training_nrmse_mean_;
    const std::string json_text = meta.dump();

    std::string out;
    out.reserve(json_text.size() + 64 +
                8 * static_cast<std::size_t>(
                        model.feature_map_.weights().size() +
                        model.feature_map_.offsets().size() +
                        model.readout_.weights.size() + 4 * 1024));
    out += "RFRC";
    put_u32(out, kModelFormatVersion);
    put_u64(out, json_text.size());
    out += json_text;

    const auto put_matrix_rowmajor = [&out](const Eigen::MatrixXd& mat) {
      for (Eigen::Index i = 0; i < mat.rows(); ++i) {
        for (Eigen::Index j = 0; j < mat.cols(); ++j) {
          put_f64(out, mat(i, j));
        }
      }
    };
    const auto put_vector = [&out](const auto& vec) {
      for (Eigen::Index i = 0; i < vec.size(); ++i) put_f64(out, vec[i]);
    };
    put_matrix_rowmajor(model.feature_map_.weights());
    put_vector(model.feature_map_.offsets());
    put_matrix_rowmajor(model.readout_.weights);
    put_vector(model.readout_.intercept);
    put_vector(model.readout_.feature_mean);
    put_vector(model.readout_.target_mean);
    put_vector(model.shift_);
    put_vector(model.scale_);
    put_vector(model.training_nrmse_);

    static const Crc64 crc;
    put_u64(out, crc.compute(
                     reinterpret_cast<const unsigned char*>(out.data()),
                     out.size()));
    return out;
  }

  static Forecaster deserialize(const std::string& data,
                                const std::string& origin) {
    if (data.size() < 16 || data.compare(0, 4, "RFRC") != 0) {
      throw io_error("not a model file (bad magic): " + origin);
    }
    static const Crc64 crc;
    const std::uint64_t stored = [&] {
      Reader tail(data, data.size());
      tail.bytes(data.size() - 8);
      return tail.u64();
    }();
    const std::uint64_t computed = crc.compute(
        reinterpret_cast<const unsigned char*>(data.data()), data.size() - 8);
    if (stored != computed) {
      throw io_error("model file failed checksum (truncated or corrupt): " +
                     origin);
    }

    Reader reader(data, data.size() - 8);
    reader.bytes(4);  // magic
    const std::uint32_t version = reader.u32();
    if (version != kModelFormatVersion) {
      throw io_error("unsupported model format version " +
                     std::to_string(version) + " (expected " +
                     std::to_string(kModelFormatVersion) + "): " + origin);
    }
    const std::uint64_t json_len = reader.u64();
    nlohmann::json meta;
    try {
      meta = nlohmann::json::parse(reader.bytes(json_len));
    } catch (const nlohmann::json::exception& e) {
      throw io_error("model metadata is not valid JSON: " + origin + ": " +
                     e.what());
    }

    ForecasterConfig config;
    Eigen::Index n_channels = 0;
    Eigen::Index input_dim = 0;
    std::vector<int> observed, target;
    std::vector<std::string> channel_names;
    double dt = 1.0;
    double lambda_effective = 0.0;
    int jitter_escalations = 0;
    try {
      config.k = meta.at("k").get<int>();
      config.n_features = meta.at("m").get<int>();
      config.lambda = meta.at("lambda").get<double>();
      config.sigma = meta.at("sigma").get<double>();
      config.scaling = scaling_mode_from_string(meta.at("scaling"));
      config.seed = meta.at("seed").get<std::uint64_t>();
      observed = meta.at("observed").get<std::vector<int>>();
      target = meta.at("target").get<std::vector<int>>();
      channel_names = meta.at("channel_names").get<std::vector<std::string>>();
      dt = meta.at("dt").get<double>();
      n_channels = meta.at("n_channels").get<Eigen::Index>();
      input_dim = meta.at("input_dim").get<Eigen::Index>();
      lambda_effective = meta.at("lambda_effective").get<double>();
      jitter_escalations = meta.at("jitter_escalations").get<int>();
    } catch (const nlohmann::json::exception& e) {
      throw io_error("model metadata incomplete: " + origin + ": " + e.what());
    }
    config.observed = observed;
    config.target = target;

    const auto m = static_cast<Eigen::Index>(config.n_features);
    const auto d_out = static_cast<Eigen::Index>(target.size());
    const auto read_matrix_rowmajor = [&reader](Eigen::Index rows,
                                                Eigen::Index cols) {
      Eigen::MatrixXd mat(rows, cols);
      for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) mat(i, j) = reader.f64();
      }
      return mat;
    };
    const auto read_vector = [&reader](Eigen::Index size) {
      Eigen::VectorXd vec(size);
      for (Eigen::Index i = 0; i < size; ++i) vec[i] = reader.f64();
      return vec;
    };

    Eigen::MatrixXd weights = read_matrix_rowmajor(input_dim, m);
    Eigen::VectorXd offsets = read_vector(m);
    RidgeModel readout;
    readout.lambda = config.lambda;
    readout.lambda_effective = lambda_effective;
    readout.jitter_escalations = jitter_escalations;
    readout.weights = read_matrix_rowmajor(m, d_out);
    readout.intercept = read_vector(d_out).transpose();
    readout.feature_mean = read_vector(m).transpose();
    readout.target_mean = read_vector(d_out).transpose();
    Eigen::VectorXd shift = read_vector(n_channels);
    Eigen::VectorXd scale = read_vector(n_channels);
    Eigen::VectorXd training_nrmse = read_vector(d_out);

    Forecaster model(config,
                     FeatureMap(std::move(weights), std::move(offsets),
                                config.sigma),
                     std::move(readout));
    model.shift_ = std::move(shift);
    model.scale_ = std::move(scale);
    model.channel_names_ = channel_names;
    model.dt_ = dt;
    model.observed_ = observed;
    model.target_ = target;
    model.feedback_pos_.clear();
    for (int ch : observed) {
      const auto it = std::find(target.begin(), target.end(), ch);
      model.feedback_pos_.push_back(
          it == target.end() ? -1 : static_cast<int>(it - target.begin()));
    }
    model.training_nrmse_ = std::move(training_nrmse);
    model.training_nrmse_mean_ =
        model.training_nrmse_.size() > 0 ? model.training_nrmse_.mean() : 0.0;
    return model;
  }
};

void Forecaster::save(const std::filesystem::path& path) const {
  atomic_write(path, ForecasterIo::serialize(*this));
}

Forecaster Forecaster::load(const std::filesystem::path& path) {
  std::ifstream stream(path, std::ios::binary);
  if (!stream) throw io_error("cannot open: " + path.string());
  std::ostringstream buffer;
  buffer << stream.rdbuf();
  return ForecasterIo::deserialize(buffer.str(), path.string());
}

}  // namespace rffrc
