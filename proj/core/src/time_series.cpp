#include "rffrc/time_series.hpp"

#include <unistd.h>

#include <cassert>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "rffrc/errors.hpp"

namespace rffrc {

namespace {

// Shortest representation that round-trips the exact double.
void append_double(std::string& out, double value) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  assert(res.ec == std::errc());
  out.append(buf, res.ptr);
}

double parse_double(std::string_view token, std::size_t line_no) {
  double value = 0.0;
  const char* begin = token.data();
  const char* end = begin + token.size();
  auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc() || res.ptr != end) {
    throw io_error("CSV line " + std::to_string(line_no) +
                   ": not a number: '" + std::string(token) + "'");
  }
  return value;
}

}  // namespace

void write_text_file(const std::filesystem::path& path,
                     const std::string& text) {
  const std::filesystem::path tmp =
      path.parent_path() /
      (path.filename().string() + ".tmp" + std::to_string(::getpid()));
  {
    std::ofstream stream(tmp, std::ios::binary | std::ios::trunc);
    if (!stream) throw io_error("cannot open for writing: " + tmp.string());
    stream.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!stream) throw io_error("short write: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw io_error("rename failed: " + path.string() + ": " + ec.message());
  }
}

std::string to_csv(const TimeSeries& series) {
  if (static_cast<Eigen::Index>(series.channel_names.size()) !=
      series.channels()) {
    throw config_error("to_csv: channel_names size does not match columns");
  }
  std::string out = "t";
  for (const auto& name : series.channel_names) {
    out += ',';
    out += name;
  }
  out += '\n';
  for (Eigen::Index i = 0; i < series.rows(); ++i) {
    append_double(out, static_cast<double>(i) * series.dt);
    for (Eigen::Index c = 0; c < series.channels(); ++c) {
      out += ',';
      append_double(out, series.values(i, c));
    }
    out += '\n';
  }
  return out;
}

void write_csv(const TimeSeries& series, const std::filesystem::path& path) {
  write_text_file(path, to_csv(series));
}

TimeSeries from_csv_text(const std::string& text) {
  std::istringstream stream(text);
  std::string line;
  if (!std::getline(stream, line)) throw io_error("CSV: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  TimeSeries series;
  {
    std::size_t pos = 0;
    bool first = true;
    while (pos <= line.size()) {
      const std::size_t comma = line.find(',', pos);
      const std::string field = line.substr(
          pos, comma == std::string::npos ? std::string::npos : comma - pos);
      if (first) {
        if (field != "t") {
          throw io_error("CSV: header must start with 't', got '" + field +
                         "'");
        }
        first = false;
      } else {
        series.channel_names.push_back(field);
      }
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
  }
  if (series.channel_names.empty()) {
    throw io_error("CSV: header has no channel columns");
  }

  const std::size_t n_cols = series.channel_names.size() + 1;
  std::vector<double> flat;
  std::vector<double> times;
  std::size_t line_no = 1;
  while (std::getline(stream, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t pos = 0;
    std::size_t col = 0;
    while (col < n_cols) {
      const std::size_t comma = line.find(',', pos);
      const std::string_view token =
          std::string_view(line).substr(pos, comma == std::string::npos
                                                 ? std::string::npos
                                                 : comma - pos);
      const double value = parse_double(token, line_no);
      if (col == 0) {
        times.push_back(value);
      } else {
        flat.push_back(value);
      }
      ++col;
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (col != n_cols) {
      throw io_error("CSV line " + std::to_string(line_no) + ": expected " +
                     std::to_string(n_cols) + " fields, got " +
                     std::to_string(col));
    }
  }

  const Eigen::Index n_rows = static_cast<Eigen::Index>(times.size());
  const Eigen::Index n_channels =
      static_cast<Eigen::Index>(series.channel_names.size());
  series.values.resize(n_rows, n_channels);
  for (Eigen::Index i = 0; i < n_rows; ++i) {
    for (Eigen::Index c = 0; c < n_channels; ++c) {
      series.values(i, c) = flat[static_cast<std::size_t>(i * n_channels + c)];
    }
  }
  series.dt = n_rows >= 2 ? times[1] - times[0] : 1.0;
  return series;
}

TimeSeries read_csv(const std::filesystem::path& path) {
  std::ifstream stream(path, std::ios::binary);
  if (!stream) throw io_error("cannot open: " + path.string());
  std::ostringstream buffer;
  buffer << stream.rdbuf();
  return from_csv_text(buffer.str());
}

void write_matrix_csv(const Eigen::MatrixXd& values,
                      const std::vector<std::string>& names, double dt,
                      Eigen::Index first_index,
                      const std::filesystem::path& path) {
  if (static_cast<Eigen::Index>(names.size()) != values.cols()) {
    throw config_error("write_matrix_csv: names do not match columns");
  }
  std::string out = "t";
  for (const auto& name : names) {
    out += ',';
    out += name;
  }
  out += '\n';
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    append_double(out, static_cast<double>(first_index + i) * dt);
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      out += ',';
      append_double(out, values(i, c));
    }
    out += '\n';
  }
  write_text_file(path, out);
}

Eigen::MatrixXd delay_embed(const Eigen::MatrixXd& u, int k) {
  const Eigen::Index n = u.rows();
  const Eigen::Index c = u.cols();
  if (k < 1) throw config_error("delay_embed: k must be >= 1");
  if (n < k) throw config_error("delay_embed: series shorter than k");
  if (c < 1) throw config_error("delay_embed: series has no channels");

  Eigen::MatrixXd embedded(n - k + 1, c * k);
  for (Eigen::Index ch = 0; ch < c; ++ch) {
    for (Eigen::Index j = 0; j < k; ++j) {
      // Column ch*k + j holds u_ch(t - j); row r corresponds to
      // t = r + k - 1.
      embedded.col(ch * k + j) = u.col(ch).segment(k - 1 - j, n - k + 1);
    }
  }
  return embedded;
}

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

}  // namespace

TrainingPairs make_training_pairs(const Eigen::MatrixXd& u, int k,
                                  const std::vector<int>& observed,
                                  const std::vector<int>& target) {
  if (u.rows() <= k) {
    throw config_error("make_training_pairs: need more than k samples");
  }
  const std::vector<int> obs = resolve_channels(observed, u.cols(), "observed");
  const std::vector<int> tgt = resolve_channels(target, u.cols(), "target");

  Eigen::MatrixXd obs_values(u.rows(), static_cast<Eigen::Index>(obs.size()));
  for (std::size_t i = 0; i < obs.size(); ++i) {
    obs_values.col(static_cast<Eigen::Index>(i)) = u.col(obs[i]);
  }
  const Eigen::MatrixXd embedded = delay_embed(obs_values, k);

  TrainingPairs pairs;
  pairs.inputs = embedded.topRows(embedded.rows() - 1);
  pairs.targets.resize(u.rows() - k, static_cast<Eigen::Index>(tgt.size()));
  for (std::size_t i = 0; i < tgt.size(); ++i) {
    pairs.targets.col(static_cast<Eigen::Index>(i)) =
        u.col(tgt[i]).segment(k, u.rows() - k);
  }
  return pairs;
}

ChronologicalSplit chronological_split(const Eigen::MatrixXd& u,
                                       double train_frac, double val_frac,
                                       bool swap_validation_test) {
  if (!(train_frac > 0.0) || train_frac > 1.0) {
    throw config_error("chronological_split: train_frac must be in (0, 1]");
  }
  if (val_frac < 0.0 || train_frac + val_frac > 1.0 + 1e-12) {
    throw config_error("chronological_split: fractions exceed the series");
  }
  const Eigen::Index n = u.rows();
  // The small epsilon keeps e.g. 0.6 * 4000 from landing just below
  // the intended integer.
  const auto a = static_cast<Eigen::Index>(
      std::floor(static_cast<double>(n) * train_frac + 1e-9));
  const auto b = static_cast<Eigen::Index>(
      std::floor(static_cast<double>(n) * val_frac + 1e-9));
  if (a < 1) throw config_error("chronological_split: empty training segment");

  ChronologicalSplit split;
  split.train = u.topRows(a);
  split.train_offset = 0;
  const Eigen::MatrixXd middle = u.middleRows(a, b);
  const Eigen::MatrixXd tail = u.bottomRows(n - a - b);
  if (swap_validation_test) {
    split.test = middle;
    split.test_offset = a;
    split.validation = tail;
    split.validation_offset = a + b;
  } else {
    split.validation = middle;
    split.validation_offset = a;
    split.test = tail;
    split.test_offset = a + b;
  }
  return split;
}

}  // namespace rffrc
