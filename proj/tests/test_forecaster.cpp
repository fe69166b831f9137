#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#include "rffrc/errors.hpp"
#include "rffrc/forecaster.hpp"
#include "rffrc/metrics.hpp"
#include "rffrc/systems.hpp"
#include "rffrc/time_series.hpp"

using namespace rffrc;
namespace fs = std::filesystem;

namespace {

TimeSeries lorenz_train_segment(int n_samples = 2400) {
  const TimeSeries full = generate_lorenz63(4000);
  TimeSeries train;
  train.dt = full.dt;
  train.channel_names = full.channel_names;
  train.values = full.values.topRows(n_samples);
  return train;
}

ForecasterConfig small_config() {
  ForecasterConfig config;
  config.k = 4;
  config.n_features = 300;
  config.lambda = 1e-6;
  config.sigma = 2.0;
  config.seed = 1;
  return config;
}

}  // namespace

TEST_CASE("training converges on lorenz and reports a finite NRMSE") {
  const Forecaster model =
      Forecaster::train(lorenz_train_segment(), small_config());
  CHECK(model.training_nrmse() > 0.0);
  CHECK(model.training_nrmse() < 1e-2);
  CHECK(model.training_nrmse_per_channel().size() == 3);
  CHECK(model.n_channels() == 3);
  CHECK(model.dt() == 0.025);
}

TEST_CASE("one-step predictions on fresh data are accurate") {
  const TimeSeries full = generate_lorenz63(4000);
  const ChronologicalSplit split = chronological_split(full.values, 0.6, 0.2);
  TimeSeries train;
  train.dt = full.dt;
  train.channel_names = full.channel_names;
  train.values = split.train;
  const ForecasterConfig config = small_config();
  const Forecaster model = Forecaster::train(train, config);
  const Eigen::MatrixXd pred = model.predict_one_step(split.test);
  const TrainingPairs pairs = make_training_pairs(split.test, config.k);
  CHECK(pred.rows() == pairs.targets.rows());
  CHECK(mean_nrmse(pred, pairs.targets) < 5e-3);
}

TEST_CASE("teacher-forced rollout equals one-step prediction bitwise") {
  const TimeSeries train = lorenz_train_segment();
  const Forecaster model = Forecaster::train(train, small_config());
  const TimeSeries probe = generate_lorenz63(200);
  const Eigen::MatrixXd a = model.predict_one_step(probe.values);
  const Eigen::MatrixXd b = model.rollout_teacher_forced(probe.values);
  CHECK(a == b);
}

TEST_CASE("a one-step rollout equals the first one-step prediction") {
  const TimeSeries train = lorenz_train_segment();
  const ForecasterConfig config = small_config();
  const Forecaster model = Forecaster::train(train, config);
  const TimeSeries probe = generate_lorenz63(50);
  const Eigen::MatrixXd warmup = probe.values.topRows(config.k);
  const Eigen::MatrixXd roll = model.rollout(warmup, 1);
  // One-step prediction from the same k-row window.
  const Eigen::MatrixXd window = probe.values.topRows(config.k + 1);
  const Eigen::MatrixXd one = model.predict_one_step(window);
  REQUIRE(roll.rows() == 1);
  REQUIRE(one.rows() == 1);
  CHECK(roll == one.topRows(1));
}

TEST_CASE("rollout horizon zero returns an empty matrix") {
  const Forecaster model =
      Forecaster::train(lorenz_train_segment(), small_config());
  const TimeSeries probe = generate_lorenz63(10);
  const Eigen::MatrixXd roll = model.rollout(probe.values.topRows(4), 0);
  CHECK(roll.rows() == 0);
  CHECK(roll.cols() == 3);
}

TEST_CASE("closed-loop rollout stays on the attractor") {
  ForecasterConfig config;
  config.k = 5;
  config.n_features = 1500;
  config.lambda = 1e-6;
  config.sigma = 2.0;
  const TimeSeries full = generate_lorenz63(4000);
  const ChronologicalSplit split = chronological_split(full.values, 0.6, 0.2);
  TimeSeries train;
  train.dt = full.dt;
  train.channel_names = full.channel_names;
  train.values = split.train;
  const Forecaster model = Forecaster::train(train, config);
  const Eigen::MatrixXd roll =
      model.rollout(split.test.topRows(config.k), 400);
  // Bounded forever within loose attractor limits; accurate early on.
  CHECK(roll.cwiseAbs().maxCoeff() < 60.0);
  const Eigen::MatrixXd truth = split.test.middleRows(config.k, 400);
  CHECK(valid_prediction_time(roll, truth, 0.4) > 50);
}

TEST_CASE("partial observation equals training on the observed columns") {
  // A model observing channel 0 but predicting all channels must be
  // bitwise identical whether the unobserved channels are present in
  // the input series or not, because scaling statistics are per
  // channel and the feature path only touches observed columns.
  const TimeSeries full = lorenz_train_segment(1200);
  ForecasterConfig config = small_config();
  config.observed = {0};
  config.target = {0, 1, 2};
  const Forecaster model = Forecaster::train(full, config);

  const TimeSeries probe = generate_lorenz63(100);
  const Eigen::MatrixXd pred = model.predict_one_step(probe.values);
  CHECK(pred.cols() == 3);
  const TrainingPairs pairs =
      make_training_pairs(probe.values, config.k, {0}, {0, 1, 2});
  CHECK(nrmse(pred, pairs.targets)[0] < 0.05);
}

TEST_CASE("rollout requires the observed channels to be predicted") {
  TimeSeries train = lorenz_train_segment(1200);
  ForecasterConfig config = small_config();
  config.observed = {0, 1};
  config.target = {2};  // cannot feed back x, y
  const Forecaster model = Forecaster::train(train, config);
  const TimeSeries probe = generate_lorenz63(20);
  CHECK_THROWS_AS(model.rollout(probe.values.topRows(config.k), 5),
                  config_error);
  // One-step prediction still works open loop.
  CHECK_NOTHROW(model.predict_one_step(probe.values));
}

TEST_CASE("mackey-glass long rollout keeps tracking") {
  ForecasterConfig config;
  config.k = 20;
  config.n_features = 2000;
  config.lambda = 1e-8;
  config.sigma = 2.0;
  const TimeSeries full = generate_mackey_glass(4000);
  const ChronologicalSplit split = chronological_split(full.values, 0.6, 0.2);
  TimeSeries train;
  train.dt = full.dt;
  train.channel_names = full.channel_names;
  train.values = split.train;
  const Forecaster model = Forecaster::train(train, config);
  const Eigen::Index horizon = split.test.rows() - config.k;
  const Eigen::MatrixXd roll =
      model.rollout(split.test.topRows(config.k), horizon);
  const Eigen::MatrixXd truth = split.test.bottomRows(horizon);
  CHECK(nrmse(roll, truth)[0] < 5e-2);
}

TEST_CASE("save and load reproduce predictions bitwise") {
  const TimeSeries train = lorenz_train_segment(1500);
  const ForecasterConfig config = small_config();
  const Forecaster model = Forecaster::train(train, config);
  const fs::path path =
      fs::temp_directory_path() / "rffrc_test_model.rfrc";
  model.save(path);
  const Forecaster loaded = Forecaster::load(path);

  const TimeSeries probe = generate_lorenz63(300);
  CHECK(model.predict_one_step(probe.values) ==
        loaded.predict_one_step(probe.values));
  const Eigen::MatrixXd warmup = probe.values.topRows(config.k);
  CHECK(model.rollout(warmup, 100) == loaded.rollout(warmup, 100));
  CHECK(model.training_nrmse() == loaded.training_nrmse());
  CHECK(model.channel_names() == loaded.channel_names());
  CHECK(model.dt() == loaded.dt());
  fs::remove(path);
}

TEST_CASE("model files are integrity checked") {
  const TimeSeries train = lorenz_train_segment(1200);
  const Forecaster model = Forecaster::train(train, small_config());
  const fs::path path =
      fs::temp_directory_path() / "rffrc_test_model_bad.rfrc";
  model.save(path);

  const auto read_bytes = [&]() {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in),
                       std::istreambuf_iterator<char>());
  };
  const std::string original = read_bytes();

  SUBCASE("truncated file") {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(original.data(),
              static_cast<std::streamsize>(original.size() / 2));
    out.close();
    CHECK_THROWS_AS(Forecaster::load(path), io_error);
  }
  SUBCASE("flipped payload byte") {
    std::string corrupted = original;
    corrupted[corrupted.size() / 2] =
        static_cast<char>(corrupted[corrupted.size() / 2] ^ 0x01);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(corrupted.data(),
              static_cast<std::streamsize>(corrupted.size()));
    out.close();
    CHECK_THROWS_AS(Forecaster::load(path), io_error);
  }
  SUBCASE("wrong magic") {
    std::string corrupted = original;
    corrupted[0] = 'X';
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(corrupted.data(),
              static_cast<std::streamsize>(corrupted.size()));
    out.close();
    CHECK_THROWS_AS(Forecaster::load(path), io_error);
  }
  SUBCASE("missing file") {
    fs::remove(path);
    CHECK_THROWS_AS(Forecaster::load(path), io_error);
  }
  fs::remove(path);
}

TEST_CASE("training validates its configuration") {
  const TimeSeries train = lorenz_train_segment(100);
  SUBCASE("series shorter than the window") {
    TimeSeries tiny = train;
    tiny.values = train.values.topRows(3);
    CHECK_THROWS_AS(Forecaster::train(tiny, small_config()), config_error);
  }
  SUBCASE("bad hyperparameters") {
    ForecasterConfig config = small_config();
    config.k = 0;
    CHECK_THROWS_AS(Forecaster::train(train, config), config_error);
    config = small_config();
    config.n_features = 0;
    CHECK_THROWS_AS(Forecaster::train(train, config), config_error);
    config = small_config();
    config.sigma = -1.0;
    CHECK_THROWS_AS(Forecaster::train(train, config), config_error);
    config = small_config();
    config.lambda = -1.0;
    CHECK_THROWS_AS(Forecaster::train(train, config), config_error);
  }
  SUBCASE("channel indices out of range") {
    ForecasterConfig config = small_config();
    config.observed = {5};
    CHECK_THROWS_AS(Forecaster::train(train, config), config_error);
  }
  SUBCASE("input and target shapes must agree") {
    TimeSeries shorter = train;
    shorter.values = train.values.topRows(50);
    CHECK_THROWS_AS(
        Forecaster::train(train, shorter, small_config()), config_error);
  }
}

TEST_CASE("distinct target series trains a denoising readout") {
  const TimeSeries clean = lorenz_train_segment(2000);
  const TimeSeries noisy = add_awgn(clean, 20.0, 5);
  ForecasterConfig config;
  config.k = 10;
  config.n_features = 800;
  config.lambda = 1e-3;
  config.sigma = 2.0;
  const Forecaster model = Forecaster::train(noisy, clean, config);
  // Prediction from noisy inputs should land nearer the clean signal
  // than the noisy input itself does.
  const TimeSeries clean_probe = generate_lorenz63(1000);
  const TimeSeries noisy_probe = add_awgn(clean_probe, 20.0, 6);
  const Eigen::MatrixXd pred = model.predict_one_step(noisy_probe.values);
  const TrainingPairs clean_pairs =
      make_training_pairs(clean_probe.values, config.k);
  const TrainingPairs noisy_pairs =
      make_training_pairs(noisy_probe.values, config.k);
  const double pred_err = mean_nrmse(pred, clean_pairs.targets);
  const double input_err =
      mean_nrmse(noisy_pairs.targets, clean_pairs.targets);
  CHECK(pred_err < input_err);
}

TEST_CASE("scaling modes are selectable and serialized") {
  const TimeSeries train = lorenz_train_segment(1200);
  for (const ScalingMode mode :
       {ScalingMode::minmax01, ScalingMode::zscore, ScalingMode::none}) {
    ForecasterConfig config = small_config();
    config.scaling = mode;
    const Forecaster model = Forecaster::train(train, config);
    const fs::path path =
        fs::temp_directory_path() / "rffrc_test_scaling.rfrc";
    model.save(path);
    const Forecaster loaded = Forecaster::load(path);
    CHECK(loaded.config().scaling == mode);
    const TimeSeries probe = generate_lorenz63(50);
    CHECK(model.predict_one_step(probe.values) ==
          loaded.predict_one_step(probe.values));
    fs::remove(path);
  }
}

TEST_CASE("scaling mode names round-trip") {
  for (const ScalingMode mode :
       {ScalingMode::minmax01, ScalingMode::zscore, ScalingMode::none}) {
    CHECK(scaling_mode_from_string(to_string(mode)) == mode);
  }
  CHECK_THROWS_AS(scaling_mode_from_string("bogus"), config_error);
}
