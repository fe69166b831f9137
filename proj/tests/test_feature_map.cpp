#include <doctest.h>

#include <cmath>
#include <numbers>

#include "rffrc/errors.hpp"
#include "rffrc/feature_map.hpp"
#include "rffrc/rng.hpp"

using namespace rffrc;

TEST_CASE("sampled weights follow N(0, 1/sigma^2) and offsets U[0, 2pi)") {
  const double sigma = 2.0;
  const FeatureMap map = FeatureMap::sample(2, 500000, sigma, 3);
  const auto& w = map.weights();
  const double mean = w.mean();
  const double var = (w.array() - mean).square().mean();
  CHECK(std::abs(mean) < 2e-3);
  // Variance 1/sigma^2 = 0.25 within one percent.
  CHECK(var == doctest::Approx(0.25).epsilon(0.01));
  CHECK(map.offsets().minCoeff() >= 0.0);
  CHECK(map.offsets().maxCoeff() < 2.0 * std::numbers::pi);
  const double b_mean = map.offsets().mean();
  CHECK(b_mean == doctest::Approx(std::numbers::pi).epsilon(0.01));
}

TEST_CASE("feature values are bounded by the amplitude") {
  const FeatureMap map = FeatureMap::sample(3, 200, 1.0, 1);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(50, 3) * 10.0;
  const Eigen::MatrixXd phi = map.transform(x);
  CHECK(phi.cwiseAbs().maxCoeff() <= map.amplitude() + 1e-15);
  CHECK(map.amplitude() == doctest::Approx(std::sqrt(2.0 / 200)));
}

TEST_CASE("zero weights and offsets give the constant amplitude") {
  const FeatureMap map(Eigen::MatrixXd::Zero(2, 5), Eigen::VectorXd::Zero(5),
                       1.0);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(4, 2);
  const Eigen::MatrixXd phi = map.transform(x);
  for (Eigen::Index i = 0; i < phi.size(); ++i) {
    CHECK(phi.reshaped()[i] == doctest::Approx(std::sqrt(2.0 / 5)));
  }
}

TEST_CASE("inner products approximate the Gaussian kernel") {
  // E[phi(x) . phi(y)] = exp(-|x-y|^2 / (2 sigma^2)).  With x-y of
  // norm 1 and sigma = 2 the target is exp(-1/8).
  const double sigma = 2.0;
  const int m = 100000;
  const FeatureMap map = FeatureMap::sample(3, m, sigma, 11);
  Eigen::MatrixXd pair(2, 3);
  pair << 0.3, -0.2, 0.9, 0.3 + 1.0 / std::sqrt(3.0),
      -0.2 + 1.0 / std::sqrt(3.0), 0.9 + 1.0 / std::sqrt(3.0);
  const Eigen::MatrixXd phi = map.transform(pair);
  const double estimate = phi.row(0).dot(phi.row(1));
  CHECK(estimate == doctest::Approx(std::exp(-1.0 / 8.0)).epsilon(0.02));
}

TEST_CASE("kernel error decays with the feature count") {
  // Mean absolute kernel error over fixed pairs must drop when m grows
  // from 100 to 10000 for a clear majority of seeds.
  const double sigma = 1.5;
  Rng pair_rng(99);
  std::vector<Eigen::Vector2d> xs, ys;
  for (int i = 0; i < 25; ++i) {
    xs.emplace_back(pair_rng.normal(), pair_rng.normal());
    ys.emplace_back(pair_rng.normal(), pair_rng.normal());
  }
  const auto mean_error = [&](int m, std::uint64_t seed) {
    const FeatureMap map = FeatureMap::sample(2, m, sigma, seed);
    double acc = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double truth =
          std::exp(-(xs[i] - ys[i]).squaredNorm() / (2.0 * sigma * sigma));
      const double est = map.transform_row(xs[i].transpose())
                             .dot(map.transform_row(ys[i].transpose()));
      acc += std::abs(est - truth);
    }
    return acc / static_cast<double>(xs.size());
  };
  int improved = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    if (mean_error(10000, seed) < mean_error(100, seed)) ++improved;
  }
  CHECK(improved >= 18);
}

TEST_CASE("sampling is seed deterministic") {
  const FeatureMap a = FeatureMap::sample(4, 64, 2.0, 5);
  const FeatureMap b = FeatureMap::sample(4, 64, 2.0, 5);
  const FeatureMap c = FeatureMap::sample(4, 64, 2.0, 6);
  CHECK(a.weights() == b.weights());
  CHECK(a.offsets() == b.offsets());
  CHECK(a.weights() != c.weights());
}

TEST_CASE("transform_row matches the batched transform bitwise") {
  const FeatureMap map = FeatureMap::sample(3, 40, 1.0, 2);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(10, 3);
  const Eigen::MatrixXd batched = map.transform(x);
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const Eigen::RowVectorXd row = map.transform_row(x.row(r));
    CHECK(row == batched.row(r));
  }
}

TEST_CASE("blocked transform is independent of the block size") {
  const FeatureMap map = FeatureMap::sample(2, 30, 1.0, 4);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(100, 2);
  const Eigen::MatrixXd whole = map.transform(x, 1000);
  const Eigen::MatrixXd blocked = map.transform(x, 7);
  CHECK((whole - blocked).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("constructor and sampler validate their arguments") {
  CHECK_THROWS_AS(FeatureMap::sample(0, 10, 1.0, 1), config_error);
  CHECK_THROWS_AS(FeatureMap::sample(2, 0, 1.0, 1), config_error);
  CHECK_THROWS_AS(FeatureMap::sample(2, 10, 0.0, 1), config_error);
  CHECK_THROWS_AS(FeatureMap::sample(2, 10, -1.0, 1), config_error);
  CHECK_THROWS_AS(
      FeatureMap(Eigen::MatrixXd::Zero(2, 5), Eigen::VectorXd::Zero(4), 1.0),
      config_error);
}

TEST_CASE("transform validates the input width") {
  const FeatureMap map = FeatureMap::sample(3, 10, 1.0, 1);
  CHECK_THROWS_AS(map.transform(Eigen::MatrixXd::Zero(5, 2)), config_error);
}
