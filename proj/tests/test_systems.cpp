#include <doctest.h>

#include <cmath>
#include <numbers>

#include "rffrc/errors.hpp"
#include "rffrc/systems.hpp"

using namespace rffrc;

TEST_CASE("lorenz63 origin is a fixed point") {
  Lorenz63Params params;
  params.initial = {0.0, 0.0, 0.0};
  params.transient_steps = 0;
  const TimeSeries s = generate_lorenz63(50, params);
  CHECK(s.values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("lorenz63 nontrivial fixed point stays put") {
  // C+ = (sqrt(beta(rho-1)), sqrt(beta(rho-1)), rho-1) for the
  // canonical parameters: (sqrt(72), sqrt(72), 27).
  const double c = std::sqrt(72.0);
  Lorenz63Params params;
  params.initial = {c, c, 27.0};
  params.transient_steps = 0;
  const TimeSeries s = generate_lorenz63(100, params);
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    CHECK(std::abs(s.values(i, 0) - c) <= 1e-9);
    CHECK(std::abs(s.values(i, 1) - c) <= 1e-9);
    CHECK(std::abs(s.values(i, 2) - 27.0) <= 1e-9);
  }
}

TEST_CASE("lorenz63 default run stays on the attractor") {
  const TimeSeries s = generate_lorenz63(4000);
  CHECK(s.rows() == 4000);
  CHECK(s.channels() == 3);
  CHECK(s.channel_names == std::vector<std::string>{"x", "y", "z"});
  CHECK(s.dt == 0.025);
  CHECK(s.values.col(0).cwiseAbs().maxCoeff() < 25.0);
  CHECK(s.values.col(1).cwiseAbs().maxCoeff() < 35.0);
  CHECK(s.values.col(2).maxCoeff() < 55.0);
  CHECK(s.values.col(2).minCoeff() > 0.0);
}

TEST_CASE("lorenz63 RK4 shows fourth-order step-size convergence") {
  // Error against a dt/10 reference should shrink by ~16 when dt is
  // halved.  Short horizon and small dt keep chaotic error growth from
  // polluting the ratio.
  // The first emitted sample is one step past the initial condition,
  // so n_samples = steps puts the last row at exactly t = steps * dt.
  const double t_final = 0.5;
  const auto end_state = [&](double dt, int steps) {
    Lorenz63Params params;
    params.dt = dt;
    params.transient_steps = 0;
    params.initial = {1.0, 1.0, 1.0};
    const TimeSeries s = generate_lorenz63(steps, params);
    return Eigen::Vector3d(s.values(steps - 1, 0), s.values(steps - 1, 1),
                           s.values(steps - 1, 2));
  };
  const Eigen::Vector3d ref = end_state(t_final / 1000.0, 1000);
  const double e1 = (end_state(t_final / 100.0, 100) - ref).norm();
  const double e2 = (end_state(t_final / 200.0, 200) - ref).norm();
  const double factor = e1 / e2;
  CHECK(factor >= 12.0);
  CHECK(factor <= 20.0);
}

TEST_CASE("lorenz63 rejects divergent settings") {
  Lorenz63Params params;
  params.dt = 1.0;  // far beyond the RK4 stability limit
  CHECK_THROWS_AS(generate_lorenz63(1000, params), numeric_error);
}

TEST_CASE("mackey-glass equilibria are exact") {
  // x(t) == 0 and, for the canonical a/b, x(t) == 1 solve
  // x' = a x_tau / (1 + x_tau^p) - b x with zero derivative:
  // a*1/(1+1) - b*1 = 0.1 - 0.1 = 0 in exact floating point.
  MackeyGlassParams params;
  SUBCASE("zero") { params.history = 0.0; }
  SUBCASE("one") { params.history = 1.0; }
  const TimeSeries s = generate_mackey_glass(1000, params);
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    CHECK(s.values(i, 0) == params.history);
  }
}

TEST_CASE("mackey-glass defaults produce the canonical chaotic band") {
  const TimeSeries s = generate_mackey_glass(4000);
  CHECK(s.rows() == 4000);
  CHECK(s.channels() == 1);
  CHECK(s.dt == 1.0);
  // First sample is the pre-history value at t = 0.
  CHECK(s.values(0, 0) == 1.2);
  CHECK(s.values.minCoeff() > 0.2);
  CHECK(s.values.maxCoeff() < 1.5);
  // The delayed feedback must actually oscillate.
  const double mean = s.values.col(0).mean();
  const double var = (s.values.col(0).array() - mean).square().mean();
  CHECK(var > 0.01);
}

TEST_CASE("mackey-glass substep refinement has converged") {
  MackeyGlassParams coarse;
  coarse.substeps = 10;
  MackeyGlassParams fine;
  fine.substeps = 100;
  // The trajectory is chaotic, so the gap between substep settings
  // grows with the horizon; 5e-3 over 500 samples still certifies that
  // h = 0.1 sits deep in the converged regime.
  const TimeSeries a = generate_mackey_glass(500, coarse);
  const TimeSeries b = generate_mackey_glass(500, fine);
  CHECK((a.values - b.values).cwiseAbs().maxCoeff() < 5e-3);
}

TEST_CASE("mackey-glass rejects a delay shorter than the substep") {
  MackeyGlassParams params;
  params.tau = 0.05;
  params.substeps = 10;  // h = 0.1 > tau
  CHECK_THROWS_AS(generate_mackey_glass(100, params), config_error);
}

TEST_CASE("ks zero initial condition stays zero") {
  KsParams params;
  params.initial = Eigen::VectorXd::Zero(128);
  params.transient_steps = 0;
  const TimeSeries s = generate_ks(100, params);
  CHECK(s.values.cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("ks conserves the spatial mean") {
  // d/dt mean(u) = 0 for periodic boundaries; the zero mode never moves.
  const TimeSeries s = generate_ks(200);
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    CHECK(std::abs(s.values.row(i).mean()) <= 1e-8);
  }
}

TEST_CASE("ks single-mode linear growth matches the dispersion relation") {
  // For u = eps*cos(q x) with eps -> 0, the KS linearization gives
  // u_t = (q^2 - q^4) u.  Mode j=4 on the 32*pi domain has
  // q = 4/16 = 0.25: growth rate q^2 - q^4 ~ 0.058594.
  const int grid = 128;
  const double domain = 32.0 * std::numbers::pi;
  const double q = 2.0 * std::numbers::pi * 4.0 / domain;
  const double eps = 1e-6;
  KsParams params;
  params.transient_steps = 0;
  params.dt = 0.25;
  Eigen::VectorXd u0(grid);
  for (int i = 0; i < grid; ++i) {
    u0[i] = eps * std::cos(q * domain * i / grid);
  }
  params.initial = u0;
  const int steps = 40;
  const TimeSeries s = generate_ks(steps + 1, params);
  // Project onto the cosine mode at start and end.
  const auto amplitude = [&](Eigen::Index row) {
    double acc = 0.0;
    for (int i = 0; i < grid; ++i) {
      acc += s.values(row, i) * std::cos(q * domain * i / grid);
    }
    return 2.0 * acc / grid;
  };
  const double growth = std::log(amplitude(steps) / amplitude(0)) /
                        (steps * params.dt);
  const double expected = q * q - q * q * q * q;
  CHECK(growth == doctest::Approx(expected).epsilon(1e-3));
}

TEST_CASE("ks channel names index the grid") {
  const TimeSeries s = generate_ks(3);
  CHECK(s.channels() == 128);
  CHECK(s.channel_names.front() == "u000");
  CHECK(s.channel_names.back() == "u127");
}

TEST_CASE("ks rejects a non power-of-two grid") {
  KsParams params;
  params.grid_points = 96;
  CHECK_THROWS_AS(generate_ks(10, params), config_error);
  params.grid_points = 8;  // below the supported minimum
  CHECK_THROWS_AS(generate_ks(10, params), config_error);
}

TEST_CASE("add_awgn hits the requested SNR") {
  TimeSeries clean = generate_lorenz63(100000);
  const TimeSeries noisy = add_awgn(clean, 20.0, 123);
  const SnrReport report = measure_snr(clean.values, noisy.values);
  for (Eigen::Index c = 0; c < 3; ++c) {
    CHECK(report.per_channel_db[c] == doctest::Approx(20.0).epsilon(0.01));
  }
  CHECK(report.mean_db == doctest::Approx(20.0).epsilon(0.01));
}

TEST_CASE("add_awgn is seed deterministic") {
  TimeSeries clean = generate_lorenz63(500);
  const TimeSeries a = add_awgn(clean, 10.0, 7);
  const TimeSeries b = add_awgn(clean, 10.0, 7);
  const TimeSeries c = add_awgn(clean, 10.0, 8);
  CHECK(a.values == b.values);
  CHECK(a.values != c.values);
}

TEST_CASE("measure_snr hand-checked cases") {
  Eigen::MatrixXd clean(4, 1);
  clean << 1, -1, 1, -1;  // variance 1 around mean 0
  SUBCASE("identical signals have infinite SNR") {
    const SnrReport report = measure_snr(clean, clean);
    CHECK(std::isinf(report.per_channel_db[0]));
  }
  SUBCASE("noise as large as the signal gives 0 dB") {
    Eigen::MatrixXd other(4, 1);
    other << 2, 0, 2, 0;  // error is +-1 everywhere
    const SnrReport report = measure_snr(clean, other);
    CHECK(report.per_channel_db[0] == doctest::Approx(0.0).epsilon(1e-12));
  }
}
