#include "rffrc/systems.hpp"

#include <cassert>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "fft.hpp"
#include "rffrc/errors.hpp"
#include "rffrc/rng.hpp"

namespace rffrc {

namespace {

using Vec3 = std::array<double, 3>;

bool finite_and_bounded(double value) {
  return std::isfinite(value) && std::abs(value) <= kDivergenceLimit;
}

[[noreturn]] void throw_divergence(const char* system, long step) {
  throw numeric_error(std::string(system) + ": state diverged at step " +
                      std::to_string(step));
}

}  // namespace

TimeSeries generate_lorenz63(int n_samples, const Lorenz63Params& p) {
  if (n_samples < 1) throw config_error("lorenz63: n_samples must be >= 1");
  if (p.dt <= 0.0) throw config_error("lorenz63: dt must be positive");
  if (p.transient_steps < 0) {
    throw config_error("lorenz63: transient_steps must be >= 0");
  }

  const auto rhs = [&p](const Vec3& s) -> Vec3 {
    return {p.sigma * (s[1] - s[0]), s[0] * (p.rho - s[2]) - s[1],
            s[0] * s[1] - p.beta * s[2]};
  };
  const auto axpy = [](const Vec3& s, double h, const Vec3& d) -> Vec3 {
    return {s[0] + h * d[0], s[1] + h * d[1], s[2] + h * d[2]};
  };

  TimeSeries series;
  series.dt = p.dt;
  series.channel_names = {"x", "y", "z"};
  series.values.resize(n_samples, 3);

  Vec3 s = p.initial;
  const long total = static_cast<long>(p.transient_steps) + n_samples;
  for (long i = 0; i < total; ++i) {
    const Vec3 k1 = rhs(s);
    const Vec3 k2 = rhs(axpy(s, p.dt / 2.0, k1));
    const Vec3 k3 = rhs(axpy(s, p.dt / 2.0, k2));
    const Vec3 k4 = rhs(axpy(s, p.dt, k3));
    for (int c = 0; c < 3; ++c) {
      s[c] += p.dt / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
      if (!finite_and_bounded(s[c])) throw_divergence("lorenz63", i);
    }
    if (i >= p.transient_steps) {
      const long r = i - p.transient_steps;
      series.values(r, 0) = s[0];
      series.values(r, 1) = s[1];
      series.values(r, 2) = s[2];
    }
  }
  return series;
}

TimeSeries generate_mackey_glass(int n_samples, const MackeyGlassParams& p) {
  if (n_samples < 1) {
    throw config_error("mackey_glass: n_samples must be >= 1");
  }
  if (p.sample_dt <= 0.0) {
    throw config_error("mackey_glass: sample_dt must be positive");
  }
  if (p.substeps < 1) {
    throw config_error("mackey_glass: substeps must be >= 1");
  }
  if (p.p < 1) throw config_error("mackey_glass: exponent p must be >= 1");
  const double h = p.sample_dt / p.substeps;
  if (p.tau < h) {
    throw config_error(
        "mackey_glass: delay tau must be at least one integrator substep");
  }

  // History of x at every substep, so the delayed term can be read by
  // linear interpolation.  Before t = 0 the state is the constant
  // pre-history value.
  std::vector<double> history;
  history.reserve(static_cast<std::size_t>(n_samples - 1) * p.substeps + 1);
  history.push_back(p.history);

  const auto delayed = [&](double t_query) -> double {
    if (t_query <= 0.0) return p.history;
    const double fi = t_query / h;
    const auto i0 = static_cast<std::size_t>(fi);
    const double frac = fi - static_cast<double>(i0);
    if (i0 + 1 >= history.size()) return history.back();
    return history[i0] * (1.0 - frac) + history[i0 + 1] * frac;
  };
  const auto rhs = [&](double t, double x) -> double {
    const double xd = delayed(t - p.tau);
    return p.a * xd / (1.0 + std::pow(xd, p.p)) - p.b * x;
  };

  double x = p.history;
  double t = 0.0;
  const long total = static_cast<long>(n_samples - 1) * p.substeps;
  for (long i = 0; i < total; ++i) {
    const double k1 = rhs(t, x);
    const double k2 = rhs(t + h / 2.0, x + h / 2.0 * k1);
    const double k3 = rhs(t + h / 2.0, x + h / 2.0 * k2);
    const double k4 = rhs(t + h, x + h * k3);
    x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t += h;
    if (!finite_and_bounded(x)) throw_divergence("mackey_glass", i);
    history.push_back(x);
  }

  TimeSeries series;
  series.dt = p.sample_dt;
  series.channel_names = {"x"};
  series.values.resize(n_samples, 1);
  for (int i = 0; i < n_samples; ++i) {
    series.values(i, 0) = history[static_cast<std::size_t>(i) *
                                  static_cast<std::size_t>(p.substeps)];
  }
  return series;
}

TimeSeries generate_ks(int n_samples, const KsParams& p) {
  if (n_samples < 1) throw config_error("ks: n_samples must be >= 1");
  const int L = p.grid_points;
  if (L < 16 || (L & (L - 1)) != 0) {
    throw config_error("ks: grid_points must be a power of two >= 16");
  }
  if (p.dt <= 0.0) throw config_error("ks: dt must be positive");
  if (p.domain <= 0.0) throw config_error("ks: domain must be positive");
  if (p.transient_steps < 0) {
    throw config_error("ks: transient_steps must be >= 0");
  }
  if (p.initial && p.initial->size() != L) {
    throw config_error("ks: initial condition must have grid_points entries");
  }

  const auto n = static_cast<std::size_t>(L);
  const detail::Fft fft(n);

  // Integer wavenumber j in FFT order (0, 1, ..., L/2-1, -L/2, ..., -1)
  // and physical wavenumber q = 2*pi*j / domain.
  std::vector<double> q(n);
  std::vector<bool> keep(n);  // 2/3-rule dealiasing mask
  for (std::size_t i = 0; i < n; ++i) {
    const double j = i < n / 2 ? static_cast<double>(i)
                               : static_cast<double>(i) - static_cast<double>(n);
    q[i] = 2.0 * std::numbers::pi * j / p.domain;
    keep[i] = std::abs(j) <= static_cast<double>(L) / 3.0;
  }

  // ETDRK4 coefficients.  The phi-like functions are evaluated by
  // averaging over a unit circle of contour points around each h*L_j,
  // which sidesteps cancellation at small |h*L_j|.
  const int kContourPoints = 32;
  std::vector<double> lin(n), E(n), E2(n), Q(n), f1(n), f2(n), f3(n);
  for (std::size_t i = 0; i < n; ++i) {
    lin[i] = p.mu * q[i] * q[i] - p.nu * q[i] * q[i] * q[i] * q[i];
    E[i] = std::exp(p.dt * lin[i]);
    E2[i] = std::exp(p.dt * lin[i] / 2.0);
    std::complex<double> sq{0.0, 0.0}, s1{0.0, 0.0}, s2{0.0, 0.0},
        s3{0.0, 0.0};
    for (int mth = 1; mth <= kContourPoints; ++mth) {
      const double angle = std::numbers::pi *
                           (static_cast<double>(mth) - 0.5) /
                           static_cast<double>(kContourPoints);
      const std::complex<double> z =
          p.dt * lin[i] +
          std::complex<double>(std::cos(angle), std::sin(angle));
      const std::complex<double> ez = std::exp(z);
      const std::complex<double> z2 = z * z;
      const std::complex<double> z3 = z2 * z;
      sq += (std::exp(z / 2.0) - 1.0) / z;
      s1 += (-4.0 - z + ez * (4.0 - 3.0 * z + z2)) / z3;
      s2 += (2.0 + z + ez * (-2.0 + z)) / z3;
      s3 += (-4.0 - 3.0 * z - z2 + ez * (4.0 - z)) / z3;
    }
    const double scale = p.dt / static_cast<double>(kContourPoints);
    Q[i] = scale * sq.real();
    f1[i] = scale * s1.real();
    f2[i] = scale * s2.real();
    f3[i] = scale * s3.real();
  }

  // Spectral state.
  std::vector<std::complex<double>> v(n);
  {
    Eigen::VectorXd u0(L);
    if (p.initial) {
      u0 = *p.initial;
    } else {
      for (int i = 0; i < L; ++i) {
        const double x = p.domain * static_cast<double>(i) / L;
        u0[i] = std::cos(x / 16.0) * (1.0 + std::sin(x / 16.0));
      }
    }
    for (std::size_t i = 0; i < n; ++i) v[i] = u0[static_cast<Eigen::Index>(i)];
    fft.forward(v.data());
  }

  std::vector<std::complex<double>> scratch(n), nv(n), na(n), nb(n), nc(n),
      a(n), b(n), c(n);
  // N(v) = -0.5 i q FFT( real(IFFT(v))^2 ), dealiased on both sides.
  const auto nonlinear = [&](const std::vector<std::complex<double>>& spec,
                             std::vector<std::complex<double>>& out) {
    for (std::size_t i = 0; i < n; ++i) {
      out[i] = keep[i] ? spec[i] : std::complex<double>{0.0, 0.0};
    }
    fft.inverse(out.data());
    for (std::size_t i = 0; i < n; ++i) {
      const double u = out[i].real();
      out[i] = u * u;
    }
    fft.forward(out.data());
    for (std::size_t i = 0; i < n; ++i) {
      out[i] = keep[i] ? std::complex<double>(0.0, -0.5 * q[i]) * out[i]
                       : std::complex<double>{0.0, 0.0};
    }
  };

  TimeSeries series;
  series.dt = p.dt;
  series.channel_names.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    char name[8];
    std::snprintf(name, sizeof(name), "u%03zu", i);
    series.channel_names[i] = name;
  }
  series.values.resize(n_samples, L);

  const long total = static_cast<long>(p.transient_steps) + n_samples;
  for (long step = 0; step < total; ++step) {
    nonlinear(v, nv);
    for (std::size_t i = 0; i < n; ++i) a[i] = E2[i] * v[i] + Q[i] * nv[i];
    nonlinear(a, na);
    for (std::size_t i = 0; i < n; ++i) b[i] = E2[i] * v[i] + Q[i] * na[i];
    nonlinear(b, nb);
    for (std::size_t i = 0; i < n; ++i) {
      c[i] = E2[i] * a[i] + Q[i] * (2.0 * nb[i] - nv[i]);
    }
    nonlinear(c, nc);
    for (std::size_t i = 0; i < n; ++i) {
      v[i] = E[i] * v[i] + nv[i] * f1[i] + 2.0 * (na[i] + nb[i]) * f2[i] +
             nc[i] * f3[i];
    }
    // Project back onto real fields: roundoff otherwise seeds a
    // conjugate-asymmetric component that is invisible to the
    // nonlinear term and grows at the fastest linear rate.
    scratch = v;
    fft.inverse(scratch.data());
    for (std::size_t i = 0; i < n; ++i) {
      const double u = scratch[i].real();
      if (!finite_and_bounded(u)) throw_divergence("ks", step);
      scratch[i] = u;
    }
    if (step >= p.transient_steps) {
      const long r = step - p.transient_steps;
      for (std::size_t i = 0; i < n; ++i) {
        series.values(r, static_cast<Eigen::Index>(i)) = scratch[i].real();
      }
    }
    v = scratch;
    fft.forward(v.data());
  }
  return series;
}

TimeSeries add_awgn(const TimeSeries& clean, double snr_db,
                    std::uint64_t seed) {
  if (clean.rows() < 2) throw config_error("add_awgn: series too short");
  TimeSeries noisy = clean;
  Rng rng(seed);
  const double snr_linear = std::pow(10.0, snr_db / 10.0);
  for (Eigen::Index c = 0; c < clean.channels(); ++c) {
    const double mean = clean.values.col(c).mean();
    const double var =
        (clean.values.col(c).array() - mean).square().mean();
    const double noise_std = std::sqrt(var / snr_linear);
    for (Eigen::Index i = 0; i < clean.rows(); ++i) {
      noisy.values(i, c) += rng.normal(0.0, noise_std);
    }
  }
  return noisy;
}

SnrReport measure_snr(const Eigen::MatrixXd& clean,
                      const Eigen::MatrixXd& other) {
  if (clean.rows() != other.rows() || clean.cols() != other.cols()) {
    throw config_error("measure_snr: shape mismatch");
  }
  if (clean.rows() < 1) throw config_error("measure_snr: empty input");
  SnrReport report;
  report.per_channel_db.resize(clean.cols());
  for (Eigen::Index c = 0; c < clean.cols(); ++c) {
    const double mean = clean.col(c).mean();
    const double signal = (clean.col(c).array() - mean).square().sum();
    const double error = (other.col(c) - clean.col(c)).squaredNorm();
    report.per_channel_db[c] =
        error == 0.0 ? std::numeric_limits<double>::infinity()
                     : 10.0 * std::log10(signal / error);
  }
  report.mean_db = report.per_channel_db.mean();
  return report;
}

}  // namespace rffrc
