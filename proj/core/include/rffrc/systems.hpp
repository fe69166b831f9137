#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <numbers>
#include <optional>

#include "rffrc/time_series.hpp"

namespace rffrc {

/// Magnitude beyond which an integrator state is declared divergent.
inline constexpr double kDivergenceLimit = 1e6;

/// Lorenz-63 in the classical chaotic regime.  Integrated with
/// fixed-step RK4; `transient_steps` leading steps are discarded so
/// sampling starts on the attractor.
struct Lorenz63Params {
  double sigma = 10.0;
  double rho = 28.0;
  double beta = 8.0 / 3.0;
  double dt = 0.025;
  std::array<double, 3> initial{1.0, 1.0, 1.0};
  int transient_steps = 1000;
};
TimeSeries generate_lorenz63(int n_samples, const Lorenz63Params& params = {});

/// Mackey-Glass delay differential equation
///   x'(t) = a x(t-tau) / (1 + x(t-tau)^p) - b x(t),
/// integrated with RK4 at `substeps` steps per output sample and
/// linear interpolation into the stored history for the delayed term.
/// The pre-history is the constant `history` value; the first output
/// sample is x(0) = history.
struct MackeyGlassParams {
  double tau = 17.0;
  double a = 0.2;
  double b = 0.1;
  int p = 10;
  double sample_dt = 1.0;
  int substeps = 10;
  double history = 1.2;
};
TimeSeries generate_mackey_glass(int n_samples,
                                 const MackeyGlassParams& params = {});

/// Kuramoto-Sivashinsky equation
///   u_t = -u u_x - mu u_xx - nu u_xxxx
/// on a periodic domain of length `domain`, solved pseudo-spectrally
/// with ETDRK4 (coefficients by the standard contour-integral
/// evaluation), 2/3-rule dealiasing, and a projection back onto real
/// fields each step so conjugate symmetry cannot drift.  grid_points
/// must be a power of two >= 16.  `initial`, when set, overrides the
/// default cos(x/16)(1+sin(x/16)) profile and must have grid_points
/// entries.
struct KsParams {
  double nu = 1.0;
  double mu = 1.0;
  double domain = 32.0 * std::numbers::pi;
  int grid_points = 128;
  double dt = 0.25;
  int transient_steps = 400;
  std::optional<Eigen::VectorXd> initial;
};
TimeSeries generate_ks(int n_samples, const KsParams& params = {});

/// Additive white Gaussian noise at the requested per-channel SNR.
/// For each channel the noise variance is var(channel) / 10^(snr/10).
/// Channel noise is drawn channel by channel from one stream seeded
/// with `seed`.
TimeSeries add_awgn(const TimeSeries& clean, double snr_db,
                    std::uint64_t seed);

/// Per-channel signal-to-noise ratio of `other` against `clean`:
///   10 log10( sum((clean - mean(clean))^2) / sum((other - clean)^2) )
/// A channel with zero error reports +infinity.
struct SnrReport {
  Eigen::VectorXd per_channel_db;
  double mean_db = 0.0;
};
SnrReport measure_snr(const Eigen::MatrixXd& clean,
                      const Eigen::MatrixXd& other);

}  // namespace rffrc
