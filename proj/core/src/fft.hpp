#pragma once

#include <cassert>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

namespace rffrc::detail {

/// Minimal in-place radix-2 complex FFT for power-of-two lengths.
/// The spectral solver only ever needs one small fixed size (the KS
/// grid), so a plan object with precomputed twiddles and bit-reversal
/// indices is all that is required; no external FFT dependency.
class Fft {
 public:
  explicit Fft(std::size_t n) : n_(n) {
    assert(n >= 2 && (n & (n - 1)) == 0);
    reverse_.resize(n);
    std::size_t log2n = 0;
    while ((std::size_t{1} << log2n) < n) ++log2n;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t r = 0;
      for (std::size_t bit = 0; bit < log2n; ++bit) {
        r = (r << 1) | ((i >> bit) & 1u);
      }
      reverse_[i] = r;
    }
    // Twiddles for the forward transform (negative exponent), one
    // half-table per butterfly width, concatenated.
    twiddles_.resize(n - 1);
    std::size_t offset = 0;
    for (std::size_t len = 2; len <= n; len <<= 1) {
      const double step = -2.0 * std::numbers::pi / static_cast<double>(len);
      for (std::size_t j = 0; j < len / 2; ++j) {
        twiddles_[offset + j] =
            std::complex<double>(std::cos(step * static_cast<double>(j)),
                                 std::sin(step * static_cast<double>(j)));
      }
      offset += len / 2;
    }
  }

  std::size_t size() const { return n_; }

  /// Forward DFT, no normalization.
  void forward(std::complex<double>* data) const { run(data, false); }

  /// Inverse DFT including the 1/n factor.
  void inverse(std::complex<double>* data) const {
    run(data, true);
    const double inv = 1.0 / static_cast<double>(n_);
    for (std::size_t i = 0; i < n_; ++i) data[i] *= inv;
  }

 private:
  void run(std::complex<double>* data, bool invert) const {
    for (std::size_t i = 0; i < n_; ++i) {
      if (i < reverse_[i]) std::swap(data[i], data[reverse_[i]]);
    }
    std::size_t offset = 0;
    for (std::size_t len = 2; len <= n_; len <<= 1) {
      const std::size_t half = len / 2;
      for (std::size_t start = 0; start < n_; start += len) {
        for (std::size_t j = 0; j < half; ++j) {
          std::complex<double> w = twiddles_[offset + j];
          if (invert) w = std::conj(w);
          const std::complex<double> even = data[start + j];
          const std::complex<double> odd = data[start + j + half] * w;
          data[start + j] = even + odd;
          data[start + j + half] = even - odd;
        }
      }
      offset += half;
    }
  }

  std::size_t n_;
  std::vector<std::size_t> reverse_;
  std::vector<std::complex<double>> twiddles_;
};

}  // namespace rffrc::detail
