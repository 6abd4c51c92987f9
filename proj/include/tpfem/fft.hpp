#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace tpfem {

enum class TransformKind {
  automatic,  ///< radix-2 when the length is a power of two, direct otherwise
  radix2,     ///< iterative Cooley-Tukey; length must be a power of two
  direct,     ///< O(n^2) reference transform, any length
};

/// Discrete Fourier transform of fixed length.  forward() applies
/// X_k = sum_j x_j e^{-2*pi*i*j*k/n} in place; inverse() divides by n, so
/// inverse(forward(x)) == x up to roundoff.
class DftPlan {
 public:
  explicit DftPlan(int n, TransformKind kind = TransformKind::automatic) : n_(n) {
    if (n < 1) throw std::invalid_argument("dft: length must be positive");
    const bool pow2 = (n & (n - 1)) == 0;
    if (kind == TransformKind::radix2 && !pow2)
      throw std::invalid_argument("dft: radix-2 transform needs a power-of-two length");
    radix2_ = kind == TransformKind::radix2 || (kind == TransformKind::automatic && pow2);
    twiddle_.resize(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k)
      twiddle_[static_cast<std::size_t>(k)] =
          std::polar(1.0, -2.0 * std::numbers::pi * k / n);
    if (radix2_) {
      bitrev_.resize(static_cast<std::size_t>(n));
      int bits = 0;
      while ((1 << bits) < n) ++bits;
      for (int i = 0; i < n; ++i) {
        int r = 0;
        for (int b = 0; b < bits; ++b)
          if (i & (1 << b)) r |= 1 << (bits - 1 - b);
        bitrev_[static_cast<std::size_t>(i)] = r;
      }
    }
  }

  int length() const { return n_; }
  bool uses_radix2() const { return radix2_; }

  void forward(std::complex<double>* a) const { transform(a, false); }
  void inverse(std::complex<double>* a) const {
    transform(a, true);
    for (int i = 0; i < n_; ++i) a[i] /= static_cast<double>(n_);
  }

 private:
  void transform(std::complex<double>* a, bool conjugate) const {
    if (radix2_)
      radix2_pass(a, conjugate);
    else
      direct_pass(a, conjugate);
  }

  void radix2_pass(std::complex<double>* a, bool conjugate) const {
    for (int i = 0; i < n_; ++i) {
      const int j = bitrev_[static_cast<std::size_t>(i)];
      if (i < j) std::swap(a[i], a[j]);
    }
    for (int len = 2; len <= n_; len <<= 1) {
      const int stride = n_ / len;
      for (int base = 0; base < n_; base += len) {
        for (int k = 0; k < len / 2; ++k) {
          std::complex<double> w = twiddle_[static_cast<std::size_t>(k * stride)];
          if (conjugate) w = std::conj(w);
          const std::complex<double> odd = a[base + k + len / 2] * w;
          const std::complex<double> even = a[base + k];
          a[base + k] = even + odd;
          a[base + k + len / 2] = even - odd;
        }
      }
    }
  }

  void direct_pass(std::complex<double>* a, bool conjugate) const {
    std::vector<std::complex<double>> in(a, a + n_);
    for (int k = 0; k < n_; ++k) {
      std::complex<double> acc{};
      for (int j = 0; j < n_; ++j) {
        std::complex<double> w =
            twiddle_[static_cast<std::size_t>((static_cast<long long>(k) * j) % n_)];
        if (conjugate) w = std::conj(w);
        acc += in[static_cast<std::size_t>(j)] * w;
      }
      a[k] = acc;
    }
  }

  int n_;
  bool radix2_ = false;
  std::vector<std::complex<double>> twiddle_;
  std::vector<int> bitrev_;
};

}  // namespace tpfem
