#pragma once

#include <cstdint>
#include <random>

namespace cmokg {

double normal_pdf(double z);
double normal_cdf(double z);

/// Inverse of the standard normal CDF, accurate to ~1e-15 on (0, 1).
double normal_inv_cdf(double p);

/// Deterministic random stream. All stochastic code in the library draws
/// through this wrapper so results never depend on the standard library's
/// distribution implementations.
class RngStream {
public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * kInv53; }

  /// Uniform on (0, 1), safe to pass through normal_inv_cdf.
  double uniform_open() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * kInv53;
  }

  double normal() { return normal_inv_cdf(uniform_open()); }

  /// Gamma(shape, rate) variate, Marsaglia-Tsang.
  double gamma(double shape, double rate);

  std::uint64_t next_u64() { return engine_(); }

  /// Integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) { return engine_() % n; }

private:
  static constexpr double kInv53 = 1.0 / 9007199254740992.0;  // 2^-53
  std::mt19937_64 engine_;
};

}  // namespace cmokg
