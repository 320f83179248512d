#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace cmokg {

inline constexpr int kSobolMaxDimension = 21;

/// Low-discrepancy point stream on [0,1)^d. The index-0 all-zeros point is
/// skipped; the cursor counts points already emitted, so a stream is fully
/// reproducible from (dimension, scramble_seed, cursor). Scrambling is a
/// digital random shift (per-dimension XOR mask drawn from scramble_seed);
/// scramble_seed == 0 leaves the sequence unscrambled.
class SobolStream {
public:
  SobolStream(int dimension, std::uint64_t scramble_seed, std::uint64_t cursor = 0);

  int dimension() const { return dimension_; }
  std::uint64_t scramble_seed() const { return scramble_seed_; }
  std::uint64_t cursor() const { return cursor_; }

  Eigen::VectorXd next();
  std::vector<Eigen::VectorXd> next(int count);
  void skip(std::uint64_t count) { cursor_ += count; }

private:
  int dimension_;
  std::uint64_t scramble_seed_;
  std::uint64_t cursor_;
  std::vector<std::array<std::uint32_t, 32>> directions_;  // per dimension
  std::vector<std::uint32_t> shift_;                       // per dimension
};

}  // namespace cmokg
