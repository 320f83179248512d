#include "cmokg/sobol.hpp"

#include <array>
#include <stdexcept>

#include "cmokg/rng.hpp"

namespace cmokg {

namespace {

struct PolyRow {
  int degree;                 // s
  std::uint32_t coeffs;       // a, encoded inner coefficient bits
  std::array<std::uint32_t, 8> m;  // initial direction integers
};

// Joe & Kuo direction-number parameters for dimensions 2..21. Dimension 1 is
// the van der Corput sequence (all m_i = 1).
constexpr PolyRow kRows[] = {
    {1, 0, {1}},
    {2, 1, {1, 3}},
    {3, 1, {1, 3, 1}},
    {3, 2, {1, 1, 1}},
    {4, 1, {1, 1, 3, 3}},
    {4, 4, {1, 3, 5, 13}},
    {5, 2, {1, 1, 5, 5, 17}},
    {5, 4, {1, 1, 5, 5, 5}},
    {5, 7, {1, 1, 7, 11, 19}},
    {5, 11, {1, 1, 5, 1, 1}},
    {5, 13, {1, 1, 1, 3, 11}},
    {5, 14, {1, 3, 5, 5, 31}},
    {6, 1, {1, 3, 3, 9, 7, 49}},
    {6, 13, {1, 1, 1, 15, 21, 21}},
    {6, 16, {1, 3, 1, 13, 27, 49}},
    {6, 19, {1, 1, 1, 15, 7, 5}},
    {6, 22, {1, 3, 1, 15, 13, 25}},
    {6, 25, {1, 1, 5, 5, 19, 61}},
    {7, 1, {1, 3, 7, 11, 23, 15, 103}},
    {7, 4, {1, 3, 7, 13, 13, 15, 69}},
};

std::array<std::uint32_t, 32> build_directions(int dim_index) {
  std::array<std::uint32_t, 32> v{};
  std::array<std::uint32_t, 33> m{};
  if (dim_index == 0) {
    for (int i = 1; i <= 32; ++i) m[i] = 1;
  } else {
    const PolyRow& row = kRows[dim_index - 1];
    const int s = row.degree;
    for (int i = 1; i <= s; ++i) m[i] = row.m[i - 1];
    for (int i = s + 1; i <= 32; ++i) {
      m[i] = m[i - s] ^ (m[i - s] << s);
      for (int k = 1; k <= s - 1; ++k) {
        m[i] ^= ((row.coeffs >> (s - 1 - k)) & 1u) * (m[i - k] << k);
      }
    }
  }
  for (int i = 1; i <= 32; ++i) v[i - 1] = m[i] << (32 - i);
  return v;
}

}  // namespace

SobolStream::SobolStream(int dimension, std::uint64_t scramble_seed, std::uint64_t cursor)
    : dimension_(dimension), scramble_seed_(scramble_seed), cursor_(cursor) {
  if (dimension < 1 || dimension > kSobolMaxDimension) {
    throw std::invalid_argument("SobolStream: dimension outside the supported table (1.." +
                                std::to_string(kSobolMaxDimension) + ")");
  }
  directions_.reserve(dimension_);
  for (int d = 0; d < dimension_; ++d) directions_.push_back(build_directions(d));
  shift_.assign(dimension_, 0u);
  if (scramble_seed_ != 0) {
    RngStream rng(scramble_seed_);
    for (int d = 0; d < dimension_; ++d) {
      shift_[d] = static_cast<std::uint32_t>(rng.next_u64() >> 32);
    }
  }
}

Eigen::VectorXd SobolStream::next() {
  // Index 0 is skipped, so emitted point k corresponds to sequence index k+1.
  const std::uint64_t index = cursor_ + 1;
  ++cursor_;

  Eigen::VectorXd point(dimension_);
  const std::uint64_t gray = index ^ (index >> 1);
  for (int d = 0; d < dimension_; ++d) {
    std::uint32_t x = 0;
    for (int bit = 0; bit < 32; ++bit) {
      if ((gray >> bit) & 1u) x ^= directions_[d][bit];
    }
    x ^= shift_[d];
    point[d] = static_cast<double>(x) * (1.0 / 4294967296.0);
  }
  return point;
}

std::vector<Eigen::VectorXd> SobolStream::next(int count) {
  if (count < 0) throw std::invalid_argument("SobolStream::next: negative count");
  std::vector<Eigen::VectorXd> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) out.push_back(next());
  return out;
}

}  // namespace cmokg
