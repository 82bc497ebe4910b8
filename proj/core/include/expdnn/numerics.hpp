#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace expdnn {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles. The networks here never exceed a few
/// hundred entries, so there are no blocked or sparse paths.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  Vector row(std::size_t i) const {
    return Vector(data.begin() + static_cast<std::ptrdiff_t>(i * cols),
                  data.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols));
  }

  bool same_shape(const Matrix& other) const {
    return rows == other.rows && cols == other.cols;
  }
};

bool operator==(const Matrix& a, const Matrix& b);

/// out[i] = sum_j a(i,j) * x[j]. Throws ShapeError when a.cols != x.size().
Vector mat_vec_mul(const Matrix& a, const Vector& x);

/// out(j,i) = a(i,j).
Matrix mat_transpose(const Matrix& a);

/// xoshiro256++ seeded through SplitMix64. Small, explicitly specified, and
/// produces the same sequence on every platform; all randomness in the
/// library flows through this type.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  /// Uniform draw on [lo, hi). Throws std::invalid_argument when lo >= hi.
  double uniform(double lo, double hi);

  /// Uniform draw on [0, 1) with 53 random mantissa bits.
  double uniform01();

 private:
  std::array<std::uint64_t, 4> state_;
};

}  // namespace expdnn
