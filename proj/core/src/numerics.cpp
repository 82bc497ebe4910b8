#include "expdnn/numerics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "expdnn/errors.hpp"

namespace expdnn {

bool operator==(const Matrix& a, const Matrix& b) {
  return a.rows == b.rows && a.cols == b.cols && a.data == b.data;
}

Vector mat_vec_mul(const Matrix& a, const Vector& x) {
  if (a.cols != x.size()) {
    throw ShapeError("mat_vec_mul: matrix is " + std::to_string(a.rows) + "x" +
                     std::to_string(a.cols) + " but vector has length " +
                     std::to_string(x.size()));
  }
  Vector out(a.rows, 0.0);
  for (std::size_t i = 0; i < a.rows; ++i) {
    double sum = 0.0;
    const double* row = a.data.data() + i * a.cols;
    for (std::size_t j = 0; j < a.cols; ++j) sum += row[j] * x[j];
    out[i] = sum;
  }
  return out;
}

Matrix mat_transpose(const Matrix& a) {
  Matrix out(a.cols, a.rows);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j) out(j, i) = a(i, j);
  return out;
}

namespace {

constexpr std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

std::uint64_t splitmix64(std::uint64_t& s) {
  s += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = s;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

Rng::Rng(std::uint64_t seed) {
  std::uint64_t s = seed;
  for (auto& word : state_) word = splitmix64(s);
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double Rng::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
  if (!(lo < hi)) {
    throw std::invalid_argument("Rng::uniform: invalid range [" +
                                std::to_string(lo) + ", " + std::to_string(hi) +
                                ")");
  }
  double value = lo + uniform01() * (hi - lo);
  // lo + u*(hi-lo) can round up to hi when hi-lo is large; keep the contract.
  if (value >= hi) value = std::nextafter(hi, lo);
  return value;
}

}  // namespace expdnn
