#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace anchorlab {

/// Raised when operand shapes do not conform. Never broadcast silently.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a vector is too close to the origin to be normalized.
class NearZeroNorm : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Norms at or below this are treated as a collapse to the origin.
inline constexpr double kNormEpsilon = 1e-12;

struct Shape {
  std::size_t rows = 0;
  std::size_t cols = 1;

  std::size_t size() const { return rows * cols; }
  bool is_vector() const { return cols == 1; }
  bool operator==(const Shape&) const = default;
};

std::string to_string(Shape shape);

/// Dense row-major storage. A vector is a tensor with a single column.
struct Tensor {
  Shape shape;
  std::vector<double> values;

  Tensor() = default;
  explicit Tensor(std::vector<double> v)
      : shape{v.size(), 1}, values(std::move(v)) {}
  Tensor(std::size_t rows, std::size_t cols, double fill = 0.0)
      : shape{rows, cols}, values(rows * cols, fill) {}
  Tensor(std::size_t rows, std::size_t cols, std::vector<double> v);

  static Tensor vector(std::size_t n, double fill = 0.0) {
    return Tensor(n, 1, fill);
  }

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
  double& at(std::size_t r, std::size_t c) { return values[r * shape.cols + c]; }
  double at(std::size_t r, std::size_t c) const {
    return values[r * shape.cols + c];
  }
  std::span<const double> span() const { return values; }
  std::span<double> span() { return values; }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(values).subspan(r * shape.cols, shape.cols);
  }
  bool operator==(const Tensor&) const = default;
};

double dot(std::span<const double> a, std::span<const double> b);
double squared_norm(std::span<const double> a);
double norm(std::span<const double> a);
bool all_finite(std::span<const double> a);

/// weights * input + bias, with weights of shape (out, in).
std::vector<double> affine(const Tensor& weights, std::span<const double> input,
                           std::span<const double> bias);

/// Standard-normal CDF and the exact (erf-based) GeLU.
double normal_cdf(double x);
double normal_pdf(double x);
double gelu(double x);
double gelu_derivative(double x);

/// Unit-length copy of `input`. Throws NearZeroNorm when the norm is <= 1e-12.
std::vector<double> l2_normalized(std::span<const double> input);

}  // namespace anchorlab
