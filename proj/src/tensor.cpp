#include "anchorlab/tensor.hpp"

#include <cmath>
#include <numbers>

namespace anchorlab {

std::string to_string(Shape shape) {
  return "(" + std::to_string(shape.rows) + "x" + std::to_string(shape.cols) +
         ")";
}

Tensor::Tensor(std::size_t rows, std::size_t cols, std::vector<double> v)
    : shape{rows, cols}, values(std::move(v)) {
  if (values.size() != rows * cols) {
    throw ShapeError("tensor data of length " + std::to_string(values.size()) +
                     " does not fit shape " + to_string(shape));
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ShapeError("dot: length " + std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double squared_norm(std::span<const double> a) { return dot(a, a); }

double norm(std::span<const double> a) { return std::sqrt(squared_norm(a)); }

bool all_finite(std::span<const double> a) {
  for (double x : a) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

std::vector<double> affine(const Tensor& weights, std::span<const double> input,
                           std::span<const double> bias) {
  const auto [rows, cols] = weights.shape;
  if (input.size() != cols) {
    throw ShapeError("linear: input length " + std::to_string(input.size()) +
                     " does not match weight shape " + to_string(weights.shape));
  }
  if (bias.size() != rows) {
    throw ShapeError("linear: bias length " + std::to_string(bias.size()) +
                     " does not match weight shape " + to_string(weights.shape));
  }
  std::vector<double> out(rows);
  const double* w = weights.values.data();
  for (std::size_t r = 0; r < rows; ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c) acc += w[r * cols + c] * input[c];
    out[r] = acc + bias[r];
  }
  return out;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) * (std::numbers::inv_sqrtpi / std::numbers::sqrt2);
}

double gelu(double x) { return x * normal_cdf(x); }

double gelu_derivative(double x) { return normal_cdf(x) + x * normal_pdf(x); }

std::vector<double> l2_normalized(std::span<const double> input) {
  const double n = norm(input);
  if (!(n > kNormEpsilon)) {
    throw NearZeroNorm("l2_normalize: norm " + std::to_string(n) +
                       " is at or below 1e-12");
  }
  std::vector<double> out(input.begin(), input.end());
  for (double& x : out) x /= n;
  return out;
}

}  // namespace anchorlab
