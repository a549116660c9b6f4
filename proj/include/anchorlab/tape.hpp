#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "anchorlab/tensor.hpp"

namespace anchorlab {

/// A trainable tensor together with its accumulated gradient.
struct Parameter {
  std::string name;
  Tensor value;
  std::vector<double> grad;

  Parameter() = default;
  Parameter(std::string n, Tensor v)
      : name(std::move(n)), value(std::move(v)), grad(value.size(), 0.0) {}

  void zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }
};

/// Handle to a node on a Tape. Only meaningful for the tape that made it.
struct Var {
  std::size_t index = 0;
};

/// Reverse-mode differentiation over dense vectors.
///
/// Nodes are appended in evaluation order, so a reverse sweep over the
/// record is a valid topological order. A tape is single-use and not
/// thread-safe; build a new one per optimization step.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) = default;
  Tape& operator=(Tape&&) = default;

  Var constant(Tensor value);
  Var constant(std::vector<double> value) { return constant(Tensor(std::move(value))); }

  /// Leaf bound to `param`. Repeated calls with the same parameter return the
  /// same node, so gradients from every use accumulate in one place.
  Var parameter(Parameter& param);

  Var linear(Var input, Var weights, Var bias);
  Var gelu(Var input);
  /// Throws NearZeroNorm when the input norm is at or below 1e-12.
  Var l2_normalize(Var input);

  /// ||a - b||^2 as a scalar node.
  Var squared_distance(Var a, Var b);
  /// Sum of c_i * x_i over scalar nodes.
  Var weighted_sum(std::span<const Var> terms, std::span<const double> coefficients);
  Var add(Var a, Var b);
  Var scale(Var a, double factor);

  /// Scalar node whose value and gradient with respect to each input were
  /// computed eagerly by the caller. Loss terms use this to stay fused.
  Var scalar_function(std::span<const Var> inputs, double value,
                      std::vector<std::vector<double>> local_gradients);
  Var scalar_function(Var input, double value, std::vector<double> local_gradient);

  /// Seeds d(loss)/d(loss) = 1 and sweeps the tape backwards, adding the
  /// resulting gradients into every bound Parameter's `grad`.
  /// Throws std::logic_error on an empty tape and ShapeError on a non-scalar loss.
  void backward(Var loss);

  const Tensor& value(Var v) const { return nodes_.at(v.index).value; }
  double scalar(Var v) const;
  const std::vector<double>& grad(Var v) const { return nodes_.at(v.index).grad; }
  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }

 private:
  struct Node {
    Tensor value;
    std::vector<double> grad;
    Parameter* param = nullptr;
    std::function<void(Tape&, std::size_t)> backward;
  };

  Var push(Tensor value, std::function<void(Tape&, std::size_t)> backward = {});
  Node& node(Var v) { return nodes_.at(v.index); }

  std::vector<Node> nodes_;
  std::vector<std::pair<const Parameter*, std::size_t>> bound_;
};

}  // namespace anchorlab
