#include "anchorlab/tape.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace anchorlab {

Var Tape::push(Tensor value, std::function<void(Tape&, std::size_t)> backward) {
  Node n;
  n.grad.assign(value.size(), 0.0);
  n.value = std::move(value);
  n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

double Tape::scalar(Var v) const {
  const Tensor& t = value(v);
  if (t.size() != 1) {
    throw ShapeError("expected a scalar node, got shape " + to_string(t.shape));
  }
  return t[0];
}

Var Tape::constant(Tensor value) { return push(std::move(value)); }

Var Tape::parameter(Parameter& param) {
  for (const auto& [p, index] : bound_) {
    if (p == &param) return Var{index};
  }
  Var v = push(param.value);
  nodes_[v.index].param = &param;
  bound_.emplace_back(&param, v.index);
  return v;
}

Var Tape::linear(Var input, Var weights, Var bias) {
  const Tensor& w = value(weights);
  const Tensor& x = value(input);
  const Tensor& b = value(bias);
  if (!x.shape.is_vector() || !b.shape.is_vector()) {
    throw ShapeError("linear: input and bias must be vectors");
  }
  Tensor out(affine(w, x.values, b.values));
  return push(std::move(out), [input, weights, bias](Tape& t, std::size_t self) {
    const auto& gy = t.nodes_[self].grad;
    Node& wn = t.nodes_[weights.index];
    Node& xn = t.nodes_[input.index];
    Node& bn = t.nodes_[bias.index];
    const auto [rows, cols] = wn.value.shape;
    for (std::size_t r = 0; r < rows; ++r) {
      const double g = gy[r];
      if (g == 0.0) continue;
      bn.grad[r] += g;
      for (std::size_t c = 0; c < cols; ++c) {
        wn.grad[r * cols + c] += g * xn.value[c];
        xn.grad[c] += g * wn.value[r * cols + c];
      }
    }
  });
}

Var Tape::gelu(Var input) {
  Tensor out = value(input);
  for (double& x : out.values) x = anchorlab::gelu(x);
  return push(std::move(out), [input](Tape& t, std::size_t self) {
    const auto& gy = t.nodes_[self].grad;
    Node& xn = t.nodes_[input.index];
    for (std::size_t i = 0; i < gy.size(); ++i) {
      xn.grad[i] += gy[i] * gelu_derivative(xn.value[i]);
    }
  });
}

Var Tape::l2_normalize(Var input) {
  const Tensor& x = value(input);
  const double n = norm(x.values);
  Tensor out(x.shape.rows, x.shape.cols, l2_normalized(x.values));
  return push(std::move(out), [input, n](Tape& t, std::size_t self) {
    // d(x/|x|) = (I - u u^T) / |x|
    const Node& yn = t.nodes_[self];
    Node& xn = t.nodes_[input.index];
    const double proj = dot(yn.grad, yn.value.values);
    for (std::size_t i = 0; i < yn.grad.size(); ++i) {
      xn.grad[i] += (yn.grad[i] - proj * yn.value[i]) / n;
    }
  });
}

Var Tape::squared_distance(Var a, Var b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  if (av.shape != bv.shape) {
    throw ShapeError("squared_distance: " + to_string(av.shape) + " vs " +
                     to_string(bv.shape));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) {
    const double d = av[i] - bv[i];
    acc += d * d;
  }
  return push(Tensor(std::vector<double>{acc}), [a, b](Tape& t, std::size_t self) {
    const double g = t.nodes_[self].grad[0];
    Node& an = t.nodes_[a.index];
    Node& bn = t.nodes_[b.index];
    for (std::size_t i = 0; i < an.value.size(); ++i) {
      const double d = 2.0 * g * (an.value[i] - bn.value[i]);
      an.grad[i] += d;
      bn.grad[i] -= d;
    }
  });
}

Var Tape::weighted_sum(std::span<const Var> terms,
                       std::span<const double> coefficients) {
  if (terms.size() != coefficients.size()) {
    throw ShapeError("weighted_sum: " + std::to_string(terms.size()) +
                     " terms but " + std::to_string(coefficients.size()) +
                     " coefficients");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    acc += coefficients[i] * scalar(terms[i]);
  }
  std::vector<Var> ts(terms.begin(), terms.end());
  std::vector<double> cs(coefficients.begin(), coefficients.end());
  return push(Tensor(std::vector<double>{acc}),
              [ts = std::move(ts), cs = std::move(cs)](Tape& t, std::size_t self) {
                const double g = t.nodes_[self].grad[0];
                for (std::size_t i = 0; i < ts.size(); ++i) {
                  t.nodes_[ts[i].index].grad[0] += g * cs[i];
                }
              });
}

Var Tape::add(Var a, Var b) {
  const std::array<Var, 2> ts{a, b};
  const std::array<double, 2> cs{1.0, 1.0};
  return weighted_sum(ts, cs);
}

Var Tape::scale(Var a, double factor) {
  const std::array<Var, 1> ts{a};
  const std::array<double, 1> cs{factor};
  return weighted_sum(ts, cs);
}

Var Tape::scalar_function(std::span<const Var> inputs, double value,
                          std::vector<std::vector<double>> local_gradients) {
  if (inputs.size() != local_gradients.size()) {
    throw ShapeError("scalar_function: one local gradient per input required");
  }
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (local_gradients[i].size() != this->value(inputs[i]).size()) {
      throw ShapeError("scalar_function: local gradient " + std::to_string(i) +
                       " has the wrong length");
    }
  }
  std::vector<Var> ins(inputs.begin(), inputs.end());
  return push(Tensor(std::vector<double>{value}),
              [ins = std::move(ins), lg = std::move(local_gradients)](
                  Tape& t, std::size_t self) {
                const double g = t.nodes_[self].grad[0];
                if (g == 0.0) return;
                for (std::size_t i = 0; i < ins.size(); ++i) {
                  auto& dst = t.nodes_[ins[i].index].grad;
                  for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += g * lg[i][k];
                }
              });
}

Var Tape::scalar_function(Var input, double value,
                          std::vector<double> local_gradient) {
  std::vector<std::vector<double>> lg;
  lg.push_back(std::move(local_gradient));
  return scalar_function(std::span<const Var>(&input, 1), value, std::move(lg));
}

void Tape::backward(Var loss) {
  if (nodes_.empty()) throw std::logic_error("backward: tape is empty");
  if (value(loss).size() != 1) {
    throw ShapeError("backward: loss must be scalar, got shape " +
                     to_string(value(loss).shape));
  }
  for (Node& n : nodes_) std::fill(n.grad.begin(), n.grad.end(), 0.0);
  nodes_[loss.index].grad[0] = 1.0;
  for (std::size_t i = loss.index + 1; i-- > 0;) {
    if (nodes_[i].backward) nodes_[i].backward(*this, i);
  }
  for (Node& n : nodes_) {
    if (n.param == nullptr) continue;
    for (std::size_t k = 0; k < n.grad.size(); ++k) n.param->grad[k] += n.grad[k];
  }
}

}  // namespace anchorlab
