#include "anchorlab/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace anchorlab {

Adam::Adam(std::span<Parameter* const> params, Options options)
    : params_(params.begin(), params.end()), options_(options) {
  for (const Parameter* p : params_) {
    m_.emplace_back(p->value.size(), 0.0);
    v_.emplace_back(p->value.size(), 0.0);
  }
}

void Adam::step(double lr) {
  if (!(lr >= 0.0)) throw std::invalid_argument("adam: learning rate must be >= 0");
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params_[i]->grad.size() != m_[i].size() ||
        params_[i]->value.size() != m_[i].size()) {
      throw ShapeError("adam: parameter '" + params_[i]->name + "' changed shape");
    }
  }
  ++step_;
  const auto [b1, b2, eps] = options_;
  const double t = static_cast<double>(step_);
  const double c1 = 1.0 - std::pow(b1, t);
  const double c2 = 1.0 - std::pow(b2, t);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& value = params_[i]->value.values;
    const auto& grad = params_[i]->grad;
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t k = 0; k < value.size(); ++k) {
      const double g = grad[k];
      m[k] = b1 * m[k] + (1.0 - b1) * g;
      v[k] = b2 * v[k] + (1.0 - b2) * g * g;
      const double mhat = m[k] / c1;
      const double vhat = v[k] / c2;
      value[k] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
  }
}

}  // namespace anchorlab
