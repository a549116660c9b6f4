#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "anchorlab/tape.hpp"

namespace anchorlab {

/// Adam with bias correction and no weight decay.
/// Defaults match the common framework defaults (0.9, 0.999, 1e-8).
class Adam {
 public:
  struct Options {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
  };

  Adam() = default;
  explicit Adam(std::span<Parameter* const> params) : Adam(params, Options{}) {}
  Adam(std::span<Parameter* const> params, Options options);

  /// Applies one update using each parameter's `grad`. lr = 0 is a no-op on
  /// the parameters (the moments and step counter still advance).
  void step(double lr);

  std::uint64_t steps() const { return step_; }
  const Options& options() const { return options_; }
  const std::vector<double>& first_moment(std::size_t i) const { return m_.at(i); }
  const std::vector<double>& second_moment(std::size_t i) const { return v_.at(i); }

 private:
  std::vector<Parameter*> params_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  Options options_;
  std::uint64_t step_ = 0;
};

}  // namespace anchorlab
