#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "memephys/autodiff/tensor.hpp"

namespace memephys::testing {

struct GradCheck {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
};

enum class Stencil { ThreePoint, FivePoint };

/// Central differences against the reverse pass for every element of every
/// input. Relative error is |a - n| / max(|a|, |n|, floor). The five-point
/// stencil has O(h^4) truncation error, for ops with large third
/// derivatives.
inline GradCheck grad_check(const std::function<ad::Tensor()>& f, std::vector<ad::Tensor> inputs,
                            double h = 1e-4, double floor = 1e-4, Stencil stencil = Stencil::ThreePoint) {
  for (auto& t : inputs) t.zero_grad();
  f().backward();
  std::vector<std::vector<double>> analytic;
  for (auto& t : inputs) {
    analytic.push_back(t.grad().empty() ? std::vector<double>(t.size(), 0.0) : t.grad());
    t.zero_grad();
  }
  GradCheck res;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    auto& vals = inputs[k].mutable_values();
    for (std::size_t i = 0; i < vals.size(); ++i) {
      const double orig = vals[i];
      auto at = [&](double dx) {
        vals[i] = orig + dx;
        const double v = f().item();
        vals[i] = orig;
        return v;
      };
      const double num = stencil == Stencil::ThreePoint
                             ? (at(h) - at(-h)) / (2.0 * h)
                             : (8.0 * (at(h) - at(-h)) - (at(2.0 * h) - at(-2.0 * h))) / (12.0 * h);
      const double a = analytic[k][i];
      const double denom = std::max({std::fabs(a), std::fabs(num), floor});
      res.max_rel_error = std::max(res.max_rel_error, std::fabs(a - num) / denom);
      ++res.checked;
    }
  }
  return res;
}

}  // namespace memephys::testing
