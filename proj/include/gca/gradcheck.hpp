#pragma once

#include <functional>
#include <string>
#include <vector>

#include "gca/tensor.hpp"

namespace gca {

// Builds a scalar loss from `inputs` inside the given graph. Must be
// deterministic and must not mutate the input tensors.
using ScalarFn = std::function<TensorPtr(Graph&, const std::vector<TensorPtr>&)>;

struct GradCheckResult {
  double max_rel_err = 0.0;
  bool pass = false;
  std::size_t worst_input = 0;
  std::size_t worst_coord = 0;
  double analytic_at_worst = 0.0;
  double numeric_at_worst = 0.0;
};

// Central differences per coordinate of every requires_grad input, compared
// against one reverse pass. The relative error denominator is
// max(|analytic|, |numeric|, 1e-3) so exactly-zero gradients are judged on
// an absolute scale instead of blowing up the ratio.
GradCheckResult finite_diff_check(const ScalarFn& f,
                                  const std::vector<TensorPtr>& inputs,
                                  double step = 1e-5, double tol = 1e-4);

}  // namespace gca
