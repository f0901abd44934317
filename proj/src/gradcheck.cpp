#include "gca/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace gca {

GradCheckResult finite_diff_check(const ScalarFn& f,
                                  const std::vector<TensorPtr>& inputs,
                                  double step, double tol) {
  for (const auto& t : inputs) t->zero_grad();
  Graph g;
  auto loss = f(g, inputs);
  g.backward(loss);

  std::vector<std::vector<double>> analytic;
  analytic.reserve(inputs.size());
  for (const auto& t : inputs) {
    t->ensure_grad();
    analytic.push_back(t->grad);
  }

  GradCheckResult result;
  for (std::size_t ti = 0; ti < inputs.size(); ++ti) {
    auto& t = inputs[ti];
    if (!t->requires_grad) continue;
    for (std::size_t c = 0; c < t->size(); ++c) {
      const double saved = t->values[c];
      t->values[c] = saved + step;
      Graph gp(false);
      const double lp = f(gp, inputs)->scalar();
      t->values[c] = saved - step;
      Graph gm(false);
      const double lm = f(gm, inputs)->scalar();
      t->values[c] = saved;
      const double numeric = (lp - lm) / (2.0 * step);
      const double a = analytic[ti][c];
      const double denom = std::max({std::fabs(a), std::fabs(numeric), 1e-3});
      const double rel = std::fabs(a - numeric) / denom;
      if (rel > result.max_rel_err) {
        result.max_rel_err = rel;
        result.worst_input = ti;
        result.worst_coord = c;
        result.analytic_at_worst = a;
        result.numeric_at_worst = numeric;
      }
    }
  }
  result.pass = result.max_rel_err < tol;
  return result;
}

}  // namespace gca
