#pragma once

#include <vector>

#include "gca/tensor.hpp"

namespace gca {

// Adam with bias correction; updates parameters in place from their grads.
class Adam {
 public:
  explicit Adam(std::vector<TensorPtr> params, double lr = 5e-4,
                double beta1 = 0.9, double beta2 = 0.999, double epsilon = 1e-8);

  void step();
  void zero_grad();

  double learning_rate() const { return lr_; }
  void set_learning_rate(double lr) { lr_ = lr; }

 private:
  std::vector<TensorPtr> params_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  double lr_, beta1_, beta2_, eps_;
  long long t_ = 0;
};

}  // namespace gca
