#include "gca/optim.hpp"

#include <cmath>

namespace gca {

Adam::Adam(std::vector<TensorPtr> params, double lr, double beta1, double beta2,
           double epsilon)
    : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(epsilon) {
  if (lr_ <= 0.0 && lr_ != 0.0) throw_config("adam: learning rate must be >= 0");
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const auto& p : params_) {
    m_.emplace_back(p->size(), 0.0);
    v_.emplace_back(p->size(), 0.0);
  }
}

void Adam::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t pi = 0; pi < params_.size(); ++pi) {
    auto& p = *params_[pi];
    if (p.grad.empty()) continue;  // parameter did not participate this step
    auto& m = m_[pi];
    auto& v = v_[pi];
    for (std::size_t i = 0; i < p.values.size(); ++i) {
      const double gr = p.grad[i];
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * gr;
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * gr * gr;
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p.values[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

void Adam::zero_grad() {
  for (const auto& p : params_) p->zero_grad();
}

}  // namespace gca
