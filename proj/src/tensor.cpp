#include "gca/tensor.hpp"

#include <algorithm>
#include <sstream>

namespace gca {

std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << "x";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

Tensor::Tensor(Shape s, std::vector<double> v, bool rg)
    : shape(std::move(s)), values(std::move(v)), requires_grad(rg) {
  if (shape.empty()) throw_dimension("tensor shape must have at least one dimension");
  for (std::size_t d : shape) {
    if (d == 0) throw_dimension("tensor dimensions must be positive, got " + shape_str(shape));
  }
  if (numel(shape) != values.size()) {
    throw_dimension("tensor value count " + std::to_string(values.size()) +
                    " does not match shape " + shape_str(shape));
  }
}

std::size_t Tensor::rows() const {
  if (shape.size() != 2) throw_dimension("rows() requires a 2-D tensor, got " + shape_str(shape));
  return shape[0];
}

std::size_t Tensor::cols() const {
  if (shape.size() != 2) throw_dimension("cols() requires a 2-D tensor, got " + shape_str(shape));
  return shape[1];
}

double Tensor::at(std::size_t r, std::size_t c) const {
  return values[r * cols() + c];
}

double& Tensor::at(std::size_t r, std::size_t c) {
  return values[r * cols() + c];
}

double Tensor::scalar() const {
  if (size() != 1) throw_dimension("scalar() requires a single-element tensor, got " + shape_str(shape));
  return values[0];
}

void Tensor::ensure_grad() {
  if (grad.size() != values.size()) grad.assign(values.size(), 0.0);
}

void Tensor::zero_grad() {
  if (!grad.empty()) std::fill(grad.begin(), grad.end(), 0.0);
}

TensorPtr Tensor::clone() const {
  return std::make_shared<Tensor>(shape, values, requires_grad);
}

TensorPtr Tensor::make(Shape s, std::vector<double> v, bool rg) {
  return std::make_shared<Tensor>(std::move(s), std::move(v), rg);
}

TensorPtr Tensor::zeros(Shape s, bool rg) {
  std::vector<double> v(numel(s), 0.0);
  return std::make_shared<Tensor>(std::move(s), std::move(v), rg);
}

TensorPtr Tensor::full(Shape s, double value, bool rg) {
  std::vector<double> v(numel(s), value);
  return std::make_shared<Tensor>(std::move(s), std::move(v), rg);
}

TensorPtr Tensor::scalar_value(double v, bool rg) {
  return std::make_shared<Tensor>(Shape{1}, std::vector<double>{v}, rg);
}

TensorPtr Tensor::randn(Shape s, std::mt19937_64& rng, double stddev, bool rg) {
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<double> v(numel(s));
  for (double& x : v) x = stddev * dist(rng);
  return std::make_shared<Tensor>(std::move(s), std::move(v), rg);
}

void Graph::record(std::function<void()> backward_step) {
  if (record_) tape_.push_back(std::move(backward_step));
}

void Graph::backward(const TensorPtr& loss) {
  if (!loss) throw_dimension("backward: null loss tensor");
  if (loss->size() != 1) {
    throw_dimension("backward requires a scalar loss, got " + shape_str(loss->shape));
  }
  if (!record_) throw_config("backward on a non-recording graph");
  loss->ensure_grad();
  loss->grad[0] += 1.0;
  for (auto it = tape_.rbegin(); it != tape_.rend(); ++it) (*it)();
}

}  // namespace gca
