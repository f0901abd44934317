#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "gca/error.hpp"

namespace gca {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string shape_str(const Shape& shape);

struct Tensor;
using TensorPtr = std::shared_ptr<Tensor>;

// Dense row-major float64 array. `grad` stays empty until a backward pass
// (or ensure_grad) touches the tensor; when present it has the same length
// as `values`.
struct Tensor {
  Shape shape;
  std::vector<double> values;
  bool requires_grad = false;
  std::vector<double> grad;

  Tensor(Shape s, std::vector<double> v, bool rg);

  std::size_t size() const { return values.size(); }
  std::size_t rank() const { return shape.size(); }

  // 2-D accessors; rank is checked.
  std::size_t rows() const;
  std::size_t cols() const;
  double at(std::size_t r, std::size_t c) const;
  double& at(std::size_t r, std::size_t c);

  double scalar() const;

  void ensure_grad();
  void zero_grad();

  TensorPtr clone() const;

  static TensorPtr make(Shape s, std::vector<double> v, bool rg = false);
  static TensorPtr zeros(Shape s, bool rg = false);
  static TensorPtr full(Shape s, double value, bool rg = false);
  static TensorPtr scalar_value(double v, bool rg = false);
  static TensorPtr randn(Shape s, std::mt19937_64& rng, double stddev,
                         bool rg = true);
};

// Tape of executed operations. Ops append their backward step as they run,
// so the record is already topologically ordered; one reverse sweep from a
// scalar loss fills `grad` for every requires_grad tensor that fed it.
// Gradients accumulate across backward calls until zero_grad is invoked on
// the tensors. Construction and backward are single-threaded per instance.
class Graph {
 public:
  explicit Graph(bool record_tape = true) : record_(record_tape) {}

  void record(std::function<void()> backward_step);
  void backward(const TensorPtr& loss);

  bool recording() const { return record_; }
  std::size_t num_ops() const { return tape_.size(); }
  void clear() { tape_.clear(); }

 private:
  bool record_ = true;
  std::vector<std::function<void()>> tape_;
};

}  // namespace gca
