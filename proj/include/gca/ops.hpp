#pragma once

#include <cstddef>
#include <vector>

#include "gca/tensor.hpp"

namespace gca::ops {

enum class PoolMode { Max, Mean };
enum class Normalizer { Softmax, Sparsemax };

// All operations append their backward rule to the graph when any input
// requires gradients. `valid_*` parameters restrict a reduction or a row
// normalization to a leading prefix; positions beyond the prefix receive an
// exact 0 in the output and no gradient. 0 means "use the full extent".

TensorPtr matmul(Graph& g, const TensorPtr& a, const TensorPtr& b);
TensorPtr transpose(Graph& g, const TensorPtr& x);

TensorPtr softmax_rows(Graph& g, const TensorPtr& x, std::size_t valid_cols = 0);
TensorPtr sparsemax_rows(Graph& g, const TensorPtr& x, std::size_t valid_cols = 0);
TensorPtr normalize_rows(Graph& g, const TensorPtr& x, Normalizer which,
                         std::size_t valid_cols = 0);

// Elementwise suite. add/mul broadcast: equal shapes, a single-element
// operand, a row vector [n] or [1xn] against [mxn], or a column [mx1]
// against [mxn]. A 1-D operand of length n against [mxn] follows the
// trailing-axis (row) convention.
TensorPtr add(Graph& g, const TensorPtr& a, const TensorPtr& b);
TensorPtr mul(Graph& g, const TensorPtr& a, const TensorPtr& b);
TensorPtr relu(Graph& g, const TensorPtr& x);
TensorPtr tanh(Graph& g, const TensorPtr& x);
TensorPtr scale(Graph& g, const TensorPtr& x, double factor);

// Sequence-wise convolution with same-length zero padding.
// x: [len x c_in], kernels: [w x c_in x c_out] with w odd, bias: [c_out].
TensorPtr conv1d(Graph& g, const TensorPtr& x, const TensorPtr& kernels,
                 const TensorPtr& bias);

// Per-feature reduction over the first valid_len rows of [len x f] -> [f].
// Max routes the gradient to the first argmax position.
TensorPtr pool(Graph& g, const TensorPtr& x, PoolMode mode,
               std::size_t valid_len = 0);

// Per-position standardization over features (epsilon 1e-5), then affine.
TensorPtr layer_norm(Graph& g, const TensorPtr& x, const TensorPtr& gain,
                     const TensorPtr& bias);

TensorPtr embedding_lookup(Graph& g, const TensorPtr& table,
                           const std::vector<int>& ids);

TensorPtr concat(Graph& g, const TensorPtr& a, const TensorPtr& b);  // 1-D
TensorPtr concat_cols(Graph& g, const std::vector<TensorPtr>& parts);
TensorPtr slice_cols(Graph& g, const TensorPtr& x, std::size_t start,
                     std::size_t count);

// Mean of the first valid_rows rows of [m x n] -> [n].
TensorPtr mean_rows(Graph& g, const TensorPtr& x, std::size_t valid_rows = 0);
// Per-row max over the first valid_cols columns of [m x n] -> [m].
TensorPtr rowmax(Graph& g, const TensorPtr& x, std::size_t valid_cols = 0);

TensorPtr reshape(Graph& g, const TensorPtr& x, Shape new_shape);

TensorPtr mse_loss(Graph& g, const TensorPtr& pred, const TensorPtr& target);

}  // namespace gca::ops
