#include "gca/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>

namespace gca::ops {

namespace {

void require_2d(const TensorPtr& x, const char* op) {
  if (x->rank() != 2) {
    throw_dimension(std::string(op) + ": expected a 2-D tensor, got " + shape_str(x->shape));
  }
}

std::size_t resolve_valid(std::size_t valid, std::size_t extent, const char* op) {
  if (valid == 0) return extent;
  if (valid > extent) {
    throw_dimension(std::string(op) + ": valid extent " + std::to_string(valid) +
                    " exceeds dimension " + std::to_string(extent));
  }
  return valid;
}

void check_finite_prefix(const Tensor& x, std::size_t valid_cols, const char* op) {
  const std::size_t m = x.shape[0], n = x.shape[1];
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < valid_cols; ++j) {
      if (!std::isfinite(x.values[i * n + j])) {
        throw_numeric(std::string(op) + ": non-finite input at (" + std::to_string(i) + "," +
                      std::to_string(j) + ")");
      }
    }
  }
}

struct Broadcast {
  enum class Kind { Same, Scalar, Row, Col } kind;
  bool swapped;  // true when b is the full-shape operand
};

Broadcast plan_broadcast(const Tensor& a, const Tensor& b, const char* op) {
  using K = Broadcast::Kind;
  if (a.shape == b.shape) return {K::Same, false};
  if (b.size() == 1) return {K::Scalar, false};
  if (a.size() == 1) return {K::Scalar, true};
  auto fits = [](const Tensor& big, const Tensor& small) -> std::optional<K> {
    if (big.rank() != 2) return std::nullopt;
    if (small.rank() == 1 && small.shape[0] == big.shape[1]) return K::Row;
    if (small.rank() == 2 && small.shape[0] == 1 && small.shape[1] == big.shape[1]) return K::Row;
    if (small.rank() == 2 && small.shape[1] == 1 && small.shape[0] == big.shape[0]) return K::Col;
    return std::nullopt;
  };
  if (auto k = fits(a, b)) return {*k, false};
  if (auto k = fits(b, a)) return {*k, true};
  throw_dimension(std::string(op) + ": shapes " + shape_str(a.shape) + " and " +
                  shape_str(b.shape) + " are not broadcast-compatible");
}

// Index of the small operand's element matching flat position i of the big one.
inline std::size_t small_index(Broadcast::Kind k, std::size_t i, std::size_t cols) {
  switch (k) {
    case Broadcast::Kind::Same: return i;
    case Broadcast::Kind::Scalar: return 0;
    case Broadcast::Kind::Row: return i % cols;
    case Broadcast::Kind::Col: return i / cols;
  }
  return 0;
}

}  // namespace

TensorPtr matmul(Graph& g, const TensorPtr& a, const TensorPtr& b) {
  require_2d(a, "matmul");
  require_2d(b, "matmul");
  const std::size_t m = a->shape[0], k = a->shape[1], n = b->shape[1];
  if (b->shape[0] != k) {
    throw_dimension("matmul: inner dimensions disagree, " + shape_str(a->shape) + " vs " +
                    shape_str(b->shape));
  }
  auto out = Tensor::zeros({m, n}, a->requires_grad || b->requires_grad);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a->values[i * k + p];
      if (av == 0.0) continue;
      const double* brow = &b->values[p * n];
      double* orow = &out->values[i * n];
      for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
    }
  }
  if (out->requires_grad) {
    g.record([a, b, out, m, k, n]() {
      if (out->grad.empty()) return;
      if (a->requires_grad) {
        a->ensure_grad();
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t p = 0; p < k; ++p) {
            double acc = 0.0;
            const double* go = &out->grad[i * n];
            const double* brow = &b->values[p * n];
            for (std::size_t j = 0; j < n; ++j) acc += go[j] * brow[j];
            a->grad[i * k + p] += acc;
          }
        }
      }
      if (b->requires_grad) {
        b->ensure_grad();
        for (std::size_t i = 0; i < m; ++i) {
          const double* go = &out->grad[i * n];
          for (std::size_t p = 0; p < k; ++p) {
            const double av = a->values[i * k + p];
            if (av == 0.0) continue;
            double* gb = &b->grad[p * n];
            for (std::size_t j = 0; j < n; ++j) gb[j] += av * go[j];
          }
        }
      }
    });
  }
  return out;
}

TensorPtr transpose(Graph& g, const TensorPtr& x) {
  require_2d(x, "transpose");
  const std::size_t m = x->shape[0], n = x->shape[1];
  auto out = Tensor::zeros({n, m}, x->requires_grad);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out->values[j * m + i] = x->values[i * n + j];
  if (out->requires_grad) {
    g.record([x, out, m, n]() {
      if (out->grad.empty()) return;
      x->ensure_grad();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) x->grad[i * n + j] += out->grad[j * m + i];
    });
  }
  return out;
}

TensorPtr softmax_rows(Graph& g, const TensorPtr& x, std::size_t valid_cols) {
  require_2d(x, "softmax_rows");
  const std::size_t m = x->shape[0], n = x->shape[1];
  const std::size_t vc = resolve_valid(valid_cols, n, "softmax_rows");
  check_finite_prefix(*x, vc, "softmax_rows");
  auto out = Tensor::zeros({m, n}, x->requires_grad);
  for (std::size_t i = 0; i < m; ++i) {
    const double* row = &x->values[i * n];
    double mx = row[0];
    for (std::size_t j = 1; j < vc; ++j) mx = std::max(mx, row[j]);
    double sum = 0.0;
    double* orow = &out->values[i * n];
    for (std::size_t j = 0; j < vc; ++j) {
      orow[j] = std::exp(row[j] - mx);
      sum += orow[j];
    }
    for (std::size_t j = 0; j < vc; ++j) orow[j] /= sum;
  }
  if (out->requires_grad) {
    g.record([x, out, m, n, vc]() {
      if (out->grad.empty()) return;
      x->ensure_grad();
      for (std::size_t i = 0; i < m; ++i) {
        const double* y = &out->values[i * n];
        const double* go = &out->grad[i * n];
        double dot = 0.0;
        for (std::size_t j = 0; j < vc; ++j) dot += y[j] * go[j];
        double* gx = &x->grad[i * n];
        for (std::size_t j = 0; j < vc; ++j) gx[j] += y[j] * (go[j] - dot);
      }
    });
  }
  return out;
}

TensorPtr sparsemax_rows(Graph& g, const TensorPtr& x, std::size_t valid_cols) {
  require_2d(x, "sparsemax_rows");
  const std::size_t m = x->shape[0], n = x->shape[1];
  const std::size_t vc = resolve_valid(valid_cols, n, "sparsemax_rows");
  check_finite_prefix(*x, vc, "sparsemax_rows");
  auto out = Tensor::zeros({m, n}, x->requires_grad);
  std::vector<double> sorted(vc);
  for (std::size_t i = 0; i < m; ++i) {
    const double* row = &x->values[i * n];
    sorted.assign(row, row + vc);
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());
    double cum = 0.0, tau = 0.0;
    for (std::size_t k = 0; k < vc; ++k) {
      cum += sorted[k];
      const double kk = static_cast<double>(k + 1);
      if (1.0 + kk * sorted[k] > cum) tau = (cum - 1.0) / kk;
    }
    double* orow = &out->values[i * n];
    for (std::size_t j = 0; j < vc; ++j) orow[j] = std::max(row[j] - tau, 0.0);
  }
  if (out->requires_grad) {
    // Support set taken from the forward output; at a support boundary this
    // is the right-limit Jacobian (a subgradient choice).
    g.record([x, out, m, n, vc]() {
      if (out->grad.empty()) return;
      x->ensure_grad();
      for (std::size_t i = 0; i < m; ++i) {
        const double* y = &out->values[i * n];
        const double* go = &out->grad[i * n];
        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t j = 0; j < vc; ++j) {
          if (y[j] > 0.0) {
            sum += go[j];
            ++count;
          }
        }
        if (count == 0) continue;
        const double mean = sum / static_cast<double>(count);
        double* gx = &x->grad[i * n];
        for (std::size_t j = 0; j < vc; ++j) {
          if (y[j] > 0.0) gx[j] += go[j] - mean;
        }
      }
    });
  }
  return out;
}

TensorPtr normalize_rows(Graph& g, const TensorPtr& x, Normalizer which,
                         std::size_t valid_cols) {
  return which == Normalizer::Softmax ? softmax_rows(g, x, valid_cols)
                                      : sparsemax_rows(g, x, valid_cols);
}

TensorPtr add(Graph& g, const TensorPtr& a, const TensorPtr& b) {
  const Broadcast bc = plan_broadcast(*a, *b, "add");
  const TensorPtr& big = bc.swapped ? b : a;
  const TensorPtr& small = bc.swapped ? a : b;
  const std::size_t cols = big->rank() == 2 ? big->shape[1] : big->size();
  auto out = Tensor::zeros(big->shape, a->requires_grad || b->requires_grad);
  const std::size_t total = big->size();
  for (std::size_t i = 0; i < total; ++i) {
    out->values[i] = big->values[i] + small->values[small_index(bc.kind, i, cols)];
  }
  if (out->requires_grad) {
    g.record([big, small, out, bc, cols, total]() {
      if (out->grad.empty()) return;
      if (big->requires_grad) {
        big->ensure_grad();
        for (std::size_t i = 0; i < total; ++i) big->grad[i] += out->grad[i];
      }
      if (small->requires_grad) {
        small->ensure_grad();
        for (std::size_t i = 0; i < total; ++i) {
          small->grad[small_index(bc.kind, i, cols)] += out->grad[i];
        }
      }
    });
  }
  return out;
}

TensorPtr mul(Graph& g, const TensorPtr& a, const TensorPtr& b) {
  const Broadcast bc = plan_broadcast(*a, *b, "mul");
  const TensorPtr& big = bc.swapped ? b : a;
  const TensorPtr& small = bc.swapped ? a : b;
  const std::size_t cols = big->rank() == 2 ? big->shape[1] : big->size();
  auto out = Tensor::zeros(big->shape, a->requires_grad || b->requires_grad);
  const std::size_t total = big->size();
  for (std::size_t i = 0; i < total; ++i) {
    out->values[i] = big->values[i] * small->values[small_index(bc.kind, i, cols)];
  }
  if (out->requires_grad) {
    g.record([big, small, out, bc, cols, total]() {
      if (out->grad.empty()) return;
      if (big->requires_grad) {
        big->ensure_grad();
        for (std::size_t i = 0; i < total; ++i) {
          big->grad[i] += out->grad[i] * small->values[small_index(bc.kind, i, cols)];
        }
      }
      if (small->requires_grad) {
        small->ensure_grad();
        for (std::size_t i = 0; i < total; ++i) {
          small->grad[small_index(bc.kind, i, cols)] += out->grad[i] * big->values[i];
        }
      }
    });
  }
  return out;
}

TensorPtr relu(Graph& g, const TensorPtr& x) {
  auto out = Tensor::zeros(x->shape, x->requires_grad);
  const std::size_t total = x->size();
  for (std::size_t i = 0; i < total; ++i) out->values[i] = std::max(x->values[i], 0.0);
  if (out->requires_grad) {
    g.record([x, out, total]() {
      if (out->grad.empty()) return;
      x->ensure_grad();
      for (std::size_t i = 0; i < total; ++i) {
        if (x->values[i] > 0.0) x->grad[i] += out->grad[i];
      }
    });
  }
  return out;
}

TensorPtr tanh(Graph& g, const TensorPtr& x) {
  auto out = Tensor::zeros(x->shape, x->requires_grad);
  const std::size_t total = x->size();
  for (std::size_t i = 0; i < total; ++i) out->values[i] = std::tanh(x->values[i]);
  if (out->requires_grad) {
    g.record([x, out, total]() {
      if (out->grad.empty()) return;
      x->ensure_grad();
      for (std::size_t i = 0; i < total; ++i) {
        const double y = out->values[i];
        x->grad[i] += out->grad[i] * (1.0 - y * y);
      }
    });
  }
  return out;
}

TensorPtr scale(Graph& g, const TensorPtr& x, double factor) {
  auto out = Tensor::zeros(x->shape, x->requires_grad);
  const std::size_t total = x->size();
  for (std::size_t i = 0; i < total; ++i) out->values[i] = factor * x->values[i];
  if (out->requires_grad) {
    g.record([x, out, factor, total]() {
      if (out->grad.empty()) return;
      x->ensure_grad();
      for (std::size_t i = 0; i < total; ++i) x->grad[i] += factor * out->grad[i];
    });
  }
  return out;
}

TensorPtr conv1d(Graph& g, const TensorPtr& x, const TensorPtr& kernels,
                 const TensorPtr& bias) {
  require_2d(x, "conv1d");
  if (kernels->rank() != 3) {
    throw_dimension("conv1d: kernels must be [w x c_in x c_out], got " +
                    shape_str(kernels->shape));
  }
  const std::size_t len = x->shape[0], cin = x->shape[1];
  const std::size_t w = kernels->shape[0], kcin = kernels->shape[1], cout = kernels->shape[2];
  if (w % 2 == 0) throw_config("conv1d: kernel width must be odd, got " + std::to_string(w));
  if (kcin != cin) {
    throw_dimension("conv1d: kernel input channels " + std::to_string(kcin) +
                    " do not match input channels " + std::to_string(cin));
  }
  if (bias->rank() != 1 || bias->shape[0] != cout) {
    throw_dimension("conv1d: bias shape " + shape_str(bias->shape) + " does not match " +
                    std::to_string(cout) + " output channels");
  }
  const std::size_t half = w / 2;
  auto out = Tensor::zeros({len, cout},
                           x->requires_grad || kernels->requires_grad || bias->requires_grad);
  for (std::size_t t = 0; t < len; ++t) {
    double* orow = &out->values[t * cout];
    for (std::size_t o = 0; o < cout; ++o) orow[o] = bias->values[o];
    for (std::size_t dt = 0; dt < w; ++dt) {
      const std::ptrdiff_t s = static_cast<std::ptrdiff_t>(t + dt) - static_cast<std::ptrdiff_t>(half);
      if (s < 0 || s >= static_cast<std::ptrdiff_t>(len)) continue;
      const double* xrow = &x->values[static_cast<std::size_t>(s) * cin];
      for (std::size_t ci = 0; ci < cin; ++ci) {
        const double xv = xrow[ci];
        if (xv == 0.0) continue;
        const double* krow = &kernels->values[(dt * cin + ci) * cout];
        for (std::size_t o = 0; o < cout; ++o) orow[o] += xv * krow[o];
      }
    }
  }
  if (out->requires_grad) {
    g.record([x, kernels, bias, out, len, cin, w, cout, half]() {
      if (out->grad.empty()) return;
      if (x->requires_grad) x->ensure_grad();
      if (kernels->requires_grad) kernels->ensure_grad();
      if (bias->requires_grad) bias->ensure_grad();
      for (std::size_t t = 0; t < len; ++t) {
        const double* go = &out->grad[t * cout];
        if (bias->requires_grad) {
          for (std::size_t o = 0; o < cout; ++o) bias->grad[o] += go[o];
        }
        for (std::size_t dt = 0; dt < w; ++dt) {
          const std::ptrdiff_t s =
              static_cast<std::ptrdiff_t>(t + dt) - static_cast<std::ptrdiff_t>(half);
          if (s < 0 || s >= static_cast<std::ptrdiff_t>(len)) continue;
          const std::size_t su = static_cast<std::size_t>(s);
          for (std::size_t ci = 0; ci < cin; ++ci) {
            const double xv = x->values[su * cin + ci];
            const double* krow = &kernels->values[(dt * cin + ci) * cout];
            if (x->requires_grad) {
              double acc = 0.0;
              for (std::size_t o = 0; o < cout; ++o) acc += go[o] * krow[o];
              x->grad[su * cin + ci] += acc;
            }
            if (kernels->requires_grad) {
              double* gk = &kernels->grad[(dt * cin + ci) * cout];
              for (std::size_t o = 0; o < cout; ++o) gk[o] += go[o] * xv;
            }
          }
        }
      }
    });
  }
  return out;
}

TensorPtr pool(Graph& g, const TensorPtr& x, PoolMode mode, std::size_t valid_len) {
  require_2d(x, "pool");
  const std::size_t len = x->shape[0], f = x->shape[1];
  const std::size_t vl = resolve_valid(valid_len, len, "pool");
  auto out = Tensor::zeros({f}, x->requires_grad);
  std::vector<std::size_t> argmax(mode == PoolMode::Max ? f : 0, 0);
  if (mode == PoolMode::Max) {
    for (std::size_t j = 0; j < f; ++j) {
      double best = x->values[j];
      std::size_t bi = 0;
      for (std::size_t i = 1; i < vl; ++i) {
        const double v = x->values[i * f + j];
        if (v > best) {
          best = v;
          bi = i;
        }
      }
      out->values[j] = best;
      argmax[j] = bi;
    }
  } else {
    for (std::size_t i = 0; i < vl; ++i)
      for (std::size_t j = 0; j < f; ++j) out->values[j] += x->values[i * f + j];
    for (std::size_t j = 0; j < f; ++j) out->values[j] /= static_cast<double>(vl);
  }
  if (out->requires_grad) {
    g.record([x, out, mode, vl, f, argmax = std::move(argmax)]() {
      if (out->grad.empty()) return;
      x->ensure_grad();
      if (mode == PoolMode::Max) {
        for (std::size_t j = 0; j < f; ++j) x->grad[argmax[j] * f + j] += out->grad[j];
      } else {
        const double inv = 1.0 / static_cast<double>(vl);
        for (std::size_t i = 0; i < vl; ++i)
          for (std::size_t j = 0; j < f; ++j) x->grad[i * f + j] += inv * out->grad[j];
      }
    });
  }
  return out;
}

TensorPtr layer_norm(Graph& g, const TensorPtr& x, const TensorPtr& gain,
                     const TensorPtr& bias) {
  require_2d(x, "layer_norm");
  const std::size_t len = x->shape[0], f = x->shape[1];
  if (f < 2) throw_config("layer_norm: feature dimension must be >= 2, got " + std::to_string(f));
  if (gain->rank() != 1 || gain->shape[0] != f || bias->rank() != 1 || bias->shape[0] != f) {
    throw_dimension("layer_norm: gain/bias shapes " + shape_str(gain->shape) + "/" +
                    shape_str(bias->shape) + " do not match feature dim " + std::to_string(f));
  }
  constexpr double kEps = 1e-5;
  auto out = Tensor::zeros({len, f},
                           x->requires_grad || gain->requires_grad || bias->requires_grad);
  std::vector<double> mean(len), inv_std(len);
  for (std::size_t i = 0; i < len; ++i) {
    const double* row = &x->values[i * f];
    double mu = 0.0;
    for (std::size_t j = 0; j < f; ++j) mu += row[j];
    mu /= static_cast<double>(f);
    double var = 0.0;
    for (std::size_t j = 0; j < f; ++j) {
      const double d = row[j] - mu;
      var += d * d;
    }
    var /= static_cast<double>(f);
    const double inv = 1.0 / std::sqrt(var + kEps);
    mean[i] = mu;
    inv_std[i] = inv;
    double* orow = &out->values[i * f];
    for (std::size_t j = 0; j < f; ++j) {
      orow[j] = gain->values[j] * (row[j] - mu) * inv + bias->values[j];
    }
  }
  if (out->requires_grad) {
    g.record([x, gain, bias, out, len, f, mean = std::move(mean),
              inv_std = std::move(inv_std)]() {
      if (out->grad.empty()) return;
      if (x->requires_grad) x->ensure_grad();
      if (gain->requires_grad) gain->ensure_grad();
      if (bias->requires_grad) bias->ensure_grad();
      std::vector<double> xhat(f), dxhat(f);
      for (std::size_t i = 0; i < len; ++i) {
        const double* row = &x->values[i * f];
        const double* go = &out->grad[i * f];
        const double inv = inv_std[i];
        double dxhat_mean = 0.0, dxhat_xhat_mean = 0.0;
        for (std::size_t j = 0; j < f; ++j) {
          xhat[j] = (row[j] - mean[i]) * inv;
          dxhat[j] = go[j] * gain->values[j];
          dxhat_mean += dxhat[j];
          dxhat_xhat_mean += dxhat[j] * xhat[j];
        }
        dxhat_mean /= static_cast<double>(f);
        dxhat_xhat_mean /= static_cast<double>(f);
        for (std::size_t j = 0; j < f; ++j) {
          if (x->requires_grad) {
            x->grad[i * f + j] += inv * (dxhat[j] - dxhat_mean - xhat[j] * dxhat_xhat_mean);
          }
          if (gain->requires_grad) gain->grad[j] += go[j] * xhat[j];
          if (bias->requires_grad) bias->grad[j] += go[j];
        }
      }
    });
  }
  return out;
}

TensorPtr embedding_lookup(Graph& g, const TensorPtr& table, const std::vector<int>& ids) {
  require_2d(table, "embedding_lookup");
  const std::size_t vocab = table->shape[0], f = table->shape[1];
  if (ids.empty()) throw_dimension("embedding_lookup: empty id sequence");
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= vocab) {
      throw_index("embedding_lookup: id " + std::to_string(ids[i]) + " at position " +
                  std::to_string(i) + " out of range for vocabulary size " +
                  std::to_string(vocab));
    }
  }
  auto out = Tensor::zeros({ids.size(), f}, table->requires_grad);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const double* trow = &table->values[static_cast<std::size_t>(ids[i]) * f];
    std::copy(trow, trow + f, &out->values[i * f]);
  }
  if (out->requires_grad) {
    g.record([table, out, ids, f]() {
      if (out->grad.empty()) return;
      table->ensure_grad();
      for (std::size_t i = 0; i < ids.size(); ++i) {
        double* trow = &table->grad[static_cast<std::size_t>(ids[i]) * f];
        const double* go = &out->grad[i * f];
        for (std::size_t j = 0; j < f; ++j) trow[j] += go[j];
      }
    });
  }
  return out;
}

TensorPtr concat(Graph& g, const TensorPtr& a, const TensorPtr& b) {
  if (a->rank() != 1 || b->rank() != 1) {
    throw_dimension("concat: expected 1-D tensors, got " + shape_str(a->shape) + " and " +
                    shape_str(b->shape));
  }
  const std::size_t na = a->size(), nb = b->size();
  auto out = Tensor::zeros({na + nb}, a->requires_grad || b->requires_grad);
  std::copy(a->values.begin(), a->values.end(), out->values.begin());
  std::copy(b->values.begin(), b->values.end(), out->values.begin() + static_cast<std::ptrdiff_t>(na));
  if (out->requires_grad) {
    g.record([a, b, out, na, nb]() {
      if (out->grad.empty()) return;
      if (a->requires_grad) {
        a->ensure_grad();
        for (std::size_t i = 0; i < na; ++i) a->grad[i] += out->grad[i];
      }
      if (b->requires_grad) {
        b->ensure_grad();
        for (std::size_t i = 0; i < nb; ++i) b->grad[i] += out->grad[na + i];
      }
    });
  }
  return out;
}

TensorPtr concat_cols(Graph& g, const std::vector<TensorPtr>& parts) {
  if (parts.empty()) throw_dimension("concat_cols: no tensors given");
  const std::size_t m = parts[0]->shape[0];
  std::size_t total_cols = 0;
  bool rg = false;
  for (const auto& p : parts) {
    require_2d(p, "concat_cols");
    if (p->shape[0] != m) {
      throw_dimension("concat_cols: row counts differ, " + shape_str(parts[0]->shape) +
                      " vs " + shape_str(p->shape));
    }
    total_cols += p->shape[1];
    rg = rg || p->requires_grad;
  }
  auto out = Tensor::zeros({m, total_cols}, rg);
  std::size_t offset = 0;
  for (const auto& p : parts) {
    const std::size_t pc = p->shape[1];
    for (std::size_t i = 0; i < m; ++i) {
      std::copy(&p->values[i * pc], &p->values[i * pc] + pc,
                &out->values[i * total_cols + offset]);
    }
    offset += pc;
  }
  if (out->requires_grad) {
    g.record([parts, out, m, total_cols]() {
      if (out->grad.empty()) return;
      std::size_t off = 0;
      for (const auto& p : parts) {
        const std::size_t pc = p->shape[1];
        if (p->requires_grad) {
          p->ensure_grad();
          for (std::size_t i = 0; i < m; ++i) {
            const double* go = &out->grad[i * total_cols + off];
            double* gp = &p->grad[i * pc];
            for (std::size_t j = 0; j < pc; ++j) gp[j] += go[j];
          }
        }
        off += pc;
      }
    });
  }
  return out;
}

TensorPtr slice_cols(Graph& g, const TensorPtr& x, std::size_t start, std::size_t count) {
  require_2d(x, "slice_cols");
  const std::size_t m = x->shape[0], n = x->shape[1];
  if (count == 0 || start + count > n) {
    throw_dimension("slice_cols: range [" + std::to_string(start) + ", " +
                    std::to_string(start + count) + ") invalid for " + shape_str(x->shape));
  }
  auto out = Tensor::zeros({m, count}, x->requires_grad);
  for (std::size_t i = 0; i < m; ++i) {
    std::copy(&x->values[i * n + start], &x->values[i * n + start] + count,
              &out->values[i * count]);
  }
  if (out->requires_grad) {
    g.record([x, out, m, n, start, count]() {
      if (out->grad.empty()) return;
      x->ensure_grad();
      for (std::size_t i = 0; i < m; ++i) {
        const double* go = &out->grad[i * count];
        double* gx = &x->grad[i * n + start];
        for (std::size_t j = 0; j < count; ++j) gx[j] += go[j];
      }
    });
  }
  return out;
}

TensorPtr mean_rows(Graph& g, const TensorPtr& x, std::size_t valid_rows) {
  require_2d(x, "mean_rows");
  const std::size_t m = x->shape[0], n = x->shape[1];
  const std::size_t vr = resolve_valid(valid_rows, m, "mean_rows");
  auto out = Tensor::zeros({n}, x->requires_grad);
  for (std::size_t i = 0; i < vr; ++i)
    for (std::size_t j = 0; j < n; ++j) out->values[j] += x->values[i * n + j];
  const double inv = 1.0 / static_cast<double>(vr);
  for (std::size_t j = 0; j < n; ++j) out->values[j] *= inv;
  if (out->requires_grad) {
    g.record([x, out, vr, n, inv]() {
      if (out->grad.empty()) return;
      x->ensure_grad();
      for (std::size_t i = 0; i < vr; ++i)
        for (std::size_t j = 0; j < n; ++j) x->grad[i * n + j] += inv * out->grad[j];
    });
  }
  return out;
}

TensorPtr rowmax(Graph& g, const TensorPtr& x, std::size_t valid_cols) {
  require_2d(x, "rowmax");
  const std::size_t m = x->shape[0], n = x->shape[1];
  const std::size_t vc = resolve_valid(valid_cols, n, "rowmax");
  auto out = Tensor::zeros({m}, x->requires_grad);
  std::vector<std::size_t> argmax(m, 0);
  for (std::size_t i = 0; i < m; ++i) {
    const double* row = &x->values[i * n];
    double best = row[0];
    std::size_t bj = 0;
    for (std::size_t j = 1; j < vc; ++j) {
      if (row[j] > best) {
        best = row[j];
        bj = j;
      }
    }
    out->values[i] = best;
    argmax[i] = bj;
  }
  if (out->requires_grad) {
    g.record([x, out, m, n, argmax = std::move(argmax)]() {
      if (out->grad.empty()) return;
      x->ensure_grad();
      for (std::size_t i = 0; i < m; ++i) x->grad[i * n + argmax[i]] += out->grad[i];
    });
  }
  return out;
}

TensorPtr reshape(Graph& g, const TensorPtr& x, Shape new_shape) {
  if (numel(new_shape) != x->size()) {
    throw_dimension("reshape: cannot view " + shape_str(x->shape) + " as " +
                    shape_str(new_shape));
  }
  auto out = Tensor::make(std::move(new_shape), x->values, x->requires_grad);
  if (out->requires_grad) {
    g.record([x, out]() {
      if (out->grad.empty()) return;
      x->ensure_grad();
      for (std::size_t i = 0; i < x->grad.size(); ++i) x->grad[i] += out->grad[i];
    });
  }
  return out;
}

TensorPtr mse_loss(Graph& g, const TensorPtr& pred, const TensorPtr& target) {
  if (pred->shape != target->shape) {
    throw_dimension("mse_loss: shapes differ, " + shape_str(pred->shape) + " vs " +
                    shape_str(target->shape));
  }
  const std::size_t total = pred->size();
  double acc = 0.0;
  for (std::size_t i = 0; i < total; ++i) {
    const double d = pred->values[i] - target->values[i];
    acc += d * d;
  }
  auto out = Tensor::scalar_value(acc / static_cast<double>(total),
                                  pred->requires_grad || target->requires_grad);
  if (out->requires_grad) {
    g.record([pred, target, out, total]() {
      if (out->grad.empty()) return;
      const double go = out->grad[0] * 2.0 / static_cast<double>(total);
      if (pred->requires_grad) pred->ensure_grad();
      if (target->requires_grad) target->ensure_grad();
      for (std::size_t i = 0; i < total; ++i) {
        const double d = pred->values[i] - target->values[i];
        if (pred->requires_grad) pred->grad[i] += go * d;
        if (target->requires_grad) target->grad[i] -= go * d;
      }
    });
  }
  return out;
}

}  // namespace gca::ops
