#include "gca/attention.hpp"

#include <cmath>
#include <string>

namespace gca {

namespace {

void require_features(const TensorPtr& x, std::size_t f, const char* what) {
  if (x->rank() != 2 || x->shape[1] != f) {
    throw_config(std::string(what) + ": expected [L x " + std::to_string(f) +
                 "] features, got " + shape_str(x->shape));
  }
}

void require_square(const TensorPtr& w, std::size_t f, const char* what) {
  if (w->rank() != 2 || w->shape[0] != f || w->shape[1] != f) {
    throw_config(std::string(what) + ": expected [" + std::to_string(f) + " x " +
                 std::to_string(f) + "] weights, got " + shape_str(w->shape));
  }
}

std::vector<double> tensor_values(const TensorPtr& t) { return t->values; }

}  // namespace

std::size_t AttentionConfig::head_dim() const {
  validate();
  return feature_dim / num_heads;
}

void AttentionConfig::validate() const {
  if (num_heads == 0) throw_config("attention: num_heads must be positive");
  if (feature_dim == 0) throw_config("attention: feature_dim must be positive");
  if (feature_dim % num_heads != 0) {
    throw_config("attention: feature_dim " + std::to_string(feature_dim) +
                 " not divisible by num_heads " + std::to_string(num_heads));
  }
}

Qkv project_qkv(Graph& g, const TensorPtr& x, const TensorPtr& w_query,
                const TensorPtr& w_key, const TensorPtr& w_value) {
  if (x->rank() != 2) {
    throw_config("project_qkv: expected 2-D features, got " + shape_str(x->shape));
  }
  const std::size_t f = x->shape[1];
  require_square(w_query, f, "project_qkv(W_Q)");
  require_square(w_key, f, "project_qkv(W_K)");
  require_square(w_value, f, "project_qkv(W_V)");
  return Qkv{ops::matmul(g, x, w_query), ops::matmul(g, x, w_key),
             ops::matmul(g, x, w_value)};
}

std::vector<TensorPtr> SelfAttentionParams::parameters() const {
  return {w_query, w_key, w_value};
}

SelfAttentionParams init_self_attention_params(std::size_t feature_dim,
                                               std::mt19937_64& rng) {
  const double stddev = 1.0 / std::sqrt(static_cast<double>(feature_dim));
  SelfAttentionParams p;
  p.w_query = Tensor::randn({feature_dim, feature_dim}, rng, stddev);
  p.w_key = Tensor::randn({feature_dim, feature_dim}, rng, stddev);
  // value projection starts near the identity so the attended output begins
  // as a content-preserving mixture of value rows
  p.w_value = Tensor::randn({feature_dim, feature_dim}, rng, 0.5 * stddev);
  for (std::size_t i = 0; i < feature_dim; ++i) {
    p.w_value->values[i * feature_dim + i] += 1.0;
  }
  return p;
}

AttentionOutput self_attention(Graph& g, const TensorPtr& x, std::size_t valid_len,
                               const SelfAttentionParams& params,
                               const AttentionConfig& config) {
  config.validate();
  require_features(x, config.feature_dim, "self_attention");
  if (valid_len == 0) throw_data("self_attention: all-padding input");
  const std::size_t hd = config.head_dim();
  const double temp = 1.0 / std::sqrt(static_cast<double>(hd));
  Qkv qkv = project_qkv(g, x, params.w_query, params.w_key, params.w_value);
  AttentionOutput out;
  out.direction = Direction::ProteinToDrug;
  std::vector<TensorPtr> heads;
  for (std::size_t h = 0; h < config.num_heads; ++h) {
    auto q = ops::slice_cols(g, qkv.q, h * hd, hd);
    auto k = ops::slice_cols(g, qkv.k, h * hd, hd);
    auto v = ops::slice_cols(g, qkv.v, h * hd, hd);
    auto scores = ops::scale(g, ops::matmul(g, q, ops::transpose(g, k)), temp);
    auto attn = ops::normalize_rows(g, scores, config.inner, valid_len);
    heads.push_back(ops::matmul(g, attn, v));
    auto summary = ops::mean_rows(g, attn, valid_len);
    out.gates_pre.push_back(tensor_values(summary));
    out.gates_post.push_back(tensor_values(summary));
  }
  out.attended = ops::concat_cols(g, heads);
  return out;
}

AttentionOutput decoder_attention(Graph& g, const TensorPtr& x, std::size_t valid_x,
                                  const TensorPtr& counterpart,
                                  std::size_t valid_counterpart,
                                  const SelfAttentionParams& params,
                                  const AttentionConfig& config, Direction direction) {
  config.validate();
  require_features(x, config.feature_dim, "decoder_attention");
  if (counterpart->rank() != 2 || counterpart->shape[1] != x->shape[1]) {
    throw_config("decoder_attention: feature dims differ, " + shape_str(x->shape) +
                 " vs " + shape_str(counterpart->shape));
  }
  if (valid_x == 0 || valid_counterpart == 0) {
    throw_data("decoder_attention: all-padding input");
  }
  const std::size_t hd = config.head_dim();
  const double temp = 1.0 / std::sqrt(static_cast<double>(hd));
  auto q_full = ops::matmul(g, x, params.w_query);
  auto k_full = ops::matmul(g, counterpart, params.w_key);
  auto v_full = ops::matmul(g, counterpart, params.w_value);
  AttentionOutput out;
  out.direction = direction;
  std::vector<TensorPtr> heads;
  for (std::size_t h = 0; h < config.num_heads; ++h) {
    auto q = ops::slice_cols(g, q_full, h * hd, hd);
    auto k = ops::slice_cols(g, k_full, h * hd, hd);
    auto v = ops::slice_cols(g, v_full, h * hd, hd);
    auto scores = ops::scale(g, ops::matmul(g, q, ops::transpose(g, k)), temp);
    auto attn = ops::normalize_rows(g, scores, config.inner, valid_counterpart);
    heads.push_back(ops::matmul(g, attn, v));
    auto summary = ops::mean_rows(g, attn, valid_x);
    out.gates_pre.push_back(tensor_values(summary));
    out.gates_post.push_back(tensor_values(summary));
  }
  out.attended = ops::concat_cols(g, heads);
  return out;
}

std::vector<TensorPtr> gated_attention_vector(Graph& g, const TensorPtr& keys,
                                              std::size_t valid_keys,
                                              const TensorPtr& queries,
                                              std::size_t valid_queries,
                                              const AttentionConfig& config) {
  config.validate();
  require_features(keys, config.feature_dim, "gated_attention_vector(keys)");
  require_features(queries, config.feature_dim, "gated_attention_vector(queries)");
  if (valid_keys == 0 || valid_queries == 0) {
    throw_data("gated_attention_vector: all-padding input");
  }
  const std::size_t hd = config.head_dim();
  const double temp = 1.0 / std::sqrt(static_cast<double>(hd));
  std::vector<TensorPtr> gates;
  for (std::size_t h = 0; h < config.num_heads; ++h) {
    auto q = ops::slice_cols(g, queries, h * hd, hd);
    auto k = ops::slice_cols(g, keys, h * hd, hd);
    auto scores = ops::scale(g, ops::matmul(g, q, ops::transpose(g, k)), temp);
    auto per_query = ops::normalize_rows(g, scores, config.inner, valid_keys);
    gates.push_back(ops::mean_rows(g, per_query, valid_queries));
  }
  return gates;
}

GatedApply gated_attention_apply(Graph& g, const TensorPtr& gate_scores,
                                 std::size_t valid_len, const TensorPtr& values,
                                 const AttentionConfig& config) {
  if (gate_scores->rank() != 1) {
    throw_dimension("gated_attention_apply: gate must be 1-D, got " +
                    shape_str(gate_scores->shape));
  }
  if (values->rank() != 2 || values->shape[0] != gate_scores->shape[0]) {
    throw_dimension("gated_attention_apply: gate length " +
                    std::to_string(gate_scores->shape[0]) + " does not match values " +
                    shape_str(values->shape));
  }
  const std::size_t len = gate_scores->shape[0];
  auto row = ops::reshape(g, gate_scores, {1, len});
  auto normalized = ops::normalize_rows(g, row, config.outer, valid_len);
  auto gate = ops::reshape(g, normalized, {len});
  auto gate_col = ops::reshape(g, normalized, {len, 1});
  GatedApply result;
  result.gated = ops::mul(g, values, gate_col);
  result.gate = gate;
  return result;
}

std::vector<TensorPtr> DirectionParams::parameters() const {
  return {ln_own_gain, ln_own_bias, ln_cp_gain, ln_cp_bias,
          w_query,     w_key,       w_value,    w_out};
}

DirectionParams init_direction_params(std::size_t feature_dim, std::mt19937_64& rng) {
  const double stddev = 1.0 / std::sqrt(static_cast<double>(feature_dim));
  DirectionParams p;
  p.ln_own_gain = Tensor::full({feature_dim}, 1.0, true);
  p.ln_own_bias = Tensor::zeros({feature_dim}, true);
  p.ln_cp_gain = Tensor::full({feature_dim}, 1.0, true);
  p.ln_cp_bias = Tensor::zeros({feature_dim}, true);
  p.w_query = Tensor::randn({feature_dim, feature_dim}, rng, stddev);
  p.w_key = Tensor::randn({feature_dim, feature_dim}, rng, stddev);
  p.w_value = Tensor::randn({feature_dim, feature_dim}, rng, stddev);
  // Zero output projection: the block starts as an identity passthrough.
  p.w_out = Tensor::zeros({feature_dim, feature_dim}, true);
  return p;
}

std::vector<TensorPtr> GcaParams::parameters() const {
  auto out = drug.parameters();
  auto rest = protein.parameters();
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

GcaParams init_gca_params(std::size_t feature_dim, std::mt19937_64& rng) {
  GcaParams p;
  p.drug = init_direction_params(feature_dim, rng);
  p.protein = init_direction_params(feature_dim, rng);
  return p;
}

namespace {

AttentionOutput attend_one_direction(Graph& g, const TensorPtr& own,
                                     std::size_t valid_own, const TensorPtr& cp,
                                     std::size_t valid_cp,
                                     const DirectionParams& params,
                                     const AttentionConfig& config,
                                     Direction direction) {
  const std::size_t hd = config.head_dim();
  TensorPtr own_in = own;
  TensorPtr cp_in = cp;
  if (config.use_prenorm) {
    own_in = ops::layer_norm(g, own, params.ln_own_gain, params.ln_own_bias);
    cp_in = ops::layer_norm(g, cp, params.ln_cp_gain, params.ln_cp_bias);
  }
  auto keys = ops::matmul(g, own_in, params.w_key);
  auto values = ops::matmul(g, own_in, params.w_value);
  auto queries = ops::matmul(g, cp_in, params.w_query);
  auto gates = gated_attention_vector(g, keys, valid_own, queries, valid_cp, config);

  AttentionOutput out;
  out.direction = direction;
  std::vector<TensorPtr> heads;
  for (std::size_t h = 0; h < config.num_heads; ++h) {
    auto v_head = ops::slice_cols(g, values, h * hd, hd);
    auto applied = gated_attention_apply(g, gates[h], valid_own, v_head, config);
    heads.push_back(applied.gated);
    out.gates_pre.push_back(tensor_values(gates[h]));
    out.gates_post.push_back(tensor_values(applied.gate));
  }
  auto merged = ops::concat_cols(g, heads);
  auto projected = ops::matmul(g, merged, params.w_out);
  out.attended = config.use_residual ? ops::add(g, own, projected) : projected;
  return out;
}

}  // namespace

GcaBlockResult gca_block(Graph& g, const TensorPtr& d, std::size_t valid_d,
                         const TensorPtr& p, std::size_t valid_p,
                         const GcaParams& params, const AttentionConfig& config,
                         bool enable_drug_gate, bool enable_protein_gate) {
  GcaBlockResult result;
  if (enable_drug_gate) {
    result.drug_attention = attend_one_direction(g, d, valid_d, p, valid_p, params.drug,
                                                 config, Direction::ProteinToDrug);
    result.drug_out = result.drug_attention.attended;
  } else {
    result.drug_attention.direction = Direction::ProteinToDrug;
    result.drug_attention.attended = d;
    result.drug_out = d;
  }
  if (enable_protein_gate) {
    result.protein_attention = attend_one_direction(
        g, p, valid_p, d, valid_d, params.protein, config, Direction::DrugToProtein);
    result.protein_out = result.protein_attention.attended;
  } else {
    result.protein_attention.direction = Direction::DrugToProtein;
    result.protein_attention.attended = p;
    result.protein_out = p;
  }
  return result;
}

std::vector<TensorPtr> ApParams::parameters() const { return {u}; }

ApParams init_ap_params(std::size_t feature_dim, std::mt19937_64& rng) {
  ApParams p;
  p.u = Tensor::randn({feature_dim, feature_dim}, rng,
                      1.0 / std::sqrt(static_cast<double>(feature_dim)));
  return p;
}

ApResult attentive_pooling(Graph& g, const TensorPtr& d, std::size_t valid_d,
                           const TensorPtr& p, std::size_t valid_p,
                           const ApParams& params) {
  if (d->rank() != 2 || p->rank() != 2 || d->shape[1] != p->shape[1]) {
    throw_config("attentive_pooling: feature dims differ, " + shape_str(d->shape) +
                 " vs " + shape_str(p->shape));
  }
  require_square(params.u, d->shape[1], "attentive_pooling(U)");
  if (valid_d == 0 || valid_p == 0) throw_data("attentive_pooling: all-padding input");
  const std::size_t ld = d->shape[0], lp = p->shape[0], f = d->shape[1];
  auto scores = ops::tanh(g, ops::matmul(g, ops::matmul(g, d, params.u),
                                         ops::transpose(g, p)));
  auto d_scores = ops::rowmax(g, scores, valid_p);
  auto p_scores = ops::rowmax(g, ops::transpose(g, scores), valid_d);
  auto wd = ops::softmax_rows(g, ops::reshape(g, d_scores, {1, ld}), valid_d);
  auto wp = ops::softmax_rows(g, ops::reshape(g, p_scores, {1, lp}), valid_p);
  ApResult result;
  result.pooled_drug = ops::reshape(g, ops::matmul(g, wd, d), {f});
  result.pooled_protein = ops::reshape(g, ops::matmul(g, wp, p), {f});
  result.drug_weights = wd->values;
  result.protein_weights = wp->values;
  return result;
}

}  // namespace gca
