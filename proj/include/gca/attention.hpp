#pragma once

#include <random>
#include <vector>

#include "gca/ops.hpp"

namespace gca {

// p->d gates drug positions using protein queries; d->p is the mirror.
enum class Direction { ProteinToDrug, DrugToProtein };

struct AttentionConfig {
  std::size_t num_heads = 2;
  std::size_t feature_dim = 0;
  ops::Normalizer inner = ops::Normalizer::Softmax;  // score normalization
  ops::Normalizer outer = ops::Normalizer::Softmax;  // gate normalization
  bool use_residual = true;
  bool use_prenorm = true;

  std::size_t head_dim() const;
  void validate() const;
};

struct Qkv {
  TensorPtr q, k, v;
};

Qkv project_qkv(Graph& g, const TensorPtr& x, const TensorPtr& w_query,
                const TensorPtr& w_key, const TensorPtr& w_value);

// Attended features plus the per-head context-level attention vectors kept
// for interpretability. For the matrix attentions (self/decoder) the gate is
// the query-averaged attention distribution; both pre and post then coincide.
// Post-normalization gates over valid positions sum to 1; padding positions
// carry exactly 0.
struct AttentionOutput {
  TensorPtr attended;
  Direction direction = Direction::ProteinToDrug;
  std::vector<std::vector<double>> gates_pre;   // per head
  std::vector<std::vector<double>> gates_post;  // per head
};

struct SelfAttentionParams {
  TensorPtr w_query, w_key, w_value;
  std::vector<TensorPtr> parameters() const;
};
SelfAttentionParams init_self_attention_params(std::size_t feature_dim,
                                               std::mt19937_64& rng);

AttentionOutput self_attention(Graph& g, const TensorPtr& x, std::size_t valid_len,
                               const SelfAttentionParams& params,
                               const AttentionConfig& config);

// Queries from x, keys and values from the counterpart; the output follows
// x's length while mixing counterpart value rows. Gates index counterpart
// positions.
AttentionOutput decoder_attention(Graph& g, const TensorPtr& x, std::size_t valid_x,
                                  const TensorPtr& counterpart,
                                  std::size_t valid_counterpart,
                                  const SelfAttentionParams& params,
                                  const AttentionConfig& config, Direction direction);

// Context-level gate construction: per head, normalize each counterpart
// query's score row over the key positions, then average the distributions
// over the valid counterpart queries. Returns one [L_keys] vector per head,
// pre outer normalization.
std::vector<TensorPtr> gated_attention_vector(Graph& g, const TensorPtr& keys,
                                              std::size_t valid_keys,
                                              const TensorPtr& queries,
                                              std::size_t valid_queries,
                                              const AttentionConfig& config);

struct GatedApply {
  TensorPtr gated;  // [L x f_head], rows scaled; positions never mix
  TensorPtr gate;   // [L], the outer-normalized weights
};
GatedApply gated_attention_apply(Graph& g, const TensorPtr& gate_scores,
                                 std::size_t valid_len, const TensorPtr& values,
                                 const AttentionConfig& config);

// One direction's parameter set; the two directions of a GCA block are fully
// separate.
struct DirectionParams {
  TensorPtr ln_own_gain, ln_own_bias;  // attended side pre-normalization
  TensorPtr ln_cp_gain, ln_cp_bias;    // counterpart side pre-normalization
  TensorPtr w_query;                   // applied to the counterpart
  TensorPtr w_key, w_value;            // applied to the attended side
  TensorPtr w_out;                     // output projection, zero-initialized
  std::vector<TensorPtr> parameters() const;
};
DirectionParams init_direction_params(std::size_t feature_dim, std::mt19937_64& rng);

struct GcaParams {
  DirectionParams drug;     // produces d' from (d, p)
  DirectionParams protein;  // produces p' from (p, d)
  std::vector<TensorPtr> parameters() const;
};
GcaParams init_gca_params(std::size_t feature_dim, std::mt19937_64& rng);

struct GcaBlockResult {
  TensorPtr drug_out, protein_out;
  AttentionOutput drug_attention, protein_attention;
};

// Full gated cross-attention block. A disabled direction passes its side
// through unchanged with empty gates.
GcaBlockResult gca_block(Graph& g, const TensorPtr& d, std::size_t valid_d,
                         const TensorPtr& p, std::size_t valid_p,
                         const GcaParams& params, const AttentionConfig& config,
                         bool enable_drug_gate = true,
                         bool enable_protein_gate = true);

struct ApParams {
  TensorPtr u;  // bilinear form [f x f]
  std::vector<TensorPtr> parameters() const;
};
ApParams init_ap_params(std::size_t feature_dim, std::mt19937_64& rng);

struct ApResult {
  TensorPtr pooled_drug, pooled_protein;  // [f]
  std::vector<double> drug_weights, protein_weights;
};

// Attentive-pooling baseline: G = tanh(d U p^T); row/column maxima are
// softmax-normalized into pooling weights for each side.
ApResult attentive_pooling(Graph& g, const TensorPtr& d, std::size_t valid_d,
                           const TensorPtr& p, std::size_t valid_p,
                           const ApParams& params);

}  // namespace gca
