#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>

#include "gca/attention.hpp"
#include "gca/encoder.hpp"

namespace gca {

enum class InteractionMode { None, Gca, Decoder, Ap };

const char* interaction_name(InteractionMode mode);

struct ModelConfig {
  EncoderConfig drug_encoder, protein_encoder;
  std::size_t max_len_drug = 100, max_len_protein = 1000;
  std::size_t drug_vocab = 0, protein_vocab = 0;
  AttentionConfig attention;
  InteractionMode mode = InteractionMode::Gca;
  bool disable_drug_attention = false;    // ablation: skip the p->d direction
  bool disable_target_attention = false;  // ablation: skip the d->p direction
  std::size_t head_hidden = 256;
  ops::PoolMode pooling = ops::PoolMode::Max;

  std::size_t feature_dim() const;  // shared by both encoders
  void validate() const;
};

struct HeadParams {
  TensorPtr w1, b1, w2, b2;  // [2f x h], [h], [h x 1], [1]
  std::vector<TensorPtr> parameters() const;
};

struct DecoderInteractionParams {
  SelfAttentionParams drug;     // produces d': queries from d, keys/values from p
  SelfAttentionParams protein;  // produces p': the mirror
  std::vector<TensorPtr> parameters() const;
};

struct DtiModel {
  ModelConfig config;
  EncoderParams drug_encoder, protein_encoder;
  GcaParams gca;
  DecoderInteractionParams decoder;
  ApParams ap;
  HeadParams head;

  // Declaration order; this is also the checkpoint tensor order.
  std::vector<TensorPtr> parameters() const;
  // The interaction function's parameters: interaction block plus head.
  std::vector<TensorPtr> interaction_parameters() const;

  DtiModel clone() const;  // deep value copy (parameter snapshot)

  static DtiModel init(const ModelConfig& config, std::uint64_t seed);
};

std::size_t parameter_count(const DtiModel& model, bool interaction_only = false);

// Head hidden width that brings `target`'s interaction parameter count
// closest to `reference`'s (the fairness rule for baseline comparisons).
std::size_t matched_head_hidden(const ModelConfig& reference, const ModelConfig& target);

struct TrainExample {
  TokenSequence drug, protein;
  double affinity = 0.0;
};

struct ForwardResult {
  TensorPtr prediction;  // scalar
  std::optional<AttentionOutput> drug_attention, protein_attention;  // mode=gca
  TensorPtr pooled_drug_in, pooled_protein_in;    // pooled encoder features
  TensorPtr pooled_drug_out, pooled_protein_out;  // pooled post-interaction features
};

ForwardResult forward(Graph& g, const DtiModel& model, const TokenSequence& drug,
                      const TokenSequence& protein);

struct TrainConfig {
  double lr = 5e-4;
  std::size_t batch_size = 32;
  std::size_t epochs = 100;
  std::uint64_t seed = 1;
  double beta1 = 0.9, beta2 = 0.999, epsilon = 1e-8;
  // Set the output bias to the training-target mean before the first epoch.
  bool warm_start_output_bias = true;
};

struct EpochStats {
  std::size_t epoch = 0;
  double train_mse = 0.0;
  double val_mse = std::numeric_limits<double>::quiet_NaN();
  double val_cindex = std::numeric_limits<double>::quiet_NaN();
};

struct TrainLog {
  std::vector<EpochStats> epochs;
};

using EpochCallback = std::function<void(const DtiModel&, const EpochStats&)>;

// Minimizes MSE with Adam. Deterministic given the seed. Aborts with a
// numeric error if the loss turns NaN.
TrainLog train(DtiModel& model, const std::vector<TrainExample>& train_set,
               const std::vector<TrainExample>* val_set, const TrainConfig& config,
               const EpochCallback& on_epoch = {});

struct RankedPosition {
  std::size_t position = 0;
  double weight = 0.0;
};

struct AttentionRanking {
  // Per head, valid positions sorted by descending post-normalization gate
  // weight; ties break toward the lower position index.
  std::vector<std::vector<RankedPosition>> drug_heads;
  std::vector<std::vector<RankedPosition>> protein_heads;
  double prediction = 0.0;
};

AttentionRanking extract_attention(const DtiModel& model, const TokenSequence& drug,
                                   const TokenSequence& protein);

// Checkpoint layout: magic "GCA1", u64 length + canonical config text,
// u32 tensor count, then per tensor u32 rank, u64 dims, little-endian f64
// payload. Reload is bit-exact.
void save_checkpoint(const DtiModel& model, const std::string& config_text,
                     const std::string& path);

struct RawCheckpoint {
  std::string config_text;
  std::vector<TensorPtr> tensors;
};
RawCheckpoint read_checkpoint(const std::string& path);

// Copies checkpoint tensors into the model's parameters, validating shapes.
void assign_parameters(DtiModel& model, const std::vector<TensorPtr>& tensors);

}  // namespace gca
