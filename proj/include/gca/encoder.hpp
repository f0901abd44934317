#pragma once

#include <random>
#include <vector>

#include "gca/ops.hpp"
#include "gca/vocab.hpp"

namespace gca {

// Per-position feature extractor over a token sequence. The embed kind is an
// embedding table only; the cnn kind stacks sequence-wise convolutions with
// relu on top of the embedding.
struct EncoderConfig {
  enum class Kind { Embed, Cnn };
  Kind kind = Kind::Embed;
  std::size_t embed_dim = 128;
  std::vector<std::size_t> conv_channels;  // output channels per layer
  std::vector<std::size_t> conv_widths;    // odd kernel widths per layer

  std::size_t feature_dim() const;
  void validate() const;
};

struct EncoderParams {
  TensorPtr embedding;  // [vocab x embed_dim]
  std::vector<TensorPtr> kernels;
  std::vector<TensorPtr> biases;

  std::vector<TensorPtr> parameters() const;
};

EncoderParams init_encoder_params(const EncoderConfig& config, std::size_t vocab_size,
                                  std::mt19937_64& rng);

// -> [sequence length x feature_dim]; padding positions are carried through
// and masked downstream.
TensorPtr encode(Graph& g, const TokenSequence& seq, const EncoderConfig& config,
                 const EncoderParams& params);

}  // namespace gca
