#include "gca/encoder.hpp"

#include <cmath>

namespace gca {

std::size_t EncoderConfig::feature_dim() const {
  if (kind == Kind::Embed || conv_channels.empty()) return embed_dim;
  return conv_channels.back();
}

void EncoderConfig::validate() const {
  if (embed_dim == 0) throw_config("encoder: embed_dim must be positive");
  if (kind == Kind::Cnn) {
    if (conv_channels.empty()) throw_config("encoder: cnn kind needs at least one conv layer");
    if (conv_channels.size() != conv_widths.size()) {
      throw_config("encoder: conv_channels and conv_widths must have the same length");
    }
    for (std::size_t c : conv_channels) {
      if (c == 0) throw_config("encoder: conv channel counts must be positive");
    }
    for (std::size_t w : conv_widths) {
      if (w % 2 == 0 || w == 0) {
        throw_config("encoder: kernel widths must be odd, got " + std::to_string(w));
      }
    }
  }
}

std::vector<TensorPtr> EncoderParams::parameters() const {
  std::vector<TensorPtr> out{embedding};
  for (std::size_t i = 0; i < kernels.size(); ++i) {
    out.push_back(kernels[i]);
    out.push_back(biases[i]);
  }
  return out;
}

EncoderParams init_encoder_params(const EncoderConfig& config, std::size_t vocab_size,
                                  std::mt19937_64& rng) {
  config.validate();
  if (vocab_size < 2) throw_config("encoder: vocabulary size must be >= 2");
  EncoderParams params;
  params.embedding = Tensor::randn({vocab_size, config.embed_dim}, rng, 0.5);
  if (config.kind == EncoderConfig::Kind::Cnn) {
    std::size_t c_in = config.embed_dim;
    for (std::size_t layer = 0; layer < config.conv_channels.size(); ++layer) {
      const std::size_t w = config.conv_widths[layer];
      const std::size_t c_out = config.conv_channels[layer];
      const double stddev = std::sqrt(2.0 / static_cast<double>(w * c_in));
      params.kernels.push_back(Tensor::randn({w, c_in, c_out}, rng, stddev));
      params.biases.push_back(Tensor::zeros({c_out}, true));
      c_in = c_out;
    }
  }
  return params;
}

TensorPtr encode(Graph& g, const TokenSequence& seq, const EncoderConfig& config,
                 const EncoderParams& params) {
  if (!params.embedding) throw_config("encode: missing embedding table");
  if (params.embedding->shape[1] != config.embed_dim) {
    throw_config("encode: embedding width " + std::to_string(params.embedding->shape[1]) +
                 " does not match configured embed_dim " + std::to_string(config.embed_dim));
  }
  TensorPtr h = ops::embedding_lookup(g, params.embedding, seq.ids);
  if (config.kind == EncoderConfig::Kind::Cnn) {
    if (params.kernels.size() != config.conv_channels.size()) {
      throw_config("encode: parameter layer count " + std::to_string(params.kernels.size()) +
                   " does not match configured " + std::to_string(config.conv_channels.size()));
    }
    for (std::size_t layer = 0; layer < params.kernels.size(); ++layer) {
      h = ops::conv1d(g, h, params.kernels[layer], params.biases[layer]);
      h = ops::relu(g, h);
    }
  }
  return h;
}

}  // namespace gca
