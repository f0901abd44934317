#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gca/data.hpp"
#include "gca/model.hpp"

namespace gca {

// Flat key=value configuration. Every key has a default; unknown keys are
// hard errors. The canonical text (fixed key order) is embedded in
// checkpoints and hashed into CSV/JSON output headers.
struct RunConfig {
  // model
  std::string encoder = "embed";  // embed | cnn
  std::size_t embed_dim = 128;
  std::vector<std::size_t> conv_channels_drug = {32, 64, 96};
  std::vector<std::size_t> conv_widths_drug = {5, 7, 9};
  std::vector<std::size_t> conv_channels_protein = {32, 64, 96};
  std::vector<std::size_t> conv_widths_protein = {7, 9, 11};
  std::size_t max_len_drug = 100;
  std::size_t max_len_protein = 1000;
  std::size_t drug_vocab_size = 0;     // 0 = derive from the training data
  std::size_t protein_vocab_size = 0;  // 0 = derive from the training data
  std::size_t num_heads = 2;
  std::string inner_normalizer = "softmax";  // softmax | sparsemax
  std::string outer_normalizer = "softmax";
  bool use_residual = true;
  bool use_prenorm = true;
  std::string interaction = "gca";  // none | gca | decoder | ap
  bool disable_drug_attention = false;
  bool disable_target_attention = false;
  std::size_t head_hidden = 256;
  bool match_params = false;  // widen the head to match a gca reference
  std::string pooling = "max";  // max | mean

  // training
  double lr = 5e-4;
  std::size_t batch_size = 32;
  std::size_t epochs = 100;
  std::uint64_t seed = 1;
  double test_fraction = 1.0 / 6.0;

  // synthetic generation
  std::size_t synth_n_drugs = 200;
  std::size_t synth_n_targets = 50;
  std::size_t synth_drug_alphabet = 8;
  std::size_t synth_protein_alphabet = 20;
  std::size_t synth_drug_len_min = 16;
  std::size_t synth_drug_len_max = 24;
  std::size_t synth_protein_len_min = 40;
  std::size_t synth_protein_len_max = 60;
  std::string synth_motifs = "ZZZ:zzz:2.0,JJJ:jjj:1.5";  // drug:protein:bonus list
  double synth_motif_prob = 0.5;
  double synth_base = 5.0;
  double synth_sigma = 0.3;
  double synth_pair_fraction = 1.0;
};

// Single-key assignment; throws a config error for unknown keys or
// unparseable values.
void apply_key_value(RunConfig& config, const std::string& key, const std::string& value);

// `key=value` lines; blank lines and lines starting with '#' are skipped.
RunConfig parse_config_file(const std::string& path);
RunConfig parse_config_text(const std::string& text);

// Repeated `key=value` override strings (CLI `--set`).
void apply_overrides(RunConfig& config, const std::vector<std::string>& overrides);

std::string canonical_text(const RunConfig& config);
std::uint64_t config_hash(const RunConfig& config);
std::string config_hash_hex(const RunConfig& config);

ModelConfig to_model_config(const RunConfig& config);
TrainConfig to_train_config(const RunConfig& config);
SyntheticSpec to_synthetic_spec(const RunConfig& config);

// Reads a checkpoint, rebuilds the model from its embedded config, and
// installs the stored parameters. The embedded config is returned through
// `out` when non-null.
DtiModel load_model(const std::string& path, RunConfig* out = nullptr);

// Vocabulary file names derived from a checkpoint path.
std::string drug_vocab_path(const std::string& checkpoint_path);
std::string protein_vocab_path(const std::string& checkpoint_path);

}  // namespace gca
