#include "gca/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace gca {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& value, const std::string& key) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw_config("config: key '" + key + "' expects true/false, got '" + value + "'");
}

std::size_t parse_size(const std::string& value, const std::string& key) {
  try {
    std::size_t consumed = 0;
    const unsigned long long v = std::stoull(value, &consumed);
    if (consumed != value.size()) throw std::invalid_argument(value);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw_config("config: key '" + key + "' expects a non-negative integer, got '" + value + "'");
  }
}

double parse_double(const std::string& value, const std::string& key) {
  try {
    std::size_t consumed = 0;
    const double v = std::stod(value, &consumed);
    if (consumed != value.size() || !std::isfinite(v)) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw_config("config: key '" + key + "' expects a finite number, got '" + value + "'");
  }
}

std::vector<std::size_t> parse_size_list(const std::string& value, const std::string& key) {
  std::vector<std::size_t> out;
  std::stringstream ss(value);
  std::string token;
  while (std::getline(ss, token, ',')) {
    token = trim(token);
    if (token.empty()) continue;
    out.push_back(parse_size(token, key));
  }
  if (out.empty()) throw_config("config: key '" + key + "' expects a comma-separated list");
  return out;
}

std::string join_sizes(const std::vector<std::size_t>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) os << ',';
    os << v[i];
  }
  return os.str();
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void check_enum(const std::string& value, std::initializer_list<const char*> allowed,
                const std::string& key) {
  for (const char* a : allowed) {
    if (value == a) return;
  }
  std::string options;
  for (const char* a : allowed) {
    if (!options.empty()) options += "|";
    options += a;
  }
  throw_config("config: key '" + key + "' expects one of " + options + ", got '" + value + "'");
}

}  // namespace

void apply_key_value(RunConfig& c, const std::string& key, const std::string& value) {
  if (key == "encoder") {
    check_enum(value, {"embed", "cnn"}, key);
    c.encoder = value;
  } else if (key == "embed_dim") {
    c.embed_dim = parse_size(value, key);
  } else if (key == "conv_channels_drug") {
    c.conv_channels_drug = parse_size_list(value, key);
  } else if (key == "conv_widths_drug") {
    c.conv_widths_drug = parse_size_list(value, key);
  } else if (key == "conv_channels_protein") {
    c.conv_channels_protein = parse_size_list(value, key);
  } else if (key == "conv_widths_protein") {
    c.conv_widths_protein = parse_size_list(value, key);
  } else if (key == "max_len_drug") {
    c.max_len_drug = parse_size(value, key);
  } else if (key == "max_len_protein") {
    c.max_len_protein = parse_size(value, key);
  } else if (key == "drug_vocab_size") {
    c.drug_vocab_size = parse_size(value, key);
  } else if (key == "protein_vocab_size") {
    c.protein_vocab_size = parse_size(value, key);
  } else if (key == "num_heads") {
    c.num_heads = parse_size(value, key);
  } else if (key == "inner_normalizer") {
    check_enum(value, {"softmax", "sparsemax"}, key);
    c.inner_normalizer = value;
  } else if (key == "outer_normalizer") {
    check_enum(value, {"softmax", "sparsemax"}, key);
    c.outer_normalizer = value;
  } else if (key == "use_residual") {
    c.use_residual = parse_bool(value, key);
  } else if (key == "use_prenorm") {
    c.use_prenorm = parse_bool(value, key);
  } else if (key == "interaction") {
    check_enum(value, {"none", "gca", "decoder", "ap"}, key);
    c.interaction = value;
  } else if (key == "disable_drug_attention") {
    c.disable_drug_attention = parse_bool(value, key);
  } else if (key == "disable_target_attention") {
    c.disable_target_attention = parse_bool(value, key);
  } else if (key == "head_hidden") {
    c.head_hidden = parse_size(value, key);
  } else if (key == "match_params") {
    c.match_params = parse_bool(value, key);
  } else if (key == "pooling") {
    check_enum(value, {"max", "mean"}, key);
    c.pooling = value;
  } else if (key == "lr") {
    c.lr = parse_double(value, key);
  } else if (key == "batch_size") {
    c.batch_size = parse_size(value, key);
  } else if (key == "epochs") {
    c.epochs = parse_size(value, key);
  } else if (key == "seed") {
    c.seed = parse_size(value, key);
  } else if (key == "test_fraction") {
    c.test_fraction = parse_double(value, key);
  } else if (key == "synth_n_drugs") {
    c.synth_n_drugs = parse_size(value, key);
  } else if (key == "synth_n_targets") {
    c.synth_n_targets = parse_size(value, key);
  } else if (key == "synth_drug_alphabet") {
    c.synth_drug_alphabet = parse_size(value, key);
  } else if (key == "synth_protein_alphabet") {
    c.synth_protein_alphabet = parse_size(value, key);
  } else if (key == "synth_drug_len_min") {
    c.synth_drug_len_min = parse_size(value, key);
  } else if (key == "synth_drug_len_max") {
    c.synth_drug_len_max = parse_size(value, key);
  } else if (key == "synth_protein_len_min") {
    c.synth_protein_len_min = parse_size(value, key);
  } else if (key == "synth_protein_len_max") {
    c.synth_protein_len_max = parse_size(value, key);
  } else if (key == "synth_motifs") {
    c.synth_motifs = value;
  } else if (key == "synth_motif_prob") {
    c.synth_motif_prob = parse_double(value, key);
  } else if (key == "synth_base") {
    c.synth_base = parse_double(value, key);
  } else if (key == "synth_sigma") {
    c.synth_sigma = parse_double(value, key);
  } else if (key == "synth_pair_fraction") {
    c.synth_pair_fraction = parse_double(value, key);
  } else {
    throw_config("config: unknown key '" + key + "'");
  }
}

namespace {

RunConfig parse_lines(std::istream& in, const std::string& origin) {
  RunConfig config;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw_config("config: " + origin + " line " + std::to_string(line_no) +
                   ": expected key=value");
    }
    apply_key_value(config, trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
  }
  return config;
}

}  // namespace

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_config("config: cannot open " + path);
  return parse_lines(in, path);
}

RunConfig parse_config_text(const std::string& text) {
  std::istringstream in(text);
  return parse_lines(in, "<embedded>");
}

void apply_overrides(RunConfig& config, const std::vector<std::string>& overrides) {
  for (const auto& item : overrides) {
    const std::size_t eq = item.find('=');
    if (eq == std::string::npos) {
      throw_config("config: override '" + item + "' is not key=value");
    }
    apply_key_value(config, trim(item.substr(0, eq)), trim(item.substr(eq + 1)));
  }
}

std::string canonical_text(const RunConfig& c) {
  std::ostringstream os;
  os << "encoder=" << c.encoder << '\n';
  os << "embed_dim=" << c.embed_dim << '\n';
  os << "conv_channels_drug=" << join_sizes(c.conv_channels_drug) << '\n';
  os << "conv_widths_drug=" << join_sizes(c.conv_widths_drug) << '\n';
  os << "conv_channels_protein=" << join_sizes(c.conv_channels_protein) << '\n';
  os << "conv_widths_protein=" << join_sizes(c.conv_widths_protein) << '\n';
  os << "max_len_drug=" << c.max_len_drug << '\n';
  os << "max_len_protein=" << c.max_len_protein << '\n';
  os << "drug_vocab_size=" << c.drug_vocab_size << '\n';
  os << "protein_vocab_size=" << c.protein_vocab_size << '\n';
  os << "num_heads=" << c.num_heads << '\n';
  os << "inner_normalizer=" << c.inner_normalizer << '\n';
  os << "outer_normalizer=" << c.outer_normalizer << '\n';
  os << "use_residual=" << (c.use_residual ? "true" : "false") << '\n';
  os << "use_prenorm=" << (c.use_prenorm ? "true" : "false") << '\n';
  os << "interaction=" << c.interaction << '\n';
  os << "disable_drug_attention=" << (c.disable_drug_attention ? "true" : "false") << '\n';
  os << "disable_target_attention=" << (c.disable_target_attention ? "true" : "false") << '\n';
  os << "head_hidden=" << c.head_hidden << '\n';
  os << "match_params=" << (c.match_params ? "true" : "false") << '\n';
  os << "pooling=" << c.pooling << '\n';
  os << "lr=" << fmt_double(c.lr) << '\n';
  os << "batch_size=" << c.batch_size << '\n';
  os << "epochs=" << c.epochs << '\n';
  os << "seed=" << c.seed << '\n';
  os << "test_fraction=" << fmt_double(c.test_fraction) << '\n';
  os << "synth_n_drugs=" << c.synth_n_drugs << '\n';
  os << "synth_n_targets=" << c.synth_n_targets << '\n';
  os << "synth_drug_alphabet=" << c.synth_drug_alphabet << '\n';
  os << "synth_protein_alphabet=" << c.synth_protein_alphabet << '\n';
  os << "synth_drug_len_min=" << c.synth_drug_len_min << '\n';
  os << "synth_drug_len_max=" << c.synth_drug_len_max << '\n';
  os << "synth_protein_len_min=" << c.synth_protein_len_min << '\n';
  os << "synth_protein_len_max=" << c.synth_protein_len_max << '\n';
  os << "synth_motifs=" << c.synth_motifs << '\n';
  os << "synth_motif_prob=" << fmt_double(c.synth_motif_prob) << '\n';
  os << "synth_base=" << fmt_double(c.synth_base) << '\n';
  os << "synth_sigma=" << fmt_double(c.synth_sigma) << '\n';
  os << "synth_pair_fraction=" << fmt_double(c.synth_pair_fraction) << '\n';
  return os.str();
}

std::uint64_t config_hash(const RunConfig& config) {
  const std::string text = canonical_text(config);
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a
  for (unsigned char byte : text) {
    h ^= byte;
    h *= 1099511628211ull;
  }
  return h;
}

std::string config_hash_hex(const RunConfig& config) {
  std::ostringstream os;
  os << std::hex << config_hash(config);
  return os.str();
}

ModelConfig to_model_config(const RunConfig& c) {
  ModelConfig m;
  const auto kind = c.encoder == "cnn" ? EncoderConfig::Kind::Cnn : EncoderConfig::Kind::Embed;
  m.drug_encoder.kind = kind;
  m.drug_encoder.embed_dim = c.embed_dim;
  m.protein_encoder.kind = kind;
  m.protein_encoder.embed_dim = c.embed_dim;
  if (kind == EncoderConfig::Kind::Cnn) {
    m.drug_encoder.conv_channels = c.conv_channels_drug;
    m.drug_encoder.conv_widths = c.conv_widths_drug;
    m.protein_encoder.conv_channels = c.conv_channels_protein;
    m.protein_encoder.conv_widths = c.conv_widths_protein;
    if (!c.conv_channels_drug.empty() && !c.conv_channels_protein.empty() &&
        c.conv_channels_drug.back() != c.conv_channels_protein.back()) {
      throw_config("config: final conv channel counts must match across modalities");
    }
  }
  m.max_len_drug = c.max_len_drug;
  m.max_len_protein = c.max_len_protein;
  m.drug_vocab = c.drug_vocab_size;
  m.protein_vocab = c.protein_vocab_size;
  m.attention.num_heads = c.num_heads;
  m.attention.inner = c.inner_normalizer == "sparsemax" ? ops::Normalizer::Sparsemax
                                                        : ops::Normalizer::Softmax;
  m.attention.outer = c.outer_normalizer == "sparsemax" ? ops::Normalizer::Sparsemax
                                                        : ops::Normalizer::Softmax;
  m.attention.use_residual = c.use_residual;
  m.attention.use_prenorm = c.use_prenorm;
  m.attention.feature_dim = m.drug_encoder.feature_dim();
  if (c.interaction == "none") {
    m.mode = InteractionMode::None;
  } else if (c.interaction == "gca") {
    m.mode = InteractionMode::Gca;
  } else if (c.interaction == "decoder") {
    m.mode = InteractionMode::Decoder;
  } else {
    m.mode = InteractionMode::Ap;
  }
  m.disable_drug_attention = c.disable_drug_attention;
  m.disable_target_attention = c.disable_target_attention;
  m.head_hidden = c.head_hidden;
  m.pooling = c.pooling == "mean" ? ops::PoolMode::Mean : ops::PoolMode::Max;
  return m;
}

TrainConfig to_train_config(const RunConfig& c) {
  TrainConfig t;
  t.lr = c.lr;
  t.batch_size = c.batch_size;
  t.epochs = c.epochs;
  t.seed = c.seed;
  return t;
}

SyntheticSpec to_synthetic_spec(const RunConfig& c) {
  SyntheticSpec s;
  s.n_drugs = c.synth_n_drugs;
  s.n_targets = c.synth_n_targets;
  s.drug_alphabet = c.synth_drug_alphabet;
  s.protein_alphabet = c.synth_protein_alphabet;
  s.drug_len_min = c.synth_drug_len_min;
  s.drug_len_max = c.synth_drug_len_max;
  s.protein_len_min = c.synth_protein_len_min;
  s.protein_len_max = c.synth_protein_len_max;
  s.motifs.clear();
  std::stringstream ss(c.synth_motifs);
  std::string token;
  while (std::getline(ss, token, ',')) {
    token = trim(token);
    if (token.empty()) continue;
    const std::size_t c1 = token.find(':');
    const std::size_t c2 = token.rfind(':');
    if (c1 == std::string::npos || c2 == c1) {
      throw_config("config: synth_motifs entry '" + token + "' is not drug:protein:bonus");
    }
    MotifPair pair;
    pair.drug_motif = token.substr(0, c1);
    pair.protein_motif = token.substr(c1 + 1, c2 - c1 - 1);
    pair.bonus = parse_double(token.substr(c2 + 1), "synth_motifs");
    s.motifs.push_back(std::move(pair));
  }
  s.motif_prob = c.synth_motif_prob;
  s.base_affinity = c.synth_base;
  s.noise_sigma = c.synth_sigma;
  s.pair_fraction = c.synth_pair_fraction;
  s.seed = c.seed;
  return s;
}

DtiModel load_model(const std::string& path, RunConfig* out) {
  RawCheckpoint raw = read_checkpoint(path);
  RunConfig config = parse_config_text(raw.config_text);
  if (config.drug_vocab_size < 2 || config.protein_vocab_size < 2) {
    throw_config("checkpoint: embedded config lacks vocabulary sizes");
  }
  DtiModel model = DtiModel::init(to_model_config(config), config.seed);
  assign_parameters(model, raw.tensors);
  if (out) *out = config;
  return model;
}

std::string drug_vocab_path(const std::string& checkpoint_path) {
  return checkpoint_path + ".drug.vocab";
}

std::string protein_vocab_path(const std::string& checkpoint_path) {
  return checkpoint_path + ".target.vocab";
}

}  // namespace gca
