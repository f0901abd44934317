#include "gca/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "gca/metrics.hpp"
#include "gca/optim.hpp"

namespace gca {

const char* interaction_name(InteractionMode mode) {
  switch (mode) {
    case InteractionMode::None: return "none";
    case InteractionMode::Gca: return "gca";
    case InteractionMode::Decoder: return "decoder";
    case InteractionMode::Ap: return "ap";
  }
  return "?";
}

std::size_t ModelConfig::feature_dim() const { return drug_encoder.feature_dim(); }

void ModelConfig::validate() const {
  drug_encoder.validate();
  protein_encoder.validate();
  if (drug_encoder.feature_dim() != protein_encoder.feature_dim()) {
    throw_config("model: encoder feature dims differ, " +
                 std::to_string(drug_encoder.feature_dim()) + " vs " +
                 std::to_string(protein_encoder.feature_dim()));
  }
  if (max_len_drug == 0 || max_len_protein == 0) {
    throw_config("model: max lengths must be positive");
  }
  if (drug_vocab < 2 || protein_vocab < 2) {
    throw_config("model: vocabulary sizes must be >= 2 (reserved pad/unk)");
  }
  if (head_hidden == 0) throw_config("model: head_hidden must be positive");
  if (mode == InteractionMode::Gca || mode == InteractionMode::Decoder) {
    AttentionConfig attn = attention;
    attn.feature_dim = feature_dim();
    attn.validate();
  }
}

std::vector<TensorPtr> HeadParams::parameters() const { return {w1, b1, w2, b2}; }

std::vector<TensorPtr> DecoderInteractionParams::parameters() const {
  auto out = drug.parameters();
  auto rest = protein.parameters();
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

std::vector<TensorPtr> DtiModel::parameters() const {
  std::vector<TensorPtr> out = drug_encoder.parameters();
  auto prot = protein_encoder.parameters();
  out.insert(out.end(), prot.begin(), prot.end());
  auto inter = interaction_parameters();
  out.insert(out.end(), inter.begin(), inter.end());
  return out;
}

std::vector<TensorPtr> DtiModel::interaction_parameters() const {
  std::vector<TensorPtr> out;
  switch (config.mode) {
    case InteractionMode::None: break;
    case InteractionMode::Gca: out = gca.parameters(); break;
    case InteractionMode::Decoder: out = decoder.parameters(); break;
    case InteractionMode::Ap: out = ap.parameters(); break;
  }
  auto h = head.parameters();
  out.insert(out.end(), h.begin(), h.end());
  return out;
}

DtiModel DtiModel::clone() const {
  DtiModel copy = *this;
  auto deep = [](TensorPtr& t) {
    if (t) t = t->clone();
  };
  deep(copy.drug_encoder.embedding);
  for (auto& t : copy.drug_encoder.kernels) deep(t);
  for (auto& t : copy.drug_encoder.biases) deep(t);
  deep(copy.protein_encoder.embedding);
  for (auto& t : copy.protein_encoder.kernels) deep(t);
  for (auto& t : copy.protein_encoder.biases) deep(t);
  auto deep_dir = [&](DirectionParams& dp) {
    deep(dp.ln_own_gain);
    deep(dp.ln_own_bias);
    deep(dp.ln_cp_gain);
    deep(dp.ln_cp_bias);
    deep(dp.w_query);
    deep(dp.w_key);
    deep(dp.w_value);
    deep(dp.w_out);
  };
  deep_dir(copy.gca.drug);
  deep_dir(copy.gca.protein);
  auto deep_self = [&](SelfAttentionParams& sp) {
    deep(sp.w_query);
    deep(sp.w_key);
    deep(sp.w_value);
  };
  deep_self(copy.decoder.drug);
  deep_self(copy.decoder.protein);
  deep(copy.ap.u);
  deep(copy.head.w1);
  deep(copy.head.b1);
  deep(copy.head.w2);
  deep(copy.head.b2);
  return copy;
}

DtiModel DtiModel::init(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  DtiModel model;
  model.config = config;
  model.config.attention.feature_dim = config.feature_dim();
  std::mt19937_64 rng(seed);
  model.drug_encoder = init_encoder_params(config.drug_encoder, config.drug_vocab, rng);
  model.protein_encoder =
      init_encoder_params(config.protein_encoder, config.protein_vocab, rng);
  const std::size_t f = config.feature_dim();
  switch (config.mode) {
    case InteractionMode::None: break;
    case InteractionMode::Gca: model.gca = init_gca_params(f, rng); break;
    case InteractionMode::Decoder:
      model.decoder.drug = init_self_attention_params(f, rng);
      model.decoder.protein = init_self_attention_params(f, rng);
      break;
    case InteractionMode::Ap: model.ap = init_ap_params(f, rng); break;
  }
  const std::size_t h = config.head_hidden;
  model.head.w1 = Tensor::randn({2 * f, h}, rng, std::sqrt(2.0 / static_cast<double>(2 * f)));
  model.head.b1 = Tensor::zeros({h}, true);
  model.head.w2 = Tensor::randn({h, 1}, rng, std::sqrt(1.0 / static_cast<double>(h)));
  model.head.b2 = Tensor::zeros({1}, true);
  return model;
}

std::size_t parameter_count(const DtiModel& model, bool interaction_only) {
  const auto params =
      interaction_only ? model.interaction_parameters() : model.parameters();
  std::size_t count = 0;
  for (const auto& p : params) count += p->size();
  return count;
}

namespace {

std::size_t interaction_base_count(const ModelConfig& config) {
  const std::size_t f = config.feature_dim();
  switch (config.mode) {
    case InteractionMode::None: return 0;
    case InteractionMode::Gca: return 2 * (4 * f + 4 * f * f);
    case InteractionMode::Decoder: return 2 * (3 * f * f);
    case InteractionMode::Ap: return f * f;
  }
  return 0;
}

std::size_t head_count(std::size_t f, std::size_t hidden) {
  return 2 * f * hidden + hidden + hidden + 1;
}

}  // namespace

std::size_t matched_head_hidden(const ModelConfig& reference, const ModelConfig& target) {
  const std::size_t ref_total =
      interaction_base_count(reference) + head_count(reference.feature_dim(), reference.head_hidden);
  const std::size_t target_base = interaction_base_count(target);
  const std::size_t f = target.feature_dim();
  if (ref_total <= target_base + 1) return 1;
  const double per_hidden = static_cast<double>(2 * f + 2);
  const double want = static_cast<double>(ref_total - target_base - 1) / per_hidden;
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(want)));
}

ForwardResult forward(Graph& g, const DtiModel& model, const TokenSequence& drug,
                      const TokenSequence& protein) {
  const ModelConfig& cfg = model.config;
  if (drug.length() != cfg.max_len_drug || protein.length() != cfg.max_len_protein) {
    throw_config("forward: tokenized lengths " + std::to_string(drug.length()) + "/" +
                 std::to_string(protein.length()) + " do not match configured " +
                 std::to_string(cfg.max_len_drug) + "/" + std::to_string(cfg.max_len_protein));
  }
  if (drug.valid_len == 0 || protein.valid_len == 0) {
    throw_data("forward: all-padding input sequence");
  }
  AttentionConfig attn = cfg.attention;
  attn.feature_dim = cfg.feature_dim();

  ForwardResult result;
  auto d = encode(g, drug, cfg.drug_encoder, model.drug_encoder);
  auto p = encode(g, protein, cfg.protein_encoder, model.protein_encoder);
  result.pooled_drug_in = ops::pool(g, d, cfg.pooling, drug.valid_len);
  result.pooled_protein_in = ops::pool(g, p, cfg.pooling, protein.valid_len);

  TensorPtr pooled_d, pooled_p;
  switch (cfg.mode) {
    case InteractionMode::None: {
      pooled_d = result.pooled_drug_in;
      pooled_p = result.pooled_protein_in;
      break;
    }
    case InteractionMode::Gca: {
      auto block = gca_block(g, d, drug.valid_len, p, protein.valid_len, model.gca, attn,
                             !cfg.disable_drug_attention, !cfg.disable_target_attention);
      result.drug_attention = block.drug_attention;
      result.protein_attention = block.protein_attention;
      pooled_d = ops::pool(g, block.drug_out, cfg.pooling, drug.valid_len);
      pooled_p = ops::pool(g, block.protein_out, cfg.pooling, protein.valid_len);
      break;
    }
    case InteractionMode::Decoder: {
      auto d_att = decoder_attention(g, d, drug.valid_len, p, protein.valid_len,
                                     model.decoder.drug, attn, Direction::ProteinToDrug);
      auto p_att = decoder_attention(g, p, protein.valid_len, d, drug.valid_len,
                                     model.decoder.protein, attn, Direction::DrugToProtein);
      pooled_d = ops::pool(g, d_att.attended, cfg.pooling, drug.valid_len);
      pooled_p = ops::pool(g, p_att.attended, cfg.pooling, protein.valid_len);
      break;
    }
    case InteractionMode::Ap: {
      auto pooled = attentive_pooling(g, d, drug.valid_len, p, protein.valid_len, model.ap);
      pooled_d = pooled.pooled_drug;
      pooled_p = pooled.pooled_protein;
      break;
    }
  }
  result.pooled_drug_out = pooled_d;
  result.pooled_protein_out = pooled_p;

  auto joint = ops::reshape(g, ops::concat(g, pooled_d, pooled_p),
                            {1, pooled_d->size() + pooled_p->size()});
  auto hidden = ops::relu(g, ops::add(g, ops::matmul(g, joint, model.head.w1), model.head.b1));
  auto output = ops::add(g, ops::matmul(g, hidden, model.head.w2), model.head.b2);
  result.prediction = ops::reshape(g, output, {1});
  return result;
}

TrainLog train(DtiModel& model, const std::vector<TrainExample>& train_set,
               const std::vector<TrainExample>* val_set, const TrainConfig& config,
               const EpochCallback& on_epoch) {
  if (train_set.empty()) throw_data("train: empty training set");
  if (config.batch_size == 0) throw_config("train: batch_size must be positive");
  if (config.epochs == 0) throw_config("train: epochs must be positive");
  if (config.lr < 0.0) throw_config("train: learning rate must be >= 0");

  if (config.warm_start_output_bias) {
    double mean = 0.0;
    for (const auto& ex : train_set) mean += ex.affinity;
    model.head.b2->values[0] = mean / static_cast<double>(train_set.size());
  }

  auto params = model.parameters();
  Adam optimizer(params, config.lr, config.beta1, config.beta2, config.epsilon);
  std::mt19937_64 shuffle_rng(config.seed);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  TrainLog log;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_sq_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      try {
        Graph g;
        TensorPtr batch_sum;
        for (std::size_t i = start; i < end; ++i) {
          const TrainExample& ex = train_set[order[i]];
          auto fr = forward(g, model, ex.drug, ex.protein);
          auto target = Tensor::scalar_value(ex.affinity);
          auto sq = ops::mse_loss(g, fr.prediction, target);
          batch_sum = batch_sum ? ops::add(g, batch_sum, sq) : sq;
        }
        auto batch_loss = ops::scale(g, batch_sum, 1.0 / static_cast<double>(end - start));
        const double loss_value = batch_loss->scalar();
        if (std::isnan(loss_value) || std::isinf(loss_value)) {
          throw_numeric("loss became " + std::to_string(loss_value));
        }
        epoch_sq_sum += loss_value * static_cast<double>(end - start);
        g.backward(batch_loss);
        optimizer.step();
        optimizer.zero_grad();
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::Numeric) {
          throw_numeric("train aborted at epoch " + std::to_string(epoch) + ": " + e.what() +
                        "; the learning rate is likely too high or gradients exploded");
        }
        throw;
      }
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_mse = epoch_sq_sum / static_cast<double>(train_set.size());
    if (val_set && !val_set->empty()) {
      std::vector<double> preds, truths;
      preds.reserve(val_set->size());
      truths.reserve(val_set->size());
      double sq = 0.0;
      for (const auto& ex : *val_set) {
        Graph eval_graph(false);
        auto fr = forward(eval_graph, model, ex.drug, ex.protein);
        const double pred = fr.prediction->scalar();
        preds.push_back(pred);
        truths.push_back(ex.affinity);
        sq += (pred - ex.affinity) * (pred - ex.affinity);
      }
      stats.val_mse = sq / static_cast<double>(val_set->size());
      try {
        stats.val_cindex = c_index(preds, truths);
      } catch (const Error&) {
        // degenerate validation labels: leave NaN
      }
    }
    log.epochs.push_back(stats);
    if (on_epoch) on_epoch(model, stats);
  }
  return log;
}

namespace {

std::vector<RankedPosition> rank_gate(const std::vector<double>& gate,
                                      std::size_t valid_len) {
  std::vector<RankedPosition> ranked;
  ranked.reserve(valid_len);
  for (std::size_t pos = 0; pos < valid_len && pos < gate.size(); ++pos) {
    ranked.push_back({pos, gate[pos]});
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const RankedPosition& a, const RankedPosition& b) {
                     return a.weight > b.weight;
                   });
  return ranked;
}

}  // namespace

AttentionRanking extract_attention(const DtiModel& model, const TokenSequence& drug,
                                   const TokenSequence& protein) {
  if (model.config.mode != InteractionMode::Gca) {
    throw_capability(std::string("extract_attention requires interaction mode gca, not ") +
                     interaction_name(model.config.mode));
  }
  Graph g(false);
  auto fr = forward(g, model, drug, protein);
  AttentionRanking ranking;
  ranking.prediction = fr.prediction->scalar();
  if (fr.drug_attention) {
    for (const auto& gate : fr.drug_attention->gates_post) {
      ranking.drug_heads.push_back(rank_gate(gate, drug.valid_len));
    }
  }
  if (fr.protein_attention) {
    for (const auto& gate : fr.protein_attention->gates_post) {
      ranking.protein_heads.push_back(rank_gate(gate, protein.valid_len));
    }
  }
  return ranking;
}

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, sizeof(bits));
  put_u64(out, bits);
}

struct Reader {
  const std::string& data;
  std::size_t pos = 0;

  void need(std::size_t n, const char* what) const {
    if (pos + n > data.size()) {
      throw_data(std::string("checkpoint: truncated while reading ") + what);
    }
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data[pos + i])) << (8 * i);
    }
    pos += 4;
    return v;
  }
  std::uint64_t u64(const char* what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data[pos + i])) << (8 * i);
    }
    pos += 8;
    return v;
  }
  double f64(const char* what) {
    const std::uint64_t bits = u64(what);
    double d;
    std::memcpy(&d, &bits, sizeof(d));
    return d;
  }
};

constexpr char kMagic[4] = {'G', 'C', 'A', '1'};

}  // namespace

void save_checkpoint(const DtiModel& model, const std::string& config_text,
                     const std::string& path) {
  std::string blob;
  blob.append(kMagic, 4);
  put_u64(blob, config_text.size());
  blob.append(config_text);
  const auto params = model.parameters();
  put_u32(blob, static_cast<std::uint32_t>(params.size()));
  for (const auto& t : params) {
    put_u32(blob, static_cast<std::uint32_t>(t->shape.size()));
    for (std::size_t dim : t->shape) put_u64(blob, dim);
    for (double v : t->values) put_f64(blob, v);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw_data("checkpoint: cannot open " + path + " for writing");
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  if (!out) throw_data("checkpoint: write to " + path + " failed");
}

RawCheckpoint read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_data("checkpoint: cannot open " + path);
  std::string blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  Reader r{blob};
  r.need(4, "magic");
  if (std::memcmp(blob.data(), kMagic, 4) != 0) {
    throw_data("checkpoint: " + path + " does not start with the GCA1 magic");
  }
  r.pos = 4;
  const std::uint64_t cfg_len = r.u64("config length");
  r.need(cfg_len, "config text");
  RawCheckpoint ckpt;
  ckpt.config_text = blob.substr(r.pos, cfg_len);
  r.pos += cfg_len;
  const std::uint32_t n_tensors = r.u32("tensor count");
  for (std::uint32_t ti = 0; ti < n_tensors; ++ti) {
    const std::uint32_t rank = r.u32("tensor rank");
    Shape shape;
    std::size_t total = 1;
    for (std::uint32_t dim = 0; dim < rank; ++dim) {
      shape.push_back(r.u64("tensor dimension"));
      total *= shape.back();
    }
    std::vector<double> values(total);
    for (std::size_t i = 0; i < total; ++i) values[i] = r.f64("tensor values");
    ckpt.tensors.push_back(Tensor::make(std::move(shape), std::move(values), true));
  }
  if (r.pos != blob.size()) throw_data("checkpoint: trailing bytes in " + path);
  return ckpt;
}

void assign_parameters(DtiModel& model, const std::vector<TensorPtr>& tensors) {
  auto params = model.parameters();
  if (params.size() != tensors.size()) {
    throw_config("checkpoint: tensor count " + std::to_string(tensors.size()) +
                 " does not match the configured model's " + std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i]->shape != tensors[i]->shape) {
      throw_config("checkpoint: tensor " + std::to_string(i) + " has shape " +
                   shape_str(tensors[i]->shape) + " but the configured model expects " +
                   shape_str(params[i]->shape));
    }
    params[i]->values = tensors[i]->values;
    params[i]->grad.clear();
  }
}

}  // namespace gca
