#include "gca/gradcheck_suite.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

#include "gca/attention.hpp"
#include "gca/model.hpp"

namespace gca {

namespace {

using gca::ops::Normalizer;
using gca::ops::PoolMode;

// One prepared check: leaf tensors plus the loss builder over them.
struct Prepared {
  std::vector<TensorPtr> inputs;
  ScalarFn fn;
};

using CheckFactory = std::function<Prepared(std::mt19937_64&)>;

std::size_t pick(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

// Weighted-sum reduction to a scalar so every output coordinate influences
// the loss.
TensorPtr scalarize(Graph& g, const TensorPtr& t, const TensorPtr& weights) {
  auto flat = ops::reshape(g, t, {1, t->size()});
  return ops::reshape(g, ops::matmul(g, flat, weights), {1});
}

TensorPtr fixed_weights(std::size_t n, std::mt19937_64& rng) {
  return Tensor::randn({n, 1}, rng, 1.0, false);
}

// Uniform magnitudes in [0.1, 2] with random signs: keeps relu and max
// comparisons away from their kinks at the finite-difference step size.
TensorPtr randn_margin(Shape shape, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> mag(0.1, 2.0);
  std::bernoulli_distribution sign(0.5);
  std::vector<double> v(numel(shape));
  for (double& x : v) x = (sign(rng) ? 1.0 : -1.0) * mag(rng);
  return Tensor::make(std::move(shape), std::move(v), true);
}

// Resample until the top-2 gap along the given axis exceeds the margin.
TensorPtr randn_distinct(std::size_t m, std::size_t n, bool per_column,
                         std::mt19937_64& rng, double margin) {
  for (int attempt = 0; attempt < 200; ++attempt) {
    auto t = Tensor::randn({m, n}, rng, 1.0);
    bool ok = true;
    const std::size_t groups = per_column ? n : m;
    const std::size_t extent = per_column ? m : n;
    for (std::size_t gidx = 0; gidx < groups && ok; ++gidx) {
      double top1 = -1e300, top2 = -1e300;
      for (std::size_t i = 0; i < extent; ++i) {
        const double v = per_column ? t->values[i * n + gidx] : t->values[gidx * n + i];
        if (v > top1) {
          top2 = top1;
          top1 = v;
        } else if (v > top2) {
          top2 = v;
        }
      }
      ok = extent < 2 || (top1 - top2) > margin;
    }
    if (ok) return t;
  }
  throw_numeric("gradcheck: could not sample a max-reduction input with a safe margin");
}

// Sparsemax input whose support set is stable within the finite-difference
// step: every entry sits at least `margin` away from the threshold.
TensorPtr sparsemax_safe_input(std::size_t m, std::size_t n, std::mt19937_64& rng,
                               double margin) {
  for (int attempt = 0; attempt < 500; ++attempt) {
    auto t = Tensor::randn({m, n}, rng, 1.0);
    bool ok = true;
    std::vector<double> sorted(n);
    for (std::size_t i = 0; i < m && ok; ++i) {
      const double* row = &t->values[i * n];
      sorted.assign(row, row + n);
      std::sort(sorted.begin(), sorted.end(), std::greater<double>());
      double cum = 0.0, tau = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        cum += sorted[k];
        const double kk = static_cast<double>(k + 1);
        if (1.0 + kk * sorted[k] > cum) tau = (cum - 1.0) / kk;
      }
      for (std::size_t j = 0; j < n; ++j) {
        if (std::fabs(row[j] - tau) < margin) ok = false;
      }
    }
    if (ok) return t;
  }
  throw_numeric("gradcheck: could not sample sparsemax input away from support boundaries");
}

TokenSequence random_tokens(std::size_t max_len, std::size_t valid, std::size_t vocab,
                            SequenceKind kind, std::mt19937_64& rng) {
  TokenSequence seq;
  seq.kind = kind;
  seq.valid_len = valid;
  seq.ids.assign(max_len, 0);
  std::uniform_int_distribution<int> dist(1, static_cast<int>(vocab) - 1);
  for (std::size_t i = 0; i < valid; ++i) seq.ids[i] = dist(rng);
  return seq;
}

DirectionParams random_direction(std::size_t f, std::mt19937_64& rng) {
  DirectionParams dp;
  dp.ln_own_gain = Tensor::full({f}, 1.0, true);
  dp.ln_own_bias = Tensor::zeros({f}, true);
  dp.ln_cp_gain = Tensor::full({f}, 1.0, true);
  dp.ln_cp_bias = Tensor::zeros({f}, true);
  dp.w_query = Tensor::randn({f, f}, rng, 0.4);
  dp.w_key = Tensor::randn({f, f}, rng, 0.4);
  dp.w_value = Tensor::randn({f, f}, rng, 0.4);
  dp.w_out = Tensor::randn({f, f}, rng, 0.4);  // non-zero so its path is exercised
  return dp;
}

AttentionConfig two_head_config(std::size_t f, Normalizer inner) {
  AttentionConfig cfg;
  cfg.num_heads = 2;
  cfg.feature_dim = f;
  cfg.inner = inner;
  return cfg;
}

}  // namespace

std::vector<OpCheckResult> run_gradcheck_suite(std::uint64_t base_seed,
                                               std::size_t seeds_per_op, double step,
                                               double tol) {
  std::vector<std::pair<std::string, CheckFactory>> checks;

  checks.emplace_back("matmul", [](std::mt19937_64& rng) {
    const std::size_t m = pick(rng, 2, 5), k = pick(rng, 2, 5), n = pick(rng, 2, 5);
    Prepared p;
    p.inputs = {Tensor::randn({m, k}, rng, 1.0), Tensor::randn({k, n}, rng, 1.0)};
    auto w = fixed_weights(m * n, rng);
    p.fn = [w](Graph& g, const std::vector<TensorPtr>& in) {
      return scalarize(g, ops::matmul(g, in[0], in[1]), w);
    };
    return p;
  });

  checks.emplace_back("transpose", [](std::mt19937_64& rng) {
    const std::size_t m = pick(rng, 2, 6), n = pick(rng, 2, 6);
    Prepared p;
    p.inputs = {Tensor::randn({m, n}, rng, 1.0)};
    auto w = fixed_weights(m * n, rng);
    p.fn = [w](Graph& g, const std::vector<TensorPtr>& in) {
      return scalarize(g, ops::transpose(g, in[0]), w);
    };
    return p;
  });

  checks.emplace_back("softmax_rows", [](std::mt19937_64& rng) {
    const std::size_t m = pick(rng, 2, 6), n = pick(rng, 3, 8);
    Prepared p;
    p.inputs = {Tensor::randn({m, n}, rng, 1.0)};
    const std::size_t vc = n - 1;  // exercise the masked prefix path
    auto w = fixed_weights(m * n, rng);
    p.fn = [w, vc](Graph& g, const std::vector<TensorPtr>& in) {
      return scalarize(g, ops::softmax_rows(g, in[0], vc), w);
    };
    return p;
  });

  checks.emplace_back("sparsemax_rows", [step](std::mt19937_64& rng) {
    const std::size_t m = pick(rng, 2, 5), n = pick(rng, 3, 8);
    Prepared p;
    p.inputs = {sparsemax_safe_input(m, n, rng, 200.0 * step)};
    auto w = fixed_weights(m * n, rng);
    p.fn = [w](Graph& g, const std::vector<TensorPtr>& in) {
      return scalarize(g, ops::sparsemax_rows(g, in[0]), w);
    };
    return p;
  });

  checks.emplace_back("conv1d", [](std::mt19937_64& rng) {
    const std::size_t len = pick(rng, 3, 8), cin = pick(rng, 1, 3), cout = pick(rng, 1, 3);
    const std::size_t w = 2 * pick(rng, 0, 2) + 1;
    Prepared p;
    p.inputs = {Tensor::randn({len, cin}, rng, 1.0),
                Tensor::randn({w, cin, cout}, rng, 1.0), Tensor::randn({cout}, rng, 1.0)};
    auto wt = fixed_weights(len * cout, rng);
    p.fn = [wt](Graph& g, const std::vector<TensorPtr>& in) {
      return scalarize(g, ops::conv1d(g, in[0], in[1], in[2]), wt);
    };
    return p;
  });

  checks.emplace_back("add_broadcast", [](std::mt19937_64& rng) {
    const std::size_t m = pick(rng, 2, 5), n = pick(rng, 2, 5);
    Prepared p;
    p.inputs = {Tensor::randn({m, n}, rng, 1.0), Tensor::randn({n}, rng, 1.0),
                Tensor::randn({m, 1}, rng, 1.0), Tensor::randn({1}, rng, 1.0)};
    auto w = fixed_weights(m * n, rng);
    p.fn = [w](Graph& g, const std::vector<TensorPtr>& in) {
      auto y = ops::add(g, ops::add(g, ops::add(g, in[0], in[1]), in[2]), in[3]);
      return scalarize(g, y, w);
    };
    return p;
  });

  checks.emplace_back("mul_broadcast", [](std::mt19937_64& rng) {
    const std::size_t m = pick(rng, 2, 5), n = pick(rng, 2, 5);
    Prepared p;
    p.inputs = {Tensor::randn({m, n}, rng, 1.0), Tensor::randn({n}, rng, 1.0),
                Tensor::randn({m, 1}, rng, 1.0)};
    auto w = fixed_weights(m * n, rng);
    p.fn = [w](Graph& g, const std::vector<TensorPtr>& in) {
      return scalarize(g, ops::mul(g, ops::mul(g, in[0], in[1]), in[2]), w);
    };
    return p;
  });

  checks.emplace_back("relu", [](std::mt19937_64& rng) {
    const std::size_t m = pick(rng, 2, 6), n = pick(rng, 2, 6);
    Prepared p;
    p.inputs = {randn_margin({m, n}, rng)};
    auto w = fixed_weights(m * n, rng);
    p.fn = [w](Graph& g, const std::vector<TensorPtr>& in) {
      return scalarize(g, ops::relu(g, in[0]), w);
    };
    return p;
  });

  checks.emplace_back("tanh_scale", [](std::mt19937_64& rng) {
    const std::size_t m = pick(rng, 2, 6), n = pick(rng, 2, 6);
    Prepared p;
    p.inputs = {Tensor::randn({m, n}, rng, 1.0)};
    auto w = fixed_weights(m * n, rng);
    p.fn = [w](Graph& g, const std::vector<TensorPtr>& in) {
      return scalarize(g, ops::scale(g, ops::tanh(g, in[0]), 1.7), w);
    };
    return p;
  });

  checks.emplace_back("pool_max", [](std::mt19937_64& rng) {
    const std::size_t m = pick(rng, 2, 7), n = pick(rng, 2, 5);
    Prepared p;
    p.inputs = {randn_distinct(m, n, /*per_column=*/true, rng, 1e-2)};
    auto w = fixed_weights(n, rng);
    p.fn = [w](Graph& g, const std::vector<TensorPtr>& in) {
      auto y = ops::pool(g, in[0], PoolMode::Max);
      return scalarize(g, y, w);
    };
    return p;
  });

  checks.emplace_back("pool_mean", [](std::mt19937_64& rng) {
    const std::size_t m = pick(rng, 2, 7), n = pick(rng, 2, 5);
    Prepared p;
    p.inputs = {Tensor::randn({m, n}, rng, 1.0)};
    auto w = fixed_weights(n, rng);
    const std::size_t vl = m - 1;
    p.fn = [w, vl](Graph& g, const std::vector<TensorPtr>& in) {
      return scalarize(g, ops::pool(g, in[0], PoolMode::Mean, vl), w);
    };
    return p;
  });

  checks.emplace_back("layer_norm", [](std::mt19937_64& rng) {
    const std::size_t len = pick(rng, 2, 6), f = pick(rng, 2, 8);
    Prepared p;
    p.inputs = {Tensor::randn({len, f}, rng, 1.0), Tensor::randn({f}, rng, 1.0),
                Tensor::randn({f}, rng, 1.0)};
    auto w = fixed_weights(len * f, rng);
    p.fn = [w](Graph& g, const std::vector<TensorPtr>& in) {
      return scalarize(g, ops::layer_norm(g, in[0], in[1], in[2]), w);
    };
    return p;
  });

  checks.emplace_back("embedding_lookup", [](std::mt19937_64& rng) {
    const std::size_t vocab = pick(rng, 3, 8), f = pick(rng, 2, 6);
    Prepared p;
    p.inputs = {Tensor::randn({vocab, f}, rng, 1.0)};
    std::vector<int> ids;
    for (std::size_t i = 0; i < 6; ++i) ids.push_back(static_cast<int>(rng() % vocab));
    auto w = fixed_weights(ids.size() * f, rng);
    p.fn = [w, ids](Graph& g, const std::vector<TensorPtr>& in) {
      return scalarize(g, ops::embedding_lookup(g, in[0], ids), w);
    };
    return p;
  });

  checks.emplace_back("concat_slice_mean_rows", [](std::mt19937_64& rng) {
    const std::size_t m = pick(rng, 2, 5), n1 = pick(rng, 2, 4), n2 = pick(rng, 2, 4);
    Prepared p;
    p.inputs = {Tensor::randn({m, n1}, rng, 1.0), Tensor::randn({m, n2}, rng, 1.0)};
    auto w = fixed_weights(2 * (n1 + n2) - 1, rng);
    p.fn = [w](Graph& g, const std::vector<TensorPtr>& in) {
      auto merged = ops::concat_cols(g, {in[0], in[1]});
      auto part = ops::slice_cols(g, merged, 1, merged->shape[1] - 1);
      auto mean = ops::mean_rows(g, part, part->shape[0] - 1);
      auto other = ops::mean_rows(g, merged);
      return scalarize(g, ops::concat(g, mean, other), w);
    };
    return p;
  });

  checks.emplace_back("rowmax", [](std::mt19937_64& rng) {
    const std::size_t m = pick(rng, 2, 5), n = pick(rng, 2, 6);
    Prepared p;
    p.inputs = {randn_distinct(m, n, /*per_column=*/false, rng, 1e-2)};
    auto w = fixed_weights(m, rng);
    p.fn = [w](Graph& g, const std::vector<TensorPtr>& in) {
      return scalarize(g, ops::rowmax(g, in[0]), w);
    };
    return p;
  });

  checks.emplace_back("mse_loss", [](std::mt19937_64& rng) {
    const std::size_t n = pick(rng, 2, 8);
    Prepared p;
    p.inputs = {Tensor::randn({n}, rng, 1.0), Tensor::randn({n}, rng, 1.0)};
    p.fn = [](Graph& g, const std::vector<TensorPtr>& in) {
      return ops::mse_loss(g, in[0], in[1]);
    };
    return p;
  });

  checks.emplace_back("projection_qkv", [](std::mt19937_64& rng) {
    const std::size_t f = 6, l = pick(rng, 2, 5);
    Prepared p;
    p.inputs = {Tensor::randn({l, f}, rng, 1.0), Tensor::randn({f, f}, rng, 0.5),
                Tensor::randn({f, f}, rng, 0.5), Tensor::randn({f, f}, rng, 0.5)};
    auto w = fixed_weights(l * 3 * f, rng);
    p.fn = [w](Graph& g, const std::vector<TensorPtr>& in) {
      auto qkv = project_qkv(g, in[0], in[1], in[2], in[3]);
      return scalarize(g, ops::concat_cols(g, {qkv.q, qkv.k, qkv.v}), w);
    };
    return p;
  });

  checks.emplace_back("self_attention", [](std::mt19937_64& rng) {
    const std::size_t f = 6, l = pick(rng, 3, 6);
    Prepared p;
    p.inputs = {Tensor::randn({l, f}, rng, 1.0), Tensor::randn({f, f}, rng, 0.5),
                Tensor::randn({f, f}, rng, 0.5), Tensor::randn({f, f}, rng, 0.5)};
    auto w = fixed_weights(l * f, rng);
    const std::size_t valid = l - 1;
    p.fn = [w, valid](Graph& g, const std::vector<TensorPtr>& in) {
      SelfAttentionParams params{in[1], in[2], in[3]};
      auto out = self_attention(g, in[0], valid, params,
                                two_head_config(in[0]->shape[1], Normalizer::Softmax));
      return scalarize(g, out.attended, w);
    };
    return p;
  });

  checks.emplace_back("decoder_attention", [](std::mt19937_64& rng) {
    const std::size_t f = 6, lx = pick(rng, 2, 5), lc = pick(rng, 3, 6);
    Prepared p;
    p.inputs = {Tensor::randn({lx, f}, rng, 1.0), Tensor::randn({lc, f}, rng, 1.0),
                Tensor::randn({f, f}, rng, 0.5), Tensor::randn({f, f}, rng, 0.5),
                Tensor::randn({f, f}, rng, 0.5)};
    auto w = fixed_weights(lx * f, rng);
    const std::size_t valid_c = lc - 1;
    p.fn = [w, valid_c](Graph& g, const std::vector<TensorPtr>& in) {
      SelfAttentionParams params{in[2], in[3], in[4]};
      auto out = decoder_attention(g, in[0], in[0]->shape[0], in[1], valid_c, params,
                                   two_head_config(in[0]->shape[1], Normalizer::Softmax),
                                   Direction::ProteinToDrug);
      return scalarize(g, out.attended, w);
    };
    return p;
  });

  auto gca_check = [](Normalizer inner) {
    return [inner](std::mt19937_64& rng) {
      const std::size_t f = 8, ld = 6, lp = 6;
      auto d = Tensor::randn({ld, f}, rng, 1.0);
      auto pfeat = Tensor::randn({lp, f}, rng, 1.0);
      auto params = std::make_shared<GcaParams>();
      params->drug = random_direction(f, rng);
      params->protein = random_direction(f, rng);
      Prepared p;
      p.inputs = {d, pfeat};
      for (const auto& t : params->parameters()) p.inputs.push_back(t);
      auto w = fixed_weights(ld * f + lp * f, rng);
      const std::size_t valid_d = ld - 1, valid_p = lp - 2;
      p.fn = [w, params, inner, valid_d, valid_p](Graph& g,
                                                  const std::vector<TensorPtr>& in) {
        auto block = gca_block(g, in[0], valid_d, in[1], valid_p, *params,
                               two_head_config(in[0]->shape[1], inner));
        return scalarize(g, ops::concat_cols(g, {block.drug_out, block.protein_out}), w);
      };
      return p;
    };
  };
  checks.emplace_back("gca_block", gca_check(Normalizer::Softmax));
  checks.emplace_back("gca_block_sparsemax", gca_check(Normalizer::Sparsemax));

  checks.emplace_back("attentive_pooling", [](std::mt19937_64& rng) {
    const std::size_t f = 6, ld = pick(rng, 2, 5), lp = pick(rng, 2, 5);
    Prepared p;
    p.inputs = {Tensor::randn({ld, f}, rng, 1.0), Tensor::randn({lp, f}, rng, 1.0),
                Tensor::randn({f, f}, rng, 0.5)};
    auto w = fixed_weights(2 * f, rng);
    p.fn = [w](Graph& g, const std::vector<TensorPtr>& in) {
      ApParams params{in[2]};
      auto pooled =
          attentive_pooling(g, in[0], in[0]->shape[0], in[1], in[1]->shape[0], params);
      auto joined = ops::concat(g, pooled.pooled_drug, pooled.pooled_protein);
      return scalarize(g, ops::reshape(g, joined, {1, joined->size()}), w);
    };
    return p;
  });

  checks.emplace_back("encoder_cnn_stack", [](std::mt19937_64& rng) {
    const std::size_t vocab = 6, e = 4, c1 = 5, c2 = 4, len = 10;
    Prepared p;
    p.inputs = {Tensor::randn({vocab, e}, rng, 0.8), Tensor::randn({3, e, c1}, rng, 0.5),
                Tensor::randn({c1}, rng, 0.3), Tensor::randn({5, c1, c2}, rng, 0.5),
                Tensor::randn({c2}, rng, 0.3)};
    TokenSequence seq = random_tokens(len, 8, vocab, SequenceKind::Drug, rng);
    auto w = fixed_weights(len * c2, rng);
    p.fn = [w, seq](Graph& g, const std::vector<TensorPtr>& in) {
      EncoderConfig cfg;
      cfg.kind = EncoderConfig::Kind::Cnn;
      cfg.embed_dim = in[0]->shape[1];
      cfg.conv_channels = {in[1]->shape[2], in[3]->shape[2]};
      cfg.conv_widths = {in[1]->shape[0], in[3]->shape[0]};
      EncoderParams params;
      params.embedding = in[0];
      params.kernels = {in[1], in[3]};
      params.biases = {in[2], in[4]};
      return scalarize(g, encode(g, seq, cfg, params), w);
    };
    return p;
  });

  auto model_check = [](EncoderConfig::Kind encoder_kind) {
    return [encoder_kind](std::mt19937_64& rng) {
      ModelConfig cfg;
      cfg.drug_encoder.embed_dim = 8;
      cfg.protein_encoder.embed_dim = 8;
      if (encoder_kind == EncoderConfig::Kind::Cnn) {
        cfg.drug_encoder.kind = EncoderConfig::Kind::Cnn;
        cfg.drug_encoder.conv_channels = {6};
        cfg.drug_encoder.conv_widths = {3};
        cfg.protein_encoder.kind = EncoderConfig::Kind::Cnn;
        cfg.protein_encoder.conv_channels = {6};
        cfg.protein_encoder.conv_widths = {5};
      }
      cfg.max_len_drug = 6;
      cfg.max_len_protein = 8;
      cfg.drug_vocab = 7;
      cfg.protein_vocab = 9;
      cfg.attention.num_heads = 2;
      cfg.attention.feature_dim = cfg.feature_dim();
      cfg.head_hidden = 8;
      cfg.mode = InteractionMode::Gca;
      cfg.pooling = PoolMode::Mean;  // smooth pooling; pool_max has its own check
      auto model = std::make_shared<DtiModel>(DtiModel::init(cfg, rng()));
      std::normal_distribution<double> dist(0.0, 0.3);
      for (auto& v : model->gca.drug.w_out->values) v = dist(rng);
      for (auto& v : model->gca.protein.w_out->values) v = dist(rng);
      TokenSequence drug1 = random_tokens(6, 4, 7, SequenceKind::Drug, rng);
      TokenSequence prot1 = random_tokens(8, 6, 9, SequenceKind::Protein, rng);
      TokenSequence drug2 = random_tokens(6, 6, 7, SequenceKind::Drug, rng);
      TokenSequence prot2 = random_tokens(8, 5, 9, SequenceKind::Protein, rng);
      Prepared p;
      p.inputs = model->parameters();  // the model aliases these tensors
      p.fn = [model, drug1, prot1, drug2, prot2](Graph& g, const std::vector<TensorPtr>&) {
        auto f1 = forward(g, *model, drug1, prot1);
        auto f2 = forward(g, *model, drug2, prot2);
        auto l1 = ops::mse_loss(g, f1.prediction, Tensor::scalar_value(1.3));
        auto l2 = ops::mse_loss(g, f2.prediction, Tensor::scalar_value(-0.4));
        return ops::scale(g, ops::add(g, l1, l2), 0.5);
      };
      return p;
    };
  };
  checks.emplace_back("model_end_to_end", model_check(EncoderConfig::Kind::Embed));
  checks.emplace_back("model_end_to_end_cnn", model_check(EncoderConfig::Kind::Cnn));

  std::vector<OpCheckResult> results;
  for (const auto& [name, factory] : checks) {
    OpCheckResult r;
    r.op = name;
    r.seeds = seeds_per_op;
    r.pass = true;
    for (std::size_t s = 0; s < seeds_per_op; ++s) {
      std::mt19937_64 rng(base_seed + 0x9e3779b97f4a7c15ull * (s + 1) +
                          std::hash<std::string>{}(name));
      Prepared prepared = factory(rng);
      const auto check = finite_diff_check(prepared.fn, prepared.inputs, step, tol);
      r.max_rel_err = std::max(r.max_rel_err, check.max_rel_err);
      r.pass = r.pass && check.pass;
    }
    results.push_back(std::move(r));
  }
  return results;
}

bool all_passed(const std::vector<OpCheckResult>& results) {
  for (const auto& r : results) {
    if (!r.pass) return false;
  }
  return true;
}

}  // namespace gca
