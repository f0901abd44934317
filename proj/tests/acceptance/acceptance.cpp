// Acceptance suite: one pass/fail line per criterion. Every tolerance and
// threshold is pinned here; the process exits with the number of failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>

#include "gca/analysis.hpp"
#include "gca/gradcheck_suite.hpp"
#include "gca/pipeline.hpp"

using namespace gca;

namespace {

struct Criterion {
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

std::string fmt(double v, int precision = 4) {
  std::ostringstream os;
  os.precision(precision);
  os << v;
  return os.str();
}

// ---------------------------------------------------------------- fixtures

RunConfig synthetic_config(const std::string& interaction, std::uint64_t seed) {
  RunConfig config;
  config.interaction = interaction;
  config.match_params = interaction != "gca";
  config.embed_dim = 8;
  config.max_len_drug = 24;
  config.max_len_protein = 60;
  config.head_hidden = 64;
  config.lr = 5e-4;
  config.batch_size = 32;
  config.epochs = 8;
  config.test_fraction = 1.0 / 6.0;
  config.seed = seed;
  return config;
}

SyntheticSpec synthetic_task() {
  SyntheticSpec spec;  // 200 drugs x 50 targets, 2 motif pairs, sigma 0.3
  spec.seed = 1;
  return spec;
}

struct SeedRun {
  std::uint64_t seed = 0;
  PreparedData gca_data;
  DtiModel gca_model;
  EvalReport gca_report;
  EvalReport none_report;
  std::size_t gca_interaction_params = 0;
  std::size_t none_interaction_params = 0;
};

TokenSequence random_tokens(std::size_t len, std::size_t valid, std::size_t vocab,
                            SequenceKind kind, std::mt19937_64& rng) {
  TokenSequence seq;
  seq.kind = kind;
  seq.valid_len = valid;
  seq.ids.assign(len, 0);
  std::uniform_int_distribution<int> dist(1, static_cast<int>(vocab) - 1);
  for (std::size_t i = 0; i < valid; ++i) seq.ids[i] = dist(rng);
  return seq;
}

// ------------------------------------------------------------- criterion 1

Criterion gradient_suite() {
  Timer timer;
  Criterion c;
  c.name = "gradient-suite";
  const auto results = run_gradcheck_suite(/*base_seed=*/424242, /*seeds_per_op=*/50,
                                           /*step=*/1e-5, /*tol=*/1e-4);
  double worst = 0.0;
  std::string worst_op = "-";
  bool all = true;
  for (const auto& r : results) {
    all = all && r.pass;
    if (r.max_rel_err > worst) {
      worst = r.max_rel_err;
      worst_op = r.op;
    }
  }
  c.seconds = timer.seconds();
  c.pass = all && c.seconds < 300.0;
  c.detail = std::to_string(results.size()) + " ops x 50 seeds, worst " + worst_op + " " +
             fmt(worst, 2) + (c.seconds < 300.0 ? "" : "; OVER TIME BUDGET");
  return c;
}

// ------------------------------------------------------------- criterion 2

// Independent sorted-threshold simplex projection (the oracle).
std::vector<double> sorted_threshold_projection(const std::vector<double>& z) {
  std::vector<double> sorted = z;
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  double cum = 0.0, tau = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    cum += sorted[k];
    const double kk = static_cast<double>(k + 1);
    if (1.0 + kk * sorted[k] > cum) tau = (cum - 1.0) / kk;
  }
  std::vector<double> p(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) p[i] = std::max(z[i] - tau, 0.0);
  return p;
}

Criterion sparsemax_correctness() {
  Timer timer;
  Criterion c;
  c.name = "sparsemax-correctness";
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> dist(0.0, 1.0);
  double worst = 0.0;
  std::size_t with_zero = 0, big_dim = 0, argmax_ok = 0, argmax_total = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng() % 63;  // dims 2..64
    std::vector<double> z(n);
    for (auto& v : z) v = dist(rng);
    Graph g;
    auto mine = ops::sparsemax_rows(g, Tensor::make({1, n}, z))->values;
    auto oracle = sorted_threshold_projection(z);
    for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::fabs(mine[i] - oracle[i]));
    if (n >= 8) {
      ++big_dim;
      if (std::count(mine.begin(), mine.end(), 0.0) > 0) ++with_zero;
    }
    const auto arg_in = std::distance(z.begin(), std::max_element(z.begin(), z.end()));
    const auto arg_out =
        std::distance(mine.begin(), std::max_element(mine.begin(), mine.end()));
    ++argmax_total;
    if (arg_in == arg_out) ++argmax_ok;
  }
  const double zero_rate = static_cast<double>(with_zero) / static_cast<double>(big_dim);
  c.pass = worst < 1e-8 && zero_rate >= 0.30 && argmax_ok == argmax_total;
  c.detail = "oracle gap " + fmt(worst, 2) + ", zero rate " + fmt(zero_rate) + ", argmax " +
             std::to_string(argmax_ok) + "/" + std::to_string(argmax_total);
  c.seconds = timer.seconds();
  return c;
}

// ------------------------------------------------------------- criterion 3

DirectionParams random_direction(std::size_t f, std::mt19937_64& rng) {
  DirectionParams dp;
  dp.ln_own_gain = Tensor::full({f}, 1.0, true);
  dp.ln_own_bias = Tensor::zeros({f}, true);
  dp.ln_cp_gain = Tensor::full({f}, 1.0, true);
  dp.ln_cp_bias = Tensor::zeros({f}, true);
  dp.w_query = Tensor::randn({f, f}, rng, 0.5);
  dp.w_key = Tensor::randn({f, f}, rng, 0.5);
  dp.w_value = Tensor::randn({f, f}, rng, 0.5);
  dp.w_out = Tensor::randn({f, f}, rng, 0.5);
  return dp;
}

Criterion normalization_invariants() {
  Timer timer;
  Criterion c;
  c.name = "normalization-invariants";
  std::mt19937_64 rng(31337);
  double worst_sum = 0.0, worst_pad_shift = 0.0;
  bool pad_zero = true;
  const ops::Normalizer kinds[2] = {ops::Normalizer::Softmax, ops::Normalizer::Sparsemax};
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t f = 8;
    AttentionConfig cfg;
    cfg.num_heads = 2;
    cfg.feature_dim = f;
    cfg.inner = kinds[trial % 2];
    cfg.outer = kinds[(trial / 2) % 2];
    const std::size_t ld = 3 + rng() % 5, lp = 3 + rng() % 5;
    GcaParams params;
    params.drug = random_direction(f, rng);
    params.protein = random_direction(f, rng);
    auto d = Tensor::randn({ld, f}, rng, 1.0, false);
    auto p = Tensor::randn({lp, f}, rng, 1.0, false);
    Graph g;
    auto base = gca_block(g, d, ld, p, lp, params, cfg);
    for (const auto* att : {&base.drug_attention, &base.protein_attention}) {
      for (const auto& gate : att->gates_post) {
        double sum = std::accumulate(gate.begin(), gate.end(), 0.0);
        worst_sum = std::max(worst_sum, std::fabs(sum - 1.0));
      }
      for (const auto& gate : att->gates_pre) {
        double sum = std::accumulate(gate.begin(), gate.end(), 0.0);
        worst_sum = std::max(worst_sum, std::fabs(sum - 1.0));
      }
    }
    // inner per-query distributions: row-stochastic over the valid prefix,
    // exact zeros beyond it
    {
      auto scores = Tensor::randn({lp, ld}, rng, 2.0, false);
      Graph gi;
      auto inner = ops::normalize_rows(gi, scores, cfg.inner, ld - 1);
      for (std::size_t i = 0; i < lp; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j + 1 < ld; ++j) {
          sum += inner->at(i, j);
          pad_zero = pad_zero && inner->at(i, j) >= 0.0;
        }
        worst_sum = std::max(worst_sum, std::fabs(sum - 1.0));
        pad_zero = pad_zero && inner->at(i, ld - 1) == 0.0;
      }
    }

    // append padding rows filled with garbage; valid outputs must not move
    auto extend = [&](const TensorPtr& t, std::size_t extra) {
      auto bigger = Tensor::zeros({t->shape[0] + extra, f});
      std::copy(t->values.begin(), t->values.end(), bigger->values.begin());
      for (std::size_t i = t->size(); i < bigger->size(); ++i) {
        bigger->values[i] = 37.0 + static_cast<double>(i % 11);
      }
      return bigger;
    };
    auto padded = gca_block(g, extend(d, 2), ld, extend(p, 3), lp, params, cfg);
    for (std::size_t i = 0; i < ld * f; ++i) {
      worst_pad_shift = std::max(
          worst_pad_shift, std::fabs(padded.drug_out->values[i] - base.drug_out->values[i]));
    }
    for (std::size_t i = 0; i < lp * f; ++i) {
      worst_pad_shift =
          std::max(worst_pad_shift,
                   std::fabs(padded.protein_out->values[i] - base.protein_out->values[i]));
    }
    for (std::size_t h = 0; h < 2; ++h) {
      for (std::size_t i = ld; i < ld + 2; ++i) {
        pad_zero = pad_zero && padded.drug_attention.gates_post[h][i] == 0.0 &&
                   padded.drug_attention.gates_pre[h][i] == 0.0;
      }
      for (std::size_t i = lp; i < lp + 3; ++i) {
        pad_zero = pad_zero && padded.protein_attention.gates_post[h][i] == 0.0;
      }
    }
  }
  c.pass = worst_sum < 1e-9 && pad_zero && worst_pad_shift <= 1e-9;
  c.detail = "worst sum dev " + fmt(worst_sum, 2) + ", worst pad shift " +
             fmt(worst_pad_shift, 2) + ", pad gates " + (pad_zero ? "exact 0" : "NONZERO");
  c.seconds = timer.seconds();
  return c;
}

// ------------------------------------------------------------- criterion 4

Criterion permutation_laws() {
  Timer timer;
  Criterion c;
  c.name = "permutation-laws";
  std::mt19937_64 rng(9001);
  AttentionConfig cfg;
  cfg.num_heads = 2;
  cfg.feature_dim = 8;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t lk = 3 + rng() % 6, lq = 2 + rng() % 6;
    auto keys = Tensor::randn({lk, 8}, rng, 1.0, false);
    auto queries = Tensor::randn({lq, 8}, rng, 1.0, false);
    Graph g;
    auto base = gated_attention_vector(g, keys, lk, queries, lq, cfg);

    std::vector<std::size_t> qperm(lq), kperm(lk);
    std::iota(qperm.begin(), qperm.end(), 0);
    std::iota(kperm.begin(), kperm.end(), 0);
    std::shuffle(qperm.begin(), qperm.end(), rng);
    std::shuffle(kperm.begin(), kperm.end(), rng);

    auto qshuf = Tensor::zeros({lq, 8});
    for (std::size_t i = 0; i < lq; ++i) {
      for (std::size_t j = 0; j < 8; ++j) qshuf->at(i, j) = queries->at(qperm[i], j);
    }
    auto inv = gated_attention_vector(g, keys, lk, qshuf, lq, cfg);
    auto kshuf = Tensor::zeros({lk, 8});
    for (std::size_t i = 0; i < lk; ++i) {
      for (std::size_t j = 0; j < 8; ++j) kshuf->at(i, j) = keys->at(kperm[i], j);
    }
    auto equiv = gated_attention_vector(g, kshuf, lk, queries, lq, cfg);
    for (std::size_t h = 0; h < 2; ++h) {
      for (std::size_t i = 0; i < lk; ++i) {
        worst = std::max(worst, std::fabs(inv[h]->values[i] - base[h]->values[i]));
        worst = std::max(worst, std::fabs(equiv[h]->values[i] - base[h]->values[kperm[i]]));
      }
    }
  }
  c.pass = worst <= 1e-12;
  c.detail = "100 trials, worst deviation " + fmt(worst, 2);
  c.seconds = timer.seconds();
  return c;
}

// ------------------------------------------------------------- criterion 5

Criterion c_index_oracle() {
  Timer timer;
  Criterion c;
  c.name = "c-index-oracle";
  std::mt19937_64 rng(777);
  std::normal_distribution<double> dist(0.0, 1.0);
  bool exact = true;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng() % 49;
    std::vector<double> pred(n), truth(n);
    for (auto& v : pred) v = std::round(dist(rng) * 4.0) / 4.0;  // quantized: pred ties
    for (auto& v : truth) v = std::round(dist(rng) * 2.0) / 2.0;
    bool orderable = false;
    for (std::size_t i = 1; i < n; ++i) orderable = orderable || truth[i] != truth[0];
    if (!orderable) truth[0] += 1.0;

    std::size_t pairs = 0, wins = 0, ties = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (truth[i] > truth[j]) {
          ++pairs;
          if (pred[i] > pred[j]) ++wins;
          if (pred[i] == pred[j]) ++ties;
        }
      }
    }
    const double brute = (wins + 0.5 * ties) / static_cast<double>(pairs);
    exact = exact && c_index(pred, truth) == brute;
  }
  std::vector<double> distinct = {3.0, 1.0, 4.0, 1.5, 9.0, 2.6};
  exact = exact && c_index(distinct, distinct) == 1.0;
  c.pass = exact;
  c.detail = "200 random vectors with ties, exact match; c(truth,truth)=1";
  c.seconds = timer.seconds();
  return c;
}

// ------------------------------------------------------------- criterion 6

Criterion overfit_smoke() {
  Timer timer;
  Criterion c;
  c.name = "overfit-smoke";
  SyntheticSpec spec;
  spec.n_drugs = 4;
  spec.n_targets = 2;
  spec.drug_len_min = 10;
  spec.drug_len_max = 16;
  spec.protein_len_min = 20;
  spec.protein_len_max = 30;
  spec.noise_sigma = 0.2;
  spec.seed = 3;
  auto data = gen_synthetic(spec);

  RunConfig config;
  config.embed_dim = 16;
  config.max_len_drug = 16;
  config.max_len_protein = 30;
  config.head_hidden = 16;
  config.lr = 0.01;
  config.batch_size = 2;
  config.epochs = 500;
  config.seed = 6;
  config.test_fraction = 0.0;
  auto prepared = prepare_dataset(data.records, config);

  TrainLog log;
  (void)train_model(prepared, &log);
  const double final_mse = log.epochs.back().train_mse;
  c.seconds = timer.seconds();
  c.pass = final_mse < 0.01 && c.seconds < 120.0;
  c.detail = "8 records, 500 epochs, final train MSE " + fmt(final_mse, 3) +
             (c.seconds < 120.0 ? "" : "; OVER TIME BUDGET");
  return c;
}

// ------------------------------------------------- criteria 7/8/10 fixture

std::vector<SeedRun> train_synthetic_runs(const std::vector<AffinityRecord>& records,
                                          std::string* detail) {
  std::vector<SeedRun> runs;
  std::ostringstream info;
  for (std::uint64_t seed : {101, 102, 103, 104, 105}) {
    SeedRun run;
    run.seed = seed;
    run.gca_data = prepare_dataset(records, synthetic_config("gca", seed));
    run.gca_model = train_model(run.gca_data);
    run.gca_report = evaluate(run.gca_model, run.gca_data.test);
    run.gca_interaction_params = parameter_count(run.gca_model, true);

    PreparedData none_data = prepare_dataset(records, synthetic_config("none", seed));
    DtiModel none_model = train_model(none_data);
    run.none_report = evaluate(none_model, none_data.test);
    run.none_interaction_params = parameter_count(none_model, true);

    info << " seed " << seed << ": gca " << fmt(run.gca_report.mse, 3) << "/"
         << fmt(run.gca_report.c_index, 3) << " vs none " << fmt(run.none_report.mse, 3)
         << "/" << fmt(run.none_report.c_index, 3) << ";";
    runs.push_back(std::move(run));
  }
  if (detail) *detail = info.str();
  return runs;
}

Criterion relative_improvement(const std::vector<SeedRun>& runs, const std::string& info,
                               double fixture_seconds) {
  Criterion c;
  c.name = "synthetic-relative-improvement";
  std::size_t wins = 0;
  bool matched = true;
  for (const auto& run : runs) {
    const double ref = static_cast<double>(run.gca_interaction_params);
    matched = matched &&
              std::fabs(static_cast<double>(run.none_interaction_params) - ref) / ref <= 0.05;
    if (run.gca_report.mse < run.none_report.mse &&
        run.gca_report.c_index > run.none_report.c_index) {
      ++wins;
    }
  }
  c.seconds = fixture_seconds;
  c.pass = wins >= 3 && matched && fixture_seconds < 1800.0;
  c.detail = std::to_string(wins) + "/5 seeds win both metrics;" + info +
             (matched ? " params matched within 5%" : " PARAM MISMATCH") +
             (fixture_seconds < 1800.0 ? "" : "; OVER TIME BUDGET");
  return c;
}

Criterion site_hit(const std::vector<SeedRun>& runs,
                   const std::vector<AffinityRecord>& records, const SiteMap& sites) {
  Timer timer;
  Criterion c;
  c.name = "synthetic-site-hit";
  double model_sum = 0.0, chance_sum = 0.0;
  for (const auto& run : runs) {
    const auto& cfg = run.gca_data.config;
    std::vector<std::vector<std::size_t>> best[2];
    std::vector<std::vector<std::size_t>> true_sites;
    std::vector<std::size_t> valid_lens;
    for (const auto& rec : records) {
      auto it = sites.find({rec.drug_id, rec.target_id});
      if (it == sites.end() || it->second.empty()) continue;
      auto drug = tokenize(rec.smiles, run.gca_data.drug_vocab, cfg.max_len_drug,
                           SequenceKind::Drug);
      auto protein = tokenize(rec.fasta, run.gca_data.protein_vocab, cfg.max_len_protein,
                              SequenceKind::Protein);
      auto ranking = extract_attention(run.gca_model, drug, protein);
      for (std::size_t h = 0; h < 2; ++h) {
        std::vector<std::size_t> order;
        for (const auto& rp : ranking.protein_heads[h]) order.push_back(rp.position);
        best[h].push_back(std::move(order));
      }
      true_sites.push_back(it->second);
      valid_lens.push_back(protein.valid_len);
    }
    const double rate = std::max(site_hit_rate(best[0], true_sites, 10.0, 1),
                                 site_hit_rate(best[1], true_sites, 10.0, 1));
    // Monte-Carlo chance: uniformly random rankings on the same examples
    std::mt19937_64 chance_rng(run.seed * 7919);
    double chance = 0.0;
    const int kTrials = 5;
    for (int trial = 0; trial < kTrials; ++trial) {
      std::vector<std::vector<std::size_t>> shuffled;
      shuffled.reserve(valid_lens.size());
      for (std::size_t len : valid_lens) {
        std::vector<std::size_t> order(len);
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), chance_rng);
        shuffled.push_back(std::move(order));
      }
      chance += site_hit_rate(shuffled, true_sites, 10.0, 1);
    }
    chance /= kTrials;
    model_sum += rate;
    chance_sum += chance;
  }
  const double model_mean = model_sum / 5.0;
  const double chance_mean = chance_sum / 5.0;
  c.pass = model_mean - chance_mean >= 0.15;
  c.detail = "top-10% best-head hit " + fmt(model_mean, 3) + " vs chance " +
             fmt(chance_mean, 3) + " (margin " + fmt(model_mean - chance_mean, 3) + ")";
  c.seconds = timer.seconds();
  return c;
}

// ------------------------------------------------------------- criterion 9

Criterion fig2_diagnostic(const std::vector<AffinityRecord>& records) {
  Timer timer;
  Criterion c;
  c.name = "decoder-mixing-diagnostic";
  auto config_for = [&](const std::string& mode) {
    RunConfig config = synthetic_config(mode, 7);
    config.match_params = false;
    config.embed_dim = 16;
    config.lr = 1e-3;
    config.epochs = 6;
    return config;
  };
  try {
    auto decoder_run = run_simgrid(prepare_dataset(records, config_for("decoder")), 48);
    auto gca_run = run_simgrid(prepare_dataset(records, config_for("gca")), 48);
    c.pass = decoder_run.epochs_protein_mixed >= 1 && gca_run.epochs_protein_mixed == 0;
    c.detail = "decoder mixed epochs " + std::to_string(decoder_run.epochs_protein_mixed) +
               "/6, gca " + std::to_string(gca_run.epochs_protein_mixed) + "/6";
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Numeric) {
      // divergence escape hatch: report-only
      c.pass = true;
      c.detail = std::string("report-only, decoder training diverged: ") + e.what();
    } else {
      throw;
    }
  }
  c.seconds = timer.seconds();
  return c;
}

// ------------------------------------------------------------ criterion 10

Criterion mutation_sanity(const std::vector<SeedRun>& runs,
                          const std::vector<AffinityRecord>& records, const SiteMap& sites) {
  Timer timer;
  Criterion c;
  c.name = "mutation-rank-shift";
  bool identity_zero = true, permutations_ok = true;
  std::size_t shifted_seeds = 0;
  for (const auto& run : runs) {
    const auto& cfg = run.gca_data.config;
    // first record with an annotated site, in dataset order
    const AffinityRecord* chosen = nullptr;
    const std::vector<std::size_t>* chosen_sites = nullptr;
    for (const auto& rec : records) {
      auto it = sites.find({rec.drug_id, rec.target_id});
      if (it != sites.end() && !it->second.empty()) {
        chosen = &rec;
        chosen_sites = &it->second;
        break;
      }
    }
    if (!chosen) continue;
    auto drug = tokenize(chosen->smiles, run.gca_data.drug_vocab, cfg.max_len_drug,
                         SequenceKind::Drug);
    auto protein = tokenize(chosen->fasta, run.gca_data.protein_vocab, cfg.max_len_protein,
                            SequenceKind::Protein);
    const std::size_t pos = (*chosen_sites)[1];  // center of the first planted run

    // identity mutation: zero shift on every reported position, and the
    // full ranking itself is untouched
    const char original = chosen->fasta[pos];
    auto same = mutation_rank_shift(run.gca_model, drug, protein, pos, original,
                                    run.gca_data.protein_vocab);
    for (const auto& head : same.per_head) {
      for (const auto& row : head) identity_zero = identity_zero && row.delta == 0;
    }
    for (const auto& row : same.averaged) identity_zero = identity_zero && row.delta == 0;
    {
      TokenSequence unchanged = protein;
      unchanged.ids[pos] = run.gca_data.protein_vocab.id_of(original);
      auto before_rank = extract_attention(run.gca_model, drug, protein);
      auto after_rank = extract_attention(run.gca_model, drug, unchanged);
      for (std::size_t h = 0; h < before_rank.protein_heads.size(); ++h) {
        for (std::size_t r = 0; r < before_rank.protein_heads[h].size(); ++r) {
          identity_zero = identity_zero && before_rank.protein_heads[h][r].position ==
                                               after_rank.protein_heads[h][r].position;
        }
      }
    }

    // rank lists are permutations of 1..valid_len
    auto ranking = extract_attention(run.gca_model, drug, protein);
    for (const auto& head : ranking.protein_heads) {
      std::vector<bool> seen(protein.valid_len, false);
      bool ok = head.size() == protein.valid_len;
      for (const auto& rp : head) {
        if (rp.position >= protein.valid_len || seen[rp.position]) ok = false;
        if (rp.position < protein.valid_len) seen[rp.position] = true;
      }
      permutations_ok = permutations_ok && ok;
    }

    // real mutation at the planted site: the neighborhood must rerank
    auto mutated = mutation_rank_shift(run.gca_model, drug, protein, pos, 'A',
                                       run.gca_data.protein_vocab);
    bool shifted = false;
    for (const auto& head : mutated.per_head) {
      for (const auto& row : head) shifted = shifted || row.delta != 0;
    }
    for (const auto& row : mutated.averaged) shifted = shifted || row.delta != 0;
    if (shifted) ++shifted_seeds;
  }
  c.pass = identity_zero && permutations_ok && shifted_seeds >= 3;
  c.detail = std::string("identity shift ") + (identity_zero ? "0" : "NONZERO") +
             ", permutations " + (permutations_ok ? "valid" : "INVALID") +
             ", site mutation shifted ranks in " + std::to_string(shifted_seeds) + "/5 seeds";
  c.seconds = timer.seconds();
  return c;
}

// ------------------------------------------------------------ criterion 11

Criterion checkpoint_roundtrip() {
  Timer timer;
  Criterion c;
  c.name = "checkpoint-roundtrip";
  RunConfig rc;
  rc.embed_dim = 8;
  rc.max_len_drug = 12;
  rc.max_len_protein = 20;
  rc.drug_vocab_size = 9;
  rc.protein_vocab_size = 13;
  rc.head_hidden = 16;
  rc.seed = 4242;
  auto model = DtiModel::init(to_model_config(rc), rc.seed);
  std::mt19937_64 rng(606);
  std::normal_distribution<double> dist(0.0, 0.05);
  for (auto& t : model.parameters()) {
    for (auto& v : t->values) v += dist(rng);
  }
  const std::string path = "acceptance_roundtrip.tmp.ckpt";
  save_checkpoint(model, canonical_text(rc), path);
  auto restored = load_model(path);
  std::size_t identical = 0;
  for (int trial = 0; trial < 100; ++trial) {
    auto drug = random_tokens(12, 1 + rng() % 12, 9, SequenceKind::Drug, rng);
    auto protein = random_tokens(20, 1 + rng() % 20, 13, SequenceKind::Protein, rng);
    Graph g1(false), g2(false);
    const double a = forward(g1, model, drug, protein).prediction->scalar();
    const double b = forward(g2, restored, drug, protein).prediction->scalar();
    if (a == b) ++identical;
  }
  std::remove(path.c_str());
  c.pass = identical == 100;
  c.detail = std::to_string(identical) + "/100 predictions bit-identical after reload";
  c.seconds = timer.seconds();
  return c;
}

void report(const Criterion& c, int& failures) {
  std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.name;
  for (std::size_t i = c.name.size(); i < 34; ++i) std::cout << ' ';
  std::cout << c.detail << " (" << fmt(c.seconds, 3) << "s)" << std::endl;
  if (!c.pass) ++failures;
}

}  // namespace

int main() {
  Timer total;
  int failures = 0;

  report(gradient_suite(), failures);
  report(sparsemax_correctness(), failures);
  report(normalization_invariants(), failures);
  report(permutation_laws(), failures);
  report(c_index_oracle(), failures);
  report(overfit_smoke(), failures);

  // shared synthetic task for the relative-improvement, site-hit and
  // mutation criteria
  auto data = gen_synthetic(synthetic_task());
  Timer fixture_timer;
  std::string info;
  auto runs = train_synthetic_runs(data.records, &info);
  const double fixture_seconds = fixture_timer.seconds();
  report(relative_improvement(runs, info, fixture_seconds), failures);
  report(site_hit(runs, data.records, data.sites), failures);
  report(fig2_diagnostic(data.records), failures);
  report(mutation_sanity(runs, data.records, data.sites), failures);
  report(checkpoint_roundtrip(), failures);

  std::cout << (failures == 0 ? "ACCEPTANCE: all criteria passed"
                              : "ACCEPTANCE: " + std::to_string(failures) + " criteria FAILED")
            << " (total " << fmt(total.seconds(), 3) << "s)" << std::endl;
  return failures;
}
