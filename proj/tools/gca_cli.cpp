// Command-line surface: dataset generation, training, evaluation and the
// interpretability exports. All outputs are CSV/JSON with a comment line
// recording the config hash and seed. Exit codes: 0 success, 2 data error,
// 3 config error, 4 numeric failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "gca/gradcheck_suite.hpp"
#include "gca/pipeline.hpp"

namespace {

using json = nlohmann::json;

struct CommonOpts {
  std::string config_path;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("-c,--config", opts.config_path, "flat key=value config file");
  cmd->add_option("--set", opts.overrides, "override a config key (key=value, repeatable)");
}

gca::RunConfig resolve_config(const CommonOpts& opts) {
  gca::RunConfig config;
  if (!opts.config_path.empty()) config = gca::parse_config_file(opts.config_path);
  gca::apply_overrides(config, opts.overrides);
  return config;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) gca::throw_data("cannot open " + path + " for writing");
  return out;
}

void write_preamble(std::ostream& out, const gca::RunConfig& config,
                    const std::string& header) {
  out << "# config_hash=" << gca::config_hash_hex(config) << " seed=" << config.seed << "\n";
  out << header << "\n";
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::vector<gca::AffinityRecord> choose_split(gca::Split sp, const std::string& which) {
  if (which == "train") return std::move(sp.train);
  if (which == "test") return std::move(sp.test);
  if (which == "all") {
    auto all = std::move(sp.train);
    all.insert(all.end(), sp.test.begin(), sp.test.end());
    return all;
  }
  gca::throw_config("unknown split '" + which + "' (expected train|test|all)");
}

struct LoadedModel {
  gca::DtiModel model;
  gca::RunConfig config;
  gca::Vocabulary drug_vocab;
  gca::Vocabulary protein_vocab;
};

LoadedModel load_model_bundle(const std::string& checkpoint,
                              const std::vector<std::string>& overrides) {
  gca::RawCheckpoint raw = gca::read_checkpoint(checkpoint);
  gca::RunConfig config = gca::parse_config_text(raw.config_text);
  gca::apply_overrides(config, overrides);
  gca::DtiModel model = gca::DtiModel::init(gca::to_model_config(config), config.seed);
  gca::assign_parameters(model, raw.tensors);
  return LoadedModel{std::move(model), std::move(config),
                     gca::Vocabulary::load(gca::drug_vocab_path(checkpoint)),
                     gca::Vocabulary::load(gca::protein_vocab_path(checkpoint))};
}

std::vector<gca::TrainExample> tokenize_for(const LoadedModel& lm,
                                            const std::vector<gca::AffinityRecord>& records) {
  return gca::tokenize_records(records, lm.drug_vocab, lm.protein_vocab,
                               lm.config.max_len_drug, lm.config.max_len_protein);
}

// === subcommand bodies ===

int cmd_gen(const CommonOpts& common, const std::string& out_prefix) {
  gca::RunConfig config = resolve_config(common);
  gca::SyntheticSpec spec = gca::to_synthetic_spec(config);
  gca::SyntheticData data = gca::gen_synthetic(spec);
  gca::write_records_tsv(data.records, out_prefix + ".tsv");
  gca::write_sites_file(data.sites, out_prefix + ".sites.tsv");
  std::size_t with_sites = 0;
  for (const auto& [key, positions] : data.sites) {
    if (!positions.empty()) ++with_sites;
  }
  std::cout << "wrote " << data.records.size() << " records to " << out_prefix << ".tsv ("
            << with_sites << " with active sites)\n";
  return 0;
}

int cmd_train(const CommonOpts& common, const std::string& data_path,
              const std::string& out_prefix, bool quiet) {
  gca::RunConfig config = resolve_config(common);
  auto records = gca::load_records(data_path);
  gca::PreparedData prepared = gca::prepare_dataset(std::move(records), config);

  const std::string ckpt = out_prefix + ".ckpt";
  gca::TrainLog log;
  gca::DtiModel model = gca::train_model(
      prepared, &log, [&](const gca::DtiModel&, const gca::EpochStats& stats) {
        if (!quiet) {
          std::cout << "epoch " << stats.epoch << " train_mse " << stats.train_mse
                    << " val_mse " << stats.val_mse << " val_cindex " << stats.val_cindex
                    << "\n";
        }
      });

  gca::save_checkpoint(model, gca::canonical_text(prepared.config), ckpt);
  prepared.drug_vocab.save(gca::drug_vocab_path(ckpt));
  prepared.protein_vocab.save(gca::protein_vocab_path(ckpt));

  auto csv = open_output(out_prefix + ".train.csv");
  write_preamble(csv, prepared.config, "epoch,train_mse,val_mse,val_cindex");
  for (const auto& e : log.epochs) {
    csv << e.epoch << ',' << fmt(e.train_mse) << ',' << fmt(e.val_mse) << ','
        << fmt(e.val_cindex) << "\n";
  }
  std::cout << "checkpoint: " << ckpt << "\n";
  std::cout << "parameters: total " << gca::parameter_count(model) << ", interaction "
            << gca::parameter_count(model, true) << "\n";
  return 0;
}

int cmd_eval(const CommonOpts& common, const std::string& checkpoint,
             const std::string& data_path, const std::string& out_path,
             const std::string& split) {
  LoadedModel lm = load_model_bundle(checkpoint, common.overrides);
  auto records = gca::load_records(data_path);
  std::vector<gca::AffinityRecord> chosen = choose_split(
      gca::split_dataset(std::move(records), lm.config.test_fraction, lm.config.seed), split);
  if (chosen.empty()) gca::throw_data("eval: selected split is empty");
  auto examples = tokenize_for(lm, chosen);
  gca::EvalReport report = gca::evaluate(lm.model, examples);
  auto csv = open_output(out_path);
  write_preamble(csv, lm.config, "mse,c_index,n_pairs_evaluated");
  csv << fmt(report.mse) << ',' << fmt(report.c_index) << ',' << report.n_pairs_evaluated
      << "\n";
  std::cout << "mse " << report.mse << " c_index " << report.c_index << " pairs "
            << report.n_pairs_evaluated << "\n";
  return 0;
}

json ranking_to_json(const std::vector<std::vector<gca::RankedPosition>>& heads) {
  json arr = json::array();
  for (std::size_t h = 0; h < heads.size(); ++h) {
    json positions = json::array(), weights = json::array();
    for (const auto& rp : heads[h]) {
      positions.push_back(rp.position);
      weights.push_back(rp.weight);
    }
    arr.push_back({{"head", h}, {"positions", positions}, {"weights", weights}});
  }
  return arr;
}

int cmd_explain(const CommonOpts& common, const std::string& checkpoint,
                const std::string& data_path, const std::string& out_path,
                const std::string& split, std::size_t limit) {
  LoadedModel lm = load_model_bundle(checkpoint, common.overrides);
  auto records = gca::load_records(data_path);
  std::vector<gca::AffinityRecord> chosen = choose_split(
      gca::split_dataset(std::move(records), lm.config.test_fraction, lm.config.seed), split);
  if (chosen.empty()) gca::throw_data("explain: selected split is empty");
  if (limit > 0 && chosen.size() > limit) chosen.resize(limit);

  json doc;
  doc["config_hash"] = gca::config_hash_hex(lm.config);
  doc["seed"] = lm.config.seed;
  doc["examples"] = json::array();
  for (const auto& rec : chosen) {
    auto drug = gca::tokenize(rec.smiles, lm.drug_vocab, lm.config.max_len_drug,
                              gca::SequenceKind::Drug);
    auto protein = gca::tokenize(rec.fasta, lm.protein_vocab, lm.config.max_len_protein,
                                 gca::SequenceKind::Protein);
    gca::AttentionRanking ranking = gca::extract_attention(lm.model, drug, protein);
    doc["examples"].push_back({{"drug_id", rec.drug_id},
                               {"target_id", rec.target_id},
                               {"prediction", ranking.prediction},
                               {"drug_attention", ranking_to_json(ranking.drug_heads)},
                               {"target_attention", ranking_to_json(ranking.protein_heads)}});
  }
  auto out = open_output(out_path);
  out << doc.dump(2) << "\n";
  std::cout << "explained " << doc["examples"].size() << " examples -> " << out_path << "\n";
  return 0;
}

int cmd_simgrid(const CommonOpts& common, const std::string& data_path,
                const std::string& out_path, std::size_t sample_cap) {
  gca::RunConfig config = resolve_config(common);
  auto records = gca::load_records(data_path);
  gca::PreparedData prepared = gca::prepare_dataset(std::move(records), config);
  gca::SimgridRun run = gca::run_simgrid(prepared, sample_cap);

  auto csv = open_output(out_path);
  write_preamble(csv, prepared.config, "epoch,row,col,mean_cosine");
  const auto& labels = gca::SimilarityGrid::labels();
  std::size_t excluded = 0;
  for (const auto& epoch : run.epochs) {
    excluded += epoch.grid.excluded_zero_norm;
    for (std::size_t a = 0; a < 4; ++a) {
      for (std::size_t b = 0; b < 4; ++b) {
        csv << epoch.stats.epoch << ',' << labels[a] << ',' << labels[b] << ','
            << fmt(epoch.grid.mean_cosine[a][b]) << "\n";
      }
    }
  }
  if (excluded > 0) {
    std::cerr << "warning: excluded " << excluded << " zero-norm pooled vectors from the means\n";
  }
  std::cout << "recorded " << run.epochs.size() << " epochs; protein features mixed toward "
            << "drugs in " << run.epochs_protein_mixed << " of them\n";
  return 0;
}

int cmd_sitehit(const CommonOpts& common, const std::string& checkpoint,
                const std::string& data_path, const std::string& sites_path,
                const std::string& out_path) {
  LoadedModel lm = load_model_bundle(checkpoint, common.overrides);
  if (lm.config.interaction != "gca") {
    gca::throw_capability("sitehit requires a gca checkpoint");
  }
  auto records = gca::load_records(data_path);
  gca::SiteMap sites = gca::load_sites_file(sites_path);

  const std::size_t heads = lm.config.num_heads;
  std::vector<std::vector<std::vector<std::size_t>>> rankings(heads + 1);  // +1 = averaged
  std::vector<std::vector<std::size_t>> true_sites;
  for (const auto& rec : records) {
    auto it = sites.find({rec.drug_id, rec.target_id});
    if (it == sites.end()) continue;
    auto drug = gca::tokenize(rec.smiles, lm.drug_vocab, lm.config.max_len_drug,
                              gca::SequenceKind::Drug);
    auto protein = gca::tokenize(rec.fasta, lm.protein_vocab, lm.config.max_len_protein,
                                 gca::SequenceKind::Protein);
    gca::Graph g(false);
    auto fr = gca::forward(g, lm.model, drug, protein);
    if (!fr.protein_attention || fr.protein_attention->gates_post.size() < heads) {
      gca::throw_capability("sitehit: protein attention disabled");
    }
    const auto& gates = fr.protein_attention->gates_post;
    std::vector<double> averaged(protein.valid_len, 0.0);
    for (std::size_t h = 0; h < heads; ++h) {
      std::vector<gca::RankedPosition> rp;
      for (std::size_t pos = 0; pos < protein.valid_len; ++pos) {
        rp.push_back({pos, gates[h][pos]});
        averaged[pos] += gates[h][pos] / static_cast<double>(heads);
      }
      std::stable_sort(rp.begin(), rp.end(), [](const auto& a, const auto& b) {
        return a.weight > b.weight;
      });
      std::vector<std::size_t> order;
      for (const auto& r : rp) order.push_back(r.position);
      rankings[h].push_back(std::move(order));
    }
    std::vector<gca::RankedPosition> rp;
    for (std::size_t pos = 0; pos < protein.valid_len; ++pos) rp.push_back({pos, averaged[pos]});
    std::stable_sort(rp.begin(), rp.end(), [](const auto& a, const auto& b) {
      return a.weight > b.weight;
    });
    std::vector<std::size_t> order;
    for (const auto& r : rp) order.push_back(r.position);
    rankings[heads].push_back(std::move(order));
    // clamp sites to the tokenized valid length
    std::vector<std::size_t> clamped;
    for (std::size_t pos : it->second) {
      if (pos < protein.valid_len) clamped.push_back(pos);
    }
    true_sites.push_back(std::move(clamped));
  }
  if (true_sites.empty()) gca::throw_data("sitehit: no records with site annotations");

  auto csv = open_output(out_path);
  write_preamble(csv, lm.config, "k_percent,neighborhood,head,hit_rate,n_scored,n_skipped");
  for (std::size_t k = 1; k <= 20; ++k) {
    for (std::size_t nb = 0; nb <= 1; ++nb) {
      for (std::size_t h = 0; h <= heads; ++h) {
        std::size_t skipped = 0;
        const double rate = gca::site_hit_rate(rankings[h], true_sites,
                                               static_cast<double>(k), nb, &skipped);
        csv << k << ',' << nb << ',' << (h == heads ? std::string("avg") : std::to_string(h))
            << ',' << fmt(rate) << ',' << (true_sites.size() - skipped) << ',' << skipped
            << "\n";
      }
    }
  }
  std::cout << "scored " << true_sites.size() << " records -> " << out_path << "\n";
  return 0;
}

int cmd_mutate(const CommonOpts& common, const std::string& checkpoint,
               const std::string& data_path, const std::string& drug_id,
               const std::string& target_id, const std::string& smiles,
               const std::string& fasta, std::size_t position, const std::string& residue,
               const std::string& out_path) {
  LoadedModel lm = load_model_bundle(checkpoint, common.overrides);
  if (residue.size() != 1) gca::throw_config("mutate: --residue expects a single character");

  std::string use_smiles = smiles, use_fasta = fasta;
  if (use_smiles.empty() || use_fasta.empty()) {
    if (data_path.empty() || drug_id.empty() || target_id.empty()) {
      gca::throw_config(
          "mutate: provide either --smiles and --fasta, or --data with --drug-id and "
          "--target-id");
    }
    auto records = gca::load_records(data_path);
    bool found = false;
    for (const auto& rec : records) {
      if (rec.drug_id == drug_id && rec.target_id == target_id) {
        use_smiles = rec.smiles;
        use_fasta = rec.fasta;
        found = true;
        break;
      }
    }
    if (!found) {
      gca::throw_data("mutate: pair (" + drug_id + ", " + target_id + ") not in " + data_path);
    }
  }

  auto drug = gca::tokenize(use_smiles, lm.drug_vocab, lm.config.max_len_drug,
                            gca::SequenceKind::Drug);
  auto protein = gca::tokenize(use_fasta, lm.protein_vocab, lm.config.max_len_protein,
                               gca::SequenceKind::Protein);
  gca::MutationReport report = gca::mutation_rank_shift(lm.model, drug, protein, position,
                                                        residue[0], lm.protein_vocab);

  auto csv = open_output(out_path);
  write_preamble(csv, lm.config, "head,position,old_rank,new_rank,delta");
  for (std::size_t h = 0; h < report.per_head.size(); ++h) {
    for (const auto& row : report.per_head[h]) {
      csv << h << ',' << row.position << ',' << row.old_rank << ',' << row.new_rank << ','
          << row.delta << "\n";
    }
  }
  for (const auto& row : report.averaged) {
    csv << "avg," << row.position << ',' << row.old_rank << ',' << row.new_rank << ','
        << row.delta << "\n";
  }
  std::cout << "mutation " << report.old_residue << position << report.new_residue
            << ": wrote rank shifts -> " << out_path << "\n";
  return 0;
}

int cmd_gradcheck(const CommonOpts& common, std::size_t seeds, const std::string& out_path) {
  gca::RunConfig config = resolve_config(common);
  auto results = gca::run_gradcheck_suite(config.seed, seeds);
  std::cout << std::left << std::setw(28) << "op" << std::setw(14) << "max_rel_err"
            << "status\n";
  for (const auto& r : results) {
    std::cout << std::left << std::setw(28) << r.op << std::setw(14)
              << std::scientific << std::setprecision(2) << r.max_rel_err
              << (r.pass ? "pass" : "FAIL") << "\n";
  }
  if (!out_path.empty()) {
    auto csv = open_output(out_path);
    write_preamble(csv, config, "op,max_rel_err,seeds,status");
    for (const auto& r : results) {
      csv << r.op << ',' << fmt(r.max_rel_err) << ',' << r.seeds << ','
          << (r.pass ? "pass" : "fail") << "\n";
    }
  }
  if (!gca::all_passed(results)) {
    gca::throw_numeric("gradcheck: at least one operation failed the finite-difference check");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gated cross-attention drug-target affinity toolkit"};
  app.require_subcommand(1);

  CommonOpts common;
  std::string data_path, out_path, out_prefix, checkpoint, sites_path;
  std::string split = "test";
  std::string drug_id, target_id, smiles, fasta, residue;
  std::size_t limit = 16, sample_cap = 64, position = 0, seeds = 5;
  bool quiet = false;

  auto* gen = app.add_subcommand("gen", "generate a synthetic dataset with planted sites");
  add_common(gen, common);
  gen->add_option("--out", out_prefix, "output prefix (.tsv and .sites.tsv)")->required();

  auto* train = app.add_subcommand("train", "train a model and write a checkpoint");
  add_common(train, common);
  train->add_option("--data", data_path, "dataset TSV")->required();
  train->add_option("--out", out_prefix, "output prefix (.ckpt, vocabs, .train.csv)")
      ->required();
  train->add_flag("--quiet", quiet, "suppress per-epoch output");

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint (MSE, C-index)");
  add_common(eval, common);
  eval->add_option("--checkpoint", checkpoint)->required();
  eval->add_option("--data", data_path)->required();
  eval->add_option("--out", out_path, "EvalReport CSV")->required();
  eval->add_option("--split", split, "train|test|all (default test)");

  auto* explain = app.add_subcommand("explain", "per-example ranked attention JSON");
  add_common(explain, common);
  explain->add_option("--checkpoint", checkpoint)->required();
  explain->add_option("--data", data_path)->required();
  explain->add_option("--out", out_path, "JSON output")->required();
  explain->add_option("--split", split, "train|test|all (default test)");
  explain->add_option("--limit", limit, "max examples (0 = all)");

  auto* simgrid = app.add_subcommand("simgrid", "train and record per-epoch similarity grids");
  add_common(simgrid, common);
  simgrid->add_option("--data", data_path)->required();
  simgrid->add_option("--out", out_path, "long-format CSV")->required();
  simgrid->add_option("--sample", sample_cap, "sample size for the grids (default 64)");

  auto* sitehit = app.add_subcommand("sitehit", "hit-rate-vs-k curves against a sites file");
  add_common(sitehit, common);
  sitehit->add_option("--checkpoint", checkpoint)->required();
  sitehit->add_option("--data", data_path)->required();
  sitehit->add_option("--sites", sites_path)->required();
  sitehit->add_option("--out", out_path)->required();

  auto* mutate = app.add_subcommand("mutate", "rank shifts under a single-residue mutation");
  add_common(mutate, common);
  mutate->add_option("--checkpoint", checkpoint)->required();
  mutate->add_option("--data", data_path);
  mutate->add_option("--drug-id", drug_id);
  mutate->add_option("--target-id", target_id);
  mutate->add_option("--smiles", smiles);
  mutate->add_option("--fasta", fasta);
  mutate->add_option("--position", position, "0-based residue position")->required();
  mutate->add_option("--residue", residue, "replacement residue")->required();
  mutate->add_option("--out", out_path)->required();

  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference check of every op");
  add_common(gradcheck, common);
  gradcheck->add_option("--seeds", seeds, "random seeds per op (default 5)");
  gradcheck->add_option("--out", out_path, "optional CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 3;
  }

  try {
    if (gen->parsed()) return cmd_gen(common, out_prefix);
    if (train->parsed()) return cmd_train(common, data_path, out_prefix, quiet);
    if (eval->parsed()) return cmd_eval(common, checkpoint, data_path, out_path, split);
    if (explain->parsed())
      return cmd_explain(common, checkpoint, data_path, out_path, split, limit);
    if (simgrid->parsed()) return cmd_simgrid(common, data_path, out_path, sample_cap);
    if (sitehit->parsed())
      return cmd_sitehit(common, checkpoint, data_path, sites_path, out_path);
    if (mutate->parsed())
      return cmd_mutate(common, checkpoint, data_path, drug_id, target_id, smiles, fasta,
                        position, residue, out_path);
    if (gradcheck->parsed()) return cmd_gradcheck(common, seeds, out_path);
  } catch (const gca::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
