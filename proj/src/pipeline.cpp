#include "gca/pipeline.hpp"

#include <algorithm>

namespace gca {

std::vector<TrainExample> tokenize_records(const std::vector<AffinityRecord>& records,
                                           const Vocabulary& drug_vocab,
                                           const Vocabulary& protein_vocab,
                                           std::size_t max_len_drug,
                                           std::size_t max_len_protein) {
  std::vector<TrainExample> out;
  out.reserve(records.size());
  for (const auto& rec : records) {
    TrainExample ex;
    ex.drug = tokenize(rec.smiles, drug_vocab, max_len_drug, SequenceKind::Drug);
    ex.protein = tokenize(rec.fasta, protein_vocab, max_len_protein, SequenceKind::Protein);
    ex.affinity = rec.affinity;
    out.push_back(std::move(ex));
  }
  return out;
}

PreparedData prepare_dataset(std::vector<AffinityRecord> records, RunConfig config) {
  if (records.empty()) throw_data("prepare_dataset: no records");
  Split split = split_dataset(std::move(records), config.test_fraction, config.seed);
  if (split.train.empty()) throw_data("prepare_dataset: empty train split");

  std::vector<std::string> smiles, fasta;
  for (const auto& rec : split.train) {
    smiles.push_back(rec.smiles);
    fasta.push_back(rec.fasta);
  }
  PreparedData data;
  data.drug_vocab = Vocabulary::build(smiles, SequenceKind::Drug);
  data.protein_vocab = Vocabulary::build(fasta, SequenceKind::Protein);

  if (config.drug_vocab_size == 0) {
    config.drug_vocab_size = data.drug_vocab.size();
  } else if (config.drug_vocab_size != data.drug_vocab.size()) {
    throw_config("prepare_dataset: configured drug_vocab_size " +
                 std::to_string(config.drug_vocab_size) + " does not match the data's " +
                 std::to_string(data.drug_vocab.size()));
  }
  if (config.protein_vocab_size == 0) {
    config.protein_vocab_size = data.protein_vocab.size();
  } else if (config.protein_vocab_size != data.protein_vocab.size()) {
    throw_config("prepare_dataset: configured protein_vocab_size " +
                 std::to_string(config.protein_vocab_size) + " does not match the data's " +
                 std::to_string(data.protein_vocab.size()));
  }

  if (config.match_params && config.interaction != "gca") {
    RunConfig reference = config;
    reference.interaction = "gca";
    config.head_hidden =
        matched_head_hidden(to_model_config(reference), to_model_config(config));
    config.match_params = false;  // resolved; checkpoints carry the literal width
  }

  data.train = tokenize_records(split.train, data.drug_vocab, data.protein_vocab,
                                config.max_len_drug, config.max_len_protein);
  data.test = tokenize_records(split.test, data.drug_vocab, data.protein_vocab,
                               config.max_len_drug, config.max_len_protein);
  data.train_records = std::move(split.train);
  data.test_records = std::move(split.test);
  data.config = std::move(config);
  return data;
}

DtiModel train_model(const PreparedData& data, TrainLog* log,
                     const EpochCallback& on_epoch) {
  DtiModel model = DtiModel::init(to_model_config(data.config), data.config.seed);
  TrainLog local = train(model, data.train, data.test.empty() ? nullptr : &data.test,
                         to_train_config(data.config), on_epoch);
  if (log) *log = std::move(local);
  return model;
}

SimgridRun run_simgrid(const PreparedData& data, std::size_t sample_cap) {
  if (data.config.interaction != "gca" && data.config.interaction != "decoder") {
    throw_config("simgrid: interaction mode must be gca or decoder, got " +
                 data.config.interaction);
  }
  const std::vector<TrainExample>& pool = data.test.empty() ? data.train : data.test;
  const std::size_t n = std::min<std::size_t>(sample_cap, pool.size());
  if (n < 2) throw_data("simgrid: need at least two sample examples");

  SimgridRun run;
  auto callback = [&](const DtiModel& model, const EpochStats& stats) {
    std::vector<std::vector<double>> d, d_att, p, p_att;
    for (std::size_t i = 0; i < n; ++i) {
      Graph g(false);
      auto fr = forward(g, model, pool[i].drug, pool[i].protein);
      d.push_back(fr.pooled_drug_in->values);
      d_att.push_back(fr.pooled_drug_out->values);
      p.push_back(fr.pooled_protein_in->values);
      p_att.push_back(fr.pooled_protein_out->values);
    }
    SimgridEpoch epoch;
    epoch.stats = stats;
    epoch.grid = similarity_grid(d, d_att, p, p_att, stats.epoch);
    // labels: 0=d, 1=d_att, 2=p, 3=p_att
    if (epoch.grid.mean_cosine[3][0] > epoch.grid.mean_cosine[3][2]) {
      ++run.epochs_protein_mixed;
    }
    run.epochs.push_back(std::move(epoch));
  };
  (void)train_model(data, nullptr, callback);
  return run;
}

}  // namespace gca
