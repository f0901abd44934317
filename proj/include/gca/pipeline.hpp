#pragma once

#include "gca/analysis.hpp"
#include "gca/config.hpp"

namespace gca {

// Dataset made trainable: split applied, vocabularies built from the train
// split, sequences tokenized, vocabulary sizes (and the param-matched head
// width, when requested) resolved into the config.
struct PreparedData {
  RunConfig config;
  Vocabulary drug_vocab, protein_vocab;
  std::vector<AffinityRecord> train_records, test_records;
  std::vector<TrainExample> train, test;
};

PreparedData prepare_dataset(std::vector<AffinityRecord> records, RunConfig config);

std::vector<TrainExample> tokenize_records(const std::vector<AffinityRecord>& records,
                                           const Vocabulary& drug_vocab,
                                           const Vocabulary& protein_vocab,
                                           std::size_t max_len_drug,
                                           std::size_t max_len_protein);

// Initializes from the prepared config and trains on the prepared split,
// reporting test-split metrics per epoch.
DtiModel train_model(const PreparedData& data, TrainLog* log = nullptr,
                     const EpochCallback& on_epoch = {});

struct SimgridEpoch {
  EpochStats stats;
  SimilarityGrid grid;
};

struct SimgridRun {
  std::vector<SimgridEpoch> epochs;
  std::size_t epochs_protein_mixed = 0;  // epochs with sim(p', d) > sim(p', p)
};

// Trains per the prepared config (interaction gca or decoder) and records
// the pooled-feature similarity grid after every epoch on a fixed sample of
// examples.
SimgridRun run_simgrid(const PreparedData& data, std::size_t sample_cap = 64);

}  // namespace gca
