#pragma once

#include <vector>

#include "gca/metrics.hpp"
#include "gca/model.hpp"

namespace gca {

EvalReport evaluate(const DtiModel& model, const std::vector<TrainExample>& examples);

struct RankShiftRow {
  std::size_t position = 0;
  std::size_t old_rank = 0;  // rank 1 = highest gate weight
  std::size_t new_rank = 0;
  long long delta = 0;  // old_rank - new_rank; positive means the position moved up
};

struct MutationReport {
  std::size_t position = 0;
  char old_residue = '?';
  char new_residue = '?';
  std::vector<std::vector<RankShiftRow>> per_head;  // mutated position and +-2 neighbors
  std::vector<RankShiftRow> averaged;               // ranks of the head-averaged gate
};

// Reranks the protein-side attention before and after a single-residue
// substitution. The model must run in gca mode.
MutationReport mutation_rank_shift(const DtiModel& model, const TokenSequence& drug,
                                   const TokenSequence& protein, std::size_t position,
                                   char new_residue, const Vocabulary& protein_vocab);

}  // namespace gca
