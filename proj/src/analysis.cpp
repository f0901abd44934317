#include "gca/analysis.hpp"

#include <algorithm>
#include <numeric>

namespace gca {

EvalReport evaluate(const DtiModel& model, const std::vector<TrainExample>& examples) {
  if (examples.empty()) throw_data("evaluate: empty example list");
  std::vector<double> preds, truths;
  preds.reserve(examples.size());
  truths.reserve(examples.size());
  double sq = 0.0;
  for (const auto& ex : examples) {
    Graph g(false);
    auto fr = forward(g, model, ex.drug, ex.protein);
    const double pred = fr.prediction->scalar();
    preds.push_back(pred);
    truths.push_back(ex.affinity);
    sq += (pred - ex.affinity) * (pred - ex.affinity);
  }
  EvalReport report;
  report.mse = sq / static_cast<double>(examples.size());
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    for (std::size_t j = 0; j < truths.size(); ++j) {
      if (truths[i] > truths[j]) ++pairs;
    }
  }
  report.n_pairs_evaluated = pairs;
  report.c_index = pairs > 0 ? c_index(preds, truths) : 0.0;
  return report;
}

namespace {

// position -> 1-based rank under the given per-head rankings
std::vector<std::size_t> ranks_from(const std::vector<RankedPosition>& ranked) {
  std::vector<std::size_t> ranks(ranked.size(), 0);
  for (std::size_t r = 0; r < ranked.size(); ++r) ranks[ranked[r].position] = r + 1;
  return ranks;
}

std::vector<RankShiftRow> shift_rows(const std::vector<std::size_t>& before,
                                     const std::vector<std::size_t>& after,
                                     std::size_t position, std::size_t valid_len) {
  std::vector<RankShiftRow> rows;
  const std::size_t lo = position >= 2 ? position - 2 : 0;
  const std::size_t hi = std::min(valid_len - 1, position + 2);
  for (std::size_t pos = lo; pos <= hi; ++pos) {
    RankShiftRow row;
    row.position = pos;
    row.old_rank = before[pos];
    row.new_rank = after[pos];
    row.delta = static_cast<long long>(row.old_rank) - static_cast<long long>(row.new_rank);
    rows.push_back(row);
  }
  return rows;
}

std::vector<RankedPosition> rank_average(const std::vector<std::vector<double>>& gates,
                                         std::size_t valid_len) {
  std::vector<RankedPosition> ranked;
  for (std::size_t pos = 0; pos < valid_len; ++pos) {
    double acc = 0.0;
    for (const auto& gate : gates) acc += gate[pos];
    ranked.push_back({pos, acc / static_cast<double>(gates.size())});
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const RankedPosition& a, const RankedPosition& b) {
                     return a.weight > b.weight;
                   });
  return ranked;
}

}  // namespace

MutationReport mutation_rank_shift(const DtiModel& model, const TokenSequence& drug,
                                   const TokenSequence& protein, std::size_t position,
                                   char new_residue, const Vocabulary& protein_vocab) {
  if (position >= protein.valid_len) {
    throw_index("mutation_rank_shift: position " + std::to_string(position) +
                " outside valid length " + std::to_string(protein.valid_len));
  }
  if (!protein_vocab.contains(new_residue)) {
    throw_data(std::string("mutation_rank_shift: residue '") + new_residue +
               "' not in the protein vocabulary");
  }
  if (model.config.mode != InteractionMode::Gca) {
    throw_capability("mutation_rank_shift requires interaction mode gca");
  }

  TokenSequence mutated = protein;
  mutated.ids[position] = protein_vocab.id_of(new_residue);

  Graph g_before(false), g_after(false);
  auto before = forward(g_before, model, drug, protein);
  auto after = forward(g_after, model, drug, mutated);
  if (!before.protein_attention || before.protein_attention->gates_post.empty() ||
      !after.protein_attention) {
    throw_capability("mutation_rank_shift: protein attention unavailable (direction disabled)");
  }

  MutationReport report;
  report.position = position;
  const std::string& old_sym = protein_vocab.symbol_of(protein.ids[position]);
  report.old_residue = old_sym.size() == 1 ? old_sym[0] : '?';
  report.new_residue = new_residue;

  const auto& gates_before = before.protein_attention->gates_post;
  const auto& gates_after = after.protein_attention->gates_post;
  for (std::size_t h = 0; h < gates_before.size(); ++h) {
    std::vector<RankedPosition> rb, ra;
    for (std::size_t pos = 0; pos < protein.valid_len; ++pos) {
      rb.push_back({pos, gates_before[h][pos]});
      ra.push_back({pos, gates_after[h][pos]});
    }
    auto desc = [](const RankedPosition& a, const RankedPosition& b) {
      return a.weight > b.weight;
    };
    std::stable_sort(rb.begin(), rb.end(), desc);
    std::stable_sort(ra.begin(), ra.end(), desc);
    report.per_head.push_back(
        shift_rows(ranks_from(rb), ranks_from(ra), position, protein.valid_len));
  }
  report.averaged = shift_rows(ranks_from(rank_average(gates_before, protein.valid_len)),
                               ranks_from(rank_average(gates_after, protein.valid_len)),
                               position, protein.valid_len);
  return report;
}

}  // namespace gca
