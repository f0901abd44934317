#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "gca/error.hpp"

namespace gca {

// Probability that pairs ordered by the truth are ordered the same way by
// the predictions; prediction ties earn 0.5. Exact O(n^2) enumeration.
// Errors when the truth has no orderable pairs.
double c_index(const std::vector<double>& pred, const std::vector<double>& truth);

struct EvalReport {
  double mse = 0.0;
  double c_index = 0.0;
  std::size_t n_pairs_evaluated = 0;
};

// Mean pairwise cosine similarities among the pooled feature populations
// d, d', p, p'. Diagonal entries are within-population means over distinct
// pairs; zero-norm vectors are excluded and counted.
struct SimilarityGrid {
  std::array<std::array<double, 4>, 4> mean_cosine{};
  std::size_t step = 0;
  std::size_t excluded_zero_norm = 0;

  static const std::array<const char*, 4>& labels();
};

SimilarityGrid similarity_grid(const std::vector<std::vector<double>>& d,
                               const std::vector<std::vector<double>>& d_att,
                               const std::vector<std::vector<double>>& p,
                               const std::vector<std::vector<double>>& p_att,
                               std::size_t step = 0);

// Per example: take the top ceil(k% * valid_len) ranked positions, dilate
// each by +-neighborhood, and score 1 when the dilated set intersects the
// example's true sites. Returns the mean over examples with non-empty sites;
// n_skipped counts the empty ones.
double site_hit_rate(const std::vector<std::vector<std::size_t>>& rankings,
                     const std::vector<std::vector<std::size_t>>& true_sites,
                     double k_percent, std::size_t neighborhood,
                     std::size_t* n_skipped = nullptr);

}  // namespace gca
