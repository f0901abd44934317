#include "gca/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace gca {

double c_index(const std::vector<double>& pred, const std::vector<double>& truth) {
  if (pred.size() != truth.size()) {
    throw_dimension("c_index: prediction and truth lengths differ, " +
                    std::to_string(pred.size()) + " vs " + std::to_string(truth.size()));
  }
  if (pred.size() < 2) throw_data("c_index: need at least two examples");
  const std::size_t n = pred.size();
  double credit = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (truth[i] > truth[j]) {
        ++pairs;
        if (pred[i] > pred[j]) {
          credit += 1.0;
        } else if (pred[i] == pred[j]) {
          credit += 0.5;
        }
      }
    }
  }
  if (pairs == 0) throw_data("c_index: all truth values equal, no orderable pairs");
  return credit / static_cast<double>(pairs);
}

const std::array<const char*, 4>& SimilarityGrid::labels() {
  static const std::array<const char*, 4> kLabels = {"d", "d_att", "p", "p_att"};
  return kLabels;
}

namespace {

double vector_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double cosine(const std::vector<double>& a, const std::vector<double>& b,
              double na, double nb) {
  double dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
  return dot / (na * nb);
}

}  // namespace

SimilarityGrid similarity_grid(const std::vector<std::vector<double>>& d,
                               const std::vector<std::vector<double>>& d_att,
                               const std::vector<std::vector<double>>& p,
                               const std::vector<std::vector<double>>& p_att,
                               std::size_t step) {
  const std::array<const std::vector<std::vector<double>>*, 4> pops = {&d, &d_att, &p, &p_att};
  const std::size_t batch = d.size();
  for (const auto* pop : pops) {
    if (pop->size() != batch) {
      throw_dimension("similarity_grid: populations must share the batch size");
    }
  }
  if (batch < 2) throw_data("similarity_grid: need a batch of at least two examples");

  SimilarityGrid grid;
  grid.step = step;
  std::array<std::vector<double>, 4> norms;
  for (std::size_t a = 0; a < 4; ++a) {
    norms[a].resize(batch);
    for (std::size_t i = 0; i < batch; ++i) {
      norms[a][i] = vector_norm((*pops[a])[i]);
      if (norms[a][i] == 0.0) ++grid.excluded_zero_norm;
    }
  }
  for (std::size_t a = 0; a < 4; ++a) {
    for (std::size_t b = a; b < 4; ++b) {
      double acc = 0.0;
      std::size_t count = 0;
      for (std::size_t i = 0; i < batch; ++i) {
        if (norms[a][i] == 0.0) continue;
        const std::size_t j_begin = (a == b) ? i + 1 : 0;
        for (std::size_t j = j_begin; j < batch; ++j) {
          if (norms[b][j] == 0.0) continue;
          acc += cosine((*pops[a])[i], (*pops[b])[j], norms[a][i], norms[b][j]);
          ++count;
        }
      }
      const double mean = count == 0 ? 0.0 : acc / static_cast<double>(count);
      grid.mean_cosine[a][b] = mean;
      grid.mean_cosine[b][a] = mean;
    }
  }
  return grid;
}

double site_hit_rate(const std::vector<std::vector<std::size_t>>& rankings,
                     const std::vector<std::vector<std::size_t>>& true_sites,
                     double k_percent, std::size_t neighborhood,
                     std::size_t* n_skipped) {
  if (rankings.size() != true_sites.size()) {
    throw_dimension("site_hit_rate: rankings and site sets differ in length");
  }
  if (k_percent <= 0.0 || k_percent > 100.0) {
    throw_config("site_hit_rate: k_percent must lie in (0, 100]");
  }
  std::size_t skipped = 0, scored = 0, hits = 0;
  for (std::size_t e = 0; e < rankings.size(); ++e) {
    const auto& ranking = rankings[e];
    const auto& sites = true_sites[e];
    if (sites.empty()) {
      ++skipped;
      continue;
    }
    const std::size_t len = ranking.size();
    if (len == 0) throw_data("site_hit_rate: empty ranking for example " + std::to_string(e));
    const std::size_t top =
        std::min<std::size_t>(len, static_cast<std::size_t>(
                                       std::ceil(k_percent / 100.0 * static_cast<double>(len))));
    bool hit = false;
    for (std::size_t r = 0; r < top && !hit; ++r) {
      const std::size_t center = ranking[r];
      const std::size_t lo = center >= neighborhood ? center - neighborhood : 0;
      const std::size_t hi = std::min(len - 1, center + neighborhood);
      for (std::size_t pos = lo; pos <= hi && !hit; ++pos) {
        hit = std::find(sites.begin(), sites.end(), pos) != sites.end();
      }
    }
    ++scored;
    if (hit) ++hits;
  }
  if (n_skipped) *n_skipped = skipped;
  if (scored == 0) throw_data("site_hit_rate: every example had an empty site set");
  return static_cast<double>(hits) / static_cast<double>(scored);
}

}  // namespace gca
