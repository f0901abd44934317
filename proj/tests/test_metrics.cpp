#include <doctest.h>

#include <cmath>
#include <random>

#include "gca/metrics.hpp"

using namespace gca;

namespace {

// independent enumeration over all outcome kinds
double c_index_brute(const std::vector<double>& pred, const std::vector<double>& truth) {
  std::size_t pairs = 0, wins = 0, ties = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    for (std::size_t j = 0; j < pred.size(); ++j) {
      if (truth[i] > truth[j]) {
        ++pairs;
        if (pred[i] > pred[j]) ++wins;
        if (pred[i] == pred[j]) ++ties;
      }
    }
  }
  return (static_cast<double>(wins) + 0.5 * static_cast<double>(ties)) /
         static_cast<double>(pairs);
}

}  // namespace

TEST_CASE("c_index trivial orderings") {
  std::vector<double> truth = {1, 2, 3, 4};
  CHECK(c_index(truth, truth) == doctest::Approx(1.0));
  std::vector<double> reversed = {-1, -2, -3, -4};
  CHECK(c_index(reversed, truth) == doctest::Approx(0.0));
  std::vector<double> constant = {5, 5, 5, 5};
  CHECK(c_index(constant, truth) == doctest::Approx(0.5));
}

TEST_CASE("c_index errors on unusable input") {
  CHECK_THROWS_AS(c_index({1.0}, {1.0}), Error);
  try {
    c_index({1.0, 2.0}, {3.0, 3.0});
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Data);
  }
}

TEST_CASE("c_index matches brute-force enumeration including ties") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> dist(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng() % 49;
    std::vector<double> pred(n), truth(n);
    for (auto& v : pred) v = std::round(dist(rng) * 4.0) / 4.0;  // force pred ties
    bool orderable = false;
    for (auto& v : truth) v = std::round(dist(rng) * 2.0) / 2.0;  // and truth ties
    for (std::size_t i = 1; i < n; ++i) orderable = orderable || truth[i] != truth[0];
    if (!orderable) truth[0] += 1.0;
    CHECK(c_index(pred, truth) == c_index_brute(pred, truth));
  }
}

TEST_CASE("c_index is invariant under strictly increasing transforms") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<double> pred(30), truth(30);
  for (auto& v : pred) v = dist(rng);
  for (auto& v : truth) v = dist(rng);
  const double base = c_index(pred, truth);
  auto transformed = pred;
  for (auto& v : transformed) v = std::exp(0.5 * v) + v * v * v * 0.1;
  CHECK(c_index(transformed, truth) == doctest::Approx(base));
}

TEST_CASE("c_index complement identity for tie-free predictions") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<double> pred(25), truth(25), neg(25);
  for (std::size_t i = 0; i < 25; ++i) {
    pred[i] = dist(rng);
    truth[i] = dist(rng);
    neg[i] = -pred[i];
  }
  CHECK(c_index(pred, truth) + c_index(neg, truth) == doctest::Approx(1.0));
}

TEST_CASE("similarity grid on orthogonal populations") {
  // within-population parallel, across-population orthogonal
  std::vector<std::vector<double>> d = {{1, 0, 0, 0}, {2, 0, 0, 0}, {0.5, 0, 0, 0}};
  std::vector<std::vector<double>> p = {{0, 0, 3, 0}, {0, 0, 1, 0}, {0, 0, 7, 0}};
  auto grid = similarity_grid(d, d, p, p, 0);
  for (std::size_t a = 0; a < 4; ++a) {
    for (std::size_t b = 0; b < 4; ++b) {
      const bool both_drug = a < 2 && b < 2;
      const bool both_protein = a >= 2 && b >= 2;
      const double expect = (both_drug || both_protein) ? 1.0 : 0.0;
      CHECK(grid.mean_cosine[a][b] == doctest::Approx(expect));
      CHECK(grid.mean_cosine[a][b] == grid.mean_cosine[b][a]);
    }
  }
}

TEST_CASE("similarity grid is all ones for identical vectors") {
  std::vector<std::vector<double>> pop = {{1, 2}, {2, 4}, {0.5, 1}};
  auto grid = similarity_grid(pop, pop, pop, pop, 3);
  for (std::size_t a = 0; a < 4; ++a) {
    for (std::size_t b = 0; b < 4; ++b) {
      CHECK(grid.mean_cosine[a][b] == doctest::Approx(1.0));
    }
  }
  CHECK(grid.step == 3);
}

TEST_CASE("similarity grid matches a brute-force pairwise mean and ignores scaling") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> dist(0.0, 1.0);
  const std::size_t batch = 6, dim = 5;
  auto make_pop = [&](double scale) {
    std::vector<std::vector<double>> pop(batch, std::vector<double>(dim));
    for (auto& v : pop) {
      for (auto& x : v) x = scale * dist(rng);
    }
    return pop;
  };
  auto d = make_pop(1.0), da = make_pop(1.0), p = make_pop(1.0), pa = make_pop(1.0);
  auto grid = similarity_grid(d, da, p, pa, 0);

  auto cosine = [](const std::vector<double>& a, const std::vector<double>& b) {
    double dot = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      dot += a[i] * b[i];
      na += a[i] * a[i];
      nb += b[i] * b[i];
    }
    return dot / std::sqrt(na * nb);
  };
  // cross-population entry (d vs p) against the direct mean
  double acc = 0.0;
  for (const auto& x : d) {
    for (const auto& y : p) acc += cosine(x, y);
  }
  CHECK(grid.mean_cosine[0][2] == doctest::Approx(acc / (batch * batch)).epsilon(1e-9));
  // diagonal entry (d vs d) over distinct pairs
  double diag = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < batch; ++i) {
    for (std::size_t j = i + 1; j < batch; ++j) {
      diag += cosine(d[i], d[j]);
      ++count;
    }
  }
  CHECK(grid.mean_cosine[0][0] == doctest::Approx(diag / count).epsilon(1e-9));

  // positive per-vector rescaling leaves cosine untouched
  auto scaled = d;
  for (std::size_t i = 0; i < batch; ++i) {
    for (auto& x : scaled[i]) x *= 0.1 + static_cast<double>(i);
  }
  auto grid2 = similarity_grid(scaled, da, p, pa, 0);
  CHECK(grid2.mean_cosine[0][2] == doctest::Approx(grid.mean_cosine[0][2]).epsilon(1e-12));
}

TEST_CASE("similarity grid excludes zero-norm vectors") {
  std::vector<std::vector<double>> d = {{1, 0}, {0, 0}, {0, 1}};
  auto grid = similarity_grid(d, d, d, d, 0);
  CHECK(grid.excluded_zero_norm == 4);  // one per population
  CHECK(grid.mean_cosine[0][0] == doctest::Approx(0.0));  // the two survivors are orthogonal
}

TEST_CASE("site hit rate trivial cases") {
  std::vector<std::vector<std::size_t>> rankings = {{3, 1, 0, 2, 4}};
  std::vector<std::vector<std::size_t>> sites = {{4}};
  // k=100% always hits when sites are non-empty
  CHECK(site_hit_rate(rankings, sites, 100.0, 0) == doctest::Approx(1.0));
  // top-ranked position is a site
  std::vector<std::vector<std::size_t>> site_first = {{4, 1, 0, 2, 3}};
  CHECK(site_hit_rate(site_first, sites, 1.0, 0) == doctest::Approx(1.0));
  // miss with tiny k and no dilation
  CHECK(site_hit_rate(rankings, sites, 1.0, 0) == doctest::Approx(0.0));
  // dilation rescues a near miss: top position 3 dilated to {2,3,4}
  CHECK(site_hit_rate(rankings, sites, 1.0, 1) == doctest::Approx(1.0));
}

TEST_CASE("site hit rate skips empty site sets and reports the count") {
  std::vector<std::vector<std::size_t>> rankings = {{0, 1}, {1, 0}};
  std::vector<std::vector<std::size_t>> sites = {{}, {0}};
  std::size_t skipped = 0;
  const double rate = site_hit_rate(rankings, sites, 50.0, 0, &skipped);
  CHECK(skipped == 1);
  CHECK(rate == doctest::Approx(0.0));  // top half of example 2 is position 1
}

TEST_CASE("site hit rate is monotone in k and neighborhood") {
  std::mt19937_64 rng(13);
  std::vector<std::vector<std::size_t>> rankings;
  std::vector<std::vector<std::size_t>> sites;
  for (int e = 0; e < 40; ++e) {
    const std::size_t len = 10 + rng() % 30;
    std::vector<std::size_t> order(len);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    rankings.push_back(order);
    sites.push_back({rng() % len, rng() % len});
  }
  double prev = 0.0;
  for (double k : {1.0, 5.0, 10.0, 25.0, 50.0, 100.0}) {
    const double rate = site_hit_rate(rankings, sites, k, 0);
    CHECK(rate >= prev - 1e-12);
    prev = rate;
    CHECK(site_hit_rate(rankings, sites, k, 1) >= rate - 1e-12);
  }
}

TEST_CASE("random rankings hit planted sites at the analytic chance rate") {
  std::mt19937_64 rng(17);
  const std::size_t len = 50, n_sites = 3;
  const double k = 10.0;
  // analytic chance of top-5 (k=10% of 50) hitting >=1 of 3 sites
  const std::size_t top = 5;
  double miss = 1.0;
  for (std::size_t i = 0; i < top; ++i) {
    miss *= static_cast<double>(len - n_sites - i) / static_cast<double>(len - i);
  }
  const double analytic = 1.0 - miss;

  std::vector<std::vector<std::size_t>> rankings;
  std::vector<std::vector<std::size_t>> sites;
  for (int e = 0; e < 1000; ++e) {
    std::vector<std::size_t> order(len);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    rankings.push_back(order);
    std::vector<std::size_t> s;
    while (s.size() < n_sites) {
      const std::size_t pos = rng() % len;
      if (std::find(s.begin(), s.end(), pos) == s.end()) s.push_back(pos);
    }
    sites.push_back(s);
  }
  const double rate = site_hit_rate(rankings, sites, k, 0);
  CHECK(std::fabs(rate - analytic) < 0.05);
}
