#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "gca/ops.hpp"

using namespace gca;

namespace {

// Independent simplex-projection oracle: enumerate every candidate support
// set and verify the KKT conditions. Exponential, so only for small n.
std::vector<double> project_simplex_enumerate(const std::vector<double>& z) {
  const std::size_t n = z.size();
  REQUIRE(n <= 16);
  for (std::size_t mask = 1; mask < (1ull << n); ++mask) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1ull << i)) {
        sum += z[i];
        ++count;
      }
    }
    const double tau = (sum - 1.0) / static_cast<double>(count);
    bool valid = true;
    for (std::size_t i = 0; i < n && valid; ++i) {
      if (mask & (1ull << i)) {
        valid = z[i] - tau > 0.0;
      } else {
        valid = z[i] - tau <= 1e-12;
      }
    }
    if (valid) {
      std::vector<double> p(n, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        if (mask & (1ull << i)) p[i] = z[i] - tau;
      }
      return p;
    }
  }
  FAIL("no valid support set found");
  return {};
}

std::vector<double> sparsemax_vec(const std::vector<double>& z) {
  Graph g;
  auto out = ops::sparsemax_rows(g, Tensor::make({1, z.size()}, z));
  return out->values;
}

}  // namespace

TEST_CASE("sparsemax trivial cases") {
  auto sym = sparsemax_vec({0, 0});
  CHECK(sym[0] == doctest::Approx(0.5));
  CHECK(sym[1] == doctest::Approx(0.5));

  auto hot = sparsemax_vec({2, 0});
  CHECK(hot[0] == doctest::Approx(1.0));
  CHECK(hot[1] == 0.0);
}

TEST_CASE("sparsemax rejects NaN input") {
  Graph g;
  CHECK_THROWS_AS(ops::sparsemax_rows(g, Tensor::make({1, 2}, {std::nan(""), 0.0})), Error);
}

TEST_CASE("sparsemax matches the support-enumeration oracle") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> dist(0.0, 1.5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng() % 9;  // 2..10
    std::vector<double> z(n);
    for (auto& v : z) v = dist(rng);
    auto mine = sparsemax_vec(z);
    auto oracle = project_simplex_enumerate(z);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(std::fabs(mine[i] - oracle[i]) < 1e-8);
    }
  }
}

TEST_CASE("sparsemax rows lie on the simplex and preserve the argmax") {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> dist(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 3 + rng() % 14;
    std::vector<double> z(n);
    for (auto& v : z) v = dist(rng);
    auto p = sparsemax_vec(z);
    double sum = 0.0;
    for (double v : p) {
      CHECK(v >= 0.0);
      sum += v;
    }
    CHECK(std::fabs(sum - 1.0) < 1e-9);
    const auto arg_in = std::distance(z.begin(), std::max_element(z.begin(), z.end()));
    const auto arg_out = std::distance(p.begin(), std::max_element(p.begin(), p.end()));
    CHECK(arg_in == arg_out);
  }
}

TEST_CASE("sparsemax zeroes out weak entries on most normal inputs") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> dist(0.0, 1.0);
  int with_zero = 0;
  const int trials = 500;
  for (int trial = 0; trial < trials; ++trial) {
    const std::size_t n = 8 + rng() % 57;  // 8..64
    std::vector<double> z(n);
    for (auto& v : z) v = dist(rng);
    auto p = sparsemax_vec(z);
    if (std::count(p.begin(), p.end(), 0.0) > 0) ++with_zero;
  }
  CHECK(with_zero >= trials * 3 / 10);
}

TEST_CASE("sparsemax backward matches the support-set Jacobian") {
  // y_i = z_i - tau on the support; dL/dz = (I - 1/|S| * ones) restricted to S
  auto z = Tensor::make({1, 4}, {0.9, 0.5, -0.3, -2.0}, true);
  Graph g;
  auto y = ops::sparsemax_rows(g, z);
  CHECK(y->values[0] > 0.0);
  CHECK(y->values[1] > 0.0);
  CHECK(y->values[2] == 0.0);
  CHECK(y->values[3] == 0.0);
  // loss = y_0 -> dz = [1 - 1/2, -1/2, 0, 0]
  auto w = Tensor::make({4, 1}, {1, 0, 0, 0});
  auto loss = ops::reshape(g, ops::matmul(g, y, w), {1});
  g.backward(loss);
  CHECK(z->grad[0] == doctest::Approx(0.5));
  CHECK(z->grad[1] == doctest::Approx(-0.5));
  CHECK(z->grad[2] == doctest::Approx(0.0));
  CHECK(z->grad[3] == doctest::Approx(0.0));
}
