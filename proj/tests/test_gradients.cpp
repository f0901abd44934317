#include <doctest.h>

#include <random>

#include "gca/gradcheck.hpp"
#include "gca/gradcheck_suite.hpp"
#include "gca/ops.hpp"

using namespace gca;

TEST_CASE("finite differences are near-exact on a quadratic form") {
  // loss = x^T A x has zero third derivative, so central differences are
  // exact up to rounding.
  std::mt19937_64 rng(3);
  auto x = Tensor::randn({1, 5}, rng, 1.0);
  auto a = Tensor::randn({5, 5}, rng, 1.0, false);
  ScalarFn fn = [a](Graph& g, const std::vector<TensorPtr>& in) {
    auto left = ops::matmul(g, in[0], a);
    auto full = ops::matmul(g, left, ops::transpose(g, in[0]));
    return ops::reshape(g, full, {1});
  };
  auto result = finite_diff_check(fn, {x}, 1e-5, 1e-4);
  CHECK(result.pass);
  CHECK(result.max_rel_err < 1e-8);
}

TEST_CASE("softmax-composite loss passes the finite-difference oracle") {
  std::mt19937_64 rng(5);
  auto x = Tensor::randn({4, 6}, rng, 1.0);
  auto w = Tensor::randn({24, 1}, rng, 1.0, false);
  ScalarFn fn = [w](Graph& g, const std::vector<TensorPtr>& in) {
    auto y = ops::softmax_rows(g, in[0]);
    auto flat = ops::reshape(g, y, {1, 24});
    return ops::reshape(g, ops::matmul(g, flat, w), {1});
  };
  auto result = finite_diff_check(fn, {x}, 1e-5, 1e-4);
  CHECK(result.pass);
}

TEST_CASE("random 4x3 by 3x5 matmul gradients match central differences") {
  std::mt19937_64 rng(9);
  auto a = Tensor::randn({4, 3}, rng, 1.0);
  auto b = Tensor::randn({3, 5}, rng, 1.0);
  auto w = Tensor::randn({20, 1}, rng, 1.0, false);
  ScalarFn fn = [w](Graph& g, const std::vector<TensorPtr>& in) {
    auto prod = ops::matmul(g, in[0], in[1]);
    auto flat = ops::reshape(g, prod, {1, 20});
    return ops::reshape(g, ops::matmul(g, flat, w), {1});
  };
  auto result = finite_diff_check(fn, {a, b}, 1e-5, 1e-4);
  CHECK(result.pass);
}

TEST_CASE("full gradcheck suite passes at tol 1e-4 over randomized shapes") {
  // The acceptance gate runs 50 seeds per op; keep the unit run lighter.
  auto results = run_gradcheck_suite(20240817, 4);
  for (const auto& r : results) {
    INFO(r.op, " max_rel_err=", r.max_rel_err);
    CHECK(r.pass);
  }
  CHECK(results.size() >= 20);  // every op family is represented
}
