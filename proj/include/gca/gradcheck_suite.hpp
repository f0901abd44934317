#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gca/gradcheck.hpp"

namespace gca {

struct OpCheckResult {
  std::string op;
  double max_rel_err = 0.0;
  bool pass = false;
  std::size_t seeds = 0;
};

// Finite-difference verification of every differentiable operation plus the
// composed attention blocks, encoders and the end-to-end model, each over
// `seeds_per_op` randomized shapes and values. Inputs for kinked operations
// (relu, max reductions, sparsemax) are sampled away from their
// non-differentiable boundaries.
std::vector<OpCheckResult> run_gradcheck_suite(std::uint64_t base_seed,
                                               std::size_t seeds_per_op,
                                               double step = 1e-5,
                                               double tol = 1e-4);

bool all_passed(const std::vector<OpCheckResult>& results);

}  // namespace gca
