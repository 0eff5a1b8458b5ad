#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "irlab/factorization.hpp"
#include "irlab/tensor.hpp"

namespace irlab {

double effective_rank(const Matrix& m);
double effective_rank(const Vector& singular_values);

// Largest effective rank over the single-mode matricizations.
double tensor_effective_rank(const DenseTensor& t);

double distance_from_rank(const Matrix& m, Index R);

struct AlsOptions {
  Index max_rank = 0;  // 0: prod(D) / max(D)
  Index restarts = 5;
  Index sweeps = 500;
  double min_improvement = 1e-12;
  std::uint64_t seed = 0;
};

struct AlsFit {
  CPFactorization factors;
  double mse = 0;
};

AlsFit cp_als(const DenseTensor& t, Index R, const AlsOptions& opt, std::uint64_t seed);

// Smallest R whose best ALS fit has mean squared error below threshold;
// max_rank + 1 if none does, 0 for the zero tensor.
Index tensor_rank_estimate(const DenseTensor& t, double threshold, const AlsOptions& opt = {});

std::map<int, int> hierarchical_tensor_rank(const DenseTensor& t, const ModeTree& tree,
                                            double tol = kRankTolerance);

double unbalancedness(const Factorization& f);

}  // namespace irlab
