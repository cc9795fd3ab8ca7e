#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace cskit {

struct Correlation {
  double rho = 0.0;
  double p = 1.0;
  std::size_t n = 0;
};

// 1-based ranks; tied values share the mean of the ranks they span.
std::vector<double> mid_ranks(std::span<const double> xs);

// Pearson correlation of the mid-ranks. p is two-sided, from the Student-t
// approximation with n - 2 degrees of freedom (0 when |rho| = 1).
// Throws std::invalid_argument on length mismatch or n < 3, and
// std::domain_error when either side has no rank variance.
Correlation spearman(std::span<const double> xs, std::span<const double> ys);

// Two-sided permutation p-value: share of seeded shuffles of ys whose |rho|
// reaches the observed one, with the usual +1 correction.
double spearman_permutation_p(std::span<const double> xs, std::span<const double> ys,
                              std::size_t permutations = 10'000, std::uint64_t seed = 0);

}  // namespace cskit
