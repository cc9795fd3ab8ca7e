#include "cskit/spearman.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include <boost/math/distributions/students_t.hpp>

#include "cskit/rng.hpp"

namespace cskit {

namespace {

double pearson(std::span<const double> a, std::span<const double> b) {
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) throw std::domain_error("spearman: correlation undefined (constant ranks)");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

void check_inputs(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw std::invalid_argument("spearman: length mismatch (" + std::to_string(xs.size()) + " vs " +
                                std::to_string(ys.size()) + ")");
  }
  if (xs.size() < 3) throw std::invalid_argument("spearman: need at least 3 pairs");
}

}  // namespace

std::vector<double> mid_ranks(std::span<const double> xs) {
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(xs.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i + 1;
    while (j < order.size() && xs[order[j]] == xs[order[i]]) ++j;
    // Positions i..j-1 hold ranks i+1..j.
    const double r = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = r;
    i = j;
  }
  return ranks;
}

Correlation spearman(std::span<const double> xs, std::span<const double> ys) {
  check_inputs(xs, ys);
  Correlation c;
  c.n = xs.size();
  const auto rx = mid_ranks(xs);
  const auto ry = mid_ranks(ys);
  c.rho = pearson(rx, ry);
  if (std::abs(c.rho) >= 1.0) {
    c.p = 0.0;
    return c;
  }
  const double df = static_cast<double>(c.n - 2);
  const double t = c.rho * std::sqrt(df / (1.0 - c.rho * c.rho));
  boost::math::students_t dist(df);
  c.p = std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))), 0.0, 1.0);
  return c;
}

double spearman_permutation_p(std::span<const double> xs, std::span<const double> ys, std::size_t permutations,
                              std::uint64_t seed) {
  check_inputs(xs, ys);
  if (permutations == 0) throw std::invalid_argument("spearman: permutations must be >= 1");
  const auto rx = mid_ranks(xs);
  auto ry = mid_ranks(ys);
  const double observed = std::abs(pearson(rx, ry));
  Rng rng(seed);
  std::size_t hits = 0;
  for (std::size_t k = 0; k < permutations; ++k) {
    rng.shuffle(ry);
    // Small tolerance so permutations tying the observed value count.
    if (std::abs(pearson(rx, ry)) >= observed - 1e-12) ++hits;
  }
  return static_cast<double>(hits + 1) / static_cast<double>(permutations + 1);
}

}  // namespace cskit
