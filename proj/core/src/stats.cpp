#include "mtrl/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace mtrl {

namespace {

// Midranks of the pooled sample, 1-based.
std::vector<double> midranks(const std::vector<double>& sorted) {
  const std::size_t n = sorted.size();
  std::vector<double> rank(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && sorted[j + 1] == sorted[i]) ++j;
    const double mid = 0.5 * static_cast<double>(i + 1 + j + 1);
    for (std::size_t k = i; k <= j; ++k) rank[k] = mid;
    i = j + 1;
  }
  return rank;
}

double u_from_rank_sum(double rank_sum, std::size_t n1) {
  return rank_sum - 0.5 * static_cast<double>(n1) * static_cast<double>(n1 + 1);
}

double choose(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  k = std::min(k, n - k);
  double out = 1.0;
  for (std::size_t i = 1; i <= k; ++i)
    out = out * static_cast<double>(n - k + i) / static_cast<double>(i);
  return out;
}

// Exact two-sided p by enumerating every assignment of n1 pooled positions.
double exact_two_sided_p(const std::vector<double>& rank, std::size_t n1, double u_obs) {
  const std::size_t n = rank.size();
  const std::size_t n2 = n - n1;
  const double mu = 0.5 * static_cast<double>(n1) * static_cast<double>(n2);
  const double dev = std::abs(u_obs - mu);

  std::vector<std::size_t> pick(n1);
  for (std::size_t i = 0; i < n1; ++i) pick[i] = i;
  std::uint64_t total = 0;
  std::uint64_t extreme = 0;
  while (true) {
    double rank_sum = 0.0;
    for (const std::size_t idx : pick) rank_sum += rank[idx];
    const double u = u_from_rank_sum(rank_sum, n1);
    ++total;
    if (std::abs(u - mu) >= dev - 1e-9) ++extreme;
    // next combination
    std::size_t i = n1;
    while (i > 0) {
      --i;
      if (pick[i] != i + n - n1) {
        ++pick[i];
        for (std::size_t j = i + 1; j < n1; ++j) pick[j] = pick[j - 1] + 1;
        break;
      }
      if (i == 0) return static_cast<double>(extreme) / static_cast<double>(total);
    }
  }
}

}  // namespace

MannWhitneyResult mann_whitney_u(std::span<const double> xs, std::span<const double> ys) {
  if (xs.empty() || ys.empty())
    throw std::invalid_argument("mann_whitney_u: both samples must be nonempty");
  const std::size_t n1 = xs.size();
  const std::size_t n2 = ys.size();
  const std::size_t n = n1 + n2;

  std::vector<std::pair<double, int>> pooled;  // value, side (0 = xs)
  pooled.reserve(n);
  for (const double v : xs) pooled.emplace_back(v, 0);
  for (const double v : ys) pooled.emplace_back(v, 1);
  std::sort(pooled.begin(), pooled.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = pooled[i].first;
  const std::vector<double> rank = midranks(values);

  double rank_sum_x = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (pooled[i].second == 0) rank_sum_x += rank[i];
  const double u = u_from_rank_sum(rank_sum_x, n1);
  const double mu = 0.5 * static_cast<double>(n1) * static_cast<double>(n2);

  MannWhitneyResult result;
  result.u = u;

  const bool small = n1 < 8 || n2 < 8;
  if (small && choose(n, std::min(n1, n2)) <= 2e6) {
    result.p = std::min(1.0, exact_two_sided_p(rank, n1, u));
    return result;
  }

  // Normal approximation with tie correction.
  double tie_term = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[j + 1] == values[i]) ++j;
    const double t = static_cast<double>(j - i + 1);
    tie_term += t * t * t - t;
    i = j + 1;
  }
  const double nf = static_cast<double>(n);
  const double variance = (static_cast<double>(n1) * static_cast<double>(n2) / 12.0) *
                          ((nf + 1.0) - tie_term / (nf * (nf - 1.0)));
  if (variance <= 0.0) {
    result.p = 1.0;
    return result;
  }
  const double z = std::max(0.0, std::abs(u - mu) - 0.5) / std::sqrt(variance);
  result.p = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  return result;
}

double mean(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("mean: empty sample");
  double acc = 0.0;
  for (const double v : xs) acc += v;
  return acc / static_cast<double>(xs.size());
}

double standard_error(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("standard_error: empty sample");
  if (xs.size() == 1) return 0.0;
  const double m = mean(xs);
  double acc = 0.0;
  for (const double v : xs) acc += (v - m) * (v - m);
  const double var = acc / static_cast<double>(xs.size() - 1);
  return std::sqrt(var / static_cast<double>(xs.size()));
}

}  // namespace mtrl
