#include "wsisearch/mann_whitney.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "wsisearch/core.hpp"

namespace wsisearch {
namespace {

// Beyond this pooled size the enumeration is refused outright.
constexpr std::size_t kExactHardLimit = 24;

void check_samples(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) {
    throw Error(ErrorKind::domain, "mann_whitney_u: both samples must be non-empty");
  }
}

struct Pooled {
  std::vector<double> ranks;  // midranks, a's values first then b's
  double tie_term = 0.0;      // sum over tie groups of t^3 - t
  bool constant = false;
};

Pooled midranks(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size() + b.size();
  std::vector<double> values;
  values.reserve(n);
  values.insert(values.end(), a.begin(), a.end());
  values.insert(values.end(), b.begin(), b.end());

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return values[i] < values[j]; });

  Pooled out;
  out.ranks.resize(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = (double(i + 1) + double(j + 1)) / 2.0;
    for (std::size_t r = i; r <= j; ++r) out.ranks[order[r]] = rank;
    const double t = double(j - i + 1);
    out.tie_term += t * t * t - t;
    i = j + 1;
  }
  out.constant = values.front() == values.back() &&
                 std::all_of(values.begin(), values.end(),
                             [&](double v) { return v == values.front(); });
  return out;
}

double u_from_rank_sum(double rank_sum, std::size_t n1) {
  return rank_sum - double(n1) * double(n1 + 1) / 2.0;
}

}  // namespace

double mann_whitney_statistic(std::span<const double> a, std::span<const double> b) {
  check_samples(a, b);
  const Pooled pooled = midranks(a, b);
  const double rank_sum = std::accumulate(pooled.ranks.begin(), pooled.ranks.begin() + a.size(), 0.0);
  return u_from_rank_sum(rank_sum, a.size());
}

double mann_whitney_p_exact(std::span<const double> a, std::span<const double> b) {
  check_samples(a, b);
  const std::size_t n1 = a.size();
  const std::size_t n = n1 + b.size();
  if (n > kExactHardLimit) {
    throw Error(ErrorKind::domain, "mann_whitney_p_exact: pooled sample too large to enumerate");
  }
  const Pooled pooled = midranks(a, b);
  if (pooled.constant) return std::numeric_limits<double>::quiet_NaN();

  const double mean_u = double(n1) * double(b.size()) / 2.0;
  const double observed =
      std::abs(u_from_rank_sum(
                   std::accumulate(pooled.ranks.begin(), pooled.ranks.begin() + n1, 0.0), n1) -
               mean_u);

  // Walk every n1-subset of positions as group a.
  std::vector<bool> pick(n, false);
  std::fill(pick.begin(), pick.begin() + n1, true);
  std::size_t total = 0;
  std::size_t extreme = 0;
  do {
    double rank_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (pick[i]) rank_sum += pooled.ranks[i];
    }
    const double dev = std::abs(u_from_rank_sum(rank_sum, n1) - mean_u);
    ++total;
    if (dev >= observed - 1e-9) ++extreme;
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return double(extreme) / double(total);
}

double mann_whitney_p_normal(std::span<const double> a, std::span<const double> b) {
  check_samples(a, b);
  const double n1 = double(a.size());
  const double n2 = double(b.size());
  const double n = n1 + n2;
  const Pooled pooled = midranks(a, b);
  if (pooled.constant) return std::numeric_limits<double>::quiet_NaN();

  const double u = u_from_rank_sum(
      std::accumulate(pooled.ranks.begin(), pooled.ranks.begin() + a.size(), 0.0), a.size());
  const double mean_u = n1 * n2 / 2.0;
  const double variance = n1 * n2 / 12.0 * ((n + 1.0) - pooled.tie_term / (n * (n - 1.0)));
  if (variance <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  const double z = std::max(0.0, std::abs(u - mean_u) - 0.5) / std::sqrt(variance);
  return std::min(1.0, std::erfc(z / std::sqrt(2.0)));
}

MannWhitneyResult mann_whitney_u(std::span<const double> a, std::span<const double> b) {
  check_samples(a, b);
  MannWhitneyResult r;
  r.u = mann_whitney_statistic(a, b);
  r.exact = a.size() + b.size() <= kExactEnumerationLimit;
  r.p_two_sided = r.exact ? mann_whitney_p_exact(a, b) : mann_whitney_p_normal(a, b);
  return r;
}

}  // namespace wsisearch
