#pragma once

#include <span>

namespace wsisearch {

/// Pooled sample sizes up to this total use exact enumeration.
inline constexpr std::size_t kExactEnumerationLimit = 12;

struct MannWhitneyResult {
  double u = 0.0;            // statistic of the first sample
  double p_two_sided = 0.0;  // NaN when every value is identical
  bool exact = false;
};

/// Two-sided Mann-Whitney U test with midranks for ties. Exact enumeration
/// of all group assignments when n1 + n2 <= 12, otherwise the normal
/// approximation with tie and continuity corrections.
MannWhitneyResult mann_whitney_u(std::span<const double> a, std::span<const double> b);

/// U statistic of `a` (rank sum of a minus n1(n1+1)/2).
double mann_whitney_statistic(std::span<const double> a, std::span<const double> b);

double mann_whitney_p_exact(std::span<const double> a, std::span<const double> b);
double mann_whitney_p_normal(std::span<const double> a, std::span<const double> b);

}  // namespace wsisearch
