#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wsisearch/core.hpp"

namespace wsisearch {

struct RetrievedSlot {
  std::string id;
  std::string site;
  std::string subtype;
  double score = 0.0;
};

/// One evaluated query. Slots past the engine's returned count are empty.
struct QueryRow {
  std::string query_id;
  std::string query_site;
  std::string query_subtype;
  std::vector<std::optional<RetrievedSlot>> slots;
};

enum class LabelField { site, subtype };
enum class MetricKind { majority_vote, average_precision };

std::string_view to_string(LabelField field);
LabelField parse_label_field(std::string_view text);

struct MetricOutcome {
  std::optional<double> value;
  MetricKind metric = MetricKind::majority_vote;
  std::size_t k = 0;
};

QueryRow make_query_row(const std::string& query_id, const SlideLabels& query,
                        const RetrievalResult& result, std::size_t k_max);

/// Majority vote over the first k slots. Empty slots vote as a shared
/// "missing" label; ties go to the label seen first. Returns 1 when the
/// winner matches the query, nullopt when the winner is "missing", else 0.
std::optional<int> mv_at_k(const QueryRow& row, std::size_t k, LabelField field);

/// Average precision over the first k slots with denominator
/// min(k, relevant_count). Empty slots are skipped but still occupy their
/// rank position.
double ap_at_k(const QueryRow& row, std::size_t k, LabelField field);

/// Mean over outcomes that carry a value; throws
/// ErrorKind::undefined_aggregate when none do.
double aggregate_mean(std::span<const MetricOutcome> outcomes);
double aggregate_mean(std::span<const std::optional<double>> values);

}  // namespace wsisearch
