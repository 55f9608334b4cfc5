#include "wsisearch/metrics.hpp"

#include <algorithm>

namespace wsisearch {
namespace {

const std::string* slot_label(const QueryRow& row, std::size_t i, LabelField field) {
  if (i >= row.slots.size() || !row.slots[i]) return nullptr;
  return field == LabelField::site ? &row.slots[i]->site : &row.slots[i]->subtype;
}

const std::string& query_label(const QueryRow& row, LabelField field) {
  return field == LabelField::site ? row.query_site : row.query_subtype;
}

}  // namespace

std::string_view to_string(LabelField field) {
  return field == LabelField::site ? "site" : "subtype";
}

LabelField parse_label_field(std::string_view text) {
  if (text == "site") return LabelField::site;
  if (text == "subtype") return LabelField::subtype;
  throw Error(ErrorKind::parse, "label field must be site or subtype");
}

QueryRow make_query_row(const std::string& query_id, const SlideLabels& query,
                        const RetrievalResult& result, std::size_t k_max) {
  QueryRow row;
  row.query_id = query_id;
  row.query_site = query.site;
  row.query_subtype = query.subtype;
  row.slots.resize(k_max);
  for (std::size_t i = 0; i < std::min(k_max, result.entries.size()); ++i) {
    const auto& e = result.entries[i];
    row.slots[i] = RetrievedSlot{e.target_id, e.target_site, e.target_subtype, e.score};
  }
  return row;
}

std::optional<int> mv_at_k(const QueryRow& row, std::size_t k, LabelField field) {
  if (k == 0) throw Error(ErrorKind::domain, "mv_at_k: k must be at least 1");

  // (label or missing, count) in first-seen order.
  std::vector<std::pair<const std::string*, std::size_t>> counter;
  for (std::size_t i = 0; i < k; ++i) {
    const std::string* label = slot_label(row, i, field);
    auto it = std::find_if(counter.begin(), counter.end(), [&](const auto& c) {
      if (c.first == nullptr || label == nullptr) return c.first == label;
      return *c.first == *label;
    });
    if (it == counter.end()) {
      counter.emplace_back(label, 1);
    } else {
      ++it->second;
    }
  }
  const auto winner = std::max_element(counter.begin(), counter.end(),
                                       [](const auto& a, const auto& b) {
                                         return a.second < b.second;
                                       });
  if (winner->first != nullptr && *winner->first == query_label(row, field)) return 1;
  if (winner->first == nullptr) return std::nullopt;
  return 0;
}

double ap_at_k(const QueryRow& row, std::size_t k, LabelField field) {
  if (k == 0) throw Error(ErrorKind::domain, "ap_at_k: k must be at least 1");
  std::size_t relevant = 0;
  double precision_sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const std::string* label = slot_label(row, i, field);
    if (label == nullptr) continue;
    if (*label == query_label(row, field)) {
      ++relevant;
      precision_sum += double(relevant) / double(i + 1);
    }
  }
  if (relevant == 0) return 0.0;
  return precision_sum / double(std::min(k, relevant));
}

double aggregate_mean(std::span<const std::optional<double>> values) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& v : values) {
    if (!v) continue;
    sum += *v;
    ++n;
  }
  if (n == 0) {
    throw Error(ErrorKind::undefined_aggregate, "aggregate_mean: every outcome is None");
  }
  return sum / double(n);
}

double aggregate_mean(std::span<const MetricOutcome> outcomes) {
  std::vector<std::optional<double>> values;
  values.reserve(outcomes.size());
  for (const auto& o : outcomes) values.push_back(o.value);
  return aggregate_mean(values);
}

}  // namespace wsisearch
