#include "wsisearch/hshr.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace wsisearch::hshr {
namespace {

// Indices of the `count` vertices nearest by Hamming distance, plus every
// further vertex tied with the last one. `skip` marks vertices that may not be
// chosen.
std::vector<std::size_t> nearest_vertices(const std::vector<int>& distances,
                                          const std::vector<bool>& skip, std::size_t count) {
  std::vector<std::size_t> order;
  for (std::size_t t = 0; t < distances.size(); ++t) {
    if (!skip[t]) order.push_back(t);
  }
  const std::size_t take = std::min(count, order.size());
  std::partial_sort(order.begin(), order.begin() + take, order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (distances[a] != distances[b]) return distances[a] < distances[b];
                      return a < b;
                    });
  if (take == 0) return {};
  const int radius = distances[order[take - 1]];
  std::vector<std::size_t> tied;
  for (std::size_t i = take; i < order.size(); ++i) {
    if (distances[order[i]] == radius) tied.push_back(order[i]);
  }
  std::sort(tied.begin(), tied.end());
  order.resize(take);
  order.insert(order.end(), tied.begin(), tied.end());
  return order;
}

double mean_positive(const std::vector<double>& column) {
  double sum = 0.0;
  std::size_t n = 0;
  for (double v : column) {
    if (v > 0.0) {
      sum += v;
      ++n;
    }
  }
  return n == 0 ? 0.0 : sum / double(n);
}

}  // namespace

SlideSignature slide_signature(const Mosaic& mosaic) {
  if (mosaic.empty()) {
    throw Error(ErrorKind::unprocessed_slide,
                "hshr: slide '" + mosaic.slide_id + "' has an empty mosaic");
  }
  const std::size_t dim = mosaic.members.front().feature.size();
  validate_patches(mosaic.members, dim);

  SlideSignature sig;
  sig.slide_id = mosaic.slide_id;
  std::vector<double> weights(mosaic.size(), 1.0);
  if (mosaic.populations.size() == mosaic.size()) {
    for (std::size_t i = 0; i < mosaic.size(); ++i) weights[i] = double(mosaic.populations[i]);
  }
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (total <= 0.0) throw Error(ErrorKind::domain, "hshr: mosaic populations sum to zero");

  std::vector<double> pooled(dim, 0.0);
  for (std::size_t i = 0; i < mosaic.size(); ++i) {
    const auto& f = mosaic.members[i].feature;
    sig.centroid_hashes.push_back(binarize_barcode(f));
    sig.attention.push_back(weights[i] / total);
    for (std::size_t d = 0; d < dim; ++d) pooled[d] += sig.attention.back() * f[d];
  }
  const std::vector<float> pooled_f(pooled.begin(), pooled.end());
  sig.slide_hash = binarize_barcode(pooled_f);
  return sig;
}

SlideSignature slide_signature(const SlideRecord& slide, const Mosaic& mosaic) {
  SlideSignature sig = slide_signature(mosaic);
  sig.slide_id = slide.slide_id();
  return sig;
}

Hypergraph::Hypergraph(std::vector<SlideSignature> signatures, std::vector<SlideLabels> labels,
                       std::size_t knn_k)
    : knn_k_(knn_k) {
  if (signatures.empty()) throw Error(ErrorKind::empty_input, "hshr: empty database");
  if (signatures.size() != labels.size()) {
    throw Error(ErrorKind::validation, "hshr: one label record per signature is required");
  }
  std::vector<std::size_t> order(signatures.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return labels[a].slide_id < labels[b].slide_id;
  });
  for (std::size_t i : order) {
    signatures_.push_back(std::move(signatures[i]));
    labels_.push_back(std::move(labels[i]));
  }
  for (std::size_t i = 1; i < labels_.size(); ++i) {
    if (labels_[i].slide_id == labels_[i - 1].slide_id) {
      throw Error(ErrorKind::validation, "hshr: duplicate slide_id '" + labels_[i].slide_id + "'");
    }
  }
  hash_length_ = signatures_.front().slide_hash.size();
  for (const auto& s : signatures_) {
    if (s.slide_hash.size() != hash_length_) {
      throw Error(ErrorKind::dimension, "hshr: slide hashes differ in length");
    }
  }

  const std::size_t n = signatures_.size();
  incidence_.assign(n * n, 0.0);
  edge_weights_.assign(n, 0.0);
  admission_radius_.assign(n, -1);

  std::vector<int> distances(n);
  std::vector<bool> skip(n, false);
  std::vector<double> column(n);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t t = 0; t < n; ++t) {
      distances[t] = hamming_distance(signatures_[s].slide_hash, signatures_[t].slide_hash);
    }
    skip[s] = true;
    const auto neighbours = nearest_vertices(distances, skip, knn_k_);
    skip[s] = false;

    std::fill(column.begin(), column.end(), 0.0);
    column[s] = 1.0;
    for (std::size_t t : neighbours) column[t] = affinity(s, t);
    for (std::size_t t = 0; t < n; ++t) incidence_[t * n + s] = column[t];
    edge_weights_[s] = mean_positive(column);
    if (neighbours.size() >= knn_k_ && knn_k_ > 0) {
      admission_radius_[s] = distances[neighbours.back()];
    }
  }

  vertex_self_.assign(n, 0.0);
  edge_self_.assign(n, 0.0);
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t e = 0; e < n; ++e) {
      const double h = incidence_[v * n + e];
      vertex_self_[v] += h * h * edge_weights_[e];
      edge_self_[e] += h * h;
    }
  }
}

double Hypergraph::affinity_to(const Barcode& a, const Barcode& b) const {
  if (hash_length_ == 0) return 1.0;
  return 1.0 - double(hamming_distance(a, b)) / double(hash_length_);
}

double Hypergraph::affinity(std::size_t s, std::size_t t) const {
  return affinity_to(signatures_[s].slide_hash, signatures_[t].slide_hash);
}

RetrievalResult Hypergraph::query_similarity(const SlideSignature& query, std::size_t k,
                                             double alpha, double beta,
                                             const SlideIdSet& excluded) const {
  const std::size_t n = size();
  if (n == 0) throw Error(ErrorKind::empty_input, "hshr: empty hypergraph");
  if (query.slide_hash.size() != hash_length_) {
    throw Error(ErrorKind::dimension, "hshr: query hash length does not match database");
  }

  std::vector<bool> skip(n, false);
  for (std::size_t t = 0; t < n; ++t) skip[t] = excluded.contains(labels_[t].slide_id);

  std::vector<int> distances(n);
  std::vector<double> affinities(n);
  for (std::size_t t = 0; t < n; ++t) {
    distances[t] = hamming_distance(query.slide_hash, signatures_[t].slide_hash);
    affinities[t] = affinity_to(query.slide_hash, signatures_[t].slide_hash);
  }

  // Extended incidence: vertex q = index n, edge e_q = index n.
  // query_row[e]: H[q, e]; query_edge[v]: H[v, e_q].
  std::vector<double> query_row(n + 1, 0.0);
  std::vector<double> query_edge(n + 1, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    if (skip[s]) continue;
    const int radius = admission_radius_[s];
    if (radius < 0 || distances[s] <= radius) query_row[s] = affinities[s];
  }
  query_row[n] = 1.0;
  query_edge[n] = 1.0;
  for (std::size_t t : nearest_vertices(distances, skip, knn_k_)) query_edge[t] = affinities[t];
  const double query_edge_weight = mean_positive(query_edge);

  auto weight = [&](std::size_t e) { return e == n ? query_edge_weight : edge_weights_[e]; };
  auto h = [&](std::size_t v, std::size_t e) {
    if (v == n) return query_row[e];
    if (e == n) return query_edge[v];
    return incidence_[v * n + e];
  };

  // Vertex similarity row: A[q, t] = sum_e H[q, e] w_e H[t, e].
  std::vector<double> vertex_sim(n + 1, 0.0);
  for (std::size_t e = 0; e <= n; ++e) {
    const double qe = query_row[e];
    if (qe == 0.0) continue;
    const double coeff = qe * weight(e);
    for (std::size_t t = 0; t <= n; ++t) {
      if (t < n && skip[t]) continue;
      vertex_sim[t] += coeff * h(t, e);
    }
  }

  // Hyperedge similarity row: E[e_q, e_t] = sum_v H[v, e_q] H[v, e_t].
  std::vector<double> edge_sim(n + 1, 0.0);
  for (std::size_t v = 0; v <= n; ++v) {
    if (v < n && skip[v]) continue;
    const double ve = query_edge[v];
    if (ve == 0.0) continue;
    for (std::size_t e = 0; e <= n; ++e) {
      if (e < n && skip[e]) continue;
      edge_sim[e] += ve * h(v, e);
    }
  }

  // Diagonal terms of the extended graph, with excluded vertices and their
  // hyperedges removed.
  std::vector<std::size_t> skipped;
  for (std::size_t t = 0; t < n; ++t) {
    if (skip[t]) skipped.push_back(t);
  }
  double query_vertex_self = 0.0;
  for (std::size_t e = 0; e <= n; ++e) query_vertex_self += query_row[e] * query_row[e] * weight(e);
  double query_edge_self = 0.0;
  for (std::size_t v = 0; v <= n; ++v) query_edge_self += query_edge[v] * query_edge[v];

  std::vector<std::pair<double, std::size_t>> scored;
  for (std::size_t t = 0; t < n; ++t) {
    if (skip[t]) continue;
    double vertex_self = vertex_self_[t] + query_edge[t] * query_edge[t] * query_edge_weight;
    double edge_self = edge_self_[t] + query_row[t] * query_row[t];
    for (std::size_t x : skipped) {
      const double hv = incidence_[t * n + x];
      const double he = incidence_[x * n + t];
      vertex_self -= hv * hv * edge_weights_[x];
      edge_self -= he * he;
    }
    const double sv_norm = std::sqrt(query_vertex_self * vertex_self);
    const double se_norm = std::sqrt(query_edge_self * edge_self);
    const double sv = sv_norm > 0.0 ? vertex_sim[t] / sv_norm : 0.0;
    const double se = se_norm > 0.0 ? edge_sim[t] / se_norm : 0.0;
    scored.emplace_back(alpha * sv + beta * se, t);
  }
  const std::size_t take = std::min(k, scored.size());
  // Vertices are stored in slide_id order, so the index breaks ties by id.
  std::partial_sort(scored.begin(), scored.begin() + take, scored.end(),
                    [](const auto& a, const auto& b) {
                      if (a.first != b.first) return a.first > b.first;
                      return a.second < b.second;
                    });

  RetrievalResult result;
  result.k_requested = k;
  for (std::size_t i = 0; i < take; ++i) {
    const auto& l = labels_[scored[i].second];
    result.entries.push_back(
        {l.slide_id, l.site, l.subtype, scored[i].first, DistanceKind::hypergraph, -1});
  }
  return result;
}

Hypergraph build_hypergraph(std::vector<SlideSignature> signatures,
                            std::vector<SlideLabels> labels, std::size_t knn_k) {
  return Hypergraph(std::move(signatures), std::move(labels), knn_k);
}

void query_patches() {
  throw Error(ErrorKind::unsupported_operation,
              "hshr: patch retrieval is not supported by the HSHR engine");
}

}  // namespace wsisearch::hshr
