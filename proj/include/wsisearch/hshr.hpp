#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "wsisearch/core.hpp"
#include "wsisearch/mosaic.hpp"

namespace wsisearch::hshr {

struct Config {
  std::size_t k_fixed = 20;
  std::size_t knn_k = 10;
  double alpha = 1.0;
  double beta = 1.0;
};

struct SlideSignature {
  std::string slide_id;
  std::vector<Barcode> centroid_hashes;
  std::vector<double> attention;  // sums to 1
  Barcode slide_hash;
};

/// Reference encoder: each centroid is hashed with binarize_barcode, its
/// attention is proportional to the cluster population, and the slide hash
/// binarizes the attention-weighted mean centroid.
SlideSignature slide_signature(const Mosaic& mosaic);
SlideSignature slide_signature(const SlideRecord& slide, const Mosaic& mosaic);

/// Hypergraph over database slides. Vertex t and hyperedge e_t share an
/// index; column e_s holds the affinity 1 - hamming/L of s's knn_k nearest
/// slides (plus any tied with the last), and of s itself.
class Hypergraph {
 public:
  Hypergraph() = default;
  Hypergraph(std::vector<SlideSignature> signatures, std::vector<SlideLabels> labels,
             std::size_t knn_k);

  std::size_t size() const { return signatures_.size(); }
  std::size_t hash_length() const { return hash_length_; }
  std::size_t knn_k() const { return knn_k_; }
  const std::vector<SlideSignature>& signatures() const { return signatures_; }
  const std::vector<SlideLabels>& labels() const { return labels_; }

  /// Incidence H[vertex][edge].
  double incidence(std::size_t vertex, std::size_t edge) const {
    return incidence_[vertex * size() + edge];
  }
  double edge_weight(std::size_t edge) const { return edge_weights_[edge]; }
  double affinity(std::size_t s, std::size_t t) const;

  /// Appends the query as a private vertex plus hyperedge and scores every
  /// database slide by alpha * vertex similarity + beta * hyperedge
  /// similarity. Both similarities are degree-normalized, A[q,t] /
  /// sqrt(A[q,q] A[t,t]), so an exact duplicate scores highest. The graph
  /// itself is not modified.
  RetrievalResult query_similarity(const SlideSignature& query, std::size_t k, double alpha,
                                   double beta, const SlideIdSet& excluded = {}) const;

 private:
  double affinity_to(const Barcode& a, const Barcode& b) const;

  std::size_t knn_k_ = 10;
  std::size_t hash_length_ = 0;
  std::vector<SlideSignature> signatures_;
  std::vector<SlideLabels> labels_;
  std::vector<double> incidence_;
  std::vector<double> edge_weights_;
  // Hamming distance of each vertex's knn_k-th neighbour; a new vertex at or
  // within this distance joins the hyperedge. -1 when slots remain free.
  std::vector<int> admission_radius_;
  // Diagonals of H W H^T and H^T H over the database alone.
  std::vector<double> vertex_self_;
  std::vector<double> edge_self_;
};

Hypergraph build_hypergraph(std::vector<SlideSignature> signatures,
                            std::vector<SlideLabels> labels, std::size_t knn_k);

/// Always throws ErrorKind::unsupported_operation.
[[noreturn]] void query_patches();

}  // namespace wsisearch::hshr
