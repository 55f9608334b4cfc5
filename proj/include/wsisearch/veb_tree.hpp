#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <unordered_map>

namespace wsisearch {

/// Counters filled by successor/predecessor/member when a pointer is passed.
struct VebProbeStats {
  std::size_t calls = 0;
  std::size_t max_depth = 0;
};

/// Sparse van Emde Boas tree over the universe [0, 2^universe_bits).
///
/// Clusters are allocated lazily in hash maps, so memory is proportional to
/// the number of stored keys rather than to the universe. Each query
/// descends through at most one cluster or summary per level, giving
/// O(log log U) recursive steps.
class VebTree {
 public:
  explicit VebTree(unsigned universe_bits = 48);
  ~VebTree();
  VebTree(VebTree&&) noexcept;
  VebTree& operator=(VebTree&&) noexcept;

  unsigned universe_bits() const noexcept { return bits_; }
  std::uint64_t universe_size() const noexcept;
  std::size_t size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0; }

  /// Idempotent; throws ErrorKind::range when key >= 2^universe_bits.
  void insert(std::uint64_t key);

  bool member(std::uint64_t key, VebProbeStats* stats = nullptr) const;
  std::optional<std::uint64_t> min() const;
  std::optional<std::uint64_t> max() const;

  /// Smallest member strictly greater than key.
  std::optional<std::uint64_t> successor(std::uint64_t key, VebProbeStats* stats = nullptr) const;
  /// Largest member strictly smaller than key.
  std::optional<std::uint64_t> predecessor(std::uint64_t key,
                                           VebProbeStats* stats = nullptr) const;

 private:
  struct Node;

  void check_key(std::uint64_t key) const;

  unsigned bits_;
  std::size_t size_ = 0;
  std::unique_ptr<Node> root_;
};

}  // namespace wsisearch
