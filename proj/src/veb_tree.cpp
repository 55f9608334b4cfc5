#include "wsisearch/veb_tree.hpp"

#include <utility>

#include "wsisearch/core.hpp"

namespace wsisearch {

struct VebTree::Node {
  explicit Node(unsigned b) : bits(b), low_bits(b / 2) {}

  unsigned bits;
  unsigned low_bits;
  bool has = false;
  std::uint64_t mn = 0;
  std::uint64_t mx = 0;
  // The minimum is kept only here, never inside a cluster.
  std::unique_ptr<Node> summary;
  std::unordered_map<std::uint64_t, std::unique_ptr<Node>> clusters;

  std::uint64_t high(std::uint64_t x) const { return x >> low_bits; }
  std::uint64_t low(std::uint64_t x) const { return x & ((std::uint64_t{1} << low_bits) - 1); }
  std::uint64_t index(std::uint64_t h, std::uint64_t l) const { return (h << low_bits) | l; }

  const Node* cluster(std::uint64_t h) const {
    auto it = clusters.find(h);
    return it == clusters.end() ? nullptr : it->second.get();
  }

  bool insert(std::uint64_t x) {
    if (!has) {
      has = true;
      mn = mx = x;
      return true;
    }
    if (x == mn || x == mx) return false;
    if (bits == 1) {
      mn = std::min(mn, x);
      mx = std::max(mx, x);
      return true;
    }
    if (x < mn) std::swap(x, mn);

    const std::uint64_t h = high(x);
    auto& slot = clusters[h];
    if (!slot) slot = std::make_unique<Node>(low_bits);
    bool inserted;
    if (!slot->has) {
      if (!summary) summary = std::make_unique<Node>(bits - low_bits);
      summary->insert(h);
      inserted = slot->insert(low(x));
    } else {
      inserted = slot->insert(low(x));
    }
    if (x > mx) mx = x;
    return inserted;
  }

  bool member(std::uint64_t x, std::size_t depth, VebProbeStats* stats) const {
    if (stats != nullptr && depth > stats->max_depth) stats->max_depth = depth;
    if (!has) return false;
    if (x == mn || x == mx) return true;
    if (bits == 1) return false;
    const Node* c = cluster(high(x));
    return c != nullptr && c->member(low(x), depth + 1, stats);
  }

  std::optional<std::uint64_t> successor(std::uint64_t x, std::size_t depth,
                                         VebProbeStats* stats) const {
    if (stats != nullptr && depth > stats->max_depth) stats->max_depth = depth;
    if (!has) return std::nullopt;
    if (bits == 1) {
      if (x == 0 && mx == 1) return 1;
      return std::nullopt;
    }
    if (x < mn) return mn;

    const std::uint64_t h = high(x);
    const std::uint64_t l = low(x);
    const Node* c = cluster(h);
    if (c != nullptr && c->has && l < c->mx) {
      return index(h, *c->successor(l, depth + 1, stats));
    }
    if (!summary) return std::nullopt;
    const auto next = summary->successor(h, depth + 1, stats);
    if (!next) return std::nullopt;
    return index(*next, cluster(*next)->mn);
  }

  std::optional<std::uint64_t> predecessor(std::uint64_t x, std::size_t depth,
                                           VebProbeStats* stats) const {
    if (stats != nullptr && depth > stats->max_depth) stats->max_depth = depth;
    if (!has) return std::nullopt;
    if (bits == 1) {
      if (x == 1 && mn == 0) return 0;
      return std::nullopt;
    }
    if (x > mx) return mx;

    const std::uint64_t h = high(x);
    const std::uint64_t l = low(x);
    const Node* c = cluster(h);
    if (c != nullptr && c->has && l > c->mn) {
      return index(h, *c->predecessor(l, depth + 1, stats));
    }
    const auto prev = summary ? summary->predecessor(h, depth + 1, stats) : std::nullopt;
    if (!prev) {
      if (x > mn) return mn;
      return std::nullopt;
    }
    return index(*prev, cluster(*prev)->mx);
  }
};

VebTree::VebTree(unsigned universe_bits) : bits_(universe_bits) {
  if (universe_bits == 0 || universe_bits > 63) {
    throw Error(ErrorKind::range, "VebTree: universe_bits must be in [1, 63]");
  }
  root_ = std::make_unique<Node>(bits_);
}

VebTree::~VebTree() = default;
VebTree::VebTree(VebTree&&) noexcept = default;
VebTree& VebTree::operator=(VebTree&&) noexcept = default;

std::uint64_t VebTree::universe_size() const noexcept { return std::uint64_t{1} << bits_; }

void VebTree::check_key(std::uint64_t key) const {
  if (key >= universe_size()) {
    throw Error(ErrorKind::range, "VebTree: key " + std::to_string(key) +
                                      " outside universe of " + std::to_string(bits_) + " bits");
  }
}

void VebTree::insert(std::uint64_t key) {
  check_key(key);
  if (root_->insert(key)) ++size_;
}

bool VebTree::member(std::uint64_t key, VebProbeStats* stats) const {
  check_key(key);
  if (stats != nullptr) ++stats->calls;
  return root_->member(key, 1, stats);
}

std::optional<std::uint64_t> VebTree::min() const {
  if (!root_->has) return std::nullopt;
  return root_->mn;
}

std::optional<std::uint64_t> VebTree::max() const {
  if (!root_->has) return std::nullopt;
  return root_->mx;
}

std::optional<std::uint64_t> VebTree::successor(std::uint64_t key, VebProbeStats* stats) const {
  check_key(key);
  if (stats != nullptr) ++stats->calls;
  return root_->successor(key, 1, stats);
}

std::optional<std::uint64_t> VebTree::predecessor(std::uint64_t key,
                                                  VebProbeStats* stats) const {
  check_key(key);
  if (stats != nullptr) ++stats->calls;
  return root_->predecessor(key, 1, stats);
}

}  // namespace wsisearch
