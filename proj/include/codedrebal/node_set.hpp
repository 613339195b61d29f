#pragma once

#include <bit>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <iosfwd>
#include <iterator>
#include <string>
#include <vector>

namespace codedrebal {

/// Node identifiers are 1-based. Id 0 is never a node.
using NodeId = unsigned;

inline constexpr NodeId kMaxNodeId = 63;

/// A set of node ids stored as a 64-bit mask (bit n <-> node n).
class NodeSet {
 public:
  class iterator {
   public:
    using iterator_category = std::forward_iterator_tag;
    using value_type = NodeId;
    using difference_type = std::ptrdiff_t;
    using pointer = const NodeId*;
    using reference = NodeId;

    constexpr iterator() = default;
    constexpr explicit iterator(std::uint64_t rest) : rest_(rest) {}

    constexpr NodeId operator*() const {
      return static_cast<NodeId>(std::countr_zero(rest_));
    }
    constexpr iterator& operator++() {
      rest_ &= rest_ - 1;
      return *this;
    }
    constexpr iterator operator++(int) {
      iterator old = *this;
      ++*this;
      return old;
    }
    constexpr bool operator==(const iterator&) const = default;

   private:
    std::uint64_t rest_ = 0;
  };

  constexpr NodeSet() = default;

  static constexpr NodeSet from_mask(std::uint64_t mask) {
    NodeSet s;
    s.mask_ = mask & ~std::uint64_t{1};
    return s;
  }

  /// {first, ..., last}; empty when first > last.
  static constexpr NodeSet range(NodeId first, NodeId last) {
    NodeSet s;
    for (NodeId n = first; n <= last; ++n) s.insert(n);
    return s;
  }

  static constexpr NodeSet of(std::initializer_list<NodeId> ids) {
    NodeSet s;
    for (NodeId n : ids) s.insert(n);
    return s;
  }

  constexpr std::uint64_t mask() const { return mask_; }
  constexpr std::size_t size() const {
    return static_cast<std::size_t>(std::popcount(mask_));
  }
  constexpr bool empty() const { return mask_ == 0; }

  constexpr bool contains(NodeId n) const {
    return n >= 1 && n <= kMaxNodeId && ((mask_ >> n) & 1U) != 0;
  }
  constexpr bool contains(NodeSet other) const {
    return (other.mask_ & ~mask_) == 0;
  }

  // Ids outside [1, kMaxNodeId] are ignored.
  constexpr void insert(NodeId n) {
    if (n >= 1 && n <= kMaxNodeId) mask_ |= std::uint64_t{1} << n;
  }
  constexpr void erase(NodeId n) {
    if (n >= 1 && n <= kMaxNodeId) mask_ &= ~(std::uint64_t{1} << n);
  }

  constexpr NodeSet with(NodeId n) const {
    NodeSet s = *this;
    s.insert(n);
    return s;
  }
  constexpr NodeSet without(NodeId n) const {
    NodeSet s = *this;
    s.erase(n);
    return s;
  }

  /// Smallest / largest member; 0 for the empty set.
  constexpr NodeId min() const {
    return empty() ? 0 : static_cast<NodeId>(std::countr_zero(mask_));
  }
  constexpr NodeId max() const {
    return empty() ? 0 : static_cast<NodeId>(63 - std::countl_zero(mask_));
  }

  /// The i-th smallest member (0-based). Requires i < size().
  constexpr NodeId nth(std::size_t i) const {
    std::uint64_t rest = mask_;
    for (; i > 0; --i) rest &= rest - 1;
    return static_cast<NodeId>(std::countr_zero(rest));
  }

  constexpr iterator begin() const { return iterator(mask_); }
  constexpr iterator end() const { return iterator(0); }

  friend constexpr NodeSet operator|(NodeSet a, NodeSet b) {
    return from_mask(a.mask_ | b.mask_);
  }
  friend constexpr NodeSet operator&(NodeSet a, NodeSet b) {
    return from_mask(a.mask_ & b.mask_);
  }
  /// Set difference.
  friend constexpr NodeSet operator-(NodeSet a, NodeSet b) {
    return from_mask(a.mask_ & ~b.mask_);
  }

  friend constexpr bool operator==(NodeSet, NodeSet) = default;
  friend constexpr auto operator<=>(NodeSet a, NodeSet b) {
    return a.mask_ <=> b.mask_;
  }

  /// Compact label: "23" for {2,3}; ids are comma-joined once any id exceeds 9.
  std::string label() const;
  /// "{2,3}"
  std::string to_string() const;

 private:
  std::uint64_t mask_ = 0;
};

std::ostream& operator<<(std::ostream& os, NodeSet s);

/// C(n, k); 0 when k > n. Exact for the ranges used here (n <= 64).
std::uint64_t binomial(unsigned n, unsigned k);

/// Calls fn(subset) for every k-subset of `universe`, in lexicographic order
/// of the sorted member lists.
template <typename Fn>
void for_each_subset(NodeSet universe, std::size_t k, Fn&& fn) {
  const std::size_t n = universe.size();
  if (k > n) return;
  std::vector<NodeId> members(universe.begin(), universe.end());
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    NodeSet s;
    for (std::size_t i : idx) s.insert(members[i]);
    fn(s);
    std::size_t pos = k;
    while (pos > 0 && idx[pos - 1] == n - k + (pos - 1)) --pos;
    if (pos == 0) return;
    ++idx[pos - 1];
    for (std::size_t i = pos; i < k; ++i) idx[i] = idx[i - 1] + 1;
  }
}

std::vector<NodeSet> subsets_of_size(NodeSet universe, std::size_t k);

}  // namespace codedrebal

template <>
struct std::hash<codedrebal::NodeSet> {
  std::size_t operator()(codedrebal::NodeSet s) const noexcept {
    return std::hash<std::uint64_t>{}(s.mask());
  }
};
