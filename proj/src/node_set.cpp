#include "codedrebal/node_set.hpp"

#include <ostream>

namespace codedrebal {

std::string NodeSet::label() const {
  const bool wide = max() > 9;
  std::string out;
  for (NodeId n : *this) {
    if (wide && !out.empty()) out += ',';
    out += std::to_string(n);
  }
  return out;
}

std::string NodeSet::to_string() const {
  std::string out = "{";
  for (NodeId n : *this) {
    if (out.size() > 1) out += ',';
    out += std::to_string(n);
  }
  out += '}';
  return out;
}

std::ostream& operator<<(std::ostream& os, NodeSet s) {
  return os << s.to_string();
}

std::uint64_t binomial(unsigned n, unsigned k) {
  if (k > n) return 0;
  if (k > n - k) k = n - k;
  std::uint64_t result = 1;
  for (unsigned i = 1; i <= k; ++i) {
    // result * (n - k + i) is divisible by i at every step.
    result = result * (n - k + i) / i;
  }
  return result;
}

std::vector<NodeSet> subsets_of_size(NodeSet universe, std::size_t k) {
  std::vector<NodeSet> out;
  for_each_subset(universe, k, [&](NodeSet s) { out.push_back(s); });
  return out;
}

}  // namespace codedrebal
