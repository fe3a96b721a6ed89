#include "tweetvec/coding_tree.h"

#include <queue>
#include <stdexcept>
#include <tuple>

namespace tweetvec {

namespace {

long long leaf_ref(std::size_t leaf) { return ~static_cast<long long>(leaf); }

}  // namespace

long long CodingTree::decode(std::span<const std::uint8_t> bits) const {
  if (leaf_count() == 0) return -1;
  if (leaf_count() == 1) return bits.empty() ? 0 : -1;
  long long node = root_;
  for (std::size_t k = 0; k < bits.size(); ++k) {
    if (node < 0) return -1;
    node = children_[node][bits[k] ? 1 : 0];
  }
  return node < 0 ? ~node : -1;
}

std::size_t CodingTree::max_code_length() const {
  std::size_t best = 0;
  for (const auto& c : codes_) best = std::max(best, c.size());
  return best;
}

void CodingTree::assign_codes() {
  const std::size_t n = codes_.size();
  if (n <= 1) return;
  struct Frame {
    long long node;
    std::vector<std::uint8_t> code;
    std::vector<std::uint32_t> path;
  };
  std::vector<Frame> stack;
  stack.push_back({static_cast<long long>(root_), {}, {}});
  while (!stack.empty()) {
    Frame f = std::move(stack.back());
    stack.pop_back();
    if (f.node < 0) {
      codes_[~f.node] = std::move(f.code);
      paths_[~f.node] = std::move(f.path);
      continue;
    }
    for (std::uint8_t bit : {1, 0}) {
      Frame child{children_[f.node][bit], f.code, f.path};
      child.code.push_back(bit);
      child.path.push_back(static_cast<std::uint32_t>(f.node));
      stack.push_back(std::move(child));
    }
  }
}

CodingTree CodingTree::huffman(std::span<const std::uint64_t> counts) {
  if (counts.empty()) throw std::invalid_argument("huffman: no leaves");
  for (auto c : counts) {
    if (c == 0) throw std::invalid_argument("huffman: leaf counts must be positive");
  }
  const std::size_t n = counts.size();
  CodingTree tree;
  tree.codes_.resize(n);
  tree.paths_.resize(n);
  if (n == 1) return tree;

  // (weight, tie-break key, node ref). Leaves use key = leaf index, internal
  // nodes key = n + creation order, so lower indices win ties.
  using Item = std::tuple<std::uint64_t, std::size_t, long long>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  for (std::size_t i = 0; i < n; ++i) heap.emplace(counts[i], i, leaf_ref(i));

  tree.children_.reserve(n - 1);
  while (heap.size() > 1) {
    auto [w0, k0, a] = heap.top();
    heap.pop();
    auto [w1, k1, b] = heap.top();
    heap.pop();
    const auto id = static_cast<long long>(tree.children_.size());
    tree.children_.push_back({a, b});
    heap.emplace(w0 + w1, n + static_cast<std::size_t>(id), id);
  }
  tree.root_ = static_cast<std::uint32_t>(n - 2);
  tree.assign_codes();
  return tree;
}

CodingTree CodingTree::balanced(std::size_t leaf_count) {
  if (leaf_count == 0) throw std::invalid_argument("balanced tree: leaf_count must be >= 1");
  const std::size_t n = leaf_count;
  CodingTree tree;
  tree.codes_.resize(n);
  tree.paths_.resize(n);
  if (n == 1) return tree;

  // Heap positions 0..n-2 are internal nodes, n-1..2n-2 are leaves.
  auto ref = [n](std::size_t pos) -> long long {
    return pos < n - 1 ? static_cast<long long>(pos) : leaf_ref(pos - (n - 1));
  };
  tree.children_.resize(n - 1);
  for (std::size_t p = 0; p + 1 < n; ++p) {
    tree.children_[p] = {ref(2 * p + 1), ref(2 * p + 2)};
  }
  tree.root_ = 0;
  tree.assign_codes();
  return tree;
}

}  // namespace tweetvec
