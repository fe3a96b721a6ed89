#ifndef TWEETVEC_CODING_TREE_H_
#define TWEETVEC_CODING_TREE_H_

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace tweetvec {

// Binary prefix-code tree used by hierarchical softmax. Internal nodes are
// numbered 0..leaf_count-2 and index rows of a node parameter table. For each
// leaf, path[k] is the internal node visited at depth k and code[k] the branch
// taken there (0 = left, 1 = right).
class CodingTree {
 public:
  CodingTree() = default;

  std::size_t leaf_count() const { return codes_.size(); }
  std::size_t internal_node_count() const {
    return codes_.empty() ? 0 : codes_.size() - 1;
  }

  std::span<const std::uint8_t> code(std::size_t leaf) const { return codes_[leaf]; }
  std::span<const std::uint32_t> path(std::size_t leaf) const { return paths_[leaf]; }

  // Follows `bits` from the root. Returns the leaf reached, or -1 if the bits
  // stop at an internal node or run past a leaf.
  long long decode(std::span<const std::uint8_t> bits) const;

  std::size_t max_code_length() const;

  // Huffman code over leaf frequencies. Ties are broken towards the node with
  // the lower index (leaves before internal nodes, then creation order).
  static CodingTree huffman(std::span<const std::uint64_t> counts);

  // Complete binary tree laid out as a heap; code lengths differ by at most 1.
  static CodingTree balanced(std::size_t leaf_count);

 private:
  // children_[node] = {left, right}; values >= 0 are internal nodes, values
  // < 0 encode leaf ~value.
  std::vector<std::array<long long, 2>> children_;
  std::vector<std::vector<std::uint8_t>> codes_;
  std::vector<std::vector<std::uint32_t>> paths_;
  std::uint32_t root_ = 0;

  void assign_codes();
};

}  // namespace tweetvec

#endif  // TWEETVEC_CODING_TREE_H_
