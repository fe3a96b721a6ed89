#include "tweetvec/hsoftmax.h"

#include <cmath>

namespace tweetvec {

double softplus(double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double hs_loss_grad(std::span<const double> input, const CodingTree& tree, std::size_t leaf,
                    const Matrix& nodes, std::span<double> grad_input, Gradients* grads,
                    Table node_table, double scale) {
  const auto code = tree.code(leaf);
  const auto path = tree.path(leaf);
  double loss = 0.0;
  for (std::size_t k = 0; k < code.size(); ++k) {
    const auto node = nodes.row(path[k]);
    const double sign = code[k] ? -1.0 : 1.0;
    const double f = dot(input, node);
    // -log sigmoid(sign * f) = softplus(-sign * f)
    loss += softplus(-sign * f);
    const double g = -sign * sigmoid(-sign * f) * scale;
    if (!grad_input.empty()) axpy(g, node, grad_input);
    if (grads) axpy(g, input, grads->row(node_table, path[k], nodes.cols()));
  }
  return scale * loss;
}

std::vector<double> hs_leaf_probabilities(std::span<const double> input, const CodingTree& tree,
                                          const Matrix& nodes) {
  std::vector<double> p(tree.leaf_count());
  for (std::size_t leaf = 0; leaf < p.size(); ++leaf) {
    p[leaf] = std::exp(-hs_loss_grad(input, tree, leaf, nodes, {}, nullptr, Table::kWordNodes));
  }
  return p;
}

}  // namespace tweetvec
