#ifndef TWEETVEC_HSOFTMAX_H_
#define TWEETVEC_HSOFTMAX_H_

#include <span>
#include <vector>

#include "tweetvec/coding_tree.h"
#include "tweetvec/matrix.h"
#include "tweetvec/params.h"

namespace tweetvec {

// Negative log-probability of `leaf` under hierarchical softmax:
//   loss = -sum_k log sigmoid((1 - 2 code[k]) * <input, nodes[path[k]]>)
// Scaled by `scale`. When non-empty, `grad_input` is incremented by
// d(scale*loss)/d(input); when `grads` is set, node gradients are accumulated
// into its `node_table` rows.
double hs_loss_grad(std::span<const double> input, const CodingTree& tree, std::size_t leaf,
                    const Matrix& nodes, std::span<double> grad_input, Gradients* grads,
                    Table node_table, double scale = 1.0);

// Probability of every leaf for a fixed input, by enumeration.
std::vector<double> hs_leaf_probabilities(std::span<const double> input, const CodingTree& tree,
                                          const Matrix& nodes);

// log(1 + exp(x)) without overflow.
double softplus(double x);
double sigmoid(double x);

}  // namespace tweetvec

#endif  // TWEETVEC_HSOFTMAX_H_
