#include "tweetvec/word_context.h"

#include <algorithm>

#include "tweetvec/hsoftmax.h"

namespace tweetvec {

std::vector<WordContextSample> word_samples(const Tweet& tweet, std::size_t window) {
  std::vector<WordContextSample> out;
  const std::size_t len = tweet.tokens.size();
  if (len < 2) return out;
  out.reserve(len);
  for (std::size_t i = 0; i < len; ++i) {
    WordContextSample s;
    s.tweet = tweet.tweet_index;
    s.position = static_cast<std::uint32_t>(i);
    s.target = tweet.tokens[i];
    const std::size_t lo = i >= window ? i - window : 0;
    const std::size_t hi = std::min(len - 1, i + window);
    for (std::size_t l = lo; l <= hi; ++l) {
      if (l != i) s.context.push_back(tweet.tokens[l]);
    }
    out.push_back(std::move(s));
  }
  return out;
}

double word_loss(const WordContextSample& sample, const ParameterStore& store,
                 const CodingTree& word_tree, Gradients* grads, double weight) {
  const std::size_t n = store.dim();
  std::vector<double> input(store.tweets().row(sample.tweet).begin(),
                            store.tweets().row(sample.tweet).end());
  for (auto w : sample.context) axpy(1.0, store.words().row(w), input);

  std::vector<double> grad_input(grads ? n : 0, 0.0);
  const double loss = hs_loss_grad(input, word_tree, sample.target, store.table(Table::kWordNodes),
                                   grad_input, grads, Table::kWordNodes, weight);
  if (grads) {
    axpy(1.0, grad_input, grads->row(Table::kTweets, sample.tweet, n));
    for (auto w : sample.context) axpy(1.0, grad_input, grads->row(Table::kWords, w, n));
  }
  return loss;
}

double tweet_from_words_loss(const Tweet& tweet, const ParameterStore& store,
                             const CodingTree& tweet_tree, Gradients* grads, double weight) {
  if (tweet.tokens.empty()) return 0.0;
  const std::size_t n = store.dim();
  const double inv = 1.0 / static_cast<double>(tweet.tokens.size());
  std::vector<double> input(n, 0.0);
  for (auto w : tweet.tokens) axpy(inv, store.words().row(w), input);

  std::vector<double> grad_input(grads ? n : 0, 0.0);
  const double loss = hs_loss_grad(input, tweet_tree, tweet.tweet_index,
                                   store.table(Table::kTweetNodes), grad_input, grads,
                                   Table::kTweetNodes, weight);
  if (grads) {
    for (auto w : tweet.tokens) axpy(inv, grad_input, grads->row(Table::kWords, w, n));
  }
  return loss;
}

double word_forward_backward(const WordContextSample& sample, ParameterStore& store,
                             AdamState& adam, const CodingTree& word_tree, Gradients& scratch,
                             double weight) {
  scratch.clear();
  const double loss = word_loss(sample, store, word_tree, &scratch, weight);
  apply_gradients(store, adam, scratch);
  return loss;
}

}  // namespace tweetvec
