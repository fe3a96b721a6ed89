#ifndef TWEETVEC_WORD_CONTEXT_H_
#define TWEETVEC_WORD_CONTEXT_H_

#include <cstdint>
#include <vector>

#include "tweetvec/coding_tree.h"
#include "tweetvec/corpus.h"
#include "tweetvec/params.h"

namespace tweetvec {

// Predict word i of tweet j from the words at offsets [-C_W, C_W] \ {0}
// (clipped to the tweet) plus the tweet vector.
struct WordContextSample {
  std::uint32_t tweet = 0;
  std::uint32_t position = 0;
  std::uint32_t target = 0;
  std::vector<std::uint32_t> context;
};

// One sample per token when the tweet has at least two tokens, none otherwise.
std::vector<WordContextSample> word_samples(const Tweet& tweet, std::size_t window);

// Input = sum of context word vectors + tweet vector, fed to the word tree.
// Returns weight * loss; gradients (also scaled) go to `grads` when non-null.
double word_loss(const WordContextSample& sample, const ParameterStore& store,
                 const CodingTree& word_tree, Gradients* grads, double weight = 1.0);

// -log P(tweet leaf | mean of its word vectors) on the tweet tree. Returns 0
// for tweets without tokens.
double tweet_from_words_loss(const Tweet& tweet, const ParameterStore& store,
                             const CodingTree& tweet_tree, Gradients* grads, double weight = 1.0);

// word_loss followed by one Adam step on the touched rows.
double word_forward_backward(const WordContextSample& sample, ParameterStore& store,
                             AdamState& adam, const CodingTree& word_tree, Gradients& scratch,
                             double weight = 1.0);

}  // namespace tweetvec

#endif  // TWEETVEC_WORD_CONTEXT_H_
