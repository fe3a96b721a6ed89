#ifndef TWEETVEC_TWEET_CONTEXT_H_
#define TWEETVEC_TWEET_CONTEXT_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tweetvec/coding_tree.h"
#include "tweetvec/corpus.h"
#include "tweetvec/params.h"

namespace tweetvec {

enum class AttentionMode {
  kLearned,         // softmax(A [t(j-C_T); ...; t(j+C_T)])
  kUniform,         // equal weight per available slot
  kSimpleDistance,  // weight proportional to 1/|offset|
};

const char* attention_mode_name(AttentionMode mode);
AttentionMode parse_attention_mode(const std::string& name);

// Context slots are ordered by offset: -C_T, ..., -1, +1, ..., +C_T.
int slot_offset(std::size_t slot, std::size_t window);

// Target tweet with the tweets around it in the same user's timeline. Slots
// outside the timeline hold kMasked.
struct TemporalSample {
  static constexpr std::int64_t kMasked = -1;

  std::uint32_t target = 0;
  std::uint32_t user = 0;
  std::vector<std::int64_t> context;

  bool available(std::size_t slot) const { return context[slot] != kMasked; }
  std::size_t available_count() const;
};

// Sample for the tweet at `position` of `user`'s timeline. Returns a sample
// with no available slot when the user has a single tweet.
TemporalSample temporal_sample(const Corpus& corpus, std::uint32_t user, std::size_t position,
                               std::size_t window);

// Masked softmax of A x concat(context). Empty spans mark unavailable slots,
// which contribute zeros to the concatenation and receive weight exactly 0.
// Requires at least one available slot.
std::vector<double> attention_weights(const Matrix& attention,
                                      std::span<const std::span<const double>> context);

std::vector<double> uniform_attention(const TemporalSample& sample);
std::vector<double> sd_attention(const TemporalSample& sample);

struct TemporalOptions {
  AttentionMode mode = AttentionMode::kLearned;
  bool use_user = false;
  // When false (learned mode), A receives no gradient.
  bool train_attention = true;
};

// -log P(target | sum_l alpha(l) t(l) [+ u(k)]) on the tweet tree, scaled by
// `weight`. The weights used are written to `alpha_out` when non-null.
// Returns 0 when no slot is available.
double temporal_loss(const TemporalSample& sample, const ParameterStore& store,
                     const CodingTree& tweet_tree, const TemporalOptions& options, Gradients* grads,
                     double weight = 1.0, std::vector<double>* alpha_out = nullptr);

// -log P(user leaf | mean of the user's tweet vectors) on the user tree.
double user_from_tweets_loss(const User& user, std::uint32_t user_index, const ParameterStore& store,
                             const CodingTree& user_tree, Gradients* grads, double weight = 1.0);

double tweet_forward_backward(const TemporalSample& sample, ParameterStore& store, AdamState& adam,
                              const CodingTree& tweet_tree, const TemporalOptions& options,
                              Gradients& scratch, double weight = 1.0,
                              std::vector<double>* alpha_out = nullptr);

}  // namespace tweetvec

#endif  // TWEETVEC_TWEET_CONTEXT_H_
