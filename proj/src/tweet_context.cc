#include "tweetvec/tweet_context.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>

#include "tweetvec/errors.h"
#include "tweetvec/hsoftmax.h"

namespace tweetvec {

const char* attention_mode_name(AttentionMode mode) {
  switch (mode) {
    case AttentionMode::kLearned: return "learned";
    case AttentionMode::kUniform: return "uniform";
    case AttentionMode::kSimpleDistance: return "sd";
  }
  return "?";
}

AttentionMode parse_attention_mode(const std::string& name) {
  if (name == "learned") return AttentionMode::kLearned;
  if (name == "uniform") return AttentionMode::kUniform;
  if (name == "sd") return AttentionMode::kSimpleDistance;
  throw ConfigError("unknown attention mode '" + name + "' (expected learned, uniform or sd)");
}

int slot_offset(std::size_t slot, std::size_t window) {
  const auto s = static_cast<int>(slot);
  const auto w = static_cast<int>(window);
  return s < w ? s - w : s - w + 1;
}

std::size_t TemporalSample::available_count() const {
  return static_cast<std::size_t>(
      std::count_if(context.begin(), context.end(), [](auto c) { return c != kMasked; }));
}

TemporalSample temporal_sample(const Corpus& corpus, std::uint32_t user, std::size_t position,
                               std::size_t window) {
  const auto& timeline = corpus.users()[user].timeline;
  TemporalSample s;
  s.target = timeline[position];
  s.user = user;
  s.context.assign(2 * window, TemporalSample::kMasked);
  for (std::size_t slot = 0; slot < s.context.size(); ++slot) {
    const long long p = static_cast<long long>(position) + slot_offset(slot, window);
    if (p >= 0 && p < static_cast<long long>(timeline.size())) s.context[slot] = timeline[p];
  }
  return s;
}

namespace {

void masked_softmax(std::vector<double>& z, const std::vector<bool>& avail) {
  double zmax = -std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < z.size(); ++r) {
    if (avail[r]) zmax = std::max(zmax, z[r]);
  }
  double total = 0.0;
  for (std::size_t r = 0; r < z.size(); ++r) {
    z[r] = avail[r] ? std::exp(z[r] - zmax) : 0.0;
    total += z[r];
  }
  for (double& x : z) x /= total;
}

}  // namespace

std::vector<double> attention_weights(const Matrix& attention,
                                      std::span<const std::span<const double>> context) {
  const std::size_t slots = context.size();
  if (attention.rows() != slots) throw std::invalid_argument("attention_weights: A has wrong row count");
  std::vector<bool> avail(slots);
  std::size_t dim = 0;
  for (std::size_t s = 0; s < slots; ++s) {
    avail[s] = !context[s].empty();
    if (avail[s]) dim = context[s].size();
  }
  if (dim == 0) throw std::invalid_argument("attention_weights: no available context slot");

  std::vector<double> z(slots, 0.0);
  for (std::size_t r = 0; r < slots; ++r) {
    if (!avail[r]) continue;
    const auto arow = attention.row(r);
    for (std::size_t s = 0; s < slots; ++s) {
      if (avail[s]) z[r] += dot(arow.subspan(s * dim, dim), context[s]);
    }
  }
  masked_softmax(z, avail);
  return z;
}

std::vector<double> uniform_attention(const TemporalSample& sample) {
  const std::size_t k = sample.available_count();
  std::vector<double> alpha(sample.context.size(), 0.0);
  for (std::size_t s = 0; s < alpha.size(); ++s) {
    if (sample.available(s)) alpha[s] = 1.0 / static_cast<double>(k);
  }
  return alpha;
}

std::vector<double> sd_attention(const TemporalSample& sample) {
  const std::size_t window = sample.context.size() / 2;
  std::vector<double> alpha(sample.context.size(), 0.0);
  double total = 0.0;
  for (std::size_t s = 0; s < alpha.size(); ++s) {
    if (sample.available(s)) {
      alpha[s] = 1.0 / std::abs(slot_offset(s, window));
      total += alpha[s];
    }
  }
  for (double& a : alpha) a /= total;
  return alpha;
}

double temporal_loss(const TemporalSample& sample, const ParameterStore& store,
                     const CodingTree& tweet_tree, const TemporalOptions& options, Gradients* grads,
                     double weight, std::vector<double>* alpha_out) {
  if (sample.available_count() == 0) return 0.0;
  const std::size_t n = store.dim();
  const std::size_t slots = sample.context.size();
  const Matrix& tweets = store.tweets();

  std::vector<std::span<const double>> ctx(slots);
  for (std::size_t s = 0; s < slots; ++s) {
    if (sample.available(s)) ctx[s] = tweets.row(static_cast<std::size_t>(sample.context[s]));
  }

  std::vector<double> alpha;
  switch (options.mode) {
    case AttentionMode::kLearned: alpha = attention_weights(store.attention(), ctx); break;
    case AttentionMode::kUniform: alpha = uniform_attention(sample); break;
    case AttentionMode::kSimpleDistance: alpha = sd_attention(sample); break;
  }
  if (alpha_out) *alpha_out = alpha;

  std::vector<double> input(n, 0.0);
  for (std::size_t s = 0; s < slots; ++s) {
    if (sample.available(s)) axpy(alpha[s], ctx[s], input);
  }
  if (options.use_user) axpy(1.0, store.users().row(sample.user), input);

  std::vector<double> grad_input(grads ? n : 0, 0.0);
  const double loss = hs_loss_grad(input, tweet_tree, sample.target, store.table(Table::kTweetNodes),
                                   grad_input, grads, Table::kTweetNodes, weight);
  if (!grads) return loss;

  if (options.use_user) axpy(1.0, grad_input, grads->row(Table::kUsers, sample.user, n));
  for (std::size_t s = 0; s < slots; ++s) {
    if (sample.available(s)) {
      axpy(alpha[s], grad_input, grads->row(Table::kTweets, static_cast<std::size_t>(sample.context[s]), n));
    }
  }
  if (options.mode != AttentionMode::kLearned) return loss;

  // Back through the masked softmax: dz_r = alpha_r (dalpha_r - sum_m alpha_m dalpha_m).
  std::vector<double> dalpha(slots, 0.0);
  double mean = 0.0;
  for (std::size_t s = 0; s < slots; ++s) {
    if (sample.available(s)) {
      dalpha[s] = dot(grad_input, ctx[s]);
      mean += alpha[s] * dalpha[s];
    }
  }
  const Matrix& A = store.attention();
  for (std::size_t r = 0; r < slots; ++r) {
    if (!sample.available(r)) continue;
    const double dz = alpha[r] * (dalpha[r] - mean);
    if (dz == 0.0) continue;
    const auto arow = A.row(r);
    std::span<double> grow;
    if (options.train_attention) grow = grads->row(Table::kAttention, r, A.cols());
    for (std::size_t s = 0; s < slots; ++s) {
      if (!sample.available(s)) continue;
      if (!grow.empty()) axpy(dz, ctx[s], grow.subspan(s * n, n));
      axpy(dz, arow.subspan(s * n, n),
           grads->row(Table::kTweets, static_cast<std::size_t>(sample.context[s]), n));
    }
  }
  return loss;
}

double user_from_tweets_loss(const User& user, std::uint32_t user_index, const ParameterStore& store,
                             const CodingTree& user_tree, Gradients* grads, double weight) {
  if (user.timeline.empty()) return 0.0;
  const std::size_t n = store.dim();
  const double inv = 1.0 / static_cast<double>(user.timeline.size());
  std::vector<double> input(n, 0.0);
  for (auto t : user.timeline) axpy(inv, store.tweets().row(t), input);

  std::vector<double> grad_input(grads ? n : 0, 0.0);
  const double loss = hs_loss_grad(input, user_tree, user_index, store.table(Table::kUserNodes),
                                   grad_input, grads, Table::kUserNodes, weight);
  if (grads) {
    for (auto t : user.timeline) axpy(inv, grad_input, grads->row(Table::kTweets, t, n));
  }
  return loss;
}

double tweet_forward_backward(const TemporalSample& sample, ParameterStore& store, AdamState& adam,
                              const CodingTree& tweet_tree, const TemporalOptions& options,
                              Gradients& scratch, double weight, std::vector<double>* alpha_out) {
  scratch.clear();
  const double loss = temporal_loss(sample, store, tweet_tree, options, &scratch, weight, alpha_out);
  apply_gradients(store, adam, scratch);
  return loss;
}

}  // namespace tweetvec
