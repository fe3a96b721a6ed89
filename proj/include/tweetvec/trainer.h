#ifndef TWEETVEC_TRAINER_H_
#define TWEETVEC_TRAINER_H_

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "tweetvec/corpus.h"
#include "tweetvec/params.h"
#include "tweetvec/tweet_context.h"

namespace tweetvec {

// Temporal context sizes swept when tuning C_T.
inline constexpr std::array<std::size_t, 9> kTemporalContextGrid = {1, 2, 4, 6, 8, 10, 12, 14, 16};
inline constexpr std::size_t kDefaultDim = 200;
inline constexpr std::size_t kDefaultWordWindow = 10;
inline constexpr std::size_t kDefaultTemporalWindow = 2;

// The four terms of the joint objective, in per-tweet application order.
enum class Term : std::uint8_t {
  kWord,            // P(w(j,i) | word context, t(j))
  kTweetFromWords,  // P(t(j) | w(j,1..N_w))
  kTemporal,        // P(t(j) | temporal context [, u(k)])
  kUserFromTweets,  // P(u(k) | t(1..N_T))
};
inline constexpr std::size_t kTermCount = 4;
const char* term_name(Term t);

enum class ExecutionMode { kDeterministic, kThroughput };

struct TrainConfig {
  std::size_t dim = kDefaultDim;
  std::size_t word_window = kDefaultWordWindow;
  std::size_t temporal_window = kDefaultTemporalWindow;
  std::size_t epochs = 5;
  double lr = 0.001;
  bool use_user = false;
  AttentionMode attention = AttentionMode::kLearned;
  bool freeze_attention = false;
  std::uint64_t seed = 1;
  std::array<double, kTermCount> term_weights = {1.0, 1.0, 1.0, 1.0};
  ExecutionMode mode = ExecutionMode::kDeterministic;
  std::size_t workers = 1;
  std::uint64_t min_count = 1;
  std::string pretrained_words;

  // Throws ConfigError.
  void validate() const;
  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
  // Hash of the canonical JSON dump.
  std::string hash() const;
};

// Mean attention per (epoch, offset) over the samples where that offset was
// inside the timeline.
class AttentionReport {
 public:
  struct Row {
    std::size_t epoch = 0;
    int offset = 0;
    double mean_attention = 0.0;
    std::uint64_t sample_count = 0;
    bool operator==(const Row&) const = default;
  };

  const std::vector<Row>& rows() const { return rows_; }
  std::vector<Row> epoch_rows(std::size_t epoch) const;
  void add(const Row& row) { rows_.push_back(row); }

  void write_csv(std::ostream& out) const;
  static AttentionReport read_csv(std::istream& in);

  bool operator==(const AttentionReport&) const = default;

 private:
  std::vector<Row> rows_;
};

struct EpochLoss {
  std::size_t epoch = 0;
  std::array<double, kTermCount> mean = {};        // mean weighted loss per sample of each term
  std::array<std::uint64_t, kTermCount> samples = {};
  double total = 0.0;                              // summed weighted loss / tweet count
  bool operator==(const EpochLoss&) const = default;
};

// `epoch,term,mean_loss` rows, one per term plus a `total` row per epoch.
void write_loss_curve(const std::vector<EpochLoss>& curve, std::ostream& out);

struct LossBreakdown {
  std::array<double, kTermCount> term = {};  // summed weighted loss per term
  double total = 0.0;
};

class Trainer {
 public:
  // Initializes parameters from config.seed (and pretrained words, if set).
  Trainer(const Corpus& corpus, TrainConfig config);
  // Continues from existing state.
  Trainer(const Corpus& corpus, TrainConfig config, ParameterStore store, AdamState adam);

  // Runs one epoch; throws NumericalError naming the term on a non-finite loss.
  const EpochLoss& run_epoch();
  // Runs the remaining configured epochs, calling `on_epoch` at every epoch
  // barrier (no writer active).
  void train(const std::function<void(const Trainer&)>& on_epoch = {});

  const TrainConfig& config() const { return config_; }
  const ParameterStore& store() const { return store_; }
  ParameterStore& store() { return store_; }
  const AdamState& adam() const { return adam_; }
  std::size_t epochs_done() const { return curve_.size(); }
  const std::vector<EpochLoss>& loss_curve() const { return curve_; }
  const AttentionReport& attention_report() const { return attention_; }
  // Same statistic restricted to samples with all 2*C_T slots available.
  const AttentionReport& full_context_attention_report() const { return attention_full_; }

 private:
  struct Accumulator;
  void run_users(const std::vector<std::uint32_t>& users, Accumulator& acc, bool shared_step);

  const Corpus& corpus_;
  TrainConfig config_;
  ParameterStore store_;
  AdamState adam_;
  std::vector<EpochLoss> curve_;
  AttentionReport attention_;
  AttentionReport attention_full_;
};

// Model shape implied by a corpus and config.
ModelShape model_shape(const Corpus& corpus, const TrainConfig& config);

// Objective evaluated without updates, in training order. Pure.
LossBreakdown loss_report(const ParameterStore& store, const Corpus& corpus, const TrainConfig& config);
// Summed weighted loss of a single term. With `grads`, the gradient of that
// sum is accumulated into it (no optimizer step).
double term_loss(const ParameterStore& store, const Corpus& corpus, const TrainConfig& config, Term term,
                 Gradients* grads = nullptr);

}  // namespace tweetvec

#endif  // TWEETVEC_TRAINER_H_
