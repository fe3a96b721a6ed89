#ifndef TWEETVEC_PARAMS_H_
#define TWEETVEC_PARAMS_H_

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tweetvec/matrix.h"

namespace tweetvec {

class Vocabulary;

// Trainable tables, in checkpoint order.
enum class Table : std::uint8_t {
  kWords,
  kTweets,
  kUsers,
  kWordNodes,   // hierarchical-softmax nodes of the word tree
  kTweetNodes,  // hierarchical-softmax nodes of the tweet tree
  kUserNodes,   // hierarchical-softmax nodes of the user tree
  kAttention,   // A: (2*C_T) x (2*C_T*n)
};
inline constexpr std::size_t kTableCount = 7;

const char* table_name(Table t);

struct ModelShape {
  std::size_t vocab = 0;
  std::size_t tweets = 0;
  std::size_t users = 0;
  std::size_t dim = 200;
  std::size_t word_window = 10;     // C_W
  std::size_t temporal_window = 2;  // C_T

  std::size_t context_slots() const { return 2 * temporal_window; }
  bool operator==(const ModelShape&) const = default;
};

class ParameterStore {
 public:
  ParameterStore() = default;

  // All tables zero.
  static ParameterStore zeros(const ModelShape& shape);

  // Word, tweet and user vectors ~ U(-0.5/n, 0.5/n) drawn in that order from a
  // generator seeded with `seed`; tree nodes and A start at zero.
  static ParameterStore initialize(const ModelShape& shape, std::uint64_t seed);

  const ModelShape& shape() const { return shape_; }
  std::size_t dim() const { return shape_.dim; }

  Matrix& table(Table t) { return tables_[static_cast<std::size_t>(t)]; }
  const Matrix& table(Table t) const { return tables_[static_cast<std::size_t>(t)]; }

  Matrix& words() { return table(Table::kWords); }
  const Matrix& words() const { return table(Table::kWords); }
  Matrix& tweets() { return table(Table::kTweets); }
  const Matrix& tweets() const { return table(Table::kTweets); }
  Matrix& users() { return table(Table::kUsers); }
  const Matrix& users() const { return table(Table::kUsers); }
  Matrix& attention() { return table(Table::kAttention); }
  const Matrix& attention() const { return table(Table::kAttention); }

  bool all_finite() const;

  bool operator==(const ParameterStore&) const = default;

 private:
  ModelShape shape_;
  std::array<Matrix, kTableCount> tables_;
};

// Copies vectors for words present in `vocab` from a text embedding file
// (optional `<count> <dim>` header, then `<word> v1 ... vn`). Returns the number
// of words replaced. Throws DataError when the file dimension differs from n.
std::size_t load_pretrained_words(ParameterStore& store, const Vocabulary& vocab,
                                  const std::string& path);

struct AdamConfig {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  bool operator==(const AdamConfig&) const = default;
};

// First/second moment accumulators shaped like the parameter store.
struct AdamState {
  AdamConfig config;
  std::array<Matrix, kTableCount> first;
  std::array<Matrix, kTableCount> second;
  std::uint64_t step = 0;

  static AdamState for_store(const ParameterStore& store, const AdamConfig& config = {});
  bool operator==(const AdamState&) const = default;
};

// One bias-corrected Adam update of `param` given its gradient of the loss
// (descent). `step` is the 1-based update count.
void adam_update(std::span<double> param, std::span<const double> grad, std::span<double> first,
                 std::span<double> second, const AdamConfig& config, std::uint64_t step);

// Sparse per-row gradient accumulator. Rows are zero on first touch; spans
// returned by row() stay valid until clear().
class Gradients {
 public:
  std::span<double> row(Table table, std::size_t row, std::size_t width);
  // Empty span when the row was never touched.
  std::span<const double> find(Table table, std::size_t row) const;
  void clear();
  std::size_t touched_rows() const { return used_; }

  template <typename F>
  void for_each(F&& f) const {
    for (std::size_t i = 0; i < used_; ++i) {
      const auto& e = entries_[i];
      f(e.table, e.row, std::span<const double>(e.values));
    }
  }

 private:
  struct Entry {
    Table table;
    std::size_t row;
    std::vector<double> values;
  };
  static std::uint64_t key(Table t, std::size_t row) {
    return (static_cast<std::uint64_t>(t) << 56) | row;
  }
  std::vector<Entry> entries_;
  std::vector<std::pair<std::uint64_t, std::size_t>> index_;  // sorted by key
  std::size_t used_ = 0;
};

// Applies one Adam step to every touched row (advances `state.step` by one).
void apply_gradients(ParameterStore& store, AdamState& state, const Gradients& grads);

// Same, with the bias-correction step supplied by the caller. Used by
// concurrent workers that share a step counter; `state.step` is not touched.
void apply_gradients(ParameterStore& store, AdamState& state, const Gradients& grads,
                     std::uint64_t step);

}  // namespace tweetvec

#endif  // TWEETVEC_PARAMS_H_
