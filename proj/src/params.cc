#include "tweetvec/params.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "tweetvec/corpus.h"
#include "tweetvec/errors.h"

namespace tweetvec {

namespace {

// 53-bit uniform in [0, 1); independent of the standard library's
// distribution implementations so stores are reproducible everywhere.
double unit_uniform(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

}  // namespace

const char* table_name(Table t) {
  switch (t) {
    case Table::kWords: return "words";
    case Table::kTweets: return "tweets";
    case Table::kUsers: return "users";
    case Table::kWordNodes: return "word_nodes";
    case Table::kTweetNodes: return "tweet_nodes";
    case Table::kUserNodes: return "user_nodes";
    case Table::kAttention: return "attention";
  }
  return "?";
}

ParameterStore ParameterStore::zeros(const ModelShape& shape) {
  auto nodes = [](std::size_t leaves) { return leaves > 0 ? leaves - 1 : 0; };
  const std::size_t n = shape.dim;
  ParameterStore s;
  s.shape_ = shape;
  s.table(Table::kWords) = Matrix(shape.vocab, n);
  s.table(Table::kTweets) = Matrix(shape.tweets, n);
  s.table(Table::kUsers) = Matrix(shape.users, n);
  s.table(Table::kWordNodes) = Matrix(nodes(shape.vocab), n);
  s.table(Table::kTweetNodes) = Matrix(nodes(shape.tweets), n);
  s.table(Table::kUserNodes) = Matrix(nodes(shape.users), n);
  s.table(Table::kAttention) = Matrix(shape.context_slots(), shape.context_slots() * n);
  return s;
}

ParameterStore ParameterStore::initialize(const ModelShape& shape, std::uint64_t seed) {
  ParameterStore s = zeros(shape);
  std::mt19937_64 gen(seed);
  const double scale = 1.0 / static_cast<double>(shape.dim);
  for (Table t : {Table::kWords, Table::kTweets, Table::kUsers}) {
    for (double& x : s.table(t).data()) x = (unit_uniform(gen) - 0.5) * scale;
  }
  return s;
}

bool ParameterStore::all_finite() const {
  for (const auto& m : tables_) {
    for (double x : m.data()) {
      if (!std::isfinite(x)) return false;
    }
  }
  return true;
}

std::size_t load_pretrained_words(ParameterStore& store, const Vocabulary& vocab,
                                  const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open pretrained word file '" + path + "'");
  const std::size_t n = store.dim();
  std::size_t replaced = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string word;
    if (!(ss >> word)) continue;
    std::vector<double> values;
    double x;
    while (ss >> x) values.push_back(x);
    if (line_no == 1 && values.size() == 1 && word.find_first_not_of("0123456789") == std::string::npos) {
      // `<count> <dim>` header
      if (static_cast<std::size_t>(values[0]) != n) {
        throw DataError("pretrained word vectors have dimension " +
                        std::to_string(static_cast<std::size_t>(values[0])) + ", model dimension is " +
                        std::to_string(n));
      }
      continue;
    }
    if (values.size() != n) {
      throw DataError("pretrained word file line " + std::to_string(line_no) + ": dimension " +
                      std::to_string(values.size()) + ", model dimension is " + std::to_string(n));
    }
    if (auto idx = vocab.index_of(word)) {
      std::copy(values.begin(), values.end(), store.words().row(*idx).begin());
      ++replaced;
    }
  }
  return replaced;
}

AdamState AdamState::for_store(const ParameterStore& store, const AdamConfig& config) {
  AdamState st;
  st.config = config;
  for (std::size_t i = 0; i < kTableCount; ++i) {
    const auto& m = store.table(static_cast<Table>(i));
    st.first[i] = Matrix(m.rows(), m.cols());
    st.second[i] = Matrix(m.rows(), m.cols());
  }
  return st;
}

void adam_update(std::span<double> param, std::span<const double> grad, std::span<double> first,
                 std::span<double> second, const AdamConfig& config, std::uint64_t step) {
  const double t = static_cast<double>(step);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = grad[i];
    first[i] = config.beta1 * first[i] + (1.0 - config.beta1) * g;
    second[i] = config.beta2 * second[i] + (1.0 - config.beta2) * g * g;
    const double mhat = first[i] / c1;
    const double vhat = second[i] / c2;
    param[i] -= config.lr * mhat / (std::sqrt(vhat) + config.epsilon);
  }
}

std::span<double> Gradients::row(Table table, std::size_t row, std::size_t width) {
  const auto k = key(table, row);
  auto it = std::lower_bound(index_.begin(), index_.end(), k,
                             [](const auto& e, std::uint64_t v) { return e.first < v; });
  if (it != index_.end() && it->first == k) return entries_[it->second].values;
  if (used_ == entries_.size()) entries_.push_back({});
  auto& e = entries_[used_];
  e.table = table;
  e.row = row;
  e.values.assign(width, 0.0);
  index_.insert(it, {k, used_});
  ++used_;
  return e.values;
}

std::span<const double> Gradients::find(Table table, std::size_t row) const {
  const auto k = key(table, row);
  auto it = std::lower_bound(index_.begin(), index_.end(), k,
                             [](const auto& e, std::uint64_t v) { return e.first < v; });
  if (it == index_.end() || it->first != k) return {};
  return entries_[it->second].values;
}

void Gradients::clear() {
  used_ = 0;
  index_.clear();
}

void apply_gradients(ParameterStore& store, AdamState& state, const Gradients& grads) {
  apply_gradients(store, state, grads, ++state.step);
}

void apply_gradients(ParameterStore& store, AdamState& state, const Gradients& grads,
                     std::uint64_t step) {
  grads.for_each([&](Table t, std::size_t row, std::span<const double> g) {
    const auto i = static_cast<std::size_t>(t);
    adam_update(store.table(t).row(row), g, state.first[i].row(row), state.second[i].row(row),
                state.config, step);
  });
}

}  // namespace tweetvec
