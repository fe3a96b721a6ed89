#include "tweetvec/eval.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <unordered_map>

#include "tweetvec/errors.h"

namespace tweetvec {

std::vector<EntityInstance> read_labels(std::istream& in) {
  std::vector<EntityInstance> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto bad = [&](const std::string& what) {
      return DataError("label line " + std::to_string(line_no) + ": " + what);
    };
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) throw bad("expected entity_id<TAB>label<TAB>tweet_ids");
    EntityInstance e;
    e.entity_id = line.substr(0, t1);
    const auto label = line.substr(t1 + 1, t2 - t1 - 1);
    if (label != "0" && label != "1") throw bad("label must be 0 or 1");
    e.label = label == "1" ? 1 : 0;
    std::stringstream ids(line.substr(t2 + 1));
    std::string id;
    while (std::getline(ids, id, ',')) {
      if (!id.empty()) e.tweet_ids.push_back(id);
    }
    if (e.tweet_ids.empty()) throw bad("entity has no tweet ids");
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<EntityInstance> read_labels_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open label file '" + path + "'");
  return read_labels(in);
}

void write_labels(const std::vector<EntityInstance>& entities, std::ostream& out) {
  for (const auto& e : entities) {
    out << e.entity_id << '\t' << e.label << '\t';
    for (std::size_t i = 0; i < e.tweet_ids.size(); ++i) out << (i ? "," : "") << e.tweet_ids[i];
    out << '\n';
  }
}

std::vector<double> entity_vector(std::span<const std::uint32_t> tweet_indices, const Matrix& tweet_vectors) {
  if (tweet_indices.empty()) throw std::invalid_argument("entity_vector: no tweets");
  std::vector<double> v(tweet_vectors.cols(), 0.0);
  for (auto t : tweet_indices) axpy(1.0, tweet_vectors.row(t), v);
  for (double& x : v) x /= static_cast<double>(tweet_indices.size());
  return v;
}

namespace {

std::vector<std::uint32_t> resolve(const EntityInstance& entity, const Corpus& corpus) {
  std::vector<std::uint32_t> idx;
  for (const auto& id : entity.tweet_ids) {
    auto t = corpus.tweet_index(id);
    if (!t) throw DataError("entity '" + entity.entity_id + "' references unknown tweet '" + id + "'");
    idx.push_back(*t);
  }
  return idx;
}

}  // namespace

std::vector<double> entity_vector(const EntityInstance& entity, const Corpus& corpus,
                                  const Matrix& tweet_vectors) {
  return entity_vector(resolve(entity, corpus), tweet_vectors);
}

void assign_user_splits(std::vector<EntityInstance>& entities, const Corpus& corpus, std::uint64_t seed) {
  std::vector<std::uint32_t> owner(entities.size());
  std::vector<std::uint32_t> users;
  std::vector<bool> seen(corpus.users().size(), false);
  for (std::size_t i = 0; i < entities.size(); ++i) {
    const auto idx = resolve(entities[i], corpus);
    owner[i] = corpus.tweets()[idx.front()].user_index;
    if (!seen[owner[i]]) {
      seen[owner[i]] = true;
      users.push_back(owner[i]);
    }
  }
  std::sort(users.begin(), users.end());
  std::mt19937_64 gen(seed);
  for (std::size_t i = users.size(); i > 1; --i) std::swap(users[i - 1], users[gen() % i]);

  const std::size_t n = users.size();
  std::size_t n_train = static_cast<std::size_t>(std::lround(0.7 * static_cast<double>(n)));
  std::size_t n_valid = static_cast<std::size_t>(std::lround(0.1 * static_cast<double>(n)));
  if (n >= 3) {
    n_valid = std::max<std::size_t>(n_valid, 1);
    n_train = std::min(n_train, n - n_valid - 1);
  }
  std::unordered_map<std::uint32_t, Split> split_of;
  for (std::size_t i = 0; i < n; ++i) {
    split_of[users[i]] = i < n_train ? Split::kTrain : i < n_train + n_valid ? Split::kValid : Split::kTest;
  }
  for (std::size_t i = 0; i < entities.size(); ++i) entities[i].split = split_of[owner[i]];
}

double f1_score(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size()) throw std::invalid_argument("f1_score: size mismatch");
  double tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (predictions[i] == 1 && labels[i] == 1) ++tp;
    if (predictions[i] == 1 && labels[i] != 1) ++fp;
    if (predictions[i] != 1 && labels[i] == 1) ++fn;
  }
  const double precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
  const double recall = tp + fn > 0 ? tp / (tp + fn) : 0.0;
  return precision + recall > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
}

double LinearClassifier::decision(std::span<const double> x) const {
  double s = bias_;
  for (std::size_t k = 0; k < weights_.size(); ++k) s += weights_[k] * (x[k] - mean_[k]) / scale_[k];
  return s;
}

std::vector<int> LinearClassifier::predict(const Matrix& xs) const {
  std::vector<int> out(xs.rows());
  for (std::size_t i = 0; i < xs.rows(); ++i) out[i] = predict(xs.row(i));
  return out;
}

LinearClassifier fit_linear_svm(const Dataset& train, double penalty, std::size_t epochs, std::uint64_t seed) {
  const std::size_t m = train.size();
  const std::size_t d = train.features.cols();
  if (m == 0) throw DataError("linear SVM: empty training set");
  if (!(penalty > 0.0)) throw std::invalid_argument("linear SVM: penalty must be positive");

  std::vector<double> mean(d, 0.0), scale(d, 0.0);
  for (std::size_t i = 0; i < m; ++i) axpy(1.0, train.features.row(i), mean);
  for (double& x : mean) x /= static_cast<double>(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      const double c = train.features(i, k) - mean[k];
      scale[k] += c * c;
    }
  }
  for (double& s : scale) {
    s = std::sqrt(s / static_cast<double>(m));
    if (!(s > 1e-12)) s = 1.0;
  }
  Matrix z(m, d + 1);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = 0; k < d; ++k) z(i, k) = (train.features(i, k) - mean[k]) / scale[k];
    z(i, d) = 1.0;  // bias feature
  }

  // 0.5|w|^2 + C sum hinge  ==  (lambda/2)|w|^2 + mean hinge with lambda = 1/(C m).
  const double lambda = 1.0 / (penalty * static_cast<double>(m));
  const double radius = 1.0 / std::sqrt(lambda);
  std::vector<double> w(d + 1, 0.0), avg(d + 1, 0.0);
  std::vector<std::size_t> order(m);
  for (std::size_t i = 0; i < m; ++i) order[i] = i;
  std::mt19937_64 gen(seed);
  std::uint64_t t = 0;
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    for (std::size_t i = m; i > 1; --i) std::swap(order[i - 1], order[gen() % i]);
    for (auto i : order) {
      ++t;
      const double eta = 1.0 / (lambda * static_cast<double>(t));
      const double y = train.labels[i] == 1 ? 1.0 : -1.0;
      const double margin = y * dot(w, z.row(i));
      for (double& x : w) x *= 1.0 - eta * lambda;
      if (margin < 1.0) axpy(eta * y, z.row(i), w);
      const double norm = std::sqrt(dot(w, w));
      if (norm > radius) {
        for (double& x : w) x *= radius / norm;
      }
      // running average of the iterates
      const double a = 1.0 / static_cast<double>(t);
      for (std::size_t k = 0; k <= d; ++k) avg[k] += a * (w[k] - avg[k]);
    }
  }
  const double bias = avg[d];
  avg.pop_back();
  return LinearClassifier(std::move(mean), std::move(scale), std::move(avg), bias);
}

LinearSelection train_linear(const Dataset& train, const Dataset& valid, const LinearOptions& options) {
  if (train.size() == 0 || valid.size() == 0) throw DataError("linear classifier: train and validation splits must be non-empty");
  const bool has_pos = std::count(train.labels.begin(), train.labels.end(), 1) > 0;
  const bool has_neg = std::count(train.labels.begin(), train.labels.end(), 1) < static_cast<long>(train.size());
  if (!has_pos || !has_neg) throw DataError("linear classifier: training split contains a single class");
  if (options.penalty_grid.empty()) throw std::invalid_argument("linear classifier: empty penalty grid");

  LinearSelection best;
  bool first = true;
  for (double c : options.penalty_grid) {
    auto model = fit_linear_svm(train, c, options.epochs, options.seed);
    const auto pred = model.predict(valid.features);
    const double f1 = f1_score(pred, valid.labels);
    if (first || f1 > best.valid_f1) {
      best = {std::move(model), c, f1};
      first = false;
    }
  }
  return best;
}

nlohmann::json EvalResult::to_json() const {
  return {{"penalty", penalty}, {"valid_f1", valid_f1}, {"test_f1", test_f1}, {"config_hash", config_hash}};
}

EvalResult evaluate_entities(const std::vector<EntityInstance>& entities, const Corpus& corpus,
                             const Matrix& tweet_vectors, const LinearOptions& options,
                             std::string config_hash) {
  Dataset sets[3];
  std::vector<std::vector<double>> rows[3];
  for (const auto& e : entities) {
    const auto k = static_cast<std::size_t>(e.split);
    rows[k].push_back(entity_vector(e, corpus, tweet_vectors));
    sets[k].labels.push_back(e.label);
  }
  for (std::size_t k = 0; k < 3; ++k) {
    sets[k].features = Matrix(rows[k].size(), tweet_vectors.cols());
    for (std::size_t i = 0; i < rows[k].size(); ++i) {
      std::copy(rows[k][i].begin(), rows[k][i].end(), sets[k].features.row(i).begin());
    }
  }
  const auto sel = train_linear(sets[0], sets[1], options);
  EvalResult r;
  r.penalty = sel.penalty;
  r.valid_f1 = sel.valid_f1;
  r.test_f1 = sets[2].size() ? f1_score(sel.model.predict(sets[2].features), sets[2].labels) : 0.0;
  r.config_hash = std::move(config_hash);
  return r;
}

}  // namespace tweetvec
