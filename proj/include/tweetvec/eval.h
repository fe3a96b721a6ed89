#ifndef TWEETVEC_EVAL_H_
#define TWEETVEC_EVAL_H_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "tweetvec/corpus.h"
#include "tweetvec/matrix.h"

namespace tweetvec {

enum class Split { kTrain, kValid, kTest };

struct EntityInstance {
  std::string entity_id;
  std::vector<std::string> tweet_ids;
  int label = 0;
  Split split = Split::kTrain;
};

// `entity_id<TAB>label(0|1)<TAB>comma-separated tweet_ids` per line.
std::vector<EntityInstance> read_labels(std::istream& in);
std::vector<EntityInstance> read_labels_file(const std::string& path);
void write_labels(const std::vector<EntityInstance>& entities, std::ostream& out);

// Mean of the given tweet vectors. Requires at least one index.
std::vector<double> entity_vector(std::span<const std::uint32_t> tweet_indices, const Matrix& tweet_vectors);
// Resolves tweet ids against the corpus; throws DataError on unknown ids.
std::vector<double> entity_vector(const EntityInstance& entity, const Corpus& corpus,
                                  const Matrix& tweet_vectors);

// Splits by author (the user of each entity's first tweet): users are shuffled
// with `seed` and cut 70/10/20, so no user spans two splits.
void assign_user_splits(std::vector<EntityInstance>& entities, const Corpus& corpus, std::uint64_t seed);

// F1 of the positive class; 0 when precision + recall is 0.
double f1_score(std::span<const int> predictions, std::span<const int> labels);

struct Dataset {
  Matrix features;
  std::vector<int> labels;
  std::size_t size() const { return labels.size(); }
};

// Linear model on standardized features: predict 1 iff <w, z> + b > 0.
class LinearClassifier {
 public:
  LinearClassifier() = default;
  LinearClassifier(std::vector<double> mean, std::vector<double> scale, std::vector<double> weights,
                   double bias)
      : mean_(std::move(mean)), scale_(std::move(scale)), weights_(std::move(weights)), bias_(bias) {}

  double decision(std::span<const double> x) const;
  int predict(std::span<const double> x) const { return decision(x) > 0.0 ? 1 : 0; }
  std::vector<int> predict(const Matrix& xs) const;

 private:
  std::vector<double> mean_, scale_, weights_;
  double bias_ = 0.0;
};

inline const std::vector<double> kPenaltyGrid = {0.001, 0.01, 0.1, 1.0, 10.0, 100.0};

struct LinearOptions {
  std::vector<double> penalty_grid = kPenaltyGrid;
  std::size_t epochs = 100;
  std::uint64_t seed = 1;
};

// Soft-margin linear SVM, 0.5 |w|^2 + C sum_i hinge(y_i (<w, x_i> + b)), fit by
// stochastic subgradient descent (Pegasos schedule, averaged iterate).
LinearClassifier fit_linear_svm(const Dataset& train, double penalty, std::size_t epochs, std::uint64_t seed);

struct LinearSelection {
  LinearClassifier model;
  double penalty = 0.0;
  double valid_f1 = 0.0;
};

// Fits one model per penalty and keeps the best validation F1 (first wins
// ties). Throws DataError when train or valid is empty or train has one class.
LinearSelection train_linear(const Dataset& train, const Dataset& valid, const LinearOptions& options = {});

struct EvalResult {
  double penalty = 0.0;
  double valid_f1 = 0.0;
  double test_f1 = 0.0;
  std::string config_hash;
  nlohmann::json to_json() const;
};

// Entity averaging, penalty tuning on the validation split, F1 on the test split.
EvalResult evaluate_entities(const std::vector<EntityInstance>& entities, const Corpus& corpus,
                             const Matrix& tweet_vectors, const LinearOptions& options = {},
                             std::string config_hash = {});

}  // namespace tweetvec

#endif  // TWEETVEC_EVAL_H_
