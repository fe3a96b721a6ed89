#include "tweetvec/trainer.h"

#include <atomic>
#include <cmath>
#include <exception>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "tweetvec/checkpoint.h"
#include "tweetvec/errors.h"
#include "tweetvec/word_context.h"

namespace tweetvec {

const char* term_name(Term t) {
  switch (t) {
    case Term::kWord: return "word";
    case Term::kTweetFromWords: return "tweet_from_words";
    case Term::kTemporal: return "temporal";
    case Term::kUserFromTweets: return "user_from_tweets";
  }
  return "?";
}

void TrainConfig::validate() const {
  if (dim < 1) throw ConfigError("dim must be >= 1");
  if (word_window < 1) throw ConfigError("word window C_W must be >= 1");
  if (temporal_window < 1) throw ConfigError("temporal window C_T must be >= 1");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw ConfigError("learning rate must be finite and >= 0");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (min_count < 1) throw ConfigError("min_count must be >= 1");
  for (double w : term_weights) {
    if (!std::isfinite(w) || w < 0.0) throw ConfigError("term weights must be finite and >= 0");
  }
  if (use_user && attention != AttentionMode::kLearned) {
    throw ConfigError("the user vector is only used with learned attention (uniform and sd baselines exclude it)");
  }
  if (freeze_attention && attention != AttentionMode::kLearned) {
    throw ConfigError("freeze_attention applies to learned attention only");
  }
}

nlohmann::json TrainConfig::to_json() const {
  return {
      {"dim", dim},
      {"cw", word_window},
      {"ct", temporal_window},
      {"epochs", epochs},
      {"lr", lr},
      {"use_user", use_user ? 1 : 0},
      {"attention", attention_mode_name(attention)},
      {"freeze_attention", freeze_attention},
      {"seed", seed},
      {"term_weights", term_weights},
      {"mode", mode == ExecutionMode::kDeterministic ? "deterministic" : "throughput"},
      {"workers", workers},
      {"min_count", min_count},
      {"pretrained_words", pretrained_words},
  };
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.dim = j.value("dim", c.dim);
  c.word_window = j.value("cw", c.word_window);
  c.temporal_window = j.value("ct", c.temporal_window);
  c.epochs = j.value("epochs", c.epochs);
  c.lr = j.value("lr", c.lr);
  c.use_user = j.value("use_user", 0) != 0;
  c.attention = parse_attention_mode(j.value("attention", std::string("learned")));
  c.freeze_attention = j.value("freeze_attention", false);
  c.seed = j.value("seed", c.seed);
  if (j.contains("term_weights")) c.term_weights = j.at("term_weights").get<std::array<double, kTermCount>>();
  c.mode = j.value("mode", std::string("deterministic")) == "throughput" ? ExecutionMode::kThroughput
                                                                          : ExecutionMode::kDeterministic;
  c.workers = j.value("workers", c.workers);
  c.min_count = j.value("min_count", c.min_count);
  c.pretrained_words = j.value("pretrained_words", std::string());
  return c;
}

std::string TrainConfig::hash() const { return config_hash(to_json().dump()); }

std::vector<AttentionReport::Row> AttentionReport::epoch_rows(std::size_t epoch) const {
  std::vector<Row> out;
  for (const auto& r : rows_) {
    if (r.epoch == epoch) out.push_back(r);
  }
  return out;
}

void AttentionReport::write_csv(std::ostream& out) const {
  out << "epoch,offset,mean_attention,sample_count\n";
  out.precision(17);
  for (const auto& r : rows_) {
    out << r.epoch << ',' << r.offset << ',' << r.mean_attention << ',' << r.sample_count << '\n';
  }
}

AttentionReport AttentionReport::read_csv(std::istream& in) {
  AttentionReport rep;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 || line.empty()) continue;
    std::istringstream ss(line);
    Row r;
    char c1, c2, c3;
    if (!(ss >> r.epoch >> c1 >> r.offset >> c2 >> r.mean_attention >> c3 >> r.sample_count) ||
        c1 != ',' || c2 != ',' || c3 != ',') {
      throw DataError("attention report line " + std::to_string(line_no) + " is malformed");
    }
    rep.rows_.push_back(r);
  }
  return rep;
}

void write_loss_curve(const std::vector<EpochLoss>& curve, std::ostream& out) {
  out << "epoch,term,mean_loss\n";
  out.precision(17);
  for (const auto& e : curve) {
    for (std::size_t t = 0; t < kTermCount; ++t) {
      out << e.epoch << ',' << term_name(static_cast<Term>(t)) << ',' << e.mean[t] << '\n';
    }
    out << e.epoch << ",total," << e.total << '\n';
  }
}

ModelShape model_shape(const Corpus& corpus, const TrainConfig& config) {
  ModelShape s;
  s.vocab = corpus.vocabulary().size();
  s.tweets = corpus.tweets().size();
  s.users = corpus.users().size();
  s.dim = config.dim;
  s.word_window = config.word_window;
  s.temporal_window = config.temporal_window;
  return s;
}

struct Trainer::Accumulator {
  std::array<double, kTermCount> loss = {};
  std::array<std::uint64_t, kTermCount> samples = {};
  std::vector<double> att_sum, att_full_sum;
  std::vector<std::uint64_t> att_count, att_full_count;

  explicit Accumulator(std::size_t slots)
      : att_sum(slots), att_full_sum(slots), att_count(slots), att_full_count(slots) {}

  void merge(const Accumulator& o) {
    for (std::size_t t = 0; t < kTermCount; ++t) {
      loss[t] += o.loss[t];
      samples[t] += o.samples[t];
    }
    for (std::size_t s = 0; s < att_sum.size(); ++s) {
      att_sum[s] += o.att_sum[s];
      att_full_sum[s] += o.att_full_sum[s];
      att_count[s] += o.att_count[s];
      att_full_count[s] += o.att_full_count[s];
    }
  }
};

Trainer::Trainer(const Corpus& corpus, TrainConfig config)
    : corpus_(corpus), config_(std::move(config)) {
  config_.validate();
  if (corpus_.tweets().empty()) throw DataError("cannot train on an empty corpus");
  store_ = ParameterStore::initialize(model_shape(corpus_, config_), config_.seed);
  if (!config_.pretrained_words.empty()) {
    load_pretrained_words(store_, corpus_.vocabulary(), config_.pretrained_words);
  }
  adam_ = AdamState::for_store(store_, AdamConfig{.lr = config_.lr});
}

Trainer::Trainer(const Corpus& corpus, TrainConfig config, ParameterStore store, AdamState adam)
    : corpus_(corpus), config_(std::move(config)), store_(std::move(store)), adam_(std::move(adam)) {
  config_.validate();
  if (store_.shape() != model_shape(corpus_, config_)) {
    throw DataError("parameter store shape does not match corpus and config");
  }
  adam_.config.lr = config_.lr;
}

namespace {

[[noreturn]] void non_finite(Term term, const Corpus& corpus, std::uint32_t user, long long tweet) {
  std::string msg = std::string("non-finite loss in term '") + term_name(term) + "' (user '" +
                    corpus.users()[user].id + "'";
  if (tweet >= 0) msg += ", tweet '" + corpus.tweet_id(static_cast<std::uint32_t>(tweet)) + "'";
  throw NumericalError(msg + ")");
}

}  // namespace

void Trainer::run_users(const std::vector<std::uint32_t>& users, Accumulator& acc, bool shared_step) {
  Gradients scratch;
  const auto& w = config_.term_weights;
  const TemporalOptions topts{config_.attention, config_.use_user, !config_.freeze_attention};
  const std::size_t slots = 2 * config_.temporal_window;
  std::vector<double> alpha;

  auto step = [&](Term term, std::uint32_t user, long long tweet, auto&& loss_fn) {
    scratch.clear();
    const double loss = loss_fn(&scratch);
    if (!std::isfinite(loss)) non_finite(term, corpus_, user, tweet);
    if (shared_step) {
      // Hogwild: rows and moments are written without locks; only the step
      // counter is shared atomically.
      apply_gradients(store_, adam_, scratch, std::atomic_ref<std::uint64_t>(adam_.step).fetch_add(1) + 1);
    } else {
      apply_gradients(store_, adam_, scratch);
    }
    acc.loss[static_cast<std::size_t>(term)] += loss;
    ++acc.samples[static_cast<std::size_t>(term)];
  };

  for (auto u : users) {
    const auto& timeline = corpus_.users()[u].timeline;
    for (std::size_t p = 0; p < timeline.size(); ++p) {
      const Tweet& tweet = corpus_.tweets()[timeline[p]];
      for (const auto& s : word_samples(tweet, config_.word_window)) {
        step(Term::kWord, u, tweet.tweet_index, [&](Gradients* g) {
          return word_loss(s, store_, corpus_.word_tree(), g, w[0]);
        });
      }
      if (!tweet.tokens.empty()) {
        step(Term::kTweetFromWords, u, tweet.tweet_index, [&](Gradients* g) {
          return tweet_from_words_loss(tweet, store_, corpus_.tweet_tree(), g, w[1]);
        });
      }
      if (timeline.size() >= 2) {
        const auto sample = temporal_sample(corpus_, u, p, config_.temporal_window);
        step(Term::kTemporal, u, tweet.tweet_index, [&](Gradients* g) {
          return temporal_loss(sample, store_, corpus_.tweet_tree(), topts, g, w[2], &alpha);
        });
        const bool full = sample.available_count() == slots;
        for (std::size_t s = 0; s < slots; ++s) {
          if (!sample.available(s)) continue;
          acc.att_sum[s] += alpha[s];
          ++acc.att_count[s];
          if (full) {
            acc.att_full_sum[s] += alpha[s];
            ++acc.att_full_count[s];
          }
        }
      }
    }
    step(Term::kUserFromTweets, u, -1, [&](Gradients* g) {
      return user_from_tweets_loss(corpus_.users()[u], u, store_, corpus_.user_tree(), g, w[3]);
    });
  }
}

const EpochLoss& Trainer::run_epoch() {
  const std::size_t epoch = curve_.size() + 1;
  const std::size_t slots = 2 * config_.temporal_window;

  // Per-epoch user order, derived from (seed, epoch) only.
  std::vector<std::uint32_t> order(corpus_.users().size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<std::uint32_t>(i);
  std::mt19937_64 gen(config_.seed ^ (0x9e3779b97f4a7c15ULL * epoch));
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[gen() % i]);

  Accumulator total(slots);
  if (config_.mode == ExecutionMode::kDeterministic || config_.workers == 1) {
    run_users(order, total, false);
  } else {
    const std::size_t nw = std::min<std::size_t>(config_.workers, std::max<std::size_t>(order.size(), 1));
    std::vector<std::vector<std::uint32_t>> parts(nw);
    for (std::size_t i = 0; i < order.size(); ++i) parts[i % nw].push_back(order[i]);
    std::vector<Accumulator> accs(nw, Accumulator(slots));
    std::vector<std::exception_ptr> errors(nw);
    std::vector<std::thread> threads;
    for (std::size_t k = 0; k < nw; ++k) {
      threads.emplace_back([&, k] {
        try {
          run_users(parts[k], accs[k], true);
        } catch (...) {
          errors[k] = std::current_exception();
        }
      });
    }
    for (auto& t : threads) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
    for (const auto& a : accs) total.merge(a);
  }

  if (!store_.all_finite()) {
    throw NumericalError("non-finite parameter after epoch " + std::to_string(epoch));
  }

  EpochLoss el;
  el.epoch = epoch;
  double sum = 0.0;
  for (std::size_t t = 0; t < kTermCount; ++t) {
    el.samples[t] = total.samples[t];
    el.mean[t] = total.samples[t] ? total.loss[t] / static_cast<double>(total.samples[t]) : 0.0;
    sum += total.loss[t];
  }
  el.total = sum / static_cast<double>(corpus_.tweets().size());
  curve_.push_back(el);

  for (std::size_t s = 0; s < slots; ++s) {
    const int offset = slot_offset(s, config_.temporal_window);
    attention_.add({epoch, offset,
                    total.att_count[s] ? total.att_sum[s] / static_cast<double>(total.att_count[s]) : 0.0,
                    total.att_count[s]});
    attention_full_.add({epoch, offset,
                         total.att_full_count[s]
                             ? total.att_full_sum[s] / static_cast<double>(total.att_full_count[s])
                             : 0.0,
                         total.att_full_count[s]});
  }
  return curve_.back();
}

void Trainer::train(const std::function<void(const Trainer&)>& on_epoch) {
  while (curve_.size() < config_.epochs) {
    run_epoch();
    if (on_epoch) on_epoch(*this);
  }
}

namespace {

template <typename F>
void for_each_term(const ParameterStore& store, const Corpus& corpus, const TrainConfig& config,
                   Gradients* grads, F&& f) {
  const auto& w = config.term_weights;
  const TemporalOptions topts{config.attention, config.use_user, !config.freeze_attention};
  for (std::uint32_t u = 0; u < corpus.users().size(); ++u) {
    const auto& timeline = corpus.users()[u].timeline;
    for (std::size_t p = 0; p < timeline.size(); ++p) {
      const Tweet& tweet = corpus.tweets()[timeline[p]];
      for (const auto& s : word_samples(tweet, config.word_window)) {
        f(Term::kWord, [&] { return word_loss(s, store, corpus.word_tree(), grads, w[0]); });
      }
      if (!tweet.tokens.empty()) {
        f(Term::kTweetFromWords,
          [&] { return tweet_from_words_loss(tweet, store, corpus.tweet_tree(), grads, w[1]); });
      }
      if (timeline.size() >= 2) {
        const auto sample = temporal_sample(corpus, u, p, config.temporal_window);
        f(Term::kTemporal,
          [&] { return temporal_loss(sample, store, corpus.tweet_tree(), topts, grads, w[2]); });
      }
    }
    f(Term::kUserFromTweets, [&] {
      return user_from_tweets_loss(corpus.users()[u], u, store, corpus.user_tree(), grads, w[3]);
    });
  }
}

}  // namespace

LossBreakdown loss_report(const ParameterStore& store, const Corpus& corpus, const TrainConfig& config) {
  LossBreakdown b;
  for_each_term(store, corpus, config, nullptr, [&](Term t, auto&& loss) {
    const double l = loss();
    b.term[static_cast<std::size_t>(t)] += l;
    b.total += l;
  });
  return b;
}

double term_loss(const ParameterStore& store, const Corpus& corpus, const TrainConfig& config, Term term,
                 Gradients* grads) {
  double sum = 0.0;
  for_each_term(store, corpus, config, grads, [&](Term t, auto&& loss) {
    if (t == term) sum += loss();
  });
  return sum;
}

}  // namespace tweetvec
