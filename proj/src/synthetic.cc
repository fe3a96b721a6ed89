#include "tweetvec/synthetic.h"

#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <random>

#include "tweetvec/errors.h"

namespace tweetvec {

const char* relevance_pattern_name(RelevancePattern p) {
  return p == RelevancePattern::kBlocks ? "blocks" : "adjacent";
}

RelevancePattern parse_relevance_pattern(const std::string& name) {
  if (name == "blocks") return RelevancePattern::kBlocks;
  if (name == "adjacent") return RelevancePattern::kAdjacent;
  throw ConfigError("unknown relevance pattern '" + name + "' (expected blocks or adjacent)");
}

SyntheticCorpus generate_synthetic(const SyntheticSpec& spec) {
  if (spec.topics < 2) throw ConfigError("synthetic corpus needs at least 2 topics");
  if (spec.words_per_topic < 1 || spec.tokens_per_tweet < 1 || spec.block_length < 1) {
    throw ConfigError("synthetic spec sizes must be >= 1");
  }
  std::mt19937_64 gen(spec.seed);
  auto word = [](std::size_t topic, std::size_t i) {
    return "t" + std::to_string(topic) + "w" + std::to_string(i);
  };
  auto draw = [&](std::size_t topic) { return word(topic, gen() % spec.words_per_topic); };

  SyntheticCorpus out;
  for (std::size_t u = 0; u < spec.users; ++u) {
    const std::string uid = "u" + std::to_string(u);
    std::map<std::size_t, std::vector<std::string>> by_topic;
    std::size_t topic = gen() % spec.topics;
    const std::size_t shift = gen() % spec.topics;
    for (std::size_t p = 0; p < spec.tweets_per_user; ++p) {
      TimelineRecord rec{uid, uid + "_t" + std::to_string(p), static_cast<long long>(p), {}};
      std::string text;
      auto add = [&](std::size_t k) { text += (text.empty() ? "" : " ") + draw(k); };
      if (spec.pattern == RelevancePattern::kBlocks) {
        if (p > 0 && p % spec.block_length == 0) {
          topic = (topic + 1 + gen() % (spec.topics - 1)) % spec.topics;
        }
        for (std::size_t i = 0; i < spec.tokens_per_tweet; ++i) add(topic);
        by_topic[topic].push_back(rec.tweet_id);
      } else {
        const std::size_t left = (p + shift + spec.topics - 1) % spec.topics;
        const std::size_t right = (p + shift) % spec.topics;
        for (std::size_t i = 0; i < spec.tokens_per_tweet; ++i) add(i % 2 == 0 ? left : right);
        by_topic[left].push_back(rec.tweet_id);
        by_topic[right].push_back(rec.tweet_id);
      }
      rec.text = std::move(text);
      out.records.push_back(std::move(rec));
    }
    for (auto& [k, ids] : by_topic) {
      out.entities.push_back({uid + ":topic" + std::to_string(k), std::move(ids), static_cast<int>(k % 2),
                              Split::kTrain});
    }
  }
  return out;
}

void write_corpus_tsv(const std::vector<TimelineRecord>& records, std::ostream& out) {
  for (const auto& r : records) {
    out << r.user_id << '\t' << r.tweet_id << '\t' << r.seq_no << '\t' << r.text << '\n';
  }
}

void write_synthetic(const SyntheticCorpus& corpus, const std::string& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream c(std::filesystem::path(dir) / "corpus.tsv");
  std::ofstream l(std::filesystem::path(dir) / "labels.tsv");
  if (!c || !l) throw DataError("cannot write synthetic corpus to '" + dir + "'");
  write_corpus_tsv(corpus.records, c);
  write_labels(corpus.entities, l);
}

}  // namespace tweetvec
