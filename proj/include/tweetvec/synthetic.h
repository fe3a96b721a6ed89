#ifndef TWEETVEC_SYNTHETIC_H_
#define TWEETVEC_SYNTHETIC_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "tweetvec/corpus.h"
#include "tweetvec/eval.h"

namespace tweetvec {

enum class RelevancePattern {
  // Runs of `block_length` consecutive tweets share one topic; consecutive
  // runs switch topic.
  kBlocks,
  // Tweet j mixes link topics (j-1) and j of a cycle over all topics, so only
  // tweets at offsets -1 and +1 share content with it (needs topics >= 2*C_T + 2).
  kAdjacent,
};

const char* relevance_pattern_name(RelevancePattern p);
RelevancePattern parse_relevance_pattern(const std::string& name);

struct SyntheticSpec {
  std::size_t users = 20;
  std::size_t tweets_per_user = 50;
  std::size_t topics = 2;
  std::size_t words_per_topic = 30;
  std::size_t tokens_per_tweet = 8;
  std::size_t block_length = 5;
  RelevancePattern pattern = RelevancePattern::kBlocks;
  std::uint64_t seed = 7;
};

struct SyntheticCorpus {
  std::vector<TimelineRecord> records;
  // One entity per (user, topic) with the user's tweets on that topic;
  // label = topic parity.
  std::vector<EntityInstance> entities;
};

// Same SyntheticSpec, same output. Topic k owns words "t<k>w<i>"; vocabularies
// of different topics are disjoint.
SyntheticCorpus generate_synthetic(const SyntheticSpec& spec);

void write_corpus_tsv(const std::vector<TimelineRecord>& records, std::ostream& out);

// Writes <dir>/corpus.tsv and <dir>/labels.tsv.
void write_synthetic(const SyntheticCorpus& corpus, const std::string& dir);

}  // namespace tweetvec

#endif  // TWEETVEC_SYNTHETIC_H_
