#ifndef TWEETVEC_CORPUS_H_
#define TWEETVEC_CORPUS_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tweetvec/coding_tree.h"

namespace tweetvec {

struct TokenizerConfig {
  bool lowercase = true;
  // Strip leading/trailing punctuation from tokens; '#' and '@' prefixes are
  // always kept.
  bool strip_punctuation = false;
};

// Whitespace tokenizer. Pure: same text and config give the same tokens.
std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& config = {});

struct TimelineRecord {
  std::string user_id;
  std::string tweet_id;
  long long seq_no = 0;
  std::string text;
};

enum class CorpusFormat { kAuto, kTsv, kJsonLines };

// Reads `user<TAB>tweet<TAB>seq<TAB>text` lines or JSON lines with keys
// user/id/seq/text. Blank lines are skipped. Throws DataError naming the line.
std::vector<TimelineRecord> read_records(std::istream& in, CorpusFormat format = CorpusFormat::kAuto);

class Vocabulary {
 public:
  Vocabulary() = default;

  // Keeps words with count >= min_count, ordered by descending count and then
  // lexicographically.
  static Vocabulary build(const std::unordered_map<std::string, std::uint64_t>& counts,
                          std::uint64_t min_count);

  std::size_t size() const { return words_.size(); }
  std::optional<std::uint32_t> index_of(std::string_view word) const;
  const std::string& word(std::uint32_t index) const { return words_[index]; }
  std::uint64_t count(std::uint32_t index) const { return counts_[index]; }
  const std::vector<std::uint64_t>& counts() const { return counts_; }
  std::uint64_t min_count() const { return min_count_; }

 private:
  std::vector<std::string> words_;
  std::vector<std::uint64_t> counts_;
  std::unordered_map<std::string, std::uint32_t> index_;
  std::uint64_t min_count_ = 1;
};

struct Tweet {
  std::uint32_t tweet_index = 0;
  std::uint32_t user_index = 0;
  // In-vocabulary word indices; may be empty after OOV filtering.
  std::vector<std::uint32_t> tokens;
};

struct User {
  std::string id;
  // Tweet indices in timeline (seq_no) order.
  std::vector<std::uint32_t> timeline;
};

struct IngestOptions {
  TokenizerConfig tokenizer;
  std::uint64_t min_count = 1;
  CorpusFormat format = CorpusFormat::kAuto;
};

// Encoded timeline corpus. Immutable after construction.
class Corpus {
 public:
  Corpus() = default;

  // Users are numbered by first appearance; tweets are numbered user by user
  // in timeline order. Throws DataError on duplicate tweet ids or seq_no values
  // that are not 0..k-1 within a user.
  static Corpus build(const std::vector<TimelineRecord>& records, const IngestOptions& options = {});
  static Corpus ingest(const std::string& path, const IngestOptions& options = {});

  const Vocabulary& vocabulary() const { return vocab_; }
  const std::vector<Tweet>& tweets() const { return tweets_; }
  const std::vector<User>& users() const { return users_; }
  const std::string& tweet_id(std::uint32_t index) const { return tweet_ids_[index]; }
  std::optional<std::uint32_t> tweet_index(std::string_view tweet_id) const;

  const CodingTree& word_tree() const { return word_tree_; }
  const CodingTree& tweet_tree() const { return tweet_tree_; }
  const CodingTree& user_tree() const { return user_tree_; }

  std::size_t token_count() const;

 private:
  Vocabulary vocab_;
  std::vector<Tweet> tweets_;
  std::vector<std::string> tweet_ids_;
  std::unordered_map<std::string, std::uint32_t> tweet_lookup_;
  std::vector<User> users_;
  CodingTree word_tree_;
  CodingTree tweet_tree_;
  CodingTree user_tree_;
};

}  // namespace tweetvec

#endif  // TWEETVEC_CORPUS_H_
