#include "tweetvec/corpus.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>

#include "json.hpp"
#include "tweetvec/errors.h"

namespace tweetvec {

namespace {

bool is_edge_punct(unsigned char c) {
  return std::ispunct(c) && c != '#' && c != '@';
}

std::string strip(std::string token) {
  std::size_t b = 0;
  std::size_t e = token.size();
  while (b < e && is_edge_punct(token[b])) ++b;
  while (e > b && std::ispunct(static_cast<unsigned char>(token[e - 1]))) --e;
  return token.substr(b, e - b);
}

std::string line_error(std::size_t line_no, const std::string& what) {
  return "corpus line " + std::to_string(line_no) + ": " + what;
}

TimelineRecord parse_tsv(const std::string& line, std::size_t line_no) {
  TimelineRecord rec;
  std::size_t pos = 0;
  std::string fields[3];
  for (auto& f : fields) {
    const auto tab = line.find('\t', pos);
    if (tab == std::string::npos) {
      throw DataError(line_error(line_no, "expected user_id<TAB>tweet_id<TAB>seq_no<TAB>text"));
    }
    f = line.substr(pos, tab - pos);
    pos = tab + 1;
  }
  rec.user_id = fields[0];
  rec.tweet_id = fields[1];
  rec.text = line.substr(pos);
  if (rec.user_id.empty() || rec.tweet_id.empty()) {
    throw DataError(line_error(line_no, "empty user_id or tweet_id"));
  }
  try {
    std::size_t used = 0;
    rec.seq_no = std::stoll(fields[2], &used);
    if (used != fields[2].size()) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw DataError(line_error(line_no, "seq_no '" + fields[2] + "' is not an integer"));
  }
  return rec;
}

std::string json_id(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw std::invalid_argument("id must be a string or integer");
}

TimelineRecord parse_json(const std::string& line, std::size_t line_no) {
  try {
    const auto j = nlohmann::json::parse(line);
    TimelineRecord rec;
    rec.user_id = json_id(j.at("user"));
    rec.tweet_id = json_id(j.at("id"));
    rec.seq_no = j.at("seq").get<long long>();
    rec.text = j.at("text").get<std::string>();
    return rec;
  } catch (const std::exception& e) {
    throw DataError(line_error(line_no, e.what()));
  }
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& config) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) {
      std::string tok(text.substr(i, j - i));
      if (config.lowercase) {
        std::transform(tok.begin(), tok.end(), tok.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      }
      if (config.strip_punctuation) tok = strip(std::move(tok));
      if (!tok.empty()) out.push_back(std::move(tok));
    }
    i = j;
  }
  return out;
}

std::vector<TimelineRecord> read_records(std::istream& in, CorpusFormat format) {
  std::vector<TimelineRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (format == CorpusFormat::kAuto) {
      const auto first = line.find_first_not_of(" \t");
      format = line[first] == '{' ? CorpusFormat::kJsonLines : CorpusFormat::kTsv;
    }
    records.push_back(format == CorpusFormat::kJsonLines ? parse_json(line, line_no)
                                                         : parse_tsv(line, line_no));
  }
  return records;
}

Vocabulary Vocabulary::build(const std::unordered_map<std::string, std::uint64_t>& counts,
                             std::uint64_t min_count) {
  std::vector<std::pair<std::string, std::uint64_t>> kept;
  for (const auto& [w, c] : counts) {
    if (c >= min_count) kept.emplace_back(w, c);
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  Vocabulary v;
  v.min_count_ = min_count;
  for (auto& [w, c] : kept) {
    v.index_.emplace(w, static_cast<std::uint32_t>(v.words_.size()));
    v.words_.push_back(std::move(w));
    v.counts_.push_back(c);
  }
  return v;
}

std::optional<std::uint32_t> Vocabulary::index_of(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Corpus Corpus::build(const std::vector<TimelineRecord>& records, const IngestOptions& options) {
  // Group records by user, preserving first-appearance order.
  std::vector<std::string> user_order;
  std::unordered_map<std::string, std::vector<const TimelineRecord*>> by_user;
  std::unordered_map<std::string, bool> seen_tweet;
  for (const auto& r : records) {
    if (!seen_tweet.emplace(r.tweet_id, true).second) {
      throw DataError("duplicate tweet_id '" + r.tweet_id + "'");
    }
    auto [it, fresh] = by_user.try_emplace(r.user_id);
    if (fresh) user_order.push_back(r.user_id);
    it->second.push_back(&r);
  }

  Corpus corpus;
  std::vector<std::vector<std::string>> tokenized;
  std::unordered_map<std::string, std::uint64_t> counts;
  for (const auto& uid : user_order) {
    auto& recs = by_user[uid];
    std::stable_sort(recs.begin(), recs.end(),
                     [](const auto* a, const auto* b) { return a->seq_no < b->seq_no; });
    User user{uid, {}};
    for (std::size_t k = 0; k < recs.size(); ++k) {
      if (recs[k]->seq_no != static_cast<long long>(k)) {
        throw DataError("user '" + uid + "': seq_no values must be unique and contiguous from 0 (found " +
                        std::to_string(recs[k]->seq_no) + " at position " + std::to_string(k) + ")");
      }
      const auto tweet_index = static_cast<std::uint32_t>(corpus.tweet_ids_.size());
      user.timeline.push_back(tweet_index);
      corpus.tweet_ids_.push_back(recs[k]->tweet_id);
      corpus.tweet_lookup_.emplace(recs[k]->tweet_id, tweet_index);
      tokenized.push_back(tokenize(recs[k]->text, options.tokenizer));
      for (const auto& t : tokenized.back()) ++counts[t];
      corpus.tweets_.push_back(
          {tweet_index, static_cast<std::uint32_t>(corpus.users_.size()), {}});
    }
    corpus.users_.push_back(std::move(user));
  }

  corpus.vocab_ = Vocabulary::build(counts, options.min_count);
  for (std::size_t t = 0; t < corpus.tweets_.size(); ++t) {
    for (const auto& w : tokenized[t]) {
      if (auto idx = corpus.vocab_.index_of(w)) corpus.tweets_[t].tokens.push_back(*idx);
    }
  }

  if (corpus.vocab_.size() > 0) corpus.word_tree_ = CodingTree::huffman(corpus.vocab_.counts());
  if (!corpus.tweets_.empty()) corpus.tweet_tree_ = CodingTree::balanced(corpus.tweets_.size());
  if (!corpus.users_.empty()) corpus.user_tree_ = CodingTree::balanced(corpus.users_.size());
  return corpus;
}

Corpus Corpus::ingest(const std::string& path, const IngestOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus file '" + path + "'");
  return build(read_records(in, options.format), options);
}

std::optional<std::uint32_t> Corpus::tweet_index(std::string_view tweet_id) const {
  auto it = tweet_lookup_.find(std::string(tweet_id));
  if (it == tweet_lookup_.end()) return std::nullopt;
  return it->second;
}

std::size_t Corpus::token_count() const {
  std::size_t n = 0;
  for (const auto& t : tweets_) n += t.tokens.size();
  return n;
}

}  // namespace tweetvec
