#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "oracles.h"
#include "tweetvec/coding_tree.h"
#include "tweetvec/corpus.h"
#include "tweetvec/errors.h"

using namespace tweetvec;

namespace {

std::vector<std::size_t> code_lengths(const CodingTree& t) {
  std::vector<std::size_t> out;
  for (std::size_t l = 0; l < t.leaf_count(); ++l) out.push_back(t.code(l).size());
  return out;
}

bool prefix_free(const CodingTree& t) {
  for (std::size_t a = 0; a < t.leaf_count(); ++a) {
    for (std::size_t b = 0; b < t.leaf_count(); ++b) {
      if (a == b) continue;
      auto ca = t.code(a), cb = t.code(b);
      if (ca.size() <= cb.size() && std::equal(ca.begin(), ca.end(), cb.begin())) return false;
    }
  }
  return true;
}

void check_tree(const CodingTree& t) {
  CHECK(prefix_free(t));
  for (std::size_t l = 0; l < t.leaf_count(); ++l) {
    CHECK(t.code(l).size() == t.path(l).size());
    CHECK(t.decode(t.code(l)) == static_cast<long long>(l));
    for (auto node : t.path(l)) CHECK(node < t.internal_node_count());
  }
}

}  // namespace

TEST_CASE("tokenize: lowercase whitespace split") {
  CHECK(tokenize("Climate Change is REAL") == std::vector<std::string>{"climate", "change", "is", "real"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("   \t ").empty());
  CHECK(tokenize("@potus #ActOnClimate now") == std::vector<std::string>{"@potus", "#actonclimate", "now"});
}

TEST_CASE("tokenize: options") {
  TokenizerConfig keep_case{.lowercase = false};
  CHECK(tokenize("Hi THERE", keep_case) == std::vector<std::string>{"Hi", "THERE"});
  TokenizerConfig strip{.strip_punctuation = true};
  CHECK(tokenize("wow!! \"#tag\", (@user) ...", strip) == std::vector<std::string>{"wow", "#tag", "@user"});
}

TEST_CASE("tokenize is pure") {
  std::mt19937 gen(3);
  const std::string alphabet = "aB #@x. \tQ";
  for (int i = 0; i < 200; ++i) {
    std::string s;
    for (int k = 0; k < 20; ++k) s += alphabet[gen() % alphabet.size()];
    CHECK(tokenize(s) == tokenize(s));
  }
}

TEST_CASE("huffman code lengths") {
  SUBCASE("a:4 b:2 c:1 d:1") {
    const std::vector<std::uint64_t> w = {4, 2, 1, 1};
    auto t = CodingTree::huffman(w);
    CHECK(code_lengths(t) == std::vector<std::size_t>{1, 2, 3, 3});
    // frozen from the brute-force oracle: 4*1 + 2*2 + 1*3 + 1*3
    CHECK(oracle::min_prefix_code_cost(w) == 14);
    check_tree(t);
  }
  SUBCASE("single leaf") {
    auto t = CodingTree::huffman(std::vector<std::uint64_t>{1});
    CHECK(t.leaf_count() == 1);
    CHECK(t.internal_node_count() == 0);
    CHECK(t.code(0).empty());
    CHECK(t.decode({}) == 0);
  }
  SUBCASE("two equal leaves") {
    auto t = CodingTree::huffman(std::vector<std::uint64_t>{1, 1});
    CHECK(code_lengths(t) == std::vector<std::size_t>{1, 1});
    check_tree(t);
  }
  SUBCASE("invalid input") {
    CHECK_THROWS(CodingTree::huffman(std::vector<std::uint64_t>{}));
    CHECK_THROWS(CodingTree::huffman(std::vector<std::uint64_t>{3, 0}));
  }
}

TEST_CASE("huffman is deterministic under ties") {
  const std::vector<std::uint64_t> w = {1, 1, 1, 1, 1};
  auto a = CodingTree::huffman(w);
  auto b = CodingTree::huffman(w);
  for (std::size_t l = 0; l < w.size(); ++l) {
    CHECK(std::vector<std::uint8_t>(a.code(l).begin(), a.code(l).end()) ==
          std::vector<std::uint8_t>(b.code(l).begin(), b.code(l).end()));
  }
}

TEST_CASE("huffman matches brute-force minimal prefix code (n <= 8)") {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 150; ++trial) {
    const std::size_t n = 1 + gen() % 8;
    std::vector<std::uint64_t> w(n);
    for (auto& x : w) x = 1 + gen() % 20;
    auto t = CodingTree::huffman(w);
    std::uint64_t cost = 0;
    for (std::size_t l = 0; l < n; ++l) cost += w[l] * t.code(l).size();
    CHECK(cost == oracle::min_prefix_code_cost(w));
    check_tree(t);
  }
}

TEST_CASE("balanced tree shapes") {
  CHECK(code_lengths(CodingTree::balanced(4)) == std::vector<std::size_t>{2, 2, 2, 2});
  CHECK(code_lengths(CodingTree::balanced(1)) == std::vector<std::size_t>{0});
  // 5 leaves: the enumeration admits a single complete shape, {2,2,2,3,3}.
  const auto shapes = oracle::complete_tree_shapes(5);
  REQUIRE(shapes.size() == 1);
  CHECK(*shapes.begin() == std::vector<int>{2, 2, 2, 3, 3});
  auto five = code_lengths(CodingTree::balanced(5));
  std::sort(five.begin(), five.end());
  CHECK(five == std::vector<std::size_t>{2, 2, 2, 3, 3});
  CHECK_THROWS(CodingTree::balanced(0));
}

TEST_CASE("balanced trees are complete and decodable") {
  for (std::size_t n = 1; n <= 64; ++n) {
    auto t = CodingTree::balanced(n);
    auto lens = code_lengths(t);
    auto [lo, hi] = std::minmax_element(lens.begin(), lens.end());
    CHECK(*hi - *lo <= 1);
    check_tree(t);
    if (n <= 8) {
      std::vector<int> sorted(lens.begin(), lens.end());
      std::sort(sorted.begin(), sorted.end());
      CHECK(oracle::complete_tree_shapes(n).count(sorted) == 1);
    }
  }
}

TEST_CASE("ingest: counts and ordering") {
  std::istringstream in("u1\tt1\t0\thello world\nu2\tt2\t0\tHello there\nu1\tt3\t1\tworld\n");
  auto corpus = Corpus::build(read_records(in));
  CHECK(corpus.users().size() == 2);
  CHECK(corpus.tweets().size() == 3);
  CHECK(corpus.users()[0].id == "u1");
  CHECK(corpus.users()[0].timeline.size() == 2);
  CHECK(corpus.tweet_id(corpus.users()[0].timeline[1]) == "t3");
  CHECK(corpus.vocabulary().size() == 3);
  CHECK(corpus.word_tree().leaf_count() == 3);
  CHECK(corpus.tweet_tree().leaf_count() == 3);
  CHECK(corpus.user_tree().leaf_count() == 2);
}

TEST_CASE("ingest: seq_no ordering and validation") {
  std::istringstream shuffled("u\tb\t1\tsecond\nu\ta\t0\tfirst\n");
  auto c = Corpus::build(read_records(shuffled));
  CHECK(c.tweet_id(c.users()[0].timeline[0]) == "a");

  std::istringstream gap("u\ta\t0\tx\nu\tb\t2\ty\n");
  CHECK_THROWS_AS(Corpus::build(read_records(gap)), DataError);
  std::istringstream dup_seq("u\ta\t0\tx\nu\tb\t0\ty\n");
  CHECK_THROWS_AS(Corpus::build(read_records(dup_seq)), DataError);
  std::istringstream dup_id("u\ta\t0\tx\nv\ta\t0\ty\n");
  CHECK_THROWS_AS(Corpus::build(read_records(dup_id)), DataError);
}

TEST_CASE("ingest: malformed lines report the line number") {
  std::istringstream in("u\ta\t0\tok\nthis line has no tabs\n");
  try {
    read_records(in);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  std::istringstream bad_seq("u\ta\tzero\ttext\n");
  CHECK_THROWS_AS(read_records(bad_seq), DataError);
}

TEST_CASE("ingest: empty input") {
  std::istringstream in("");
  auto c = Corpus::build(read_records(in));
  CHECK(c.users().empty());
  CHECK(c.tweets().empty());
  CHECK(c.vocabulary().size() == 0);
  CHECK(c.word_tree().leaf_count() == 0);
}

TEST_CASE("ingest: min_count threshold") {
  std::istringstream in("u\t1\t0\tthe zebra\nu\t2\t1\tthe the\nu\t3\t2\tthe\n");
  auto c = Corpus::build(read_records(in), IngestOptions{.min_count = 2});
  CHECK(c.vocabulary().index_of("the").has_value());
  CHECK_FALSE(c.vocabulary().index_of("zebra").has_value());
  CHECK(c.vocabulary().count(*c.vocabulary().index_of("the")) == 4);
  // the OOV token is dropped; the tweet stays
  CHECK(c.tweets()[0].tokens.size() == 1);
}

TEST_CASE("ingest: tweets emptied by OOV filtering stay in the timeline") {
  std::istringstream in("u\t1\t0\tcommon\nu\t2\t1\trare\nu\t3\t2\tcommon\n");
  auto c = Corpus::build(read_records(in), IngestOptions{.min_count = 2});
  CHECK(c.users()[0].timeline.size() == 3);
  CHECK(c.tweets()[1].tokens.empty());
}

TEST_CASE("ingest: users with a single tweet are kept") {
  std::istringstream in("solo\t1\t0\thi there\n");
  auto c = Corpus::build(read_records(in));
  CHECK(c.users().size() == 1);
  CHECK(c.user_tree().leaf_count() == 1);
}

TEST_CASE("ingest: json lines") {
  std::istringstream in(R"({"user":"u1","id":"t1","seq":0,"text":"Hello World"}
{"user":"u1","id":2,"seq":1,"text":"again"}
)");
  auto c = Corpus::build(read_records(in));
  CHECK(c.tweets().size() == 2);
  CHECK(c.tweet_index("2").has_value());
  std::istringstream bad("{\"user\":\"u1\",\"seq\":0,\"text\":\"x\"}\n");
  CHECK_THROWS_AS(read_records(bad), DataError);
}

TEST_CASE("vocabulary maps are inverse bijections") {
  auto c = oracle::toy_corpus();
  const auto& v = c.vocabulary();
  CHECK(v.size() == 6);
  for (std::uint32_t i = 0; i < v.size(); ++i) {
    CHECK(v.index_of(v.word(i)) == i);
    CHECK(v.count(i) >= v.min_count());
  }
  for (const auto& t : c.tweets()) {
    for (auto w : t.tokens) CHECK(w < v.size());
  }
}

TEST_CASE("ingest from file") {
  const std::string path = (std::filesystem::temp_directory_path() / "tweetvec_corpus_test.tsv").string();
  {
    std::ofstream out(path);
    out << "u\t1\t0\ta b\n";
  }
  auto c = Corpus::ingest(path);
  CHECK(c.tweets().size() == 1);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(Corpus::ingest("does/not/exist.tsv"), DataError);
}
