// Independent reference computations used by the unit and acceptance tests.
// Nothing here calls into the code paths it is used to check.
#ifndef TWEETVEC_TESTS_ORACLES_H_
#define TWEETVEC_TESTS_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "tweetvec/corpus.h"
#include "tweetvec/params.h"

namespace oracle {

// Minimal sum_i w_i * len_i over all prefix codes, by enumerating code-length
// vectors that satisfy the Kraft inequality. Fine for n <= 8.
inline std::uint64_t min_prefix_code_cost(const std::vector<std::uint64_t>& w) {
  const std::size_t n = w.size();
  if (n <= 1) return 0;
  const int max_len = static_cast<int>(n) - 1;
  const std::uint64_t unit = 1ULL << max_len;  // Kraft sum scaled by 2^max_len
  std::uint64_t best = std::numeric_limits<std::uint64_t>::max();
  std::vector<int> len(n, 0);
  std::function<void(std::size_t, std::uint64_t, std::uint64_t)> go = [&](std::size_t i, std::uint64_t kraft,
                                                                          std::uint64_t cost) {
    if (cost >= best) return;
    if (i == n) {
      best = cost;
      return;
    }
    for (int l = 1; l <= max_len; ++l) {
      const std::uint64_t k = kraft + (unit >> l);
      if (k <= unit) go(i + 1, k, cost + w[i] * static_cast<std::uint64_t>(l));
    }
  };
  go(0, 0, 0);
  return best;
}

// Sorted code-length multisets of all full binary trees with n leaves whose
// leaf depths differ by at most one.
inline std::set<std::vector<int>> complete_tree_shapes(std::size_t n) {
  std::set<std::vector<int>> out;
  if (n == 1) {
    out.insert({0});
    return out;
  }
  const int max_len = static_cast<int>(n) - 1;
  const std::uint64_t unit = 1ULL << max_len;
  std::vector<int> len;
  std::function<void(int, std::uint64_t)> go = [&](int min_l, std::uint64_t kraft) {
    if (len.size() == n) {
      if (kraft == unit && len.back() - len.front() <= 1) out.insert(len);
      return;
    }
    for (int l = min_l; l <= max_len; ++l) {
      if (kraft + (unit >> l) > unit) continue;
      len.push_back(l);
      go(l, kraft + (unit >> l));
      len.pop_back();
    }
  };
  go(1, 0);
  return out;
}

struct GradCheck {
  double max_rel_err = 0.0;
  std::string worst;
  std::size_t checked = 0;
};

inline double rel_err(double a, double b) {
  const double denom = std::max({std::abs(a), std::abs(b), 1e-8});
  return std::abs(a - b) / denom;
}

// Central differences of `loss` w.r.t. every entry of every table, compared
// with the analytic gradient in `analytic` (absent rows count as zero).
inline GradCheck finite_difference_check(const tweetvec::ParameterStore& store,
                                         const std::function<double(const tweetvec::ParameterStore&)>& loss,
                                         const tweetvec::Gradients& analytic, double h = 1e-4) {
  using tweetvec::Table;
  GradCheck r;
  tweetvec::ParameterStore probe = store;
  for (std::size_t t = 0; t < tweetvec::kTableCount; ++t) {
    const auto table = static_cast<Table>(t);
    auto& m = probe.table(table);
    for (std::size_t row = 0; row < m.rows(); ++row) {
      const auto g = analytic.find(table, row);
      for (std::size_t c = 0; c < m.cols(); ++c) {
        const double saved = m(row, c);
        m(row, c) = saved + h;
        const double up = loss(probe);
        m(row, c) = saved - h;
        const double down = loss(probe);
        m(row, c) = saved;
        const double fd = (up - down) / (2 * h);
        const double an = g.empty() ? 0.0 : g[c];
        const double e = rel_err(an, fd);
        ++r.checked;
        if (e > r.max_rel_err) {
          r.max_rel_err = e;
          r.worst = std::string(tweetvec::table_name(table)) + "[" + std::to_string(row) + "," +
                    std::to_string(c) + "] analytic=" + std::to_string(an) + " fd=" + std::to_string(fd);
        }
      }
    }
  }
  return r;
}

// -log P(leaf) for hierarchical softmax, written out directly.
inline double hs_nll(const std::vector<double>& input, std::span<const std::uint8_t> code,
                     std::span<const std::uint32_t> path, const tweetvec::Matrix& nodes) {
  double nll = 0.0;
  for (std::size_t k = 0; k < code.size(); ++k) {
    double f = 0.0;
    for (std::size_t i = 0; i < input.size(); ++i) f += input[i] * nodes(path[k], i);
    const double p_left = 1.0 / (1.0 + std::exp(-f));
    nll -= std::log(code[k] == 0 ? p_left : 1.0 - p_left);
  }
  return nll;
}

// HDV-style temporal loss: plain mean of the available context tweet vectors.
inline double uniform_temporal_nll(const tweetvec::Matrix& tweets, const std::vector<long long>& context,
                                   std::span<const std::uint8_t> code, std::span<const std::uint32_t> path,
                                   const tweetvec::Matrix& nodes) {
  std::vector<double> mean(tweets.cols(), 0.0);
  int k = 0;
  for (long long c : context) {
    if (c < 0) continue;
    ++k;
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += tweets(static_cast<std::size_t>(c), i);
  }
  for (double& x : mean) x /= k;
  return hs_nll(mean, code, path, nodes);
}

// Fills every table with U(-scale, scale).
inline void randomize(tweetvec::ParameterStore& store, std::uint64_t seed, double scale = 0.5) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> d(-scale, scale);
  for (std::size_t t = 0; t < tweetvec::kTableCount; ++t) {
    for (double& x : store.table(static_cast<tweetvec::Table>(t)).data()) x = d(gen);
  }
}

// 2 users x 4 tweets over a 6-word vocabulary (a..f), including one-token tweets.
inline tweetvec::Corpus toy_corpus() {
  std::vector<tweetvec::TimelineRecord> recs = {
      {"alice", "a0", 0, "a b c"},      {"alice", "a1", 1, "b c d e"}, {"alice", "a2", 2, "e f"},
      {"alice", "a3", 3, "a"},          {"bob", "b0", 0, "c d"},       {"bob", "b1", 1, "f e d c b"},
      {"bob", "b2", 2, "a b"},          {"bob", "b3", 3, "b"},
  };
  return tweetvec::Corpus::build(recs);
}

}  // namespace oracle

#endif  // TWEETVEC_TESTS_ORACLES_H_
