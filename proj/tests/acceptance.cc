// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any
// failure. Tolerances and runtime limits are fixed here, not configurable.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "oracles.h"
#include "tweetvec/hsoftmax.h"
#include "tweetvec/synthetic.h"
#include "tweetvec/trainer.h"
#include "tweetvec/eval.h"

namespace fs = std::filesystem;
using namespace tweetvec;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x) {
  std::ostringstream ss;
  ss.precision(4);
  ss << x;
  return ss.str();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(TWEETVEC_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// 1. Every term of the joint objective against central differences on the toy model.
Outcome gradient_exactness() {
  const auto corpus = oracle::toy_corpus();
  TrainConfig cfg;
  cfg.dim = 4;
  cfg.word_window = 2;
  cfg.temporal_window = 1;
  cfg.use_user = true;
  auto store = ParameterStore::zeros(model_shape(corpus, cfg));
  oracle::randomize(store, 20240601);

  double worst = 0.0;
  std::string where;
  std::array<bool, kTableCount> touched = {};
  for (std::size_t t = 0; t < kTermCount; ++t) {
    const auto term = static_cast<Term>(t);
    Gradients g;
    term_loss(store, corpus, cfg, term, &g);
    g.for_each([&](Table table, std::size_t, std::span<const double>) { touched[static_cast<std::size_t>(table)] = true; });
    const auto r = oracle::finite_difference_check(
        store, [&](const ParameterStore& s) { return term_loss(s, corpus, cfg, term); }, g, 1e-4);
    if (r.max_rel_err >= worst) {
      worst = r.max_rel_err;
      where = std::string(term_name(term)) + " " + r.worst;
    }
  }
  const bool all_tables = std::all_of(touched.begin(), touched.end(), [](bool b) { return b; });
  return {worst < 1e-4 && all_tables,
          "max rel err " + fmt(worst) + (all_tables ? "" : ", some table got no gradient") +
              (worst >= 1e-4 ? " at " + where : "")};
}

// 2. Leaf probabilities sum to one; attention weights sum to one over available slots.
Outcome normalization() {
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  double worst_tree = 0.0;
  for (std::size_t leaves = 1; leaves <= 64; ++leaves) {
    std::vector<std::uint64_t> counts(leaves);
    for (auto& c : counts) c = 1 + gen() % 1000;
    for (const auto& tree : {CodingTree::huffman(counts), CodingTree::balanced(leaves)}) {
      const std::size_t dim = 5;
      Matrix nodes(std::max<std::size_t>(tree.internal_node_count(), 1), dim);
      for (double& x : nodes.data()) x = u(gen);
      std::vector<double> input(dim);
      for (double& x : input) x = u(gen);
      double sum = 0.0;
      for (std::size_t leaf = 0; leaf < leaves; ++leaf) {
        sum += std::exp(-hs_loss_grad(input, tree, leaf, nodes, {}, nullptr, Table::kWordNodes));
      }
      worst_tree = std::max(worst_tree, std::abs(sum - 1.0));
    }
  }

  double worst_att = 0.0;
  for (int draw = 0; draw < 1000; ++draw) {
    const std::size_t ct = kTemporalContextGrid[gen() % 5], dim = 1 + gen() % 6, slots = 2 * ct;
    Matrix a(slots, slots * dim);
    for (double& x : a.data()) x = u(gen) * 3;
    Matrix vecs(slots, dim);
    for (double& x : vecs.data()) x = u(gen);
    std::vector<std::span<const double>> ctx(slots);
    bool any = false;
    for (std::size_t s = 0; s < slots; ++s) {
      if (gen() % 4 != 0) {
        ctx[s] = vecs.row(s);
        any = true;
      }
    }
    if (!any) ctx[gen() % slots] = vecs.row(0);
    const auto alpha = attention_weights(a, ctx);
    double sum = 0.0;
    for (std::size_t s = 0; s < slots; ++s) {
      if (ctx[s].empty() && alpha[s] != 0.0) worst_att = 1.0;
      sum += alpha[s];
    }
    worst_att = std::max(worst_att, std::abs(sum - 1.0));
  }
  return {worst_tree <= 1e-9 && worst_att <= 1e-12,
          "tree |sum-1| " + fmt(worst_tree) + ", attention |sum-1| " + fmt(worst_att)};
}

// 3. Zero, frozen A without the user vector is the uniform-attention model.
Outcome baseline_reduction() {
  SyntheticSpec spec;
  spec.users = 6;
  spec.tweets_per_user = 12;
  const auto corpus = Corpus::build(generate_synthetic(spec).records);
  std::mt19937_64 gen(3);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const std::size_t ct = kTemporalContextGrid[gen() % 4];
    ModelShape shape{corpus.vocabulary().size(), corpus.tweets().size(), corpus.users().size(), 6, 2, ct};
    auto store = ParameterStore::zeros(shape);
    oracle::randomize(store, 100 + i);
    for (double& x : store.attention().data()) x = 0.0;
    const auto user = static_cast<std::uint32_t>(gen() % corpus.users().size());
    const std::size_t pos = gen() % corpus.users()[user].timeline.size();
    const auto sample = temporal_sample(corpus, user, pos, ct);
    const TemporalOptions opts{AttentionMode::kLearned, false, false};
    const double got = temporal_loss(sample, store, corpus.tweet_tree(), opts, nullptr);
    std::vector<long long> ctx(sample.context.begin(), sample.context.end());
    const double want = oracle::uniform_temporal_nll(store.tweets(), ctx, corpus.tweet_tree().code(sample.target),
                                                     corpus.tweet_tree().path(sample.target),
                                                     store.table(Table::kTweetNodes));
    worst = std::max(worst, std::abs(got - want));
  }
  return {worst <= 1e-12, "max |diff| " + fmt(worst) + " over 100 samples"};
}

// 4. Inverse-distance weights for C_T = 2 with every slot available.
Outcome sd_weights() {
  TemporalSample s;
  s.context = {10, 11, 13, 14};
  const auto w = sd_attention(s);
  const double want[4] = {1.0 / 6, 1.0 / 3, 1.0 / 3, 1.0 / 6};
  double worst = 0.0;
  for (int i = 0; i < 4; ++i) worst = std::max(worst, std::abs(w[i] - want[i]));
  return {w.size() == 4 && worst <= 1e-12, "max |diff| " + fmt(worst)};
}

// 5. Default synthetic corpus, default config, five deterministic epochs.
Outcome learning_signal() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto corpus = Corpus::build(generate_synthetic(SyntheticSpec{}).records);
  TrainConfig cfg;
  cfg.epochs = 5;
  Trainer tr(corpus, cfg);
  tr.train();
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  bool monotone = true;
  std::string curve;
  for (std::size_t e = 0; e < tr.loss_curve().size(); ++e) {
    curve += (e ? " " : "") + fmt(tr.loss_curve()[e].total);
    if (e > 0 && !(tr.loss_curve()[e].total < tr.loss_curve()[e - 1].total)) monotone = false;
  }
  return {monotone && secs < 120.0, "epoch loss " + curve + ", " + fmt(secs) + " s"};
}

// 6. Only offsets +-1 share the target's topic: attention must learn that.
Outcome attention_selectivity() {
  const auto t0 = std::chrono::steady_clock::now();
  SyntheticSpec spec;
  spec.pattern = RelevancePattern::kAdjacent;
  spec.topics = 16;
  const auto corpus = Corpus::build(generate_synthetic(spec).records);
  TrainConfig cfg;
  cfg.temporal_window = 4;
  cfg.epochs = 10;
  cfg.lr = 1e-4;
  Trainer tr(corpus, cfg);
  tr.train();
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const auto& rep = tr.full_context_attention_report();
  const double uniform = 1.0 / (2.0 * cfg.temporal_window);
  double first_dev = 0.0;
  for (const auto& r : rep.epoch_rows(1)) first_dev = std::max(first_dev, std::abs(r.mean_attention - uniform));
  double near = 1.0, far = 0.0;
  std::string last;
  for (const auto& r : rep.epoch_rows(cfg.epochs)) {
    if (std::abs(r.offset) == 1) near = std::min(near, r.mean_attention);
    else far = std::max(far, r.mean_attention);
    last += " " + std::to_string(r.offset) + ":" + fmt(r.mean_attention);
  }
  return {near > far && first_dev <= 0.02 && secs < 300.0,
          "epoch 10" + last + "; min(+-1) " + fmt(near) + " vs max(|d|>=2) " + fmt(far) +
              "; epoch 1 max |mean-1/8| " + fmt(first_dev) + ", " + fmt(secs) + " s"};
}

// 7. Full pipeline on the separable corpus, learned vs uniform attention.
Outcome classification() {
  const auto t0 = std::chrono::steady_clock::now();
  SyntheticSpec spec;
  spec.tokens_per_tweet = 16;
  const auto syn = generate_synthetic(spec);
  const auto corpus = Corpus::build(syn.records);
  auto entities = syn.entities;
  assign_user_splits(entities, corpus, 1);

  auto f1 = [&](AttentionMode mode, bool use_user) {
    TrainConfig cfg;
    cfg.dim = 50;
    cfg.epochs = 15;
    cfg.attention = mode;
    cfg.use_user = use_user;
    Trainer tr(corpus, cfg);
    tr.train();
    return evaluate_entities(entities, corpus, tr.store().tweets(), {}, cfg.hash()).test_f1;
  };
  const double learned = f1(AttentionMode::kLearned, true);
  const double uniform = f1(AttentionMode::kUniform, false);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {learned >= 0.90 && learned >= uniform - 0.02,
          "test F1 learned " + fmt(learned) + ", uniform " + fmt(uniform) + ", " + fmt(secs) + " s"};
}

// 8. Two deterministic CLI runs give byte-identical outputs.
Outcome determinism() {
  const auto dir = fs::temp_directory_path() / "tweetvec_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto log = dir / "log.txt";
  if (run_cli("gen-synthetic --out " + (dir / "syn").string(), log) != 0) return {false, "gen-synthetic failed"};
  const std::string train = "train --deterministic --corpus " + (dir / "syn" / "corpus.tsv").string() +
                            " --dim 50 --epochs 3 --use-user 1 --ct 4 --seed 11 --out ";
  if (run_cli(train + (dir / "a").string(), log) != 0 || run_cli(train + (dir / "b").string(), log) != 0) {
    return {false, "train failed: " + slurp(log)};
  }
  std::string diff;
  for (const char* f : {"model.ckpt", "loss_curve.csv", "attention.csv", "attention_full.csv", "config.json"}) {
    const auto a = slurp(dir / "a" / f), b = slurp(dir / "b" / f);
    if (a.empty() || a != b) diff += std::string(" ") + f;
  }
  fs::remove_all(dir);
  return {diff.empty(), diff.empty() ? "checkpoint, loss curve and attention reports identical" : "differs:" + diff};
}

// 9. Published defaults and the C_T grid as exposed by the CLI.
Outcome configuration() {
  const auto log = fs::temp_directory_path() / "tweetvec_acceptance_help.txt";
  if (run_cli("train --help", log) != 0) return {false, "train --help failed"};
  const auto help = slurp(log);
  fs::remove(log);
  const bool dim = help.find("--dim UINT:POSITIVE [200]") != std::string::npos;
  const bool cw = help.find("--cw UINT:POSITIVE [10]") != std::string::npos;
  const bool grid = help.find("--ct UINT:{1,2,4,6,8,10,12,14,16} [2]") != std::string::npos;
  const TrainConfig d;
  const bool lib = d.dim == 200 && d.word_window == 10 &&
                   std::vector<std::size_t>(kTemporalContextGrid.begin(), kTemporalContextGrid.end()) ==
                       std::vector<std::size_t>{1, 2, 4, 6, 8, 10, 12, 14, 16};
  return {dim && cw && grid && lib, std::string("dim=200 ") + (dim ? "ok" : "missing") + ", C_W=10 " +
                                        (cw ? "ok" : "missing") + ", C_T grid " + (grid ? "ok" : "missing") +
                                        ", library defaults " + (lib ? "ok" : "differ")};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"gradient exactness", gradient_exactness},
      {"normalization oracles", normalization},
      {"baseline reduction", baseline_reduction},
      {"SD weights", sd_weights},
      {"learning signal", learning_signal},
      {"attention selectivity", attention_selectivity},
      {"end-to-end classification", classification},
      {"determinism", determinism},
      {"configuration fidelity", configuration},
  };
  int failed = 0;
  int id = 0;
  for (const auto& [name, fn] : criteria) {
    ++id;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failed;
    std::printf("%s %d %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", id - failed, id);
  return failed == 0 ? 0 : 1;
}
