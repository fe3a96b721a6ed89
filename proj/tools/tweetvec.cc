// tweetvec command line: train, eval, gen-synthetic, report-attention, export.
//
// Exit codes: 0 ok, 1 usage or configuration error, 2 data error, 3 numerical
// failure during training.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tweetvec/checkpoint.h"
#include "tweetvec/errors.h"
#include "tweetvec/eval.h"
#include "tweetvec/synthetic.h"
#include "tweetvec/trainer.h"

namespace fs = std::filesystem;
using namespace tweetvec;
using nlohmann::json;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

void print_config(const json& j) {
  const std::string dump = j.dump();
  std::cout << "config " << dump << "\n";
  std::cout << "config_hash " << config_hash(dump) << "\n";
}

std::string grid_text() {
  std::string s;
  for (auto c : kTemporalContextGrid) s += (s.empty() ? "" : ",") + std::to_string(c);
  return "{" + s + "}";
}

struct TrainArgs {
  std::string corpus;
  std::string out = "run";
  std::size_t dim = kDefaultDim;
  std::size_t cw = kDefaultWordWindow;
  std::size_t ct = kDefaultTemporalWindow;
  std::size_t epochs = 5;
  double lr = 0.001;
  int use_user = 0;
  std::string attention = "learned";
  bool freeze_attention = false;
  std::string pretrained_words;
  std::uint64_t min_count = 1;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  bool deterministic = false;
};

TrainConfig to_config(const TrainArgs& a) {
  TrainConfig c;
  c.dim = a.dim;
  c.word_window = a.cw;
  c.temporal_window = a.ct;
  c.epochs = a.epochs;
  c.lr = a.lr;
  c.use_user = a.use_user != 0;
  c.attention = parse_attention_mode(a.attention);
  c.freeze_attention = a.freeze_attention;
  c.seed = a.seed;
  c.workers = a.workers;
  c.min_count = a.min_count;
  c.pretrained_words = a.pretrained_words;
  // --deterministic forces the single-writer schedule even with workers > 1.
  c.mode = (a.deterministic || a.workers == 1) ? ExecutionMode::kDeterministic : ExecutionMode::kThroughput;
  c.validate();
  return c;
}

int run_train(const TrainArgs& a) {
  const TrainConfig cfg = to_config(a);
  print_config(cfg.to_json());
  std::cout << "corpus " << a.corpus << "\n";

  IngestOptions io;
  io.min_count = cfg.min_count;
  const Corpus corpus = Corpus::ingest(a.corpus, io);
  std::cout << "corpus users=" << corpus.users().size() << " tweets=" << corpus.tweets().size()
            << " vocab=" << corpus.vocabulary().size() << " tokens=" << corpus.token_count() << "\n";

  fs::create_directories(a.out);
  const fs::path out(a.out);
  {
    std::ofstream f(out / "config.json");
    f << cfg.to_json().dump(2) << "\n";
  }

  Trainer trainer(corpus, cfg);
  trainer.train([](const Trainer& t) {
    const auto& e = t.loss_curve().back();
    std::cout << "epoch " << e.epoch << " total " << e.total;
    for (std::size_t k = 0; k < kTermCount; ++k) std::cout << " " << term_name(static_cast<Term>(k)) << " " << e.mean[k];
    std::cout << "\n";
  });

  save_checkpoint((out / "model.ckpt").string(), trainer.store(), trainer.adam(),
                  {cfg.seed, cfg.hash(), cfg.to_json().dump()});
  {
    std::ofstream f(out / "loss_curve.csv");
    write_loss_curve(trainer.loss_curve(), f);
  }
  {
    std::ofstream f(out / "attention.csv");
    trainer.attention_report().write_csv(f);
  }
  {
    std::ofstream f(out / "attention_full.csv");
    trainer.full_context_attention_report().write_csv(f);
  }
  std::cout << "wrote " << (out / "model.ckpt").string() << "\n";
  return 0;
}

// Loads a checkpoint and rebuilds the corpus it was trained on.
struct Loaded {
  Checkpoint ck;
  TrainConfig cfg;
  Corpus corpus;
};

Loaded load_run(const std::string& checkpoint, const std::string& corpus_path) {
  Loaded l;
  l.ck = load_checkpoint(checkpoint, {}, &std::cerr);
  l.cfg = TrainConfig::from_json(json::parse(l.ck.meta.config_json));
  IngestOptions io;
  io.min_count = l.cfg.min_count;
  l.corpus = Corpus::ingest(corpus_path, io);
  if (l.ck.store.shape() != model_shape(l.corpus, l.cfg)) {
    throw DataError("checkpoint '" + checkpoint + "' does not match corpus '" + corpus_path + "'");
  }
  return l;
}

struct EvalArgs {
  std::string corpus, labels, checkpoint, out;
  std::uint64_t seed = 1;
  std::size_t svm_epochs = 100;
};

int run_eval(const EvalArgs& a) {
  print_config({{"corpus", a.corpus},
                {"labels", a.labels},
                {"checkpoint", a.checkpoint},
                {"seed", a.seed},
                {"svm_epochs", a.svm_epochs},
                {"penalty_grid", kPenaltyGrid}});
  auto run = load_run(a.checkpoint, a.corpus);
  auto entities = read_labels_file(a.labels);
  assign_user_splits(entities, run.corpus, a.seed);
  LinearOptions opts;
  opts.epochs = a.svm_epochs;
  opts.seed = a.seed;
  const auto r = evaluate_entities(entities, run.corpus, run.ck.store.tweets(), opts, run.ck.meta.config_hash);
  const std::string text = r.to_json().dump(2);
  std::cout << text << "\n";
  if (!a.out.empty()) {
    std::ofstream f(a.out);
    if (!f) throw DataError("cannot write '" + a.out + "'");
    f << text << "\n";
  }
  return 0;
}

int run_gen(const SyntheticSpec& spec, const std::string& pattern, const std::string& out) {
  SyntheticSpec s = spec;
  s.pattern = parse_relevance_pattern(pattern);
  print_config({{"users", s.users},
                {"tweets_per_user", s.tweets_per_user},
                {"topics", s.topics},
                {"words_per_topic", s.words_per_topic},
                {"tokens_per_tweet", s.tokens_per_tweet},
                {"block_length", s.block_length},
                {"pattern", relevance_pattern_name(s.pattern)},
                {"seed", s.seed},
                {"out", out}});
  fs::create_directories(out);
  write_synthetic(generate_synthetic(s), out);
  std::cout << "wrote " << (fs::path(out) / "corpus.tsv").string() << " and "
            << (fs::path(out) / "labels.tsv").string() << "\n";
  return 0;
}

int run_report(const std::string& run_dir, bool full_context) {
  print_config({{"run", run_dir}, {"full_context", full_context}});
  const fs::path p = fs::path(run_dir) / (full_context ? "attention_full.csv" : "attention.csv");
  std::ifstream in(p);
  if (!in) throw DataError("cannot open attention report '" + p.string() + "'");
  const auto rep = AttentionReport::read_csv(in);
  std::cout << "epoch,offset,mean_attention,sample_count\n";
  for (const auto& r : rep.rows()) {
    std::cout << r.epoch << ',' << r.offset << ',' << r.mean_attention << ',' << r.sample_count << '\n';
  }
  return 0;
}

int run_export(const std::string& checkpoint, const std::string& corpus_path, const std::string& which,
               const std::string& out) {
  print_config({{"checkpoint", checkpoint}, {"corpus", corpus_path}, {"which", which}, {"out", out}});
  auto run = load_run(checkpoint, corpus_path);
  std::vector<std::string> ids;
  const Matrix* table = nullptr;
  if (which == "words") {
    for (std::uint32_t i = 0; i < run.corpus.vocabulary().size(); ++i) ids.push_back(run.corpus.vocabulary().word(i));
    table = &run.ck.store.words();
  } else if (which == "tweets") {
    for (std::uint32_t i = 0; i < run.corpus.tweets().size(); ++i) ids.push_back(run.corpus.tweet_id(i));
    table = &run.ck.store.tweets();
  } else {
    for (const auto& u : run.corpus.users()) ids.push_back(u.id);
    table = &run.ck.store.users();
  }
  export_embeddings(*table, ids, out);
  std::cout << "wrote " << ids.size() << " vectors (" << which << ") to " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tweetvec: attention-weighted tweet embeddings from user timelines"};
  app.require_subcommand(1);

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "Train tweet, word and user vectors on a timeline corpus");
  train->add_option("--corpus", ta.corpus, "Timeline corpus (TSV or JSON lines)")->required()->check(CLI::ExistingFile);
  train->add_option("--out", ta.out, "Output directory")->capture_default_str();
  train->add_option("--dim", ta.dim, "Embedding dimension n")->capture_default_str()->check(CLI::PositiveNumber);
  train->add_option("--cw", ta.cw, "Word context window C_W")->capture_default_str()->check(CLI::PositiveNumber);
  train->add_option("--ct", ta.ct, "Temporal context size C_T, one of " + grid_text())
      ->capture_default_str()
      ->check(CLI::IsMember(std::set<std::size_t>(kTemporalContextGrid.begin(), kTemporalContextGrid.end())));
  train->add_option("--epochs", ta.epochs, "Passes over the corpus")->capture_default_str()->check(CLI::PositiveNumber);
  train->add_option("--lr", ta.lr, "Adam learning rate")->capture_default_str()->check(CLI::NonNegativeNumber);
  train->add_option("--use-user", ta.use_user, "Add the user vector to the temporal context (learned attention)")
      ->capture_default_str()
      ->check(CLI::IsMember({0, 1}));
  train->add_option("--attention", ta.attention, "Attention over temporal context")
      ->capture_default_str()
      ->check(CLI::IsMember({"learned", "uniform", "sd"}));
  train->add_flag("--freeze-attention", ta.freeze_attention, "Keep A at its zero initialization");
  train->add_option("--pretrained-words", ta.pretrained_words, "Initial word vectors (text format)")
      ->check(CLI::ExistingFile);
  train->add_option("--min-count", ta.min_count, "Drop words seen fewer times")->capture_default_str()->check(CLI::PositiveNumber);
  train->add_option("--seed", ta.seed, "Random seed")->capture_default_str();
  train->add_option("--workers", ta.workers, "Worker threads (lock-free updates when > 1)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  train->add_flag("--deterministic", ta.deterministic, "Single-writer schedule, bitwise reproducible");

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "Entity classification with a linear SVM on averaged tweet vectors");
  eval->add_option("--corpus", ea.corpus, "Corpus the model was trained on")->required()->check(CLI::ExistingFile);
  eval->add_option("--labels", ea.labels, "entity<TAB>label<TAB>tweet_ids")->required()->check(CLI::ExistingFile);
  eval->add_option("--checkpoint", ea.checkpoint, "Trained model")->required()->check(CLI::ExistingFile);
  eval->add_option("--seed", ea.seed, "Seed for the user split and the SVM")->capture_default_str();
  eval->add_option("--svm-epochs", ea.svm_epochs, "SVM passes per penalty")->capture_default_str()->check(CLI::PositiveNumber);
  eval->add_option("--out", ea.out, "Write the result JSON here");

  SyntheticSpec spec;
  std::string pattern = "blocks";
  std::string gen_out = "synthetic";
  auto* gen = app.add_subcommand("gen-synthetic", "Write a synthetic timeline corpus and entity labels");
  gen->add_option("--out", gen_out, "Output directory")->capture_default_str();
  gen->add_option("--users", spec.users)->capture_default_str()->check(CLI::PositiveNumber);
  gen->add_option("--tweets-per-user", spec.tweets_per_user)->capture_default_str()->check(CLI::PositiveNumber);
  gen->add_option("--topics", spec.topics)->capture_default_str()->check(CLI::PositiveNumber);
  gen->add_option("--words-per-topic", spec.words_per_topic)->capture_default_str()->check(CLI::PositiveNumber);
  gen->add_option("--tokens-per-tweet", spec.tokens_per_tweet)->capture_default_str()->check(CLI::PositiveNumber);
  gen->add_option("--block-length", spec.block_length)->capture_default_str()->check(CLI::PositiveNumber);
  gen->add_option("--pattern", pattern)->capture_default_str()->check(CLI::IsMember({"blocks", "adjacent"}));
  gen->add_option("--seed", spec.seed)->capture_default_str();

  std::string report_run;
  bool full_context = false;
  auto* report = app.add_subcommand("report-attention", "Print mean attention per epoch and offset");
  report->add_option("--run", report_run, "Training output directory")->required()->check(CLI::ExistingDirectory);
  report->add_flag("--full-context", full_context, "Only samples with all 2*C_T context slots inside the timeline");

  std::string ex_ckpt, ex_corpus, ex_which = "tweets", ex_out;
  auto* exp = app.add_subcommand("export", "Write embeddings as text");
  exp->add_option("--checkpoint", ex_ckpt)->required()->check(CLI::ExistingFile);
  exp->add_option("--corpus", ex_corpus)->required()->check(CLI::ExistingFile);
  exp->add_option("--which", ex_which)->capture_default_str()->check(CLI::IsMember({"words", "tweets", "users"}));
  exp->add_option("--out", ex_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*train) return run_train(ta);
    if (*eval) return run_eval(ea);
    if (*gen) return run_gen(spec, pattern, gen_out);
    if (*report) return run_report(report_run, full_context);
    if (*exp) return run_export(ex_ckpt, ex_corpus, ex_which, ex_out);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
