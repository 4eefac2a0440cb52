// Copyright 2026 The typodr Authors
// SPDX-License-Identifier: Apache-2.0
//
// Command line front end. Exit codes: 0 success, 2 invalid input or
// configuration, 1 any other runtime failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "typodr/dense_index.hpp"
#include "typodr/errors.hpp"
#include "typodr/eval.hpp"
#include "typodr/experiment.hpp"
#include "typodr/io.hpp"
#include "typodr/sparse.hpp"
#include "typodr/stats.hpp"
#include "typodr/tokenizer.hpp"
#include "typodr/toy_corpus.hpp"
#include "typodr/training.hpp"
#include "typodr/typo_gen.hpp"

namespace {

using namespace typodr;

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

int cmd_typo_gen(const std::string& queries_path, const std::string& out_dir,
                 int replicas, std::uint64_t seed, int min_word_length,
                 const std::string& stopwords_path) {
  TypoConfig cfg;
  cfg.min_word_length = min_word_length;
  if (!stopwords_path.empty()) cfg.stopwords = load_stopwords(stopwords_path);
  auto queries = load_tsv_pairs(queries_path);
  auto reps = generate_replicas(queries, replicas, cfg, seed);
  std::filesystem::create_directories(out_dir);
  for (int k = 0; k < replicas; ++k) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "replica_%02d.tsv", k);
    save_query_pairs(reps[k], (std::filesystem::path(out_dir) / buf).string());
  }
  std::size_t kept = reps.empty() ? 0 : reps[0].size();
  std::cout << "queries " << queries.size() << "  kept " << kept
            << "  discarded " << queries.size() - kept << "  replicas "
            << replicas << '\n';
  return 0;
}

int cmd_tokenize_diff(const std::string& pairs_path, const std::string& vocab_path,
                      const std::string& out_path) {
  WordPieceVocab vocab = WordPieceVocab::load(vocab_path);
  auto pairs = load_query_pairs(pairs_path);
  std::map<int, std::int64_t> histogram;
  std::ofstream os;
  if (!out_path.empty()) os.open(out_path);
  for (const auto& p : pairs) {
    int d = tokenization_difference(p.clean_text, p.typo_text, vocab);
    ++histogram[d];
    if (os) os << p.query_id << '\t' << d << '\n';
  }
  for (const auto& [d, n] : histogram) std::cout << d << '\t' << n << '\n';
  return 0;
}

int cmd_bm25_index(const std::string& collection_path, const std::string& out_path,
                   bool remove_stopwords) {
  auto collection = load_tsv_pairs(collection_path);
  InvertedIndex index = InvertedIndex::build(collection, remove_stopwords);
  index.save(out_path);
  std::cout << "indexed " << collection.size() << " passages\n";
  return 0;
}

int cmd_bm25_search(const std::string& index_path, const std::string& queries_path,
                    const std::string& out_path, int k, const std::string& tag) {
  InvertedIndex index = InvertedIndex::load(index_path);
  auto queries = load_tsv_pairs(queries_path);
  RunFile run;
  run.tag = tag;
  for (const auto& [qid, text] : queries) run.rankings[qid] = index.search(text, k);
  run.save(out_path);
  return 0;
}

int cmd_train(const std::string& train_path, const std::string& vocab_path,
              const std::string& out_path, const std::string& front_end,
              const std::string& loss, TrainConfig tc, EncoderConfig enc,
              const std::string& trace_path) {
  tc.loss_mode = loss_mode_from_string(loss);
  enc.front_end = front_end_from_string(front_end);
  WordPieceVocab vocab = WordPieceVocab::load(vocab_path);
  enc.vocab_size = vocab.size();
  auto samples = load_training_set(train_path);
  EncoderModel<float> model = init_encoder<float>(enc, derive_seed(tc.seed, 0x696e6974, front_end));
  auto trace = train(samples, model, tc, TypoConfig{}, &vocab);
  save_checkpoint(model, out_path);
  if (!trace_path.empty()) {
    std::ofstream os(trace_path);
    for (const auto& pt : trace) os << pt.step << '\t' << fixed6(pt.loss) << '\n';
  }
  std::cout << "trained " << front_end << "/" << loss << " for "
            << tc.total_updates << " updates, " << model.parameter_count()
            << " parameters\n";
  return 0;
}

int cmd_index(const std::string& model_path, const std::string& collection_path,
              const std::string& vocab_path, const std::string& out_path) {
  auto model = load_checkpoint<float>(model_path);
  WordPieceVocab vocab;
  if (!vocab_path.empty()) vocab = WordPieceVocab::load(vocab_path);
  auto collection = load_tsv_pairs(collection_path);
  DenseIndex index =
      encode_collection(model, collection, vocab_path.empty() ? nullptr : &vocab,
                        file_fingerprint(model_path));
  save_index(index, out_path);
  std::cout << "encoded " << collection.size() << " passages at d_model "
            << index.d_model << '\n';
  return 0;
}

int cmd_search(const std::string& model_path, const std::string& index_path,
               const std::string& queries_path, const std::string& vocab_path,
               const std::string& out_path, int k, const std::string& tag) {
  auto model = load_checkpoint<float>(model_path);
  WordPieceVocab vocab;
  if (!vocab_path.empty()) vocab = WordPieceVocab::load(vocab_path);
  DenseIndex index = load_index(index_path);
  std::uint64_t fp = file_fingerprint(model_path);
  if (index.model_fingerprint != 0 && index.model_fingerprint != fp)
    throw ValidationError("index was built with a different checkpoint");
  auto queries = load_tsv_pairs(queries_path);
  RunFile run;
  run.tag = tag;
  for (const auto& [qid, text] : queries) {
    auto v = encode(text, model, vocab_path.empty() ? nullptr : &vocab);
    run.rankings[qid] = search(index, v, k);
  }
  run.save(out_path);
  return 0;
}

int cmd_eval(const std::string& run_path, const std::string& qrels_path,
             int threshold, bool per_query) {
  RunFile run = RunFile::load(run_path);
  Qrels qrels = Qrels::load(qrels_path);
  int skipped = 0;
  MetricReport report = per_query_metrics(run, qrels, threshold, &skipped);
  for (const auto& m : default_metrics())
    std::cout << m << '\t' << fixed6(report.mean(m)) << '\n';
  if (skipped > 0) std::cerr << "skipped " << skipped << " queries not in qrels\n";
  if (per_query) {
    for (std::size_t i = 0; i < report.qids.size(); ++i) {
      std::cout << report.qids[i];
      for (const auto& m : default_metrics())
        std::cout << '\t' << fixed6(report.per_query.at(m)[i]);
      std::cout << '\n';
    }
  }
  return 0;
}

// Clean run against one or more typo runs: prints Delta_MRR per replica and
// the mean across replicas.
int cmd_eval_pairs(const std::string& clean_path,
                   const std::vector<std::string>& typo_paths,
                   const std::string& qrels_path, int threshold, int cutoff) {
  Qrels qrels = Qrels::load(qrels_path);
  RunFile clean = RunFile::load(clean_path);
  std::map<std::string, double> clean_rr;
  for (const auto& [qid, ranking] : clean.rankings) {
    auto judged = qrels.all().find(qid);
    if (judged == qrels.all().end()) continue;
    clean_rr[qid] =
        detail::reciprocal_rank(ranking, judged->second, threshold, cutoff);
  }
  double sum = 0;
  for (const auto& path : typo_paths) {
    RunFile typo = RunFile::load(path);
    std::vector<double> c, t;
    for (const auto& [qid, ranking] : typo.rankings) {
      auto it = clean_rr.find(qid);
      if (it == clean_rr.end()) continue;
      c.push_back(it->second);
      t.push_back(detail::reciprocal_rank(ranking, qrels.all().at(qid), threshold,
                                          cutoff));
    }
    double d = mrr_drop_rate(c, t);
    sum += d;
    std::cout << path << '\t' << fixed6(d) << '\n';
  }
  std::cout << "mean\t" << fixed6(sum / typo_paths.size()) << '\n';
  return 0;
}

int cmd_sigtest(const std::string& run_a, const std::string& run_b,
                const std::string& qrels_path, const std::string& metric,
                int threshold, int corrections) {
  Qrels qrels = Qrels::load(qrels_path);
  MetricReport a = per_query_metrics(RunFile::load(run_a), qrels, threshold);
  MetricReport b = per_query_metrics(RunFile::load(run_b), qrels, threshold);
  if (a.qids != b.qids) throw ValidationError("runs cover different query sets");
  TTestResult t = paired_t_test(a.per_query.at(metric), b.per_query.at(metric));
  std::cout << "t\t" << fixed6(t.t) << "\np\t" << fixed6(t.p) << "\np_adj\t"
            << fixed6(bonferroni(t.p, corrections)) << '\n';
  return 0;
}

int cmd_toy_corpus(const std::string& out_dir, std::uint64_t seed, int n_queries,
                   int n_distractors) {
  ToyCorpus toy = make_toy_corpus(seed, n_queries, n_distractors);
  std::filesystem::create_directories(out_dir);
  std::filesystem::path dir(out_dir);
  save_tsv_pairs(toy.collection, (dir / "collection.tsv").string());
  save_tsv_pairs(toy.queries, (dir / "queries.tsv").string());
  toy.qrels.save((dir / "qrels.txt").string());
  std::ofstream os((dir / "vocab.txt").string());
  for (const auto& t : make_toy_vocab_tokens()) os << t << '\n';
  std::cout << toy.collection.size() << " passages, " << toy.queries.size()
            << " queries\n";
  return 0;
}

int cmd_experiment(const std::string& config_path, const std::string& out_dir) {
  ExperimentConfig cfg = config_path.empty() ? ExperimentConfig{}
                                             : parse_experiment_config(config_path);
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  ExperimentResults results = run_experiment(cfg);
  std::cout << "bm25 clean mrr@10\t" << fixed6(results.bm25_clean_mrr10) << '\n';
  for (const auto& [name, r] : results.models)
    std::cout << name << "\tclean " << fixed6(r.clean_mrr10) << "\ttypo "
              << fixed6(r.typo_mrr10) << "\tdelta_mrr " << fixed6(r.delta_mrr)
              << "\tcosine " << fixed6(r.mean_cosine) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"typo-robust dense retrieval laboratory"};
  app.require_subcommand(1);

  std::string queries, out_dir, stopwords, pairs, vocab, out_path, collection,
      index_path, model_path, train_path, qrels, run_a, run_b, clean_run,
      config_path, front_end = "charcnn", loss = "ce", metric = "rr@10",
      tag = "typodr";
  std::vector<std::string> typo_runs;
  std::uint64_t seed = 42;
  int replicas = 10, min_word_length = 3, k = 100, threshold = 1, cutoff = 10,
      corrections = 1, n_queries = 200, n_distractors = 300;
  bool remove_stopwords = false, per_query = false;
  typodr::TrainConfig tc;
  typodr::EncoderConfig enc = typodr::toy_encoder_config();

  auto* typo_gen = app.add_subcommand("typo-gen", "generate typo query replicas");
  typo_gen->add_option("--queries", queries)->required();
  typo_gen->add_option("--out-dir", out_dir)->required();
  typo_gen->add_option("--replicas", replicas);
  typo_gen->add_option("--seed", seed);
  typo_gen->add_option("--min-word-length", min_word_length);
  typo_gen->add_option("--stopwords", stopwords);

  auto* tok = app.add_subcommand("tokenize-diff", "tokenization differences for query pairs");
  tok->add_option("--pairs", pairs)->required();
  tok->add_option("--vocab", vocab)->required();
  tok->add_option("--out", out_path);

  auto* bidx = app.add_subcommand("bm25-index", "build a BM25 inverted index");
  bidx->add_option("--collection", collection)->required();
  bidx->add_option("--out", out_path)->required();
  bidx->add_flag("--remove-stopwords", remove_stopwords);

  auto* bsearch = app.add_subcommand("bm25-search", "rank passages with BM25");
  bsearch->add_option("--index", index_path)->required();
  bsearch->add_option("--queries", queries)->required();
  bsearch->add_option("--out", out_path)->required();
  bsearch->add_option("--k", k);
  bsearch->add_option("--tag", tag);

  auto* trn = app.add_subcommand("train", "train a dense retriever");
  trn->add_option("--train-set", train_path)->required();
  trn->add_option("--vocab", vocab)->required();
  trn->add_option("--out", out_path)->required();
  trn->add_option("--front-end", front_end)->check(CLI::IsMember({"lookup", "charcnn"}));
  trn->add_option("--loss", loss)->check(CLI::IsMember({"ce", "aug", "st"}));
  trn->add_option("--batch-size", tc.batch_size);
  trn->add_option("--hard-negatives", tc.hard_negatives);
  trn->add_option("--learning-rate", tc.learning_rate);
  trn->add_option("--total-updates", tc.total_updates);
  trn->add_option("--warmup-updates", tc.warmup_updates);
  trn->add_option("--weight-decay", tc.weight_decay);
  trn->add_option("--p-aug", tc.p_aug);
  trn->add_option("--seed", tc.seed);
  trn->add_option("--d-model", enc.d_model);
  trn->add_option("--n-layers", enc.n_layers);
  trn->add_option("--n-heads", enc.n_heads);
  trn->add_option("--d-ff", enc.d_ff);
  trn->add_option("--max-seq-len", enc.max_seq_len);
  std::string trace_path;
  trn->add_option("--trace", trace_path);

  auto* idx = app.add_subcommand("index", "encode a collection into a dense index");
  idx->add_option("--model", model_path)->required();
  idx->add_option("--collection", collection)->required();
  idx->add_option("--vocab", vocab);
  idx->add_option("--out", out_path)->required();

  auto* srch = app.add_subcommand("search", "exact top-k dense retrieval");
  srch->add_option("--model", model_path)->required();
  srch->add_option("--index", index_path)->required();
  srch->add_option("--queries", queries)->required();
  srch->add_option("--vocab", vocab);
  srch->add_option("--out", out_path)->required();
  srch->add_option("--k", k);
  srch->add_option("--tag", tag);

  auto* ev = app.add_subcommand("eval", "score a run file against qrels");
  ev->add_option("--run", run_a)->required();
  ev->add_option("--qrels", qrels)->required();
  ev->add_option("--threshold", threshold);
  ev->add_flag("--per-query", per_query);

  auto* evp = app.add_subcommand("eval-pairs", "MRR drop rate of typo runs vs a clean run");
  evp->add_option("--clean", clean_run)->required();
  evp->add_option("--typo", typo_runs)->required()->expected(-1);
  evp->add_option("--qrels", qrels)->required();
  evp->add_option("--threshold", threshold);
  evp->add_option("--cutoff", cutoff);

  auto* sig = app.add_subcommand("sigtest", "paired two-tailed t-test between two runs");
  sig->add_option("--run-a", run_a)->required();
  sig->add_option("--run-b", run_b)->required();
  sig->add_option("--qrels", qrels)->required();
  sig->add_option("--metric", metric);
  sig->add_option("--threshold", threshold);
  sig->add_option("--corrections", corrections);

  auto* toy = app.add_subcommand("toy-corpus", "write the synthetic corpus and vocab");
  toy->add_option("--out-dir", out_dir)->required();
  toy->add_option("--seed", seed);
  toy->add_option("--queries", n_queries);
  toy->add_option("--distractors", n_distractors);

  auto* exp = app.add_subcommand("experiment", "run the end-to-end pipeline");
  exp->add_option("--config", config_path);
  exp->add_option("--out-dir", out_dir);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*typo_gen)
      return cmd_typo_gen(queries, out_dir, replicas, seed, min_word_length, stopwords);
    if (*tok) return cmd_tokenize_diff(pairs, vocab, out_path);
    if (*bidx) return cmd_bm25_index(collection, out_path, remove_stopwords);
    if (*bsearch) return cmd_bm25_search(index_path, queries, out_path, k, tag);
    if (*trn)
      return cmd_train(train_path, vocab, out_path, front_end, loss, tc, enc, trace_path);
    if (*idx) return cmd_index(model_path, collection, vocab, out_path);
    if (*srch) return cmd_search(model_path, index_path, queries, vocab, out_path, k, tag);
    if (*ev) return cmd_eval(run_a, qrels, threshold, per_query);
    if (*evp) return cmd_eval_pairs(clean_run, typo_runs, qrels, threshold, cutoff);
    if (*sig) return cmd_sigtest(run_a, run_b, qrels, metric, threshold, corrections);
    if (*toy) return cmd_toy_corpus(out_dir, seed, n_queries, n_distractors);
    if (*exp) return cmd_experiment(config_path, out_dir);
  } catch (const typodr::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
