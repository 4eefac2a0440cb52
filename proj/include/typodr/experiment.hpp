// Copyright 2026 The typodr Authors
// SPDX-License-Identifier: Apache-2.0
//
// End-to-end experiment harness: typo replica generation, BM25 hard-negative
// mining, training per (front end, loss mode), dense indexing, clean/typo
// runs, metric reports, the binned analysis and significance tests. Stages
// are resumable: a stage whose output files all exist is skipped, and every
// stage is deterministic in (config, seed), so regenerated artifacts are
// byte-identical.

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "typodr/dense_index.hpp"
#include "typodr/eval.hpp"
#include "typodr/io.hpp"
#include "typodr/sparse.hpp"
#include "typodr/stats.hpp"
#include "typodr/tokenizer.hpp"
#include "typodr/toy_corpus.hpp"
#include "typodr/training.hpp"
#include "typodr/typo_gen.hpp"

namespace typodr {

namespace fs = std::filesystem;

struct ModelSpec {
  FrontEnd front_end = FrontEnd::kCharCnn;
  LossMode mode = LossMode::kCe;

  std::string name() const {
    return std::string(to_string(front_end)) + "_" + to_string(mode);
  }
};

// Toy-scale encoder defaults; overridable via the [encoder] config section.
inline EncoderConfig toy_encoder_config() {
  EncoderConfig c;
  c.d_model = 32;
  c.n_layers = 2;
  c.n_heads = 4;
  c.d_ff = 64;
  c.max_seq_len = 16;
  c.d_char = 8;
  c.max_word_chars = 12;
  c.filters = {{1, 4}, {2, 4}, {3, 8}};
  c.highway_layers = 1;
  return c;
}

// Reference training settings for the toy experiment: large enough batches
// for informative in-batch negatives, and a warmup so the consistency loss
// only kicks in once the clean-query teacher is meaningful.
inline TrainConfig toy_train_config() {
  TrainConfig t;
  t.batch_size = 16;
  t.total_updates = 1600;
  t.warmup_updates = 200;
  return t;
}

struct ExperimentConfig {
  std::string out_dir;
  // empty paths mean "synthesize the toy corpus"
  std::string collection_path;
  std::string queries_path;
  std::string qrels_path;
  std::string vocab_path;
  std::string stopwords_path;

  std::uint64_t seed = 42;
  int replicas = 10;
  int bm25_depth = 200;
  int run_depth = 100;
  int binarize_threshold = 1;
  int rr_cutoff = 10;

  TypoConfig typo;
  EncoderConfig encoder = toy_encoder_config();  // vocab_size set from vocab
  TrainConfig train = toy_train_config();
  std::vector<ModelSpec> models = {{FrontEnd::kLookup, LossMode::kCe},
                                   {FrontEnd::kLookup, LossMode::kSt},
                                   {FrontEnd::kCharCnn, LossMode::kCe},
                                   {FrontEnd::kCharCnn, LossMode::kSt}};

  void validate() const {
    if (out_dir.empty()) throw ValidationError("out_dir is required");
    for (const std::string& p :
         {collection_path, queries_path, qrels_path, vocab_path, stopwords_path})
      if (!p.empty() && !fs::exists(p))
        throw ValidationError("configured path does not exist: " + p);
    bool any_data = !collection_path.empty() || !queries_path.empty() ||
                    !qrels_path.empty();
    bool all_data = !collection_path.empty() && !queries_path.empty() &&
                    !qrels_path.empty();
    if (any_data && !all_data)
      throw ValidationError(
          "collection, queries and qrels must be supplied together");
    typo.validate();
    train.validate();
  }
};

// Parses a flat "key = value" config with optional [section] headers. Keys in
// a section are namespaced as "section.key". Blank lines and lines starting
// with '#' are ignored. Unknown keys raise ValidationError.
inline ExperimentConfig parse_experiment_config(std::istream& in) {
  ExperimentConfig cfg;
  std::map<std::string, std::string> kv;
  std::string line, section;
  auto trim = [](std::string s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    std::size_t b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError("malformed config line: " + line);
    std::string key = trim(line.substr(0, eq));
    if (!section.empty()) key = section + "." + key;
    kv[key] = trim(line.substr(eq + 1));
  }

  auto take = [&](const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) return std::string();
    std::string v = it->second;
    kv.erase(it);
    return v;
  };
  auto set_str = [&](const std::string& key, std::string& field) {
    std::string v = take(key);
    if (!v.empty()) field = v;
  };
  auto set_i = [&](const std::string& key, auto& field) {
    std::string v = take(key);
    if (!v.empty()) field = static_cast<std::decay_t<decltype(field)>>(std::stoll(v));
  };
  auto set_d = [&](const std::string& key, double& field) {
    std::string v = take(key);
    if (!v.empty()) field = std::stod(v);
  };

  set_str("out_dir", cfg.out_dir);
  set_str("collection", cfg.collection_path);
  set_str("queries", cfg.queries_path);
  set_str("qrels", cfg.qrels_path);
  set_str("vocab", cfg.vocab_path);
  set_str("stopwords", cfg.stopwords_path);
  set_i("seed", cfg.seed);
  set_i("replicas", cfg.replicas);
  set_i("bm25_depth", cfg.bm25_depth);
  set_i("run_depth", cfg.run_depth);
  set_i("binarize_threshold", cfg.binarize_threshold);

  set_i("typo.min_word_length", cfg.typo.min_word_length);

  set_i("encoder.d_model", cfg.encoder.d_model);
  set_i("encoder.n_layers", cfg.encoder.n_layers);
  set_i("encoder.n_heads", cfg.encoder.n_heads);
  set_i("encoder.d_ff", cfg.encoder.d_ff);
  set_i("encoder.max_seq_len", cfg.encoder.max_seq_len);
  set_i("encoder.d_char", cfg.encoder.d_char);
  set_i("encoder.max_word_chars", cfg.encoder.max_word_chars);
  set_i("encoder.highway_layers", cfg.encoder.highway_layers);

  set_i("train.batch_size", cfg.train.batch_size);
  set_i("train.hard_negatives", cfg.train.hard_negatives);
  set_d("train.learning_rate", cfg.train.learning_rate);
  set_i("train.total_updates", cfg.train.total_updates);
  set_i("train.warmup_updates", cfg.train.warmup_updates);
  set_d("train.weight_decay", cfg.train.weight_decay);
  set_d("train.p_aug", cfg.train.p_aug);
  set_i("train.trace_every", cfg.train.trace_every);

  std::string models = take("models");
  if (!models.empty()) {
    cfg.models.clear();
    std::stringstream ss(models);
    std::string item;
    while (std::getline(ss, item, ',')) {
      std::size_t colon = item.find(':');
      if (colon == std::string::npos)
        throw ValidationError("model spec must be front_end:mode, got " + item);
      ModelSpec spec;
      spec.front_end = front_end_from_string(trim(item.substr(0, colon)));
      spec.mode = loss_mode_from_string(trim(item.substr(colon + 1)));
      cfg.models.push_back(spec);
    }
  }

  if (!kv.empty()) throw ValidationError("unknown config key: " + kv.begin()->first);
  return cfg;
}

inline ExperimentConfig parse_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config: " + path);
  return parse_experiment_config(in);
}

struct ModelResult {
  std::string name;
  double clean_mrr10 = 0;     // mean RR@10 on clean queries
  double typo_mrr10 = 0;      // replica-averaged mean RR@10 on typo queries
  double delta_mrr = 0;       // mean over replicas of Delta_MRR
  double mean_cosine = 0;     // mean clean/typo encoding cosine
  std::vector<BinRow> bins;   // pooled over replicas, bins 1..5
  double spearman_dmrr = 0;   // rank corr of (bin, delta_mrr)
  double spearman_cosine = 0; // rank corr of (bin, cosine mean)
};

struct ExperimentResults {
  std::map<std::string, ModelResult> models;
  double bm25_clean_mrr10 = 0;
};

namespace detail {

inline bool all_exist(const std::vector<fs::path>& paths) {
  for (const auto& p : paths)
    if (!fs::exists(p)) return false;
  return true;
}

inline std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

template <typename T>
RunFile dense_run(const DenseIndex& index, EncoderModel<T>& model,
                  const std::vector<std::pair<std::string, std::string>>& queries,
                  const WordPieceVocab* vocab, int k, const std::string& tag) {
  RunFile run;
  run.tag = tag;
  for (const auto& [qid, text] : queries) {
    std::vector<T> qvec = encode(text, model, vocab);
    std::vector<float> qf(qvec.begin(), qvec.end());
    run.rankings[qid] = search(index, qf, k);
  }
  return run;
}

}  // namespace detail

class Experiment {
 public:
  explicit Experiment(ExperimentConfig config) : cfg_(std::move(config)) {
    cfg_.validate();
  }

  // Runs every stage (skipping completed ones) and returns the summary.
  ExperimentResults run() {
    fs::create_directories(out());
    for (const char* d : {"data", "pairs", "models", "indexes", "runs", "reports"})
      fs::create_directories(out() / d);

    stage_data();
    stage_pairs();
    stage_bm25();
    stage_train();
    stage_index();
    stage_runs();
    ExperimentResults results = stage_reports();
    write_manifest();
    return results;
  }

  fs::path out() const { return fs::path(cfg_.out_dir); }
  const ExperimentConfig& config() const { return cfg_; }

 private:
  // ---- stage 0: data ------------------------------------------------------
  void stage_data() {
    auto coll = out() / "data" / "collection.tsv";
    auto qry = out() / "data" / "queries.tsv";
    auto qrels = out() / "data" / "qrels.txt";
    auto vocab = out() / "data" / "vocab.txt";
    if (!detail::all_exist({coll, qry, qrels, vocab})) {
      if (cfg_.collection_path.empty()) {
        ToyCorpus toy = make_toy_corpus(cfg_.seed);
        save_tsv_pairs(toy.collection, coll.string());
        save_tsv_pairs(toy.queries, qry.string());
        toy.qrels.save(qrels.string());
        std::ofstream os(vocab.string());
        for (const auto& t : make_toy_vocab_tokens()) os << t << '\n';
      } else {
        fs::copy_file(cfg_.collection_path, coll, fs::copy_options::overwrite_existing);
        fs::copy_file(cfg_.queries_path, qry, fs::copy_options::overwrite_existing);
        fs::copy_file(cfg_.qrels_path, qrels, fs::copy_options::overwrite_existing);
        fs::copy_file(cfg_.vocab_path, vocab, fs::copy_options::overwrite_existing);
      }
    }
    collection_ = load_tsv_pairs(coll.string());
    queries_ = load_tsv_pairs(qry.string());
    qrels_ = Qrels::load(qrels.string());
    vocab_ = WordPieceVocab::load(vocab.string());
    if (!cfg_.stopwords_path.empty())
      cfg_.typo.stopwords = load_stopwords(cfg_.stopwords_path);
  }

  // ---- stage 1: typo replicas ---------------------------------------------
  void stage_pairs() {
    std::vector<fs::path> outputs;
    for (int k = 0; k < cfg_.replicas; ++k) outputs.push_back(pair_path(k));
    if (!detail::all_exist(outputs)) {
      auto replicas = generate_replicas(queries_, cfg_.replicas, cfg_.typo, cfg_.seed);
      for (int k = 0; k < cfg_.replicas; ++k)
        save_query_pairs(replicas[k], pair_path(k).string());
    }
    replicas_.clear();
    for (int k = 0; k < cfg_.replicas; ++k)
      replicas_.push_back(load_query_pairs(pair_path(k).string()));
  }

  // ---- stage 2: BM25 index, baseline run, hard negatives --------------------
  void stage_bm25() {
    auto index_path = out() / "bm25.tgix";
    auto run_path = out() / "runs" / "bm25_clean.trec";
    auto train_path = out() / "train.jsonl";
    if (!detail::all_exist({index_path, run_path, train_path})) {
      InvertedIndex index = InvertedIndex::build(collection_);
      index.save(index_path.string());
      RunFile run;
      run.tag = "bm25";
      std::map<std::string, std::vector<std::string>> top;
      for (const auto& [qid, text] : queries_) {
        auto ranked = index.search(text, cfg_.bm25_depth);
        run.rankings[qid] = ranked;
        for (const auto& [pid, s] : ranked) top[qid].push_back(pid);
      }
      run.save(run_path.string());

      std::map<std::string, std::vector<std::string>> positives;
      for (const auto& [qid, docs] : qrels_.all())
        for (const auto& [pid, g] : docs)
          if (g >= cfg_.binarize_threshold) positives[qid].push_back(pid);
      std::map<std::string, std::string> texts(collection_.begin(),
                                               collection_.end());
      auto samples = build_training_set(queries_, positives, top, texts,
                                        cfg_.train.hard_negatives, cfg_.seed);
      save_training_set(samples, train_path.string());
    }
    train_set_ = load_training_set(train_path.string());
  }

  // ---- stage 3: training -----------------------------------------------------
  void stage_train() {
    for (const auto& spec : cfg_.models) {
      auto model_path = out() / "models" / (spec.name() + ".bin");
      auto trace_path = out() / "models" / (spec.name() + "_trace.tsv");
      if (detail::all_exist({model_path, trace_path})) continue;
      EncoderConfig enc = cfg_.encoder;
      enc.front_end = spec.front_end;
      enc.vocab_size = vocab_.size();
      TrainConfig tc = cfg_.train;
      tc.loss_mode = spec.mode;
      // Seeds depend on the front end only, so loss modes that share a front
      // end start from the same initialization and see the same batch order.
      tc.seed = derive_seed(cfg_.seed, 1, to_string(spec.front_end));
      EncoderModel<float> model = init_encoder<float>(
          enc, derive_seed(cfg_.seed, 0x696e6974, to_string(spec.front_end)));
      auto trace = train(train_set_, model, tc, cfg_.typo, &vocab_);
      save_checkpoint(model, model_path.string());
      std::ofstream os(trace_path.string());
      for (const auto& pt : trace)
        os << pt.step << '\t' << detail::fixed6(pt.loss) << '\n';
    }
  }

  // ---- stage 4: dense indexes --------------------------------------------------
  void stage_index() {
    for (const auto& spec : cfg_.models) {
      auto model_path = out() / "models" / (spec.name() + ".bin");
      auto index_path = out() / "indexes" / (spec.name() + ".tgdx");
      if (detail::all_exist({index_path})) continue;
      auto model = load_checkpoint<float>(model_path.string());
      DenseIndex index = encode_collection(model, collection_, &vocab_,
                                           file_fingerprint(model_path.string()));
      save_index(index, index_path.string());
    }
  }

  // ---- stage 5: clean and typo runs ---------------------------------------------
  void stage_runs() {
    for (const auto& spec : cfg_.models) {
      std::vector<fs::path> outputs = {run_path(spec.name(), -1)};
      for (int k = 0; k < cfg_.replicas; ++k)
        outputs.push_back(run_path(spec.name(), k));
      if (detail::all_exist(outputs)) continue;
      auto model = load_checkpoint<float>((out() / "models" / (spec.name() + ".bin")).string());
      DenseIndex index = load_index((out() / "indexes" / (spec.name() + ".tgdx")).string());
      detail::dense_run(index, model, queries_, &vocab_, cfg_.run_depth, spec.name())
          .save(run_path(spec.name(), -1).string());
      for (int k = 0; k < cfg_.replicas; ++k) {
        std::vector<std::pair<std::string, std::string>> typo_queries;
        for (const auto& p : replicas_[k])
          typo_queries.emplace_back(p.query_id, p.typo_text);
        detail::dense_run(index, model, typo_queries, &vocab_, cfg_.run_depth,
                          spec.name() + "_typo")
            .save(run_path(spec.name(), k).string());
      }
    }
  }

  // ---- stage 6: reports -------------------------------------------------------
  ExperimentResults stage_reports() {
    ExperimentResults results;
    {
      RunFile bm25 = RunFile::load((out() / "runs" / "bm25_clean.trec").string());
      results.bm25_clean_mrr10 =
          per_query_metrics(bm25, qrels_, cfg_.binarize_threshold).mean("rr@10");
    }
    std::ofstream summary((out() / "reports" / "summary.tsv").string());
    summary << "model\tclean_mrr@10\ttypo_mrr@10\tdelta_mrr\tmean_cosine\t"
               "spearman_dmrr\tspearman_cosine\n";
    for (const auto& spec : cfg_.models) {
      ModelResult r = evaluate_model(spec);
      summary << r.name << '\t' << detail::fixed6(r.clean_mrr10) << '\t'
              << detail::fixed6(r.typo_mrr10) << '\t' << detail::fixed6(r.delta_mrr)
              << '\t' << detail::fixed6(r.mean_cosine) << '\t'
              << detail::fixed6(r.spearman_dmrr) << '\t'
              << detail::fixed6(r.spearman_cosine) << '\n';
      std::ofstream bins((out() / "reports" / ("bins_" + r.name + ".tsv")).string());
      bins << "bin\tcount\tdelta_mrr\tcosine_mean\tcosine_sd\n";
      for (const auto& row : r.bins)
        bins << row.difference << '\t' << row.count << '\t'
             << detail::fixed6(row.delta_mrr) << '\t'
             << detail::fixed6(row.cosine_mean) << '\t'
             << detail::fixed6(row.cosine_sd) << '\n';
      results.models[r.name] = std::move(r);
    }
    write_sigtests(results);
    return results;
  }

  ModelResult evaluate_model(const ModelSpec& spec) {
    ModelResult result;
    result.name = spec.name();
    auto model = load_checkpoint<float>((out() / "models" / (spec.name() + ".bin")).string());

    RunFile clean_run = RunFile::load(run_path(spec.name(), -1).string());
    MetricReport clean = per_query_metrics(clean_run, qrels_, cfg_.binarize_threshold);
    result.clean_mrr10 = clean.mean("rr@10");
    std::map<std::string, double> clean_rr_by_qid;
    for (std::size_t i = 0; i < clean.qids.size(); ++i)
      clean_rr_by_qid[clean.qids[i]] = clean.per_query.at("rr@10")[i];

    std::vector<MetricReport> typo_reports;
    std::vector<PairObservation> observations;
    double delta_sum = 0;
    double cosine_sum = 0;
    std::size_t cosine_count = 0;
    for (int k = 0; k < cfg_.replicas; ++k) {
      RunFile typo_run = RunFile::load(run_path(spec.name(), k).string());
      MetricReport rep = per_query_metrics(typo_run, qrels_, cfg_.binarize_threshold);
      std::vector<double> clean_rr, typo_rr;
      std::map<std::string, double> typo_rr_by_qid;
      for (std::size_t i = 0; i < rep.qids.size(); ++i)
        typo_rr_by_qid[rep.qids[i]] = rep.per_query.at("rr@10")[i];
      for (const auto& pair : replicas_[k]) {
        auto c = clean_rr_by_qid.find(pair.query_id);
        auto t = typo_rr_by_qid.find(pair.query_id);
        if (c == clean_rr_by_qid.end() || t == typo_rr_by_qid.end()) continue;
        clean_rr.push_back(c->second);
        typo_rr.push_back(t->second);
        PairObservation obs;
        obs.difference =
            tokenization_difference(pair.clean_text, pair.typo_text, vocab_);
        obs.clean_rr = c->second;
        obs.typo_rr = t->second;
        obs.cosine = encoding_similarity(encode(pair.clean_text, model, &vocab_),
                                         encode(pair.typo_text, model, &vocab_));
        cosine_sum += obs.cosine;
        ++cosine_count;
        observations.push_back(obs);
      }
      delta_sum += mrr_drop_rate(clean_rr, typo_rr);
      typo_reports.push_back(std::move(rep));
    }
    result.delta_mrr = delta_sum / cfg_.replicas;
    result.mean_cosine = cosine_sum / static_cast<double>(cosine_count);
    result.typo_mrr10 = replica_average(typo_reports).mean("rr@10");
    result.bins = bin_by_token_difference(observations);
    if (result.bins.size() >= 2) {
      std::vector<double> b, d, c;
      for (const auto& row : result.bins) {
        b.push_back(row.difference);
        d.push_back(row.delta_mrr);
        c.push_back(row.cosine_mean);
      }
      result.spearman_dmrr = spearman(b, d);
      result.spearman_cosine = spearman(b, c);
    }
    return result;
  }

  // Paired tests between every model pair on replica-averaged per-query RR@10
  // over typo runs, Bonferroni-adjusted for the number of comparisons.
  void write_sigtests(const ExperimentResults&) {
    std::map<std::string, std::vector<double>> samples;
    for (const auto& spec : cfg_.models) {
      std::vector<MetricReport> reps;
      for (int k = 0; k < cfg_.replicas; ++k)
        reps.push_back(per_query_metrics(RunFile::load(run_path(spec.name(), k).string()),
                                         qrels_, cfg_.binarize_threshold));
      samples[spec.name()] = replica_average(reps).per_query.at("rr@10");
    }
    int m = static_cast<int>(cfg_.models.size() * (cfg_.models.size() - 1) / 2);
    std::ofstream os((out() / "reports" / "sigtest.tsv").string());
    os << "a\tb\tt\tp\tp_bonferroni\n";
    for (std::size_t i = 0; i < cfg_.models.size(); ++i)
      for (std::size_t j = i + 1; j < cfg_.models.size(); ++j) {
        const auto& a = samples.at(cfg_.models[i].name());
        const auto& b = samples.at(cfg_.models[j].name());
        TTestResult t = paired_t_test(a, b);
        os << cfg_.models[i].name() << '\t' << cfg_.models[j].name() << '\t'
           << detail::fixed6(t.t) << '\t' << detail::fixed6(t.p) << '\t'
           << detail::fixed6(bonferroni(t.p, m)) << '\n';
      }
  }

  void write_manifest() {
    nlohmann::json m;
    m["format"] = 1;
    m["seed"] = cfg_.seed;
    m["replicas"] = cfg_.replicas;
    m["config_hash"] = config_hash();
    nlohmann::json inputs;
    for (const char* f : {"data/collection.tsv", "data/queries.tsv",
                          "data/qrels.txt", "data/vocab.txt"})
      inputs[f] = file_fingerprint((out() / f).string());
    m["inputs"] = inputs;
    nlohmann::json models;
    for (const auto& spec : cfg_.models)
      models[spec.name()] =
          file_fingerprint((out() / "models" / (spec.name() + ".bin")).string());
    m["models"] = models;
    std::ofstream os((out() / "manifest.json").string());
    os << m.dump(2) << '\n';
  }

  std::uint64_t config_hash() const {
    std::ostringstream ss;
    ss << cfg_.seed << '|' << cfg_.replicas << '|' << cfg_.bm25_depth << '|'
       << cfg_.run_depth << '|' << cfg_.encoder.d_model << '|'
       << cfg_.encoder.n_layers << '|' << cfg_.train.total_updates << '|'
       << cfg_.train.batch_size << '|' << cfg_.train.hard_negatives << '|'
       << cfg_.train.learning_rate;
    for (const auto& s : cfg_.models) ss << '|' << s.name();
    return fnv1a64(ss.str());
  }

  fs::path pair_path(int k) const {
    char buf[32];
    std::snprintf(buf, sizeof buf, "replica_%02d.tsv", k);
    return out() / "pairs" / buf;
  }
  fs::path run_path(const std::string& model, int replica) const {
    if (replica < 0) return out() / "runs" / (model + "_clean.trec");
    char buf[32];
    std::snprintf(buf, sizeof buf, "_typo_%02d.trec", replica);
    return out() / "runs" / (model + buf);
  }

  ExperimentConfig cfg_;
  std::vector<std::pair<std::string, std::string>> collection_;
  std::vector<std::pair<std::string, std::string>> queries_;
  Qrels qrels_;
  WordPieceVocab vocab_;
  std::vector<std::vector<QueryPair>> replicas_;
  std::vector<TrainingSample> train_set_;
};

inline ExperimentResults run_experiment(const ExperimentConfig& config) {
  Experiment ex(config);
  return ex.run();
}

}  // namespace typodr
