// Copyright 2026 The typodr Authors
// SPDX-License-Identifier: Apache-2.0
//
// Training objectives and loop: contrastive cross-entropy over the candidate
// set, softmax score normalization, the KL self-teaching loss with
// stop-gradient on the clean-query distribution, the augmentation baseline,
// hard-negative / in-batch candidate assembly, and AdamW with a linear
// learning-rate schedule.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "typodr/encoder.hpp"
#include "typodr/errors.hpp"
#include "typodr/rng.hpp"
#include "typodr/typo_gen.hpp"

namespace typodr {

struct Passage {
  std::string pid;
  std::string text;
};

struct TrainingSample {
  std::string qid;
  std::string query;
  Passage positive;
  std::vector<Passage> negatives;
};

enum class LossMode : int { kCe = 0, kAug = 1, kSt = 2 };

inline const char* to_string(LossMode m) {
  switch (m) {
    case LossMode::kCe: return "ce";
    case LossMode::kAug: return "aug";
    case LossMode::kSt: return "st";
  }
  return "?";
}
inline LossMode loss_mode_from_string(std::string_view s) {
  if (s == "ce") return LossMode::kCe;
  if (s == "aug") return LossMode::kAug;
  if (s == "st") return LossMode::kSt;
  throw ValidationError("unknown loss mode: " + std::string(s));
}

struct TrainConfig {
  LossMode loss_mode = LossMode::kCe;
  int batch_size = 8;
  int hard_negatives = 4;
  double learning_rate = 1e-3;
  int total_updates = 2000;
  int warmup_updates = 0;
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double p_aug = 0.5;
  bool ce_on_typo = false;  // ablation flag for the ST objective
  std::uint64_t seed = 42;
  int trace_every = 10;

  void validate() const {
    if (p_aug < 0 || p_aug > 1) throw ValidationError("p_aug must be in [0,1]");
    if (learning_rate <= 0) throw ValidationError("learning rate must be positive");
    if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
    if (hard_negatives < 0) throw ValidationError("hard_negatives must be >= 0");
  }
};

// ---- candidate assembly -------------------------------------------------

struct CandidateSet {
  std::vector<const Passage*> passages;  // own positive first
  int positive_index = 0;
};

// P_q = [own positive, own H negatives, every passage of the other samples].
// m = 1 + H + (B-1)(H+1).
inline std::vector<CandidateSet> assemble_candidates(
    const std::vector<TrainingSample>& batch) {
  std::vector<CandidateSet> out(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    CandidateSet& cs = out[i];
    cs.positive_index = 0;
    cs.passages.push_back(&batch[i].positive);
    for (const auto& n : batch[i].negatives) cs.passages.push_back(&n);
    for (std::size_t j = 0; j < batch.size(); ++j) {
      if (j == i) continue;
      cs.passages.push_back(&batch[j].positive);
      for (const auto& n : batch[j].negatives) cs.passages.push_back(&n);
    }
  }
  return out;
}

// ---- training-set construction --------------------------------------------

// H negatives sampled uniformly without replacement from the BM25 top-K minus
// judged-positive ids; one positive sampled from the qrels positives. Queries
// without positives or with too few candidates are skipped.
inline std::vector<TrainingSample> build_training_set(
    const std::vector<std::pair<std::string, std::string>>& queries,
    const std::map<std::string, std::vector<std::string>>& positives,
    const std::map<std::string, std::vector<std::string>>& bm25_top,
    const std::map<std::string, std::string>& collection, int hard_negatives,
    std::uint64_t seed) {
  std::vector<TrainingSample> out;
  for (const auto& [qid, text] : queries) {
    auto pos_it = positives.find(qid);
    auto run_it = bm25_top.find(qid);
    if (pos_it == positives.end() || pos_it->second.empty()) continue;
    Pcg64 rng(derive_seed(seed, 0x6e656773 /*"negs"*/, qid));
    TrainingSample s;
    s.qid = qid;
    s.query = text;
    const std::string& pos_pid =
        pos_it->second[rng.bounded(pos_it->second.size())];
    auto pos_text = collection.find(pos_pid);
    if (pos_text == collection.end()) continue;
    s.positive = {pos_pid, pos_text->second};

    std::vector<std::string> pool;
    if (run_it != bm25_top.end()) {
      for (const auto& pid : run_it->second) {
        bool judged_positive =
            std::find(pos_it->second.begin(), pos_it->second.end(), pid) !=
            pos_it->second.end();
        if (!judged_positive && collection.count(pid)) pool.push_back(pid);
      }
    }
    if (static_cast<int>(pool.size()) < hard_negatives) continue;  // skip, log upstream
    for (int h = 0; h < hard_negatives; ++h) {
      std::size_t pick = rng.bounded(pool.size());
      s.negatives.push_back({pool[pick], collection.at(pool[pick])});
      pool.erase(pool.begin() + pick);
    }
    out.push_back(std::move(s));
  }
  return out;
}

// ---- numeric loss primitives (non-autodiff references) -------------------

inline std::vector<double> softmax_normalize(const std::vector<double>& scores) {
  if (scores.empty()) throw ValidationError("empty score vector");
  double mx = *std::max_element(scores.begin(), scores.end());
  std::vector<double> out(scores.size());
  double sum = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out[i] = std::exp(scores[i] - mx);
    sum += out[i];
  }
  for (auto& x : out) x /= sum;
  return out;
}

inline double ce_loss(const std::vector<double>& scores, int positive_index) {
  double mx = *std::max_element(scores.begin(), scores.end());
  double sum = 0;
  for (double s : scores) sum += std::exp(s - mx);
  return -(scores[positive_index] - mx - std::log(sum));
}

inline double kl_loss(const std::vector<double>& dist_typo,
                      const std::vector<double>& dist_clean) {
  if (dist_typo.size() != dist_clean.size())
    throw DimensionMismatch("distribution lengths differ");
  double kl = 0;
  for (std::size_t i = 0; i < dist_typo.size(); ++i) {
    if (dist_clean[i] <= 0) throw ValidationError("clean distribution has zeros");
    if (dist_typo[i] > 0) kl += dist_typo[i] * std::log(dist_typo[i] / dist_clean[i]);
  }
  return kl;
}

// ---- tape-level losses ----------------------------------------------------

template <typename T>
struct StepLossResult {
  typename Tape<T>::Ref loss;
};

// Scores one query embedding against every candidate; returns 1 x m logits.
template <typename T>
typename Tape<T>::Ref score_logits(TapeModel<T>& tm, typename Tape<T>::Ref query,
                                   const std::vector<typename Tape<T>::Ref>& passages) {
  std::vector<typename Tape<T>::Ref> scores;
  scores.reserve(passages.size());
  for (auto p : passages) scores.push_back(tm.tape().dot(query, p));
  return tm.tape().concat_cols(scores);
}

// L_ST = L_CE(clean) + L_KL(typo || sg(clean)). Gradients reach the clean
// branch only through CE, and the typo branch only through KL.
template <typename T>
typename Tape<T>::Ref st_loss_on_tape(TapeModel<T>& tm,
                                      typename Tape<T>::Ref clean_logits,
                                      typename Tape<T>::Ref typo_logits,
                                      int positive_index, bool ce_on_typo = false) {
  auto& t = tm.tape();
  auto ce = t.cross_entropy(clean_logits, positive_index);
  auto kl = t.kl_softmax(typo_logits, clean_logits, /*stop_b=*/true);
  auto loss = t.add(ce, kl);
  if (ce_on_typo) loss = t.add(loss, t.cross_entropy(typo_logits, positive_index));
  return loss;
}

// ---- augmentation ---------------------------------------------------------

// Replaces each query by a typo variant with probability p_aug. Queries with
// no eligible word are left unchanged.
inline void aug_transform(std::vector<TrainingSample>& batch, double p_aug,
                          const TypoConfig& typo_config, Pcg64& rng) {
  for (auto& sample : batch) {
    if (rng.uniform() >= p_aug) continue;
    try {
      Pcg64 sub(rng.next());
      QueryPair pair = generate_typo_pair(sample.qid, sample.query, typo_config, sub);
      sample.query = pair.typo_text;
    } catch (const NoEligibleWord&) {
    }
  }
}

// ---- optimizer -------------------------------------------------------------

template <typename T>
class AdamW {
 public:
  AdamW(EncoderModel<T>& model, const TrainConfig& cfg) : model_(model), cfg_(cfg) {
    m_.reserve(model.tensors.size());
    v_.reserve(model.tensors.size());
    for (const auto& t : model.tensors) {
      m_.emplace_back(t.value.rows, t.value.cols);
      v_.emplace_back(t.value.rows, t.value.cols);
    }
  }

  // lr(step) = lr * step/warmup during warmup, then lr * (1 - step/total).
  double schedule(int step) const {
    if (cfg_.warmup_updates > 0 && step < cfg_.warmup_updates)
      return cfg_.learning_rate * (step + 1) / cfg_.warmup_updates;
    double progress = static_cast<double>(step) / cfg_.total_updates;
    return cfg_.learning_rate * std::max(0.0, 1.0 - progress);
  }

  void step(int step_index) {
    ++t_;
    double lr = schedule(step_index);
    double bc1 = 1.0 - std::pow(cfg_.beta1, t_);
    double bc2 = 1.0 - std::pow(cfg_.beta2, t_);
    for (std::size_t i = 0; i < model_.tensors.size(); ++i) {
      auto& tensor = model_.tensors[i];
      double wd = tensor.no_decay ? 0.0 : cfg_.weight_decay;
      for (std::size_t j = 0; j < tensor.value.size(); ++j) {
        double g = static_cast<double>(tensor.grad.v[j]);
        double m = cfg_.beta1 * m_[i].v[j] + (1.0 - cfg_.beta1) * g;
        double v = cfg_.beta2 * v_[i].v[j] + (1.0 - cfg_.beta2) * g * g;
        m_[i].v[j] = m;
        v_[i].v[j] = v;
        double update = (m / bc1) / (std::sqrt(v / bc2) + cfg_.adam_eps);
        double x = static_cast<double>(tensor.value.v[j]);
        x -= lr * (update + wd * x);
        tensor.value.v[j] = static_cast<T>(x);
      }
    }
  }

 private:
  EncoderModel<T>& model_;
  TrainConfig cfg_;
  std::vector<Mat<double>> m_;
  std::vector<Mat<double>> v_;
  int t_ = 0;
};

// ---- training loop ----------------------------------------------------------

struct LossTracePoint {
  int step;
  double loss;
};

// Deterministic batch order per seed; typo queries for ST are regenerated per
// epoch from derive_seed(seed, epoch, qid).
template <typename T>
std::vector<LossTracePoint> train(std::vector<TrainingSample> train_set,
                                  EncoderModel<T>& model, const TrainConfig& cfg,
                                  const TypoConfig& typo_config,
                                  const WordPieceVocab* vocab = nullptr) {
  cfg.validate();
  if (train_set.empty()) throw ValidationError("empty training set");
  AdamW<T> opt(model, cfg);
  std::vector<LossTracePoint> trace;
  Pcg64 order_rng(derive_seed(cfg.seed, 0x6f726465 /*"orde"*/, "batch-order"));

  std::vector<std::size_t> order(train_set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::size_t cursor = order.size();  // force shuffle at step 0
  int epoch = -1;

  for (int step = 0; step < cfg.total_updates; ++step) {
    // next batch, reshuffling at epoch boundaries
    std::vector<TrainingSample> batch;
    for (int b = 0; b < cfg.batch_size; ++b) {
      if (cursor >= order.size()) {
        ++epoch;
        for (std::size_t i = order.size(); i > 1; --i)
          std::swap(order[i - 1], order[order_rng.bounded(i)]);
        cursor = 0;
      }
      batch.push_back(train_set[order[cursor++]]);
    }

    if (cfg.loss_mode == LossMode::kAug) {
      Pcg64 aug_rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(step), "aug"));
      aug_transform(batch, cfg.p_aug, typo_config, aug_rng);
    }

    auto candidates = assemble_candidates(batch);

    Tape<T> tape;
    TapeModel<T> tm(tape, model);

    // encode each distinct passage once per step
    std::map<const Passage*, typename Tape<T>::Ref> passage_refs;
    auto passage_ref = [&](const Passage* p) {
      auto it = passage_refs.find(p);
      if (it != passage_refs.end()) return it->second;
      auto r = encode_on_tape(tm, make_encoder_input(p->text, model.config, vocab));
      passage_refs.emplace(p, r);
      return r;
    };

    typename Tape<T>::Ref total = -1;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      std::vector<typename Tape<T>::Ref> prefs;
      prefs.reserve(candidates[i].passages.size());
      for (const Passage* p : candidates[i].passages) prefs.push_back(passage_ref(p));

      auto clean_q = encode_on_tape(
          tm, make_encoder_input(batch[i].query, model.config, vocab));
      auto clean_logits = score_logits(tm, clean_q, prefs);

      typename Tape<T>::Ref loss;
      if (cfg.loss_mode == LossMode::kSt) {
        std::string typo_text = batch[i].query;
        try {
          Pcg64 typo_rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(epoch),
                                     batch[i].qid));
          typo_text = generate_typo_pair(batch[i].qid, batch[i].query, typo_config,
                                         typo_rng)
                          .typo_text;
        } catch (const NoEligibleWord&) {
        }
        auto typo_q = encode_on_tape(
            tm, make_encoder_input(typo_text, model.config, vocab));
        auto typo_logits = score_logits(tm, typo_q, prefs);
        loss = st_loss_on_tape(tm, clean_logits, typo_logits,
                               candidates[i].positive_index, cfg.ce_on_typo);
      } else {
        loss = tape.cross_entropy(clean_logits, candidates[i].positive_index);
      }
      total = (total < 0) ? loss : tape.add(total, loss);
    }
    total = tape.scale(total, T(1) / static_cast<T>(batch.size()));

    double loss_value = static_cast<double>(tape.val(total)(0, 0));
    if (!std::isfinite(loss_value))
      throw NonFiniteLoss("non-finite loss at step " + std::to_string(step));

    model.zero_grad();
    tape.backward(total);
    tm.accumulate_gradients();
    opt.step(step);

    if (step % cfg.trace_every == 0 || step + 1 == cfg.total_updates)
      trace.push_back({step, loss_value});
  }
  return trace;
}

}  // namespace typodr
