// Copyright 2026 The typodr Authors
// SPDX-License-Identifier: Apache-2.0
//
// The gradient check builds the full loss (contrastive cross entropy plus the
// KL consistency term) in double precision and compares every parameter
// gradient against central finite differences.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>

#include <catch2/catch_amalgamated.hpp>

#include "typodr/encoder.hpp"
#include "typodr/toy_corpus.hpp"
#include "typodr/training.hpp"

namespace typodr {
namespace {

EncoderConfig small_config(FrontEnd fe, int vocab_size) {
  EncoderConfig cfg;
  cfg.front_end = fe;
  cfg.d_model = 8;
  cfg.n_layers = 2;
  cfg.n_heads = 2;
  cfg.d_ff = 16;
  cfg.max_seq_len = 8;
  cfg.vocab_size = vocab_size;
  cfg.d_char = 4;
  cfg.max_word_chars = 8;
  cfg.filters = {{1, 2}, {2, 3}};
  cfg.highway_layers = 1;
  return cfg;
}

// Loss used for the check: CE(clean scores) + KL(typo || sg(clean)) over one
// query and two passages. Exercises every encoder path including the typo
// branch and the stop gradient.
//
// Finite differences cannot see the stop gradient: perturbing a parameter
// also moves the teacher distribution, a path whose gradient is defined to
// be zero. The numeric side therefore evaluates a surrogate with the teacher
// logits frozen at the unperturbed parameters, which has exactly the
// gradients the real loss defines.
template <typename T>
Mat<T> teacher_logits(EncoderModel<T>& model, const WordPieceVocab* vocab) {
  Tape<T> tape;
  TapeModel<T> tm(tape, model);
  auto q = encode_on_tape(tm, make_encoder_input("garden window", model.config, vocab));
  auto p0 = encode_on_tape(tm, make_encoder_input("garden window frame", model.config, vocab));
  auto p1 = encode_on_tape(tm, make_encoder_input("village bridge", model.config, vocab));
  return tape.val(score_logits(tm, q, {p0, p1}));
}

template <typename T>
T loss_value(EncoderModel<T>& model, const WordPieceVocab* vocab,
             const Mat<T>& frozen_teacher) {
  Tape<T> tape;
  TapeModel<T> tm(tape, model);
  auto q = encode_on_tape(tm, make_encoder_input("garden window", model.config, vocab));
  auto qt = encode_on_tape(tm, make_encoder_input("gadren window", model.config, vocab));
  auto p0 = encode_on_tape(tm, make_encoder_input("garden window frame", model.config, vocab));
  auto p1 = encode_on_tape(tm, make_encoder_input("village bridge", model.config, vocab));
  auto clean = score_logits(tm, q, {p0, p1});
  auto typo = score_logits(tm, qt, {p0, p1});
  auto teacher = tape.leaf(frozen_teacher);
  auto loss = tape.add(tape.cross_entropy(clean, 0),
                       tape.kl_softmax(typo, teacher, /*stop_b=*/true));
  return tape.val(loss)(0, 0);
}

template <typename T>
void compute_gradients(EncoderModel<T>& model, const WordPieceVocab* vocab) {
  Tape<T> tape;
  TapeModel<T> tm(tape, model);
  auto q = encode_on_tape(tm, make_encoder_input("garden window", model.config, vocab));
  auto qt = encode_on_tape(tm, make_encoder_input("gadren window", model.config, vocab));
  auto p0 = encode_on_tape(tm, make_encoder_input("garden window frame", model.config, vocab));
  auto p1 = encode_on_tape(tm, make_encoder_input("village bridge", model.config, vocab));
  auto clean = score_logits(tm, q, {p0, p1});
  auto typo = score_logits(tm, qt, {p0, p1});
  auto loss = st_loss_on_tape(tm, clean, typo, 0);
  model.zero_grad();
  tape.backward(loss);
  tm.accumulate_gradients();
}

double max_relative_gradient_error(FrontEnd fe) {
  WordPieceVocab vocab = make_toy_vocab();
  const WordPieceVocab* vp = fe == FrontEnd::kLookup ? &vocab : nullptr;
  EncoderModel<double> model =
      init_encoder<double>(small_config(fe, vocab.size()), 99);
  compute_gradients(model, vp);
  const Mat<double> frozen = teacher_logits(model, vp);
  // the surrogate agrees with the real loss at the unperturbed parameters
  {
    Tape<double> tape;
    TapeModel<double> tm(tape, model);
    auto q = encode_on_tape(tm, make_encoder_input("garden window", model.config, vp));
    auto qt = encode_on_tape(tm, make_encoder_input("gadren window", model.config, vp));
    auto p0 = encode_on_tape(tm, make_encoder_input("garden window frame", model.config, vp));
    auto p1 = encode_on_tape(tm, make_encoder_input("village bridge", model.config, vp));
    auto real = st_loss_on_tape(tm, score_logits(tm, q, {p0, p1}),
                                score_logits(tm, qt, {p0, p1}), 0);
    REQUIRE(loss_value(model, vp, frozen) ==
            Catch::Approx(tape.val(real)(0, 0)).margin(1e-12));
  }

  const double eps = 1e-5;
  double worst = 0;
  for (auto& tensor : model.tensors) {
    for (std::size_t j = 0; j < tensor.value.size(); ++j) {
      double saved = tensor.value.v[j];
      tensor.value.v[j] = saved + eps;
      double up = loss_value(model, vp, frozen);
      tensor.value.v[j] = saved - eps;
      double down = loss_value(model, vp, frozen);
      tensor.value.v[j] = saved;
      double fd = (up - down) / (2 * eps);
      double an = tensor.grad.v[j];
      // floor the denominator at the central-difference noise scale
      // (~machine epsilon * |loss| / eps), so near-zero gradients are
      // compared absolutely against it instead of amplifying FD noise
      double denom = std::max({std::abs(fd), std::abs(an), 1e-5});
      worst = std::max(worst, std::abs(fd - an) / denom);
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("lookup encoder gradients match finite differences") {
  REQUIRE(max_relative_gradient_error(FrontEnd::kLookup) < 1e-4);
}

TEST_CASE("charcnn encoder gradients match finite differences") {
  REQUIRE(max_relative_gradient_error(FrontEnd::kCharCnn) < 1e-4);
}

TEST_CASE("stop gradient keeps the teacher branch gradient at exactly zero") {
  // With CE removed, the loss is only KL(typo || sg(clean)). A query that
  // appears solely in the clean branch must end up with zero gradient in
  // every parameter it alone touches; here we verify through the positional
  // embedding rows of a length the typo branch never uses.
  WordPieceVocab vocab = make_toy_vocab();
  EncoderConfig cfg = small_config(FrontEnd::kLookup, vocab.size());
  EncoderModel<double> model = init_encoder<double>(cfg, 5);
  Tape<double> tape;
  TapeModel<double> tm(tape, model);
  // clean query has 3 words, typo query only 1: row 4 of pos_emb (SEP of the
  // clean query) is touched by the clean branch only.
  auto q = encode_on_tape(tm, make_encoder_input("garden window frame", cfg, &vocab));
  auto qt = encode_on_tape(tm, make_encoder_input("garden", cfg, &vocab));
  auto p = encode_on_tape(tm, make_encoder_input("bridge", cfg, &vocab));
  auto clean = score_logits(tm, q, {p});
  auto typo = score_logits(tm, qt, {p});
  auto kl = tape.kl_softmax(typo, clean, /*stop_b=*/true);
  model.zero_grad();
  tape.backward(kl);
  tm.accumulate_gradients();
  const Mat<double>& pos_grad = model.tensors[model.index_of("pos_emb")].grad;
  for (int c = 0; c < cfg.d_model; ++c) REQUIRE(pos_grad(4, c) == 0.0);
}

TEST_CASE("encoding is deterministic") {
  WordPieceVocab vocab = make_toy_vocab();
  EncoderConfig cfg = small_config(FrontEnd::kCharCnn, vocab.size());
  EncoderModel<float> model = init_encoder<float>(cfg, 3);
  auto a = encode(std::string("zebra lantern"), model);
  auto b = encode(std::string("zebra lantern"), model);
  REQUIRE(a == b);
}

TEST_CASE("long inputs truncate but keep CLS and SEP") {
  WordPieceVocab vocab = make_toy_vocab();
  EncoderConfig cfg = small_config(FrontEnd::kLookup, vocab.size());
  std::string text;
  for (int i = 0; i < 30; ++i) text += "garden ";
  auto input = make_encoder_input(text, cfg, &vocab);
  REQUIRE(static_cast<int>(input.token_ids.size()) == cfg.max_seq_len);
  REQUIRE(input.token_ids.front() == vocab.cls_id());
  REQUIRE(input.token_ids.back() == vocab.sep_id());

  cfg.front_end = FrontEnd::kCharCnn;
  auto ci = make_encoder_input(text, cfg, nullptr);
  REQUIRE(static_cast<int>(ci.word_codes.size()) == cfg.max_seq_len);
  REQUIRE(ci.word_codes.front()[1] == kCharCls);
  REQUIRE(ci.word_codes.back()[1] == kCharSep);
}

TEST_CASE("checkpoint round trip is bitwise identical") {
  namespace fs = std::filesystem;
  WordPieceVocab vocab = make_toy_vocab();
  for (FrontEnd fe : {FrontEnd::kLookup, FrontEnd::kCharCnn}) {
    EncoderConfig cfg = small_config(fe, vocab.size());
    EncoderModel<float> model = init_encoder<float>(cfg, 17);
    std::string path =
        (fs::temp_directory_path() / "typodr_ckpt_test.bin").string();
    save_checkpoint(model, path);
    EncoderModel<float> loaded = load_checkpoint<float>(path);
    REQUIRE(loaded.tensors.size() == model.tensors.size());
    for (std::size_t i = 0; i < model.tensors.size(); ++i) {
      REQUIRE(loaded.tensors[i].name == model.tensors[i].name);
      REQUIRE(loaded.tensors[i].no_decay == model.tensors[i].no_decay);
      REQUIRE(loaded.tensors[i].value.v == model.tensors[i].value.v);
    }
    REQUIRE(loaded.config.d_model == cfg.d_model);
    REQUIRE(loaded.config.front_end == fe);
    // saving the loaded model reproduces the file byte for byte
    std::string path2 =
        (fs::temp_directory_path() / "typodr_ckpt_test2.bin").string();
    save_checkpoint(loaded, path2);
    std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
    std::string b1((std::istreambuf_iterator<char>(f1)), {});
    std::string b2((std::istreambuf_iterator<char>(f2)), {});
    REQUIRE(b1 == b2);
    fs::remove(path);
    fs::remove(path2);
  }
}

TEST_CASE("biases and layer norms are flagged no_decay") {
  WordPieceVocab vocab = make_toy_vocab();
  EncoderModel<float> model =
      init_encoder<float>(small_config(FrontEnd::kCharCnn, vocab.size()), 1);
  for (const auto& t : model.tensors) {
    bool should = t.name.ends_with("_b") || t.name.ends_with("_g") ||
                  t.name.ends_with("b1") || t.name.ends_with("b2");
    REQUIRE(t.no_decay == should);
  }
}

}  // namespace typodr
