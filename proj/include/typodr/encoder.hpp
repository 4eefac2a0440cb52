// Copyright 2026 The typodr Authors
// SPDX-License-Identifier: Apache-2.0
//
// Small trainable bi-encoder with two interchangeable embedding front-ends:
// an id-lookup table over WordPiece ids, and a character-CNN that builds one
// context-independent vector per word from its character codes. Both feed the
// same transformer stack; the text encoding is the output at the CLS
// position. Queries and passages share one parameter set when tied.

#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "typodr/autodiff.hpp"
#include "typodr/errors.hpp"
#include "typodr/rng.hpp"
#include "typodr/tokenizer.hpp"

namespace typodr {

enum class FrontEnd : int { kLookup = 0, kCharCnn = 1 };

inline const char* to_string(FrontEnd fe) {
  return fe == FrontEnd::kLookup ? "lookup" : "charcnn";
}
inline FrontEnd front_end_from_string(std::string_view s) {
  if (s == "lookup") return FrontEnd::kLookup;
  if (s == "charcnn") return FrontEnd::kCharCnn;
  throw ValidationError("unknown front end: " + std::string(s));
}

struct FilterSpec {
  int width;
  int count;
};

struct EncoderConfig {
  FrontEnd front_end = FrontEnd::kCharCnn;
  int d_model = 64;
  int n_layers = 2;
  int n_heads = 4;
  int d_ff = 128;
  int max_seq_len = 32;
  int vocab_size = 0;  // lookup front end only
  int d_char = 16;
  int max_word_chars = kDefaultMaxWordChars;
  std::vector<FilterSpec> filters = {{1, 8}, {2, 8}, {3, 16}};
  int highway_layers = 1;
  bool tied_encoders = true;

  int total_filters() const {
    int n = 0;
    for (const auto& f : filters) n += f.count;
    return n;
  }

  void validate() const {
    if (d_model % n_heads != 0)
      throw ValidationError("d_model must be divisible by n_heads");
    if (front_end == FrontEnd::kLookup && vocab_size <= 0)
      throw ValidationError("lookup front end requires vocab_size");
    for (const auto& f : filters)
      if (f.width >= max_word_chars)
        throw ValidationError("filter width must be below max_word_chars");
  }
};

template <typename T>
struct NamedTensor {
  std::string name;
  Mat<T> value;
  Mat<T> grad;
  bool no_decay = false;  // layer norms and biases
};

template <typename T>
class EncoderModel {
 public:
  EncoderConfig config;
  std::vector<NamedTensor<T>> tensors;

  int index_of(std::string_view name) const {
    auto it = by_name_.find(std::string(name));
    if (it == by_name_.end())
      throw ValidationError("no such tensor: " + std::string(name));
    return it->second;
  }
  Mat<T>& tensor(std::string_view name) { return tensors[index_of(name)].value; }
  const Mat<T>& tensor(std::string_view name) const {
    return tensors[index_of(name)].value;
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& t : tensors) n += t.value.size();
    return n;
  }

  void zero_grad() {
    for (auto& t : tensors)
      std::fill(t.grad.v.begin(), t.grad.v.end(), T(0));
  }

  int add(const std::string& name, int rows, int cols, bool no_decay = false) {
    by_name_[name] = static_cast<int>(tensors.size());
    NamedTensor<T> t;
    t.name = name;
    t.value = Mat<T>(rows, cols);
    t.grad = Mat<T>(rows, cols);
    t.no_decay = no_decay;
    tensors.push_back(std::move(t));
    return static_cast<int>(tensors.size()) - 1;
  }

 private:
  std::map<std::string, int> by_name_;
};

namespace detail {

// Truncated normal, std 0.02, resampled beyond 2 sigma.
template <typename T>
void init_trunc_normal(Mat<T>& m, Pcg64& rng, double std_dev = 0.02) {
  for (auto& x : m.v) {
    double v;
    do {
      v = rng.normal() * std_dev;
    } while (std::abs(v) > 2.0 * std_dev);
    x = static_cast<T>(v);
  }
}

}  // namespace detail

template <typename T>
EncoderModel<T> init_encoder(const EncoderConfig& config, std::uint64_t seed) {
  config.validate();
  EncoderModel<T> model;
  model.config = config;
  const int d = config.d_model;

  if (config.front_end == FrontEnd::kLookup) {
    model.add("tok_emb", config.vocab_size, d);
  } else {
    model.add("char_emb", kCharVocabSize, config.d_char);
    for (std::size_t k = 0; k < config.filters.size(); ++k) {
      const auto& f = config.filters[k];
      model.add("conv" + std::to_string(k) + "_w", f.count,
                f.width * config.d_char);
      model.add("conv" + std::to_string(k) + "_b", 1, f.count, true);
    }
    const int nf = config.total_filters();
    for (int l = 0; l < config.highway_layers; ++l) {
      std::string p = "hw" + std::to_string(l);
      model.add(p + "_gate_w", nf, nf);
      model.add(p + "_gate_b", 1, nf, true);
      model.add(p + "_lin_w", nf, nf);
      model.add(p + "_lin_b", 1, nf, true);
    }
    model.add("proj_w", d, config.total_filters());
    model.add("proj_b", 1, d, true);
  }
  model.add("pos_emb", config.max_seq_len, d);
  for (int l = 0; l < config.n_layers; ++l) {
    std::string p = "layer" + std::to_string(l) + "_";
    for (const char* w : {"wq", "wk", "wv", "wo"}) {
      model.add(p + w, d, d);
      model.add(p + w + "_b", 1, d, true);
    }
    model.add(p + "ln1_g", 1, d, true);
    model.add(p + "ln1_b", 1, d, true);
    model.add(p + "ffn_w1", config.d_ff, d);
    model.add(p + "ffn_b1", 1, config.d_ff, true);
    model.add(p + "ffn_w2", d, config.d_ff);
    model.add(p + "ffn_b2", 1, d, true);
    model.add(p + "ln2_g", 1, d, true);
    model.add(p + "ln2_b", 1, d, true);
  }

  Pcg64 rng(seed);
  for (auto& t : model.tensors) {
    if (t.name.ends_with("_g")) {
      std::fill(t.value.v.begin(), t.value.v.end(), T(1));
    } else if (t.no_decay) {
      // biases and layer-norm offsets start at zero
    } else if (t.name.starts_with("conv") || t.name.find("_lin_w") != std::string::npos) {
      // fan-in scaled for relu layers, so char-level word vectors start at the
      // same magnitude as the embedding tables instead of vanishing
      detail::init_trunc_normal(t.value, rng, std::sqrt(2.0 / t.value.cols));
    } else if (t.name == "proj_w") {
      detail::init_trunc_normal(t.value, rng, std::sqrt(1.0 / t.value.cols));
    } else {
      detail::init_trunc_normal(t.value, rng);
    }
  }
  return model;
}

// The encoder input after framing: either WordPiece ids (lookup) or per-word
// character code rows (charcnn), always starting with CLS and ending with SEP.
struct EncoderInput {
  std::vector<int> token_ids;              // lookup
  std::vector<std::vector<int>> word_codes;  // charcnn
  int length() const {
    return token_ids.empty() ? static_cast<int>(word_codes.size())
                             : static_cast<int>(token_ids.size());
  }
};

inline EncoderInput make_encoder_input(std::string_view text,
                                       const EncoderConfig& config,
                                       const WordPieceVocab* vocab) {
  EncoderInput input;
  const auto words = basic_tokenize(text);
  if (config.front_end == FrontEnd::kLookup) {
    if (vocab == nullptr) throw ValidationError("lookup front end needs a vocab");
    TokenSequence seq = wordpiece_tokenize(words, *vocab);
    input.token_ids.push_back(vocab->cls_id());
    for (int id : seq.ids) input.token_ids.push_back(id);
    input.token_ids.push_back(vocab->sep_id());
    if (static_cast<int>(input.token_ids.size()) > config.max_seq_len) {
      input.token_ids.resize(config.max_seq_len - 1);
      input.token_ids.push_back(vocab->sep_id());
    }
  } else {
    const int w = config.max_word_chars;
    input.word_codes.push_back(encode_special_word(kCharCls, w));
    for (const auto& word : words)
      input.word_codes.push_back(encode_word_chars(word, w));
    input.word_codes.push_back(encode_special_word(kCharSep, w));
    if (static_cast<int>(input.word_codes.size()) > config.max_seq_len) {
      input.word_codes.resize(config.max_seq_len - 1);
      input.word_codes.push_back(encode_special_word(kCharSep, w));
    }
  }
  return input;
}

// Registry of model tensors on a tape, so one tape can hold several forward
// passes against the same parameters and gradients accumulate per tensor.
template <typename T>
class TapeModel {
 public:
  TapeModel(Tape<T>& tape, EncoderModel<T>& model)
      : tape_(tape), model_(model), refs_(model.tensors.size(), -1) {}

  typename Tape<T>::Ref ref(std::string_view name) {
    int i = model_.index_of(name);
    if (refs_[i] < 0) refs_[i] = tape_.leaf(model_.tensors[i].value);
    return refs_[i];
  }

  // Adds tape gradients back into the model's gradient buffers.
  void accumulate_gradients() {
    for (std::size_t i = 0; i < refs_.size(); ++i) {
      if (refs_[i] < 0) continue;
      const Mat<T>& g = tape_.grad(refs_[i]);
      Mat<T>& dst = model_.tensors[i].grad;
      for (std::size_t j = 0; j < dst.size(); ++j) dst.v[j] += g.v[j];
    }
  }

  Tape<T>& tape() { return tape_; }
  EncoderModel<T>& model() { return model_; }

 private:
  Tape<T>& tape_;
  EncoderModel<T>& model_;
  std::vector<typename Tape<T>::Ref> refs_;
};

namespace detail {

// Per-word character CNN: conv banks + max pool + highway + projection.
// Returns a 1 x d_model row. Context independent by construction.
template <typename T>
typename Tape<T>::Ref charcnn_word_vector(TapeModel<T>& tm,
                                          const std::vector<int>& codes) {
  auto& t = tm.tape();
  const EncoderConfig& cfg = tm.model().config;
  auto chars = t.gather_rows(tm.ref("char_emb"), codes);
  std::vector<typename Tape<T>::Ref> pooled;
  for (std::size_t k = 0; k < cfg.filters.size(); ++k) {
    std::string p = "conv" + std::to_string(k);
    auto conv = t.conv1d(chars, tm.ref(p + "_w"), tm.ref(p + "_b"),
                         cfg.filters[k].width);
    pooled.push_back(t.max_pool_time(t.relu(conv)));
  }
  auto x = t.concat_cols(pooled);
  for (int l = 0; l < cfg.highway_layers; ++l) {
    std::string p = "hw" + std::to_string(l);
    auto gate = t.sigmoid(t.linear(x, tm.ref(p + "_gate_w"), tm.ref(p + "_gate_b")));
    auto lin = t.relu(t.linear(x, tm.ref(p + "_lin_w"), tm.ref(p + "_lin_b")));
    x = t.add(x, t.hadamard(gate, t.sub(lin, x)));
  }
  return t.linear(x, tm.ref("proj_w"), tm.ref("proj_b"));
}

}  // namespace detail

// Front-end rows plus learned position embeddings: (seq_len x d_model).
template <typename T>
typename Tape<T>::Ref embed_front_end(TapeModel<T>& tm, const EncoderInput& input) {
  auto& t = tm.tape();
  const EncoderConfig& cfg = tm.model().config;
  typename Tape<T>::Ref rows;
  if (cfg.front_end == FrontEnd::kLookup) {
    rows = t.gather_rows(tm.ref("tok_emb"), input.token_ids);
  } else {
    std::vector<typename Tape<T>::Ref> word_rows;
    word_rows.reserve(input.word_codes.size());
    for (const auto& codes : input.word_codes)
      word_rows.push_back(detail::charcnn_word_vector(tm, codes));
    rows = t.concat_rows(word_rows);
  }
  auto pos = t.slice_rows(tm.ref("pos_emb"), 0, input.length());
  return t.add(rows, pos);
}

// Full forward pass; returns the 1 x d_model output at the CLS position.
template <typename T>
typename Tape<T>::Ref encode_on_tape(TapeModel<T>& tm, const EncoderInput& input) {
  auto& t = tm.tape();
  const EncoderConfig& cfg = tm.model().config;
  const int d = cfg.d_model;
  const int heads = cfg.n_heads;
  const int dk = d / heads;
  const T inv_sqrt_dk = T(1) / static_cast<T>(std::sqrt(static_cast<double>(dk)));

  auto x = embed_front_end(tm, input);
  for (int l = 0; l < cfg.n_layers; ++l) {
    std::string p = "layer" + std::to_string(l) + "_";
    auto q = t.linear(x, tm.ref(p + "wq"), tm.ref(p + "wq_b"));
    auto k = t.linear(x, tm.ref(p + "wk"), tm.ref(p + "wk_b"));
    auto v = t.linear(x, tm.ref(p + "wv"), tm.ref(p + "wv_b"));
    std::vector<typename Tape<T>::Ref> head_outs;
    for (int h = 0; h < heads; ++h) {
      auto qh = slice_cols(t, q, h * dk, dk);
      auto kh = slice_cols(t, k, h * dk, dk);
      auto vh = slice_cols(t, v, h * dk, dk);
      auto scores = t.scale(t.matmul(qh, kh, false, true), inv_sqrt_dk);
      auto attn = t.softmax_rows(scores);
      head_outs.push_back(t.matmul(attn, vh));
    }
    auto concat = t.concat_cols(head_outs);
    auto attn_out = t.linear(concat, tm.ref(p + "wo"), tm.ref(p + "wo_b"));
    x = t.layer_norm(t.add(x, attn_out), tm.ref(p + "ln1_g"), tm.ref(p + "ln1_b"));
    auto ff = t.linear(t.gelu(t.linear(x, tm.ref(p + "ffn_w1"), tm.ref(p + "ffn_b1"))),
                       tm.ref(p + "ffn_w2"), tm.ref(p + "ffn_b2"));
    x = t.layer_norm(t.add(x, ff), tm.ref(p + "ln2_g"), tm.ref(p + "ln2_b"));
  }
  return t.slice_rows(x, 0, 1);
}

// Column slice helper built from existing ops (transpose-free).
template <typename T>
typename Tape<T>::Ref slice_cols(Tape<T>& t, typename Tape<T>::Ref a, int start,
                                 int n) {
  // selection matrix (cols x n); matmul keeps gradients exact
  const Mat<T>& A = t.val(a);
  Mat<T> sel(A.cols, n);
  for (int j = 0; j < n; ++j) sel(start + j, j) = T(1);
  auto s = t.leaf(std::move(sel));
  return t.matmul(a, s);
}

// Inference-mode encode: one throwaway tape, returns the embedding values.
template <typename T>
std::vector<T> encode(const std::string& text, EncoderModel<T>& model,
                      const WordPieceVocab* vocab = nullptr) {
  Tape<T> tape;
  TapeModel<T> tm(tape, model);
  EncoderInput input = make_encoder_input(text, model.config, vocab);
  auto out = encode_on_tape(tm, input);
  return tape.val(out).v;
}

template <typename T>
T score(const std::vector<T>& q, const std::vector<T>& p) {
  if (q.size() != p.size())
    throw DimensionMismatch("embedding dimensions differ");
  T s = T(0);
  for (std::size_t i = 0; i < q.size(); ++i) s += q[i] * p[i];
  return s;
}

// ---- checkpoint persistence ("TGDR") ----------------------------------

namespace detail {

inline void write_u32(std::ostream& os, std::uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), 4);
}
inline void write_u64(std::ostream& os, std::uint64_t v) {
  os.write(reinterpret_cast<const char*>(&v), 8);
}
inline std::uint32_t read_u32(std::istream& is) {
  std::uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), 4);
  return v;
}
inline std::uint64_t read_u64(std::istream& is) {
  std::uint64_t v = 0;
  is.read(reinterpret_cast<char*>(&v), 8);
  return v;
}
inline void write_string(std::ostream& os, const std::string& s) {
  write_u32(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}
inline std::string read_string(std::istream& is) {
  std::uint32_t n = read_u32(is);
  std::string s(n, '\0');
  is.read(s.data(), n);
  return s;
}

}  // namespace detail

inline constexpr std::uint32_t kCheckpointVersion = 1;

template <typename T>
void save_checkpoint(const EncoderModel<T>& model, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write checkpoint: " + path);
  os.write("TGDR", 4);
  detail::write_u32(os, kCheckpointVersion);
  const EncoderConfig& c = model.config;
  detail::write_u32(os, static_cast<std::uint32_t>(c.front_end));
  for (int v : {c.d_model, c.n_layers, c.n_heads, c.d_ff, c.max_seq_len,
                c.vocab_size, c.d_char, c.max_word_chars, c.highway_layers})
    detail::write_u32(os, static_cast<std::uint32_t>(v));
  detail::write_u32(os, c.tied_encoders ? 1u : 0u);
  detail::write_u32(os, static_cast<std::uint32_t>(c.filters.size()));
  for (const auto& f : c.filters) {
    detail::write_u32(os, static_cast<std::uint32_t>(f.width));
    detail::write_u32(os, static_cast<std::uint32_t>(f.count));
  }
  detail::write_u32(os, static_cast<std::uint32_t>(model.tensors.size()));
  for (const auto& t : model.tensors) {
    detail::write_string(os, t.name);
    detail::write_u32(os, t.no_decay ? 1u : 0u);
    detail::write_u32(os, 2);
    detail::write_u64(os, static_cast<std::uint64_t>(t.value.rows));
    detail::write_u64(os, static_cast<std::uint64_t>(t.value.cols));
    for (T x : t.value.v) {
      float f = static_cast<float>(x);
      os.write(reinterpret_cast<const char*>(&f), 4);
    }
  }
  if (!os) throw IoError("checkpoint write failed: " + path);
}

template <typename T>
EncoderModel<T> load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint: " + path);
  char magic[4];
  is.read(magic, 4);
  if (std::memcmp(magic, "TGDR", 4) != 0)
    throw IoError("bad checkpoint magic: " + path);
  if (detail::read_u32(is) != kCheckpointVersion)
    throw IoError("unsupported checkpoint version: " + path);
  EncoderConfig c;
  c.front_end = static_cast<FrontEnd>(detail::read_u32(is));
  c.d_model = static_cast<int>(detail::read_u32(is));
  c.n_layers = static_cast<int>(detail::read_u32(is));
  c.n_heads = static_cast<int>(detail::read_u32(is));
  c.d_ff = static_cast<int>(detail::read_u32(is));
  c.max_seq_len = static_cast<int>(detail::read_u32(is));
  c.vocab_size = static_cast<int>(detail::read_u32(is));
  c.d_char = static_cast<int>(detail::read_u32(is));
  c.max_word_chars = static_cast<int>(detail::read_u32(is));
  c.highway_layers = static_cast<int>(detail::read_u32(is));
  c.tied_encoders = detail::read_u32(is) != 0;
  c.filters.resize(detail::read_u32(is));
  for (auto& f : c.filters) {
    f.width = static_cast<int>(detail::read_u32(is));
    f.count = static_cast<int>(detail::read_u32(is));
  }
  EncoderModel<T> model;
  model.config = c;
  std::uint32_t n_tensors = detail::read_u32(is);
  for (std::uint32_t i = 0; i < n_tensors; ++i) {
    std::string name = detail::read_string(is);
    bool no_decay = detail::read_u32(is) != 0;
    std::uint32_t rank = detail::read_u32(is);
    if (rank != 2) throw IoError("unexpected tensor rank in " + path);
    int rows = static_cast<int>(detail::read_u64(is));
    int cols = static_cast<int>(detail::read_u64(is));
    int idx = model.add(name, rows, cols, no_decay);
    for (auto& x : model.tensors[idx].value.v) {
      float f = 0;
      is.read(reinterpret_cast<char*>(&f), 4);
      x = static_cast<T>(f);
    }
  }
  if (!is) throw IoError("truncated checkpoint: " + path);
  return model;
}

}  // namespace typodr
