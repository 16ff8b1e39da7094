#pragma once

#include <random>
#include <string>
#include <vector>

#include "chartparse/autodiff.hpp"
#include "chartparse/vocab.hpp"

namespace chartparse {

struct EncoderDims {
  int word_dim = 100;
  int tag_dim = 50;
  int char_dim = 32;
  int char_hidden = 50;
  int lstm_dim = 250;
  int mlp_dim = 250;
};

struct LstmParams {
  ad::Parameter* weight = nullptr;  // [4H x (input + H)], gate order i, f, o, g
  ad::Parameter* bias = nullptr;    // [4H]
  int hidden = 0;
};

struct LstmState {
  ad::Expr h;
  ad::Expr c;
};

void declare_lstm(ad::ParamStore& store, const std::string& prefix, int input, int hidden, std::mt19937_64& rng);
LstmParams bind_lstm(ad::ParamStore& store, const std::string& prefix);
LstmState lstm_zero_state(ad::Graph& g, int hidden);
LstmState lstm_step(ad::Graph& g, const LstmParams& lstm, ad::Expr x, const LstmState& prev);

/// Forward and backward states at the fenceposts 0..n.
struct SentenceEncoding {
  int n = 0;
  std::vector<ad::Expr> fwd;
  std::vector<ad::Expr> bwd;
};

/// s_ij = [fwd_j - fwd_i ; bwd_i - bwd_j]
ad::Expr span_vector(const SentenceEncoding& enc, int i, int j);

/// Token ids of one sentence, START/STOP excluded.
struct SentenceIds {
  std::vector<int> words;
  std::vector<int> tags;
  std::vector<std::vector<int>> chars;
};

SentenceIds sentence_ids(const Vocab& vocab, const std::vector<std::string>& words,
                         const std::vector<std::string>& tags);

/// Dropout noise source; a null rng means evaluation mode.
struct Noise {
  std::mt19937_64* rng = nullptr;
  double dropout = 0.0;
  bool active() const { return rng != nullptr && dropout > 0.0; }
};

/// Word representation x_i = [e_i; c_i; p_i] followed by a bidirectional LSTM.
class Encoder {
 public:
  static void declare(ad::ParamStore& store, const EncoderDims& dims, const Vocab& vocab, std::mt19937_64& rng);

  Encoder() = default;
  Encoder(ad::ParamStore& store, const EncoderDims& dims);

  SentenceEncoding encode(ad::Graph& g, const Vocab& vocab, const std::vector<std::string>& words,
                          const std::vector<std::string>& tags, Noise noise = {}) const;
  SentenceEncoding encode_ids(ad::Graph& g, const SentenceIds& ids, Noise noise = {}) const;

  int span_dim() const { return 2 * dims_.lstm_dim; }
  int word_rep_dim() const { return dims_.word_dim + dims_.tag_dim + dims_.char_hidden; }

 private:
  ad::Expr word_rep(ad::Graph& g, int word, int tag, const std::vector<int>& chars) const;

  EncoderDims dims_;
  ad::Parameter* word_emb_ = nullptr;
  ad::Parameter* tag_emb_ = nullptr;
  ad::Parameter* char_emb_ = nullptr;
  LstmParams char_lstm_;
  LstmParams fwd_;
  LstmParams bwd_;
};

/// Two ReLU layers followed by a linear output layer.
struct Mlp {
  ad::Parameter* w1 = nullptr;
  ad::Parameter* b1 = nullptr;
  ad::Parameter* w2 = nullptr;
  ad::Parameter* b2 = nullptr;
  ad::Parameter* out = nullptr;  // may be null when there are no output rows

  static void declare(ad::ParamStore& store, const std::string& prefix, int input, int hidden, int outputs,
                      std::mt19937_64& rng);
  static Mlp bind(ad::ParamStore& store, const std::string& prefix);

  ad::Expr hidden(ad::Graph& g, ad::Expr x) const;
  int input_dim() const { return static_cast<int>(w1->value.cols()); }
};

/// Label and span scorers. The empty label (id 0) scores a constant 0.
class Scorer {
 public:
  static void declare(ad::ParamStore& store, int label_input, int span_input, int hidden, int num_labels,
                      std::mt19937_64& rng);

  Scorer() = default;
  explicit Scorer(ad::ParamStore& store);

  /// Vector of length num_labels(); entry 0 is the constant 0.
  ad::Expr label_scores(ad::Graph& g, ad::Expr input) const;
  ad::Expr span_score(ad::Graph& g, ad::Expr input) const;
  /// Single-label convenience; throws std::out_of_range for unknown ids.
  ad::Expr label_score(ad::Graph& g, ad::Expr input, LabelId label) const;

  int num_labels() const { return num_labels_; }
  int label_input_dim() const { return label_.input_dim(); }
  int span_input_dim() const { return span_.input_dim(); }

 private:
  Mlp label_;
  Mlp span_;
  int num_labels_ = 0;
};

}  // namespace chartparse
