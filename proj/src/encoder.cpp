#include "chartparse/encoder.hpp"

#include <stdexcept>

namespace chartparse {

using ad::Expr;
using ad::Graph;
using ad::concat;

void declare_lstm(ad::ParamStore& store, const std::string& prefix, int input, int hidden, std::mt19937_64& rng) {
  const auto h = static_cast<std::size_t>(hidden);
  store.add(prefix + ".W", {4 * h, static_cast<std::size_t>(input) + h}, ad::Init::Glorot, rng);
  store.add(prefix + ".b", {4 * h}, ad::Init::Zeros, rng);
}

LstmParams bind_lstm(ad::ParamStore& store, const std::string& prefix) {
  LstmParams p;
  p.weight = &store.get(prefix + ".W");
  p.bias = &store.get(prefix + ".b");
  p.hidden = static_cast<int>(p.bias->value.size() / 4);
  return p;
}

LstmState lstm_zero_state(Graph& g, int hidden) {
  const auto h = static_cast<std::size_t>(hidden);
  return {g.zeros(h), g.zeros(h)};
}

LstmState lstm_step(Graph& g, const LstmParams& lstm, Expr x, const LstmState& prev) {
  const auto h = static_cast<std::size_t>(lstm.hidden);
  Expr gates = matmul(g.param(*lstm.weight), concat({x, prev.h})) + g.param(*lstm.bias);
  Expr in = sigmoid(slice(gates, 0, h));
  Expr forget = sigmoid(slice(gates, h, 2 * h));
  Expr out = sigmoid(slice(gates, 2 * h, 3 * h));
  Expr cand = tanh(slice(gates, 3 * h, 4 * h));
  Expr c = cmult(forget, prev.c) + cmult(in, cand);
  return {cmult(out, tanh(c)), c};
}

Expr span_vector(const SentenceEncoding& enc, int i, int j) {
  if (i < 0 || j > enc.n || i >= j)
    throw std::out_of_range("span_vector: invalid span (" + std::to_string(i) + ", " + std::to_string(j) +
                            ") for length " + std::to_string(enc.n));
  const auto ui = static_cast<std::size_t>(i), uj = static_cast<std::size_t>(j);
  return concat({enc.fwd[uj] - enc.fwd[ui], enc.bwd[ui] - enc.bwd[uj]});
}

SentenceIds sentence_ids(const Vocab& vocab, const std::vector<std::string>& words,
                         const std::vector<std::string>& tags) {
  if (words.size() != tags.size()) throw std::invalid_argument("sentence has different numbers of words and tags");
  SentenceIds ids;
  for (std::size_t k = 0; k < words.size(); ++k) {
    ids.words.push_back(vocab.word_id(words[k]));
    ids.tags.push_back(vocab.tag_id(tags[k]));
    ids.chars.push_back(vocab.char_ids(words[k]));
  }
  return ids;
}

void Encoder::declare(ad::ParamStore& store, const EncoderDims& dims, const Vocab& vocab, std::mt19937_64& rng) {
  auto rows = [](const Index& index) { return static_cast<std::size_t>(index.size()); };
  store.add("enc.word_emb", {rows(vocab.words), static_cast<std::size_t>(dims.word_dim)}, ad::Init::Normal, rng);
  store.add("enc.tag_emb", {rows(vocab.tags), static_cast<std::size_t>(dims.tag_dim)}, ad::Init::Normal, rng);
  store.add("enc.char_emb", {rows(vocab.chars), static_cast<std::size_t>(dims.char_dim)}, ad::Init::Normal, rng);
  declare_lstm(store, "enc.char_lstm", dims.char_dim, dims.char_hidden, rng);
  const int input = dims.word_dim + dims.tag_dim + dims.char_hidden;
  declare_lstm(store, "enc.fwd", input, dims.lstm_dim, rng);
  declare_lstm(store, "enc.bwd", input, dims.lstm_dim, rng);
}

Encoder::Encoder(ad::ParamStore& store, const EncoderDims& dims)
    : dims_(dims),
      word_emb_(&store.get("enc.word_emb")),
      tag_emb_(&store.get("enc.tag_emb")),
      char_emb_(&store.get("enc.char_emb")),
      char_lstm_(bind_lstm(store, "enc.char_lstm")),
      fwd_(bind_lstm(store, "enc.fwd")),
      bwd_(bind_lstm(store, "enc.bwd")) {}

Expr Encoder::word_rep(Graph& g, int word, int tag, const std::vector<int>& chars) const {
  LstmState state = lstm_zero_state(g, char_lstm_.hidden);
  for (int c : chars) state = lstm_step(g, char_lstm_, g.lookup(*char_emb_, static_cast<std::size_t>(c)), state);
  return concat({g.lookup(*word_emb_, static_cast<std::size_t>(word)), state.h,
                 g.lookup(*tag_emb_, static_cast<std::size_t>(tag))});
}

SentenceEncoding Encoder::encode(Graph& g, const Vocab& vocab, const std::vector<std::string>& words,
                                 const std::vector<std::string>& tags, Noise noise) const {
  return encode_ids(g, sentence_ids(vocab, words, tags), noise);
}

SentenceEncoding Encoder::encode_ids(Graph& g, const SentenceIds& ids, Noise noise) const {
  const int n = static_cast<int>(ids.words.size());
  if (n == 0) throw std::invalid_argument("encode: empty sentence");
  if (ids.tags.size() != ids.words.size() || ids.chars.size() != ids.words.size())
    throw std::invalid_argument("encode: inconsistent sentence ids");

  // Positions 0 and n+1 hold the START and STOP padding tokens.
  std::vector<Expr> inputs;
  inputs.reserve(static_cast<std::size_t>(n) + 2);
  inputs.push_back(word_rep(g, Vocab::kStart, Vocab::kStart, {Vocab::kStart}));
  for (int k = 0; k < n; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    inputs.push_back(word_rep(g, ids.words[uk], ids.tags[uk], ids.chars[uk]));
  }
  inputs.push_back(word_rep(g, Vocab::kStop, Vocab::kStop, {Vocab::kStop}));

  const std::size_t len = inputs.size();
  std::vector<Expr> fwd_out(len), bwd_out(len);
  LstmState state = lstm_zero_state(g, fwd_.hidden);
  for (std::size_t t = 0; t < len; ++t) {
    state = lstm_step(g, fwd_, inputs[t], state);
    fwd_out[t] = state.h;
  }
  state = lstm_zero_state(g, bwd_.hidden);
  for (std::size_t t = len; t-- > 0;) {
    state = lstm_step(g, bwd_, inputs[t], state);
    bwd_out[t] = state.h;
  }

  if (noise.active()) {
    const double keep = 1.0 - noise.dropout;
    std::bernoulli_distribution draw(keep);
    auto apply = [&](Expr& e) {
      ad::Tensor mask(e.value().shape(), 0.0);
      for (auto& m : mask.data()) m = draw(*noise.rng) ? 1.0 / keep : 0.0;
      e = cmult(e, g.input(std::move(mask)));
    };
    for (auto& e : fwd_out) apply(e);
    for (auto& e : bwd_out) apply(e);
  }

  SentenceEncoding enc;
  enc.n = n;
  for (int k = 0; k <= n; ++k) {
    enc.fwd.push_back(fwd_out[static_cast<std::size_t>(k)]);
    enc.bwd.push_back(bwd_out[static_cast<std::size_t>(k) + 1]);
  }
  return enc;
}

void Mlp::declare(ad::ParamStore& store, const std::string& prefix, int input, int hidden, int outputs,
                  std::mt19937_64& rng) {
  const auto h = static_cast<std::size_t>(hidden);
  store.add(prefix + ".W1", {h, static_cast<std::size_t>(input)}, ad::Init::Glorot, rng);
  store.add(prefix + ".b1", {h}, ad::Init::Zeros, rng);
  store.add(prefix + ".W2", {h, h}, ad::Init::Glorot, rng);
  store.add(prefix + ".b2", {h}, ad::Init::Zeros, rng);
  if (outputs > 0) store.add(prefix + ".out", {static_cast<std::size_t>(outputs), h}, ad::Init::Glorot, rng);
}

Mlp Mlp::bind(ad::ParamStore& store, const std::string& prefix) {
  Mlp m;
  m.w1 = &store.get(prefix + ".W1");
  m.b1 = &store.get(prefix + ".b1");
  m.w2 = &store.get(prefix + ".W2");
  m.b2 = &store.get(prefix + ".b2");
  if (store.contains(prefix + ".out")) m.out = &store.get(prefix + ".out");
  return m;
}

Expr Mlp::hidden(Graph& g, Expr x) const {
  Expr h1 = relu(matmul(g.param(*w1), x) + g.param(*b1));
  return relu(matmul(g.param(*w2), h1) + g.param(*b2));
}

void Scorer::declare(ad::ParamStore& store, int label_input, int span_input, int hidden, int num_labels,
                     std::mt19937_64& rng) {
  if (num_labels < 1) throw std::invalid_argument("scorer needs at least the empty label");
  Mlp::declare(store, "label", label_input, hidden, num_labels - 1, rng);
  Mlp::declare(store, "span", span_input, hidden, 1, rng);
}

Scorer::Scorer(ad::ParamStore& store) : label_(Mlp::bind(store, "label")), span_(Mlp::bind(store, "span")) {
  num_labels_ = 1 + (label_.out ? static_cast<int>(label_.out->value.rows()) : 0);
}

Expr Scorer::label_scores(Graph& g, Expr input) const {
  if (!label_.out) return g.zeros(1);
  Expr rows = matmul(g.param(*label_.out), label_.hidden(g, input));
  return concat({g.zeros(1), rows});
}

Expr Scorer::span_score(Graph& g, Expr input) const {
  return matmul(g.param(*span_.out), span_.hidden(g, input));
}

Expr Scorer::label_score(Graph& g, Expr input, LabelId label) const {
  if (label < 0 || label >= num_labels_) throw std::out_of_range("unknown label id " + std::to_string(label));
  if (label == kEmptyLabelId) return g.constant(0.0);
  return pick(label_scores(g, input), static_cast<std::size_t>(label));
}

}  // namespace chartparse
