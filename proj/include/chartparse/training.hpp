#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "chartparse/decoders.hpp"
#include "chartparse/eval.hpp"
#include "chartparse/model.hpp"
#include "chartparse/oracle.hpp"

namespace chartparse {

struct TrainConfig {
  bool explore = false;
  double unk_z = 0.8375;
  double rho = 0.99;
  double eps = 1e-7;
  int epochs = 20;
  std::uint64_t seed = 1;
  int dev_every = 1;  // evaluate the dev set every N epochs
  double dropout = 0.4;
  /// Decision sequences whose hinges are summed per sentence; empty means the model's decoder.
  std::vector<DecoderKind> objectives;
};

/// max(0, 1 - s_gold + s_pred), or the constant 0 when the prediction is correct.
ad::Expr hinge_loss(ad::Graph& g, ad::Expr gold_score, ad::Expr pred_score, bool correct);
ad::Expr hinge_label(SentenceScorer& s, int i, int j, LabelId gold, LabelId pred);
/// s_parent(i, j, k) = s_span(i, k) + s_span(j, k)
ad::Expr hinge_parent(SentenceScorer& s, int i, int j, int R, int gold_k, int pred_k);
/// s_split(i, j, k) = s_span(i, k) + s_span(k, j)
ad::Expr hinge_split(SentenceScorer& s, int i, int j, int gold_k, int pred_k);

struct SentenceLoss {
  ad::Expr loss;
  std::size_t decisions = 0;
  std::size_t errors = 0;        // decisions whose argmax differs from the oracle target
  std::size_t off_gold = 0;      // decisions taken from a state the gold path never visits
  /// Smallest distance of any hinge argument or argmax gap from its kink.
  double min_margin = std::numeric_limits<double>::infinity();
};

/// Runs the training decoder over one sentence and sums the per-decision hinges.
/// With explore the model's own decisions are followed, otherwise the oracle's.
SentenceLoss sentence_loss(SentenceScorer& scorer, const GoldIndex& gold, DecoderKind decoder, bool explore,
                           const std::vector<std::string>& labels);

double unk_probability(int count, double z);
/// Word id or Vocab::kUnk, drawn with probability z / (z + c(w)).
int unk_replace(int word_id, const Vocab& vocab, double z, std::mt19937_64& rng);

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  bool has_dev = false;
  EvalReport dev;
  double seconds = 0.0;
};

/// Tab-separated: epoch, train_loss, dev_LR, dev_LP, dev_F1, seconds.
std::string format_epoch(const EpochStats& stats);

struct TrainResult {
  std::vector<EpochStats> epochs;
  int best_epoch = 0;  // 0 when the initial parameters were kept
  double best_dev_f1 = -1.0;
};

/// Returning false from the callback stops training after that epoch.
using EpochCallback = std::function<bool(const EpochStats&, Model&)>;

/// One AdaDelta update per sentence in a seeded shuffled order. When a dev set
/// is given the parameters of the best dev epoch are restored at the end.
/// Throws std::runtime_error naming the sentence when a loss is not finite.
TrainResult train(Model& model, const std::vector<Tree>& corpus, const std::vector<Tree>& dev,
                  const TrainConfig& config, const EpochCallback& on_epoch = {});

/// Parses every tree's words and tags with the model.
std::vector<Tree> parse_corpus(const Model& model, const std::vector<Tree>& trees, DecoderKind decoder,
                               int threads = 1);
EvalReport evaluate(const Model& model, const std::vector<Tree>& trees, DecoderKind decoder, int threads = 1);

}  // namespace chartparse
