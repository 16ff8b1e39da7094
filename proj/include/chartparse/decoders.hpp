#pragma once

#include <cstddef>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "chartparse/autodiff.hpp"
#include "chartparse/encoder.hpp"
#include "chartparse/treebank.hpp"
#include "chartparse/vocab.hpp"

namespace chartparse {

enum class DecoderKind { Cky, TopDown, InOrder };
enum class HistoryKind { None, Chain, Stack };

std::string to_string(DecoderKind kind);
std::string to_string(HistoryKind kind);
DecoderKind parse_decoder_kind(const std::string& text);
HistoryKind parse_history_kind(const std::string& text);

/// Recurrent tracker over the decision sequence. The input/predict switches
/// select what feeds the LSTM (label embedding, span representation) and which
/// scorers see its output (label, span).
struct HistoryConfig {
  HistoryKind kind = HistoryKind::None;
  bool input_label = true;
  bool input_span = true;
  bool predict_label = true;
  bool predict_span = true;
  int hidden = 250;
  int label_dim = 50;

  bool enabled() const { return kind != HistoryKind::None; }
  bool feeds_label() const { return enabled() && predict_label; }
  bool feeds_span() const { return enabled() && predict_span; }
};

/// Throws std::invalid_argument when the decoder cannot use the history variant.
void validate_decoder(DecoderKind decoder, HistoryKind history);

/// Instrumentation: how many scores a decoder requested.
struct DecodeStats {
  std::size_t label_evals = 0;    // label-score vectors requested
  std::size_t span_evals = 0;     // span scores requested
  std::size_t combine_evals = 0;  // CKY split combinations
  std::size_t label_decisions = 0;
  std::size_t structure_decisions = 0;  // Split or Parent predictions

  std::size_t total() const { return label_evals + span_evals + combine_evals; }
};

/// Scores consumed by the decoders. Label id 0 is the empty label whose score is 0.
/// History hooks are no-ops for sources without recurrent state.
class ScoreSource {
 public:
  virtual ~ScoreSource() = default;
  virtual int length() const = 0;
  virtual const std::vector<std::string>& labels() const = 0;
  virtual std::vector<double> label_scores(int i, int j) = 0;
  virtual double span_score(int i, int j) = 0;

  virtual void record(int /*i*/, int /*j*/, LabelId /*label*/) {}
  virtual void save_history() {}
  virtual void restore_history() {}
};

/// Label(i, j): highest-scoring label, lowest id on ties.
LabelId label_argmax(ScoreSource& source, int i, int j, DecodeStats* stats = nullptr);
/// Split(i, j) = argmax_{i<k<j} s_span(i,k) + s_span(k,j), smallest k on ties.
int split_argmax(ScoreSource& source, int i, int j, DecodeStats* stats = nullptr);
/// Parent(i, j, R) = argmax_{j<k<=R} s_span(i,k) + s_span(j,k), smallest k on ties.
int parent_argmax(ScoreSource& source, int i, int j, int R, DecodeStats* stats = nullptr);

/// One decision per call site of the greedy traversals. The traversal calls
/// record() after every label, save() before descending into a subtree whose
/// records must not leak, and restore() when coming back.
class DecisionMaker {
 public:
  virtual ~DecisionMaker() = default;
  virtual LabelId label(int i, int j) = 0;
  virtual int split(int i, int j) = 0;
  virtual int parent(int i, int j, int R) = 0;
  virtual void record(int /*i*/, int /*j*/, LabelId /*label*/) {}
  virtual void save() {}
  virtual void restore() {}
};

/// Model argmax at every decision.
class GreedyDecisions : public DecisionMaker {
 public:
  explicit GreedyDecisions(ScoreSource& source, DecodeStats* stats = nullptr) : source_(source), stats_(stats) {}
  LabelId label(int i, int j) override { return label_argmax(source_, i, j, stats_); }
  int split(int i, int j) override { return split_argmax(source_, i, j, stats_); }
  int parent(int i, int j, int R) override { return parent_argmax(source_, i, j, R, stats_); }
  void record(int i, int j, LabelId label) override { source_.record(i, j, label); }
  void save() override { source_.save_history(); }
  void restore() override { source_.restore_history(); }

 private:
  ScoreSource& source_;
  DecodeStats* stats_;
};

/// Pre-order: label (i, j), split, recurse left then right.
BinaryTree decode_topdown(DecisionMaker& decisions, int n, const std::vector<std::string>& labels);
BinaryTree decode_topdown(ScoreSource& source, DecodeStats* stats = nullptr);

/// In-order: label (i, j); unless j = R predict the parent (i, k), decode the
/// right sibling (j, k) under bound k, then continue with (i, k) under R.
BinaryTree decode_inorder(DecisionMaker& decisions, int n, const std::vector<std::string>& labels);
BinaryTree decode_inorder(ScoreSource& source, DecodeStats* stats = nullptr);

/// Exact maximizer of tree_score over all binarized trees (post-order dynamic program).
BinaryTree decode_cky(ScoreSource& source, DecodeStats* stats = nullptr);

/// Sum over nodes of s_label + s_span. Sources must be history-free.
double tree_score(ScoreSource& source, const BinaryTree& tree);

// ---------------------------------------------------------------------------
// History tracking

struct HistoryState {
  LstmState lstm;
  int t = 0;
};

class HistoryTracker {
 public:
  static void declare(ad::ParamStore& store, const HistoryConfig& config, int span_dim, int num_labels,
                      std::mt19937_64& rng);

  HistoryTracker() = default;
  HistoryTracker(ad::ParamStore& store, const HistoryConfig& config);

  HistoryState initial(ad::Graph& g) const;
  /// h_t = LSTM([s_ij; E_l], h_{t-1}), with either input part switched off by the config.
  HistoryState record(ad::Graph& g, const HistoryState& state, ad::Expr span, LabelId label) const;

  const HistoryConfig& config() const { return config_; }

 private:
  HistoryConfig config_;
  ad::Parameter* label_emb_ = nullptr;
  LstmParams lstm_;
};

/// Neural scores for one encoded sentence, optionally augmented with history.
class SentenceScorer : public ScoreSource {
 public:
  SentenceScorer(ad::Graph& g, const SentenceEncoding& enc, const Scorer& scorer, const HistoryTracker* tracker,
                 const std::vector<std::string>& label_names);

  int length() const override { return enc_.n; }
  const std::vector<std::string>& labels() const override { return labels_; }
  std::vector<double> label_scores(int i, int j) override;
  double span_score(int i, int j) override;
  void record(int i, int j, LabelId label) override;
  void save_history() override;
  void restore_history() override;

  ad::Expr label_expr(int i, int j);
  ad::Expr span_expr(int i, int j);
  ad::Expr span_repr(int i, int j);
  ad::Graph& graph() { return g_; }
  const HistoryState* history() const { return tracker_ ? &state_ : nullptr; }

 private:
  ad::Expr input(int i, int j, bool with_history);

  ad::Graph& g_;
  const SentenceEncoding& enc_;
  const Scorer& scorer_;
  const HistoryTracker* tracker_;
  const std::vector<std::string>& labels_;
  HistoryState state_;
  int state_id_ = 0;
  int next_state_id_ = 0;
  int span_cache_t_ = 0;
  int label_cache_t_ = 0;
  std::vector<std::pair<HistoryState, int>> saved_;
  std::map<SpanKey, ad::Expr> span_reprs_;
  std::map<SpanKey, ad::Expr> label_cache_;
  std::map<SpanKey, ad::Expr> span_cache_;
};

/// Fixed score tables, for tests and for exercising decoders without a model.
class TableScorer : public ScoreSource {
 public:
  TableScorer(int n, std::vector<std::string> labels);
  static TableScorer random(int n, int num_labels, std::mt19937_64& rng, double scale = 1.0);

  int length() const override { return n_; }
  const std::vector<std::string>& labels() const override { return labels_; }
  std::vector<double> label_scores(int i, int j) override;
  double span_score(int i, int j) override;

  void set_label_score(int i, int j, LabelId label, double score);
  void set_span_score(int i, int j, double score);

 private:
  std::size_t slot(int i, int j) const;

  int n_;
  std::vector<std::string> labels_;
  std::vector<std::vector<double>> label_table_;
  std::vector<double> span_table_;
};

}  // namespace chartparse
