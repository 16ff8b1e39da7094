#include "chartparse/decoders.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace chartparse {

using ad::Expr;
using ad::Graph;
using ad::concat;

std::string to_string(DecoderKind kind) {
  switch (kind) {
    case DecoderKind::Cky: return "cky";
    case DecoderKind::TopDown: return "topdown";
    case DecoderKind::InOrder: return "inorder";
  }
  return "?";
}

std::string to_string(HistoryKind kind) {
  switch (kind) {
    case HistoryKind::None: return "none";
    case HistoryKind::Chain: return "chain";
    case HistoryKind::Stack: return "stack";
  }
  return "?";
}

DecoderKind parse_decoder_kind(const std::string& text) {
  if (text == "cky") return DecoderKind::Cky;
  if (text == "topdown" || text == "top-down") return DecoderKind::TopDown;
  if (text == "inorder" || text == "in-order") return DecoderKind::InOrder;
  throw std::invalid_argument("unknown decoder '" + text + "' (expected cky, topdown or inorder)");
}

HistoryKind parse_history_kind(const std::string& text) {
  if (text == "none") return HistoryKind::None;
  if (text == "chain") return HistoryKind::Chain;
  if (text == "stack") return HistoryKind::Stack;
  throw std::invalid_argument("unknown history '" + text + "' (expected none, chain or stack)");
}

void validate_decoder(DecoderKind decoder, HistoryKind history) {
  if (decoder == DecoderKind::Cky && history != HistoryKind::None)
    throw std::invalid_argument("cky decoding needs span scores that do not depend on history");
}

namespace {

void check_span(const ScoreSource& source, int i, int j) {
  if (i < 0 || j > source.length() || i >= j)
    throw std::out_of_range("invalid span (" + std::to_string(i) + ", " + std::to_string(j) + ") for length " +
                            std::to_string(source.length()));
}

LabelId label_id_of(const ScoreSource& source, const std::string& label) {
  const auto& names = source.labels();
  auto it = std::find(names.begin(), names.end(), label);
  if (it == names.end()) throw std::invalid_argument("label '" + label + "' is not known to the scorer");
  return static_cast<LabelId>(it - names.begin());
}

BinaryTree make_node(int i, int j, const std::string& label) {
  BinaryTree t;
  t.span = {i, j, label};
  return t;
}

}  // namespace

LabelId label_argmax(ScoreSource& source, int i, int j, DecodeStats* stats) {
  check_span(source, i, j);
  const std::vector<double> scores = source.label_scores(i, j);
  if (scores.empty()) throw std::logic_error("label scorer returned no scores");
  if (stats) {
    ++stats->label_evals;
    ++stats->label_decisions;
  }
  return static_cast<LabelId>(std::max_element(scores.begin(), scores.end()) - scores.begin());
}

int split_argmax(ScoreSource& source, int i, int j, DecodeStats* stats) {
  check_span(source, i, j);
  if (j - i < 2) throw std::invalid_argument("split of a length-1 span");
  int best = -1;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int k = i + 1; k < j; ++k) {
    const double s = source.span_score(i, k) + source.span_score(k, j);
    if (best < 0 || s > best_score) {
      best = k;
      best_score = s;
    }
  }
  if (stats) {
    stats->span_evals += 2 * static_cast<std::size_t>(j - i - 1);
    ++stats->structure_decisions;
  }
  return best;
}

int parent_argmax(ScoreSource& source, int i, int j, int R, DecodeStats* stats) {
  check_span(source, i, j);
  if (R <= j || R > source.length()) throw std::invalid_argument("parent bound must satisfy j < R <= n");
  int best = -1;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int k = j + 1; k <= R; ++k) {
    const double s = source.span_score(i, k) + source.span_score(j, k);
    if (best < 0 || s > best_score) {
      best = k;
      best_score = s;
    }
  }
  if (stats) {
    stats->span_evals += 2 * static_cast<std::size_t>(R - j);
    ++stats->structure_decisions;
  }
  return best;
}

namespace {

const std::string& label_name(const std::vector<std::string>& labels, LabelId id) {
  if (id < 0 || static_cast<std::size_t>(id) >= labels.size())
    throw std::out_of_range("decision returned unknown label id " + std::to_string(id));
  return labels[static_cast<std::size_t>(id)];
}

BinaryTree topdown_rec(DecisionMaker& d, int i, int j, const std::vector<std::string>& labels) {
  const LabelId label = d.label(i, j);
  d.record(i, j, label);
  BinaryTree node = make_node(i, j, label_name(labels, label));
  if (j - i == 1) return node;
  const int k = d.split(i, j);
  if (k <= i || k >= j) throw std::logic_error("split outside the span");
  d.save();
  BinaryTree left = topdown_rec(d, i, k, labels);
  d.restore();
  BinaryTree right = topdown_rec(d, k, j, labels);
  node.children.push_back(std::move(left));
  node.children.push_back(std::move(right));
  return node;
}

// Builds the subtree that starts with the leaf (start, start+1) and ends at R.
BinaryTree inorder_rec(DecisionMaker& d, int start, int R, const std::vector<std::string>& labels) {
  BinaryTree node = make_node(start, start + 1, "");
  for (;;) {
    const int i = node.span.i, j = node.span.j;
    const LabelId label = d.label(i, j);
    d.record(i, j, label);
    node.span.label = label_name(labels, label);
    if (j == R) return node;
    const int k = d.parent(i, j, R);
    if (k <= j || k > R) throw std::logic_error("parent outside the bound");
    d.save();
    BinaryTree right = inorder_rec(d, j, k, labels);
    d.restore();
    BinaryTree parent = make_node(i, k, "");
    parent.children.push_back(std::move(node));
    parent.children.push_back(std::move(right));
    node = std::move(parent);
  }
}

}  // namespace

BinaryTree decode_topdown(DecisionMaker& decisions, int n, const std::vector<std::string>& labels) {
  if (n < 1) throw std::invalid_argument("decode: empty sentence");
  return topdown_rec(decisions, 0, n, labels);
}

BinaryTree decode_topdown(ScoreSource& source, DecodeStats* stats) {
  GreedyDecisions d(source, stats);
  return decode_topdown(d, source.length(), source.labels());
}

BinaryTree decode_inorder(DecisionMaker& decisions, int n, const std::vector<std::string>& labels) {
  if (n < 1) throw std::invalid_argument("decode: empty sentence");
  return inorder_rec(decisions, 0, n, labels);
}

BinaryTree decode_inorder(ScoreSource& source, DecodeStats* stats) {
  GreedyDecisions d(source, stats);
  return decode_inorder(d, source.length(), source.labels());
}

BinaryTree decode_cky(ScoreSource& source, DecodeStats* stats) {
  const int n = source.length();
  if (n < 1) throw std::invalid_argument("decode: empty sentence");
  const auto N = static_cast<std::size_t>(n + 1);
  std::vector<double> best(N * N, 0.0);
  std::vector<int> best_label(N * N, 0), best_split(N * N, -1);
  auto at = [N](int i, int j) { return static_cast<std::size_t>(i) * N + static_cast<std::size_t>(j); };

  for (int len = 1; len <= n; ++len) {
    for (int i = 0; i + len <= n; ++i) {
      const int j = i + len;
      const std::vector<double> scores = source.label_scores(i, j);
      const auto top = std::max_element(scores.begin(), scores.end());
      double value = *top + source.span_score(i, j);
      best_label[at(i, j)] = static_cast<int>(top - scores.begin());
      if (stats) {
        ++stats->label_evals;
        ++stats->span_evals;
      }
      if (len > 1) {
        int arg = -1;
        double inner = 0.0;
        for (int k = i + 1; k < j; ++k) {
          const double s = best[at(i, k)] + best[at(k, j)];
          if (arg < 0 || s > inner) {
            arg = k;
            inner = s;
          }
        }
        if (stats) stats->combine_evals += static_cast<std::size_t>(len - 1);
        best_split[at(i, j)] = arg;
        value += inner;
      }
      best[at(i, j)] = value;
    }
  }

  const auto& labels = source.labels();
  auto build = [&](auto&& self, int i, int j) -> BinaryTree {
    BinaryTree node = make_node(i, j, label_name(labels, best_label[at(i, j)]));
    if (j - i > 1) {
      const int k = best_split[at(i, j)];
      node.children.push_back(self(self, i, k));
      node.children.push_back(self(self, k, j));
    }
    return node;
  };
  return build(build, 0, n);
}

double tree_score(ScoreSource& source, const BinaryTree& tree) {
  const auto& s = tree.span;
  check_span(source, s.i, s.j);
  const LabelId id = label_id_of(source, s.label);
  double total = source.label_scores(s.i, s.j).at(static_cast<std::size_t>(id)) + source.span_score(s.i, s.j);
  for (const auto& child : tree.children) total += tree_score(source, child);
  return total;
}

// ---------------------------------------------------------------------------

void HistoryTracker::declare(ad::ParamStore& store, const HistoryConfig& config, int span_dim, int num_labels,
                             std::mt19937_64& rng) {
  if (!config.enabled()) return;
  if (!config.input_label && !config.input_span)
    throw std::invalid_argument("history needs at least one of label and span input");
  if (config.hidden < 1) throw std::invalid_argument("history hidden size must be positive");
  int input = 0;
  if (config.input_span) input += span_dim;
  if (config.input_label) {
    if (config.label_dim < 1) throw std::invalid_argument("history label dimension must be positive");
    store.add("hist.label_emb", {static_cast<std::size_t>(num_labels), static_cast<std::size_t>(config.label_dim)},
              ad::Init::Normal, rng);
    input += config.label_dim;
  }
  declare_lstm(store, "hist.lstm", input, config.hidden, rng);
}

HistoryTracker::HistoryTracker(ad::ParamStore& store, const HistoryConfig& config) : config_(config) {
  if (!config.enabled()) throw std::invalid_argument("history tracker constructed with history disabled");
  if (config.input_label) label_emb_ = &store.get("hist.label_emb");
  lstm_ = bind_lstm(store, "hist.lstm");
}

HistoryState HistoryTracker::initial(Graph& g) const {
  return {lstm_zero_state(g, lstm_.hidden), 0};
}

HistoryState HistoryTracker::record(Graph& g, const HistoryState& state, Expr span, LabelId label) const {
  std::vector<Expr> parts;
  if (config_.input_span) parts.push_back(span);
  if (config_.input_label) {
    if (label < 0 || static_cast<std::size_t>(label) >= label_emb_->value.rows())
      throw std::out_of_range("history: unknown label id " + std::to_string(label));
    parts.push_back(g.lookup(*label_emb_, static_cast<std::size_t>(label)));
  }
  Expr x = parts.size() == 1 ? parts[0] : concat(parts);
  return {lstm_step(g, lstm_, x, state.lstm), state.t + 1};
}

SentenceScorer::SentenceScorer(Graph& g, const SentenceEncoding& enc, const Scorer& scorer,
                               const HistoryTracker* tracker, const std::vector<std::string>& label_names)
    : g_(g), enc_(enc), scorer_(scorer), tracker_(tracker), labels_(label_names) {
  if (static_cast<int>(labels_.size()) != scorer.num_labels())
    throw std::invalid_argument("label table size does not match the scorer");
  if (tracker_) state_ = tracker_->initial(g_);
}

Expr SentenceScorer::span_repr(int i, int j) {
  auto [it, inserted] = span_reprs_.try_emplace({i, j});
  if (inserted) it->second = span_vector(enc_, i, j);
  return it->second;
}

Expr SentenceScorer::input(int i, int j, bool with_history) {
  Expr s = span_repr(i, j);
  return with_history ? concat({s, state_.lstm.h}) : s;
}

Expr SentenceScorer::label_expr(int i, int j) {
  const bool hist = tracker_ && tracker_->config().feeds_label();
  if (hist && label_cache_t_ != state_id_) {
    label_cache_.clear();
    label_cache_t_ = state_id_;
  }
  auto [it, inserted] = label_cache_.try_emplace({i, j});
  if (inserted) it->second = scorer_.label_scores(g_, input(i, j, hist));
  return it->second;
}

Expr SentenceScorer::span_expr(int i, int j) {
  const bool hist = tracker_ && tracker_->config().feeds_span();
  // Under history the caches only hold scores computed for the current state.
  if (hist && span_cache_t_ != state_id_) {
    span_cache_.clear();
    span_cache_t_ = state_id_;
  }
  auto [it, inserted] = span_cache_.try_emplace({i, j});
  if (inserted) it->second = scorer_.span_score(g_, input(i, j, hist));
  return it->second;
}

std::vector<double> SentenceScorer::label_scores(int i, int j) {
  const auto data = label_expr(i, j).value().data();
  return {data.begin(), data.end()};
}

double SentenceScorer::span_score(int i, int j) { return span_expr(i, j).scalar(); }

void SentenceScorer::record(int i, int j, LabelId label) {
  if (!tracker_) return;
  state_ = tracker_->record(g_, state_, span_repr(i, j), label);
  state_id_ = ++next_state_id_;
}

void SentenceScorer::save_history() {
  if (!tracker_ || tracker_->config().kind != HistoryKind::Stack) return;
  saved_.push_back({state_, state_id_});
}

void SentenceScorer::restore_history() {
  if (!tracker_ || tracker_->config().kind != HistoryKind::Stack) return;
  if (saved_.empty()) throw std::logic_error("history restore without a matching save");
  state_ = saved_.back().first;
  state_id_ = saved_.back().second;
  saved_.pop_back();
}

// ---------------------------------------------------------------------------

TableScorer::TableScorer(int n, std::vector<std::string> labels) : n_(n), labels_(std::move(labels)) {
  if (n < 1) throw std::invalid_argument("table scorer needs a positive length");
  if (labels_.empty()) throw std::invalid_argument("table scorer needs at least the empty label");
  const auto N = static_cast<std::size_t>(n + 1);
  label_table_.assign(N * N, std::vector<double>(labels_.size(), 0.0));
  span_table_.assign(N * N, 0.0);
}

TableScorer TableScorer::random(int n, int num_labels, std::mt19937_64& rng, double scale) {
  std::vector<std::string> labels{kEmptyLabel};
  for (int l = 1; l < num_labels; ++l) labels.push_back("L" + std::to_string(l));
  TableScorer t(n, std::move(labels));
  std::normal_distribution<double> normal(0.0, scale);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j <= n; ++j) {
      for (int l = 1; l < num_labels; ++l) t.set_label_score(i, j, l, normal(rng));
      t.set_span_score(i, j, normal(rng));
    }
  }
  return t;
}

std::size_t TableScorer::slot(int i, int j) const {
  if (i < 0 || j > n_ || i >= j)
    throw std::out_of_range("invalid span (" + std::to_string(i) + ", " + std::to_string(j) + ")");
  return static_cast<std::size_t>(i) * static_cast<std::size_t>(n_ + 1) + static_cast<std::size_t>(j);
}

std::vector<double> TableScorer::label_scores(int i, int j) { return label_table_[slot(i, j)]; }
double TableScorer::span_score(int i, int j) { return span_table_[slot(i, j)]; }

void TableScorer::set_label_score(int i, int j, LabelId label, double score) {
  if (label == kEmptyLabelId) throw std::invalid_argument("the empty label score is fixed to 0");
  label_table_[slot(i, j)].at(static_cast<std::size_t>(label)) = score;
}

void TableScorer::set_span_score(int i, int j, double score) { span_table_[slot(i, j)] = score; }

}  // namespace chartparse
