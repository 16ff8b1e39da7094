#include "chartparse/training.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace chartparse {

using ad::Expr;
using ad::Graph;
using ad::concat;

Expr hinge_loss(Graph& g, Expr gold_score, Expr pred_score, bool correct) {
  if (correct) return g.constant(0.0);
  return relu(add_scalar(pred_score - gold_score, 1.0));
}

Expr hinge_label(SentenceScorer& s, int i, int j, LabelId gold, LabelId pred) {
  const int L = static_cast<int>(s.labels().size());
  if (gold < 0 || gold >= L || pred < 0 || pred >= L) throw std::out_of_range("hinge_label: unknown label id");
  if (gold == pred) return s.graph().constant(0.0);
  Expr scores = s.label_expr(i, j);
  return hinge_loss(s.graph(), pick(scores, static_cast<std::size_t>(gold)), pick(scores, static_cast<std::size_t>(pred)),
                    false);
}

Expr hinge_parent(SentenceScorer& s, int i, int j, int R, int gold_k, int pred_k) {
  if (gold_k <= j || gold_k > R) throw std::invalid_argument("hinge_parent: gold boundary outside (j, R]");
  if (pred_k <= j || pred_k > R) throw std::invalid_argument("hinge_parent: predicted boundary outside (j, R]");
  if (gold_k == pred_k) return s.graph().constant(0.0);
  Expr gold = s.span_expr(i, gold_k) + s.span_expr(j, gold_k);
  Expr pred = s.span_expr(i, pred_k) + s.span_expr(j, pred_k);
  return hinge_loss(s.graph(), gold, pred, false);
}

Expr hinge_split(SentenceScorer& s, int i, int j, int gold_k, int pred_k) {
  if (gold_k <= i || gold_k >= j) throw std::invalid_argument("hinge_split: gold split outside (i, j)");
  if (pred_k <= i || pred_k >= j) throw std::invalid_argument("hinge_split: predicted split outside (i, j)");
  if (gold_k == pred_k) return s.graph().constant(0.0);
  Expr gold = s.span_expr(i, gold_k) + s.span_expr(gold_k, j);
  Expr pred = s.span_expr(i, pred_k) + s.span_expr(pred_k, j);
  return hinge_loss(s.graph(), gold, pred, false);
}

namespace {

// Largest value and the gap to the runner-up, smallest index on ties.
struct Argmax {
  int index = -1;
  double gap = std::numeric_limits<double>::infinity();
};

Argmax argmax(const std::vector<double>& v) {
  Argmax a;
  for (std::size_t k = 0; k < v.size(); ++k)
    if (a.index < 0 || v[k] > v[static_cast<std::size_t>(a.index)]) a.index = static_cast<int>(k);
  for (std::size_t k = 0; k < v.size(); ++k)
    if (static_cast<int>(k) != a.index) a.gap = std::min(a.gap, v[static_cast<std::size_t>(a.index)] - v[k]);
  return a;
}

class TrainingDecisions : public DecisionMaker {
 public:
  TrainingDecisions(SentenceScorer& s, const GoldIndex& gold, bool explore, const std::vector<std::string>& labels)
      : s_(s), gold_(gold), explore_(explore) {
    for (std::size_t k = 0; k < labels.size(); ++k) ids_.emplace(labels[k], static_cast<LabelId>(k));
  }

  LabelId label(int i, int j) override {
    const std::string target = oracle_label(gold_, i, j);
    auto it = ids_.find(target);
    if (it == ids_.end()) throw std::invalid_argument("gold label '" + target + "' is not in the label vocabulary");
    const LabelId gold = it->second;
    const std::vector<double> scores = s_.label_scores(i, j);
    const Argmax pred = argmax(scores);
    if (pred.index != gold)
      note_hinge(1.0 - scores[static_cast<std::size_t>(gold)] + scores[static_cast<std::size_t>(pred.index)]);
    add(hinge_label(s_, i, j, gold, pred.index), pred.gap, pred.index != gold);
    return follow(gold, pred.index);
  }

  int parent(int i, int j, int R) override {
    const int gold = oracle_parents(gold_, i, j, R).back();
    std::vector<double> cand;
    for (int k = j + 1; k <= R; ++k) cand.push_back(s_.span_score(i, k) + s_.span_score(j, k));
    const Argmax a = argmax(cand);
    const int pred = j + 1 + a.index;
    if (pred != gold)
      note_hinge(1.0 - cand[static_cast<std::size_t>(gold - j - 1)] + cand[static_cast<std::size_t>(a.index)]);
    add(hinge_parent(s_, i, j, R, gold, pred), a.gap, pred != gold);
    return follow(gold, pred);
  }

  int split(int i, int j) override {
    const int gold = oracle_splits_topdown(gold_, i, j).front();
    std::vector<double> cand;
    for (int k = i + 1; k < j; ++k) cand.push_back(s_.span_score(i, k) + s_.span_score(k, j));
    const Argmax a = argmax(cand);
    const int pred = i + 1 + a.index;
    if (pred != gold)
      note_hinge(1.0 - cand[static_cast<std::size_t>(gold - i - 1)] + cand[static_cast<std::size_t>(a.index)]);
    add(hinge_split(s_, i, j, gold, pred), a.gap, pred != gold);
    return follow(gold, pred);
  }

  void record(int i, int j, LabelId label) override { s_.record(i, j, label); }
  void save() override { s_.save_history(); }
  void restore() override { s_.restore_history(); }

  SentenceLoss finish() {
    out_.loss = terms_.empty() ? s_.graph().constant(0.0) : (terms_.size() == 1 ? terms_[0] : sum(concat(terms_)));
    return out_;
  }

 private:
  void note_hinge(double arg) { out_.min_margin = std::min(out_.min_margin, std::abs(arg)); }

  void add(Expr term, double gap, bool wrong) {
    ++out_.decisions;
    if (deviated_) ++out_.off_gold;
    out_.min_margin = std::min(out_.min_margin, gap);
    if (!wrong) return;
    terms_.push_back(term);
  }

  template <typename T>
  T follow(T gold, T pred) {
    if (gold == pred) return gold;
    ++out_.errors;
    if (!explore_) return gold;
    deviated_ = true;
    return pred;
  }

  SentenceScorer& s_;
  const GoldIndex& gold_;
  bool explore_;
  std::map<std::string, LabelId> ids_;
  std::vector<Expr> terms_;
  SentenceLoss out_;
  bool deviated_ = false;
};

}  // namespace

SentenceLoss sentence_loss(SentenceScorer& scorer, const GoldIndex& gold, DecoderKind decoder, bool explore,
                           const std::vector<std::string>& labels) {
  if (gold.n != scorer.length()) throw std::invalid_argument("sentence_loss: gold tree and sentence differ in length");
  if (decoder == DecoderKind::Cky) throw std::invalid_argument("cky decoding has no decision sequence to train");
  TrainingDecisions d(scorer, gold, explore, labels);
  if (decoder == DecoderKind::InOrder) decode_inorder(d, scorer.length(), labels);
  else decode_topdown(d, scorer.length(), labels);
  return d.finish();
}

double unk_probability(int count, double z) {
  if (z <= 0.0) return 0.0;
  return z / (z + static_cast<double>(std::max(count, 0)));
}

int unk_replace(int word_id, const Vocab& vocab, double z, std::mt19937_64& rng) {
  if (word_id < 3 || z <= 0.0) return word_id;  // specials and UNK itself stay
  const double p = unk_probability(vocab.count(word_id), z);
  return std::bernoulli_distribution(p)(rng) ? Vocab::kUnk : word_id;
}

std::string format_epoch(const EpochStats& s) {
  char buf[200];
  if (s.has_dev)
    std::snprintf(buf, sizeof buf, "%d\t%.6f\t%.2f\t%.2f\t%.2f\t%.2f", s.epoch, s.train_loss, s.dev.recall(),
                  s.dev.precision(), s.dev.f1(), s.seconds);
  else
    std::snprintf(buf, sizeof buf, "%d\t%.6f\t-\t-\t-\t%.2f", s.epoch, s.train_loss, s.seconds);
  return buf;
}

std::vector<Tree> parse_corpus(const Model& model, const std::vector<Tree>& trees, DecoderKind decoder, int threads) {
  std::vector<Tree> out(trees.size());
  auto work = [&](std::size_t k) { out[k] = model.parse(leaves_of(trees[k]), decoder); };
  threads = std::max(1, std::min<int>(threads, static_cast<int>(trees.size())));
  if (threads == 1) {
    for (std::size_t k = 0; k < trees.size(); ++k) work(k);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t k; (k = next++) < trees.size();) {
        try {
          work(k);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

EvalReport evaluate(const Model& model, const std::vector<Tree>& trees, DecoderKind decoder, int threads) {
  return score_corpus(trees, parse_corpus(model, trees, decoder, threads));
}

namespace {

struct Prepared {
  SentenceIds ids;
  GoldIndex gold;
};

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

}  // namespace

TrainResult train(Model& model, const std::vector<Tree>& corpus, const std::vector<Tree>& dev,
                  const TrainConfig& cfg, const EpochCallback& on_epoch) {
  if (corpus.empty()) throw std::invalid_argument("training corpus is empty");
  if (cfg.epochs < 0) throw std::invalid_argument("epochs must be non-negative");
  if (!(cfg.rho > 0.0 && cfg.rho < 1.0)) throw std::invalid_argument("rho must lie in (0, 1)");
  if (cfg.unk_z < 0.0) throw std::invalid_argument("unk_z must be non-negative");
  if (cfg.dropout < 0.0 || cfg.dropout >= 1.0) throw std::invalid_argument("dropout must lie in [0, 1)");
  const DecoderKind decoder = model.config().decoder;
  std::vector<DecoderKind> objectives = cfg.objectives;
  if (objectives.empty()) objectives.push_back(decoder);
  for (DecoderKind d : objectives)
    if (d == DecoderKind::Cky) throw std::invalid_argument("train with the inorder or topdown decision sequence");

  std::vector<Prepared> data;
  for (const Tree& t : corpus) {
    std::vector<std::string> words, tags;
    for (const Leaf& l : leaves_of(t)) {
      words.push_back(l.word);
      tags.push_back(l.tag);
    }
    data.push_back({sentence_ids(model.vocab(), words, tags), gold_index(t)});
  }

  std::mt19937_64 shuffle_rng(derive_seed(cfg.seed, 1));
  std::mt19937_64 unk_rng(derive_seed(cfg.seed, 2));
  std::mt19937_64 dropout_rng(derive_seed(cfg.seed, 3));

  TrainResult result;
  std::vector<ad::Tensor> best;
  auto snapshot = [&] {
    best.clear();
    for (const ad::Parameter* p : model.params().parameters()) best.push_back(p->value);
  };

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double total = 0.0;
    for (std::size_t idx : order) {
      const Prepared& ex = data[idx];
      SentenceIds ids = ex.ids;
      for (int& w : ids.words) w = unk_replace(w, model.vocab(), cfg.unk_z, unk_rng);
      Graph g;
      const SentenceEncoding enc = model.encoder().encode_ids(g, ids, Noise{&dropout_rng, cfg.dropout});
      std::vector<Expr> losses;
      for (DecoderKind d : objectives) {
        SentenceScorer scorer(g, enc, model.scorer(), model.tracker(), model.labels());
        losses.push_back(sentence_loss(scorer, ex.gold, d, cfg.explore, model.labels()).loss);
      }
      const Expr loss = losses.size() == 1 ? losses[0] : sum(concat(losses));
      const double value = loss.scalar();
      if (!std::isfinite(value))
        throw std::runtime_error("non-finite loss on training sentence " + std::to_string(idx + 1));
      total += value;
      g.backward(loss);
      model.params().adadelta_step(cfg.rho, cfg.eps);
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = total / static_cast<double>(data.size());
    const bool eval_now = !dev.empty() && (epoch % std::max(cfg.dev_every, 1) == 0 || epoch == cfg.epochs);
    if (eval_now) {
      stats.has_dev = true;
      stats.dev = evaluate(model, dev, decoder);
      if (stats.dev.f1() > result.best_dev_f1) {
        result.best_dev_f1 = stats.dev.f1();
        result.best_epoch = epoch;
        snapshot();
      }
    }
    stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.epochs.push_back(stats);
    if (on_epoch && !on_epoch(stats, model)) break;
  }

  if (!best.empty()) {
    auto params = model.params().parameters();
    for (std::size_t k = 0; k < params.size(); ++k) params[k]->value = best[k];
  }
  return result;
}

}  // namespace chartparse
