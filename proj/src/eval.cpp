#include "chartparse/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <iterator>
#include <stdexcept>

namespace chartparse {

double EvalReport::recall() const { return gold_total == 0 ? 0.0 : 100.0 * double(matched) / double(gold_total); }

double EvalReport::precision() const {
  return pred_total == 0 ? 0.0 : 100.0 * double(matched) / double(pred_total);
}

double EvalReport::f1() const {
  const double r = recall(), p = precision();
  return r + p == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

void EvalReport::add(const EvalReport& other) {
  matched += other.matched;
  gold_total += other.gold_total;
  pred_total += other.pred_total;
}

EvalReport score_tree(const Tree& gold, const Tree& pred) {
  const auto g = spans_of(gold);
  const auto p = spans_of(pred);
  std::vector<LabeledSpan> common;
  std::set_intersection(g.begin(), g.end(), p.begin(), p.end(), std::back_inserter(common));
  return {common.size(), g.size(), p.size()};
}

EvalReport score_corpus(const std::vector<Tree>& gold, const std::vector<Tree>& pred) {
  if (gold.empty()) throw std::invalid_argument("empty corpus");
  if (gold.size() != pred.size())
    throw std::invalid_argument("gold has " + std::to_string(gold.size()) + " trees but prediction has " +
                                std::to_string(pred.size()));
  EvalReport total;
  for (std::size_t k = 0; k < gold.size(); ++k) {
    if (sentence_length(gold[k]) != sentence_length(pred[k]))
      throw std::invalid_argument("sentence " + std::to_string(k + 1) + ": length mismatch");
    total.add(score_tree(gold[k], pred[k]));
  }
  return total;
}

std::string format_report(const EvalReport& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "LR=%.2f LP=%.2f F1=%.2f matched=%zu gold=%zu pred=%zu", r.recall(), r.precision(),
                r.f1(), r.matched, r.gold_total, r.pred_total);
  return buf;
}

}  // namespace chartparse
