#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "chartparse/treebank.hpp"

namespace chartparse {

struct EvalReport {
  std::size_t matched = 0;
  std::size_t gold_total = 0;
  std::size_t pred_total = 0;

  double recall() const;
  double precision() const;
  double f1() const;
  void add(const EvalReport& other);
};

/// Labeled spans shared by the two trees, counted as a multiset.
EvalReport score_tree(const Tree& gold, const Tree& pred);

/// Throws std::invalid_argument on an empty corpus, a count mismatch or a
/// sentence-length mismatch (the message names the sentence index).
EvalReport score_corpus(const std::vector<Tree>& gold, const std::vector<Tree>& pred);

/// "LR=xx.xx LP=xx.xx F1=xx.xx matched=i gold=j pred=k"
std::string format_report(const EvalReport& report);

}  // namespace chartparse
