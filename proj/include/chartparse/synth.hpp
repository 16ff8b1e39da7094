#pragma once

#include <random>
#include <vector>

#include "chartparse/treebank.hpp"

namespace chartparse {

struct RandomTreeOptions {
  int max_children = 4;
  double unary_prob = 0.25;        // chance of stacking extra labels over a constituent
  double leaf_phrase_prob = 0.3;   // chance of a one-word constituent above a preterminal
  int num_labels = 4;              // constituent labels A, B, C, ...
  int num_tags = 3;
};

/// Random n-ary tree over exactly n words, with unary chains and one-word constituents.
Tree random_tree(std::mt19937_64& rng, int n, const RandomTreeOptions& options = {});

/// Sentences of a small grammar in which the tag sequence determines the bracketing.
/// Produces unary S+VP chains, one-word NP/ADJP constituents and ternary nodes.
class SyntheticGrammar {
 public:
  explicit SyntheticGrammar(int min_len = 5, int max_len = 15) : min_len_(min_len), max_len_(max_len) {}

  Tree sample(std::mt19937_64& rng) const;
  std::vector<Tree> corpus(std::mt19937_64& rng, int count) const;

 private:
  int min_len_;
  int max_len_;
};

}  // namespace chartparse
