#include "chartparse/synth.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace chartparse {

namespace {

struct TreeGen {
  std::mt19937_64& rng;
  const RandomTreeOptions& opt;

  bool coin(double p) { return std::bernoulli_distribution(p)(rng); }
  int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
  std::string label() { return std::string(1, static_cast<char>('A' + uniform(0, opt.num_labels - 1))); }

  Tree wrap(Tree t) {
    t = Tree::node(label(), {std::move(t)});
    while (coin(opt.unary_prob)) t = Tree::node(label(), {std::move(t)});
    return t;
  }

  Tree make(int len, bool root) {
    if (len == 1) {
      Tree leaf = Tree::preterminal("T" + std::to_string(uniform(0, opt.num_tags - 1)),
                                    "w" + std::to_string(uniform(0, 9)));
      return root || coin(opt.leaf_phrase_prob) ? wrap(std::move(leaf)) : leaf;
    }
    const int parts = uniform(2, std::min(len, opt.max_children));
    std::vector<int> cuts(static_cast<std::size_t>(len - 1));
    for (int k = 0; k < len - 1; ++k) cuts[static_cast<std::size_t>(k)] = k + 1;
    std::shuffle(cuts.begin(), cuts.end(), rng);
    cuts.resize(static_cast<std::size_t>(parts - 1));
    std::sort(cuts.begin(), cuts.end());
    cuts.push_back(len);
    std::vector<Tree> children;
    int prev = 0;
    for (int c : cuts) {
      children.push_back(make(c - prev, false));
      prev = c;
    }
    Tree t = Tree::node(label(), std::move(children));
    while (coin(opt.unary_prob)) t = Tree::node(label(), {std::move(t)});
    return t;
  }
};

using Words = std::vector<std::string>;

struct GrammarGen {
  std::mt19937_64& rng;

  int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
  bool coin(double p) { return std::bernoulli_distribution(p)(rng); }

  Tree word(const std::string& tag, const Words& lexicon) {
    // A skewed draw leaves a tail of rare words for UNK replacement to act on.
    std::geometric_distribution<int> geo(0.35);
    const int idx = std::min(static_cast<int>(lexicon.size()) - 1, geo(rng));
    return Tree::preterminal(tag, lexicon[static_cast<std::size_t>(idx)]);
  }

  Tree np(int depth) {
    static const Words dt{"the", "a", "every", "this", "that"};
    static const Words nn{"dog", "cat", "code", "idea", "park", "paper", "tree", "river", "song", "table", "lamp"};
    static const Words jj{"big", "small", "red", "old", "quiet", "happy", "green", "strange"};
    static const Words nnp{"Alice", "Bob", "Paris", "Carol", "Dave", "Tokyo", "Erin"};
    static const Words prp{"she", "he", "they", "it"};
    const int pick = uniform(0, depth > 1 ? 3 : 4);
    switch (pick) {
      case 0: return Tree::node("NP", {word("DT", dt), word("NN", nn)});
      case 1: return Tree::node("NP", {word("DT", dt), word("JJ", jj), word("NN", nn)});
      case 2: return Tree::node("NP", {word("NNP", nnp)});
      case 3: return Tree::node("NP", {word("PRP", prp)});
      default: {
        static const Words cc{"and", "or"};
        return Tree::node("NP", {np(depth + 1), word("CC", cc), np(depth + 1)});
      }
    }
  }

  Tree pp(int depth) {
    static const Words in{"in", "on", "near", "with", "under"};
    return Tree::node("PP", {word("IN", in), np(depth + 1)});
  }

  Tree adjp() {
    static const Words jj{"big", "small", "red", "old", "quiet", "happy", "green", "strange"};
    static const Words rb{"very", "quite", "rather"};
    if (coin(0.5)) return Tree::node("ADJP", {word("JJ", jj)});
    return Tree::node("ADJP", {word("RB", rb), word("JJ", jj)});
  }

  Tree vp(int depth) {
    static const Words vbz{"loves", "sees", "likes", "wants"};
    static const Words vbd{"put", "placed", "left", "found"};
    static const Words vbp{"enjoy", "start", "avoid"};
    static const Words vbg{"writing", "reading", "singing", "painting"};
    static const Words vbn{"seems", "looks", "became"};
    switch (uniform(0, depth > 1 ? 2 : 3)) {
      case 0: return Tree::node("VP", {word("VBZ", vbz), np(depth + 1)});
      case 1: return Tree::node("VP", {word("VBD", vbd), np(depth + 1), pp(depth + 1)});
      case 2: return Tree::node("VP", {word("VBN", vbn), adjp()});
      default: {
        Tree inner = Tree::node("VP", {word("VBG", vbg), np(depth + 1)});
        return Tree::node("VP", {word("VBP", vbp), Tree::node("S", {std::move(inner)})});
      }
    }
  }

  Tree sentence() {
    std::vector<Tree> kids{np(0), vp(0)};
    if (coin(0.7)) kids.push_back(Tree::preterminal(".", "."));
    return Tree::node("S", std::move(kids));
  }
};

}  // namespace

Tree random_tree(std::mt19937_64& rng, int n, const RandomTreeOptions& options) {
  if (n < 1) throw std::invalid_argument("random_tree: n must be positive");
  if (options.num_labels < 1 || options.num_labels > 26 || options.num_tags < 1 || options.max_children < 2)
    throw std::invalid_argument("random_tree: bad options");
  TreeGen gen{rng, options};
  return gen.make(n, true);
}

Tree SyntheticGrammar::sample(std::mt19937_64& rng) const {
  GrammarGen gen{rng};
  for (int attempt = 0; attempt < 10000; ++attempt) {
    Tree t = gen.sentence();
    const int n = sentence_length(t);
    if (n >= min_len_ && n <= max_len_) return t;
  }
  throw std::runtime_error("synthetic grammar cannot produce the requested lengths");
}

std::vector<Tree> SyntheticGrammar::corpus(std::mt19937_64& rng, int count) const {
  std::vector<Tree> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int k = 0; k < count; ++k) out.push_back(sample(rng));
  return out;
}

}  // namespace chartparse
