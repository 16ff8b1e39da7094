#include "chartparse/oracle.hpp"

#include <algorithm>
#include <iterator>
#include <stdexcept>

namespace chartparse {

std::string to_string(EnclosureRule rule) { return rule == EnclosureRule::Strict ? "strict" : "inclusive"; }

EnclosureRule parse_enclosure_rule(const std::string& text) {
  if (text == "strict") return EnclosureRule::Strict;
  if (text == "inclusive") return EnclosureRule::Inclusive;
  throw std::invalid_argument("unknown interpretation '" + text + "' (expected strict or inclusive)");
}

std::string oracle_label(const GoldIndex& gold, int i, int j) {
  auto it = gold.spans.find({i, j});
  return it == gold.spans.end() ? kEmptyLabel : it->second;
}

SpanKey smallest_enclosing(const GoldIndex& gold, int i, int j, bool strict) {
  if (i < 0 || j > gold.n || i >= j) throw std::out_of_range("smallest_enclosing: invalid span");
  if (strict && i == 0 && j == gold.n) throw std::invalid_argument("nothing strictly encloses the whole sentence");
  SpanKey best{0, gold.n};
  for (const auto& [span, label] : gold.spans) {
    const auto [a, b] = span;
    if (a > i || b < j) continue;
    if (strict && a == i && b == j) continue;
    if (b - a < best.second - best.first) best = span;
  }
  return best;
}

namespace {

const std::vector<int>& boundaries(const GoldIndex& gold, SpanKey span) {
  auto it = gold.children_boundaries.find(span);
  if (it == gold.children_boundaries.end()) {
    // The whole sentence counts as gold even when the treebank root is a single word.
    static const std::vector<int> none;
    return none;
  }
  return it->second;
}

}  // namespace

std::vector<int> oracle_parents(const GoldIndex& gold, int i, int j, int R, EnclosureRule rule) {
  if (i < 0 || i >= j || R <= j || R > gold.n)
    throw std::invalid_argument("oracle_parents: state must satisfy i < j < R <= n");
  const auto [ip, jp] = smallest_enclosing(gold, i, j, true);
  (void)ip;
  const int jstar = jp == j ? R : std::min(jp, R);
  const auto [it, jt] = smallest_enclosing(gold, j, jstar, rule == EnclosureRule::Strict);
  if (jt == it + 1) return {jt};
  std::vector<int> out;
  for (int k : boundaries(gold, {it, jt}))
    if (k > j && k <= jstar) out.push_back(k);
  if (out.empty())
    throw std::logic_error("oracle_parents: empty boundary set at (" + std::to_string(i) + ", " + std::to_string(j) +
                           ", " + std::to_string(R) + ")");
  return out;
}

OracleAnswer oracle_answer(const GoldIndex& gold, int i, int j, int R, EnclosureRule rule) {
  OracleAnswer a;
  a.label = oracle_label(gold, i, j);
  if (j < R) {
    a.boundary_set = oracle_parents(gold, i, j, R, rule);
    a.chosen = a.boundary_set.back();
  }
  return a;
}

std::vector<int> oracle_splits_topdown(const GoldIndex& gold, int i, int j) {
  if (i < 0 || j > gold.n || j - i < 2) throw std::invalid_argument("oracle_splits_topdown: span too short");
  std::vector<bool> blocked(static_cast<std::size_t>(j - i + 1), false);
  for (const auto& [span, label] : gold.spans) {
    const auto [a, b] = span;
    if (a < i || b > j || (a == i && b == j)) continue;
    for (int k = a + 1; k < b; ++k) blocked[static_cast<std::size_t>(k - i)] = true;
  }
  std::vector<int> out;
  for (int k = i + 1; k < j; ++k)
    if (!blocked[static_cast<std::size_t>(k - i)]) out.push_back(k);
  return out;
}

std::vector<std::string> oracle_label_table(const GoldIndex& gold) {
  std::vector<std::string> out{kEmptyLabel};
  for (const auto& [span, label] : gold.spans)
    if (std::find(out.begin(), out.end(), label) == out.end()) out.push_back(label);
  return out;
}

OracleDecisions::OracleDecisions(const GoldIndex& gold, const std::vector<std::string>& labels, EnclosureRule rule)
    : gold_(gold), rule_(rule) {
  for (std::size_t k = 0; k < labels.size(); ++k) ids_.emplace(labels[k], static_cast<LabelId>(k));
}

LabelId OracleDecisions::label(int i, int j) {
  const std::string l = oracle_label(gold_, i, j);
  auto it = ids_.find(l);
  if (it == ids_.end()) throw std::invalid_argument("gold label '" + l + "' is not in the label table");
  return it->second;
}

int OracleDecisions::split(int i, int j) { return oracle_splits_topdown(gold_, i, j).front(); }

int OracleDecisions::parent(int i, int j, int R) { return oracle_parents(gold_, i, j, R, rule_).back(); }

BinaryTree binary_from_spans(std::vector<LabeledSpan> spans, int n) {
  // Parents before children: by left edge, then longer first.
  std::sort(spans.begin(), spans.end(), [](const LabeledSpan& a, const LabeledSpan& b) {
    return a.i != b.i ? a.i < b.i : a.j > b.j;
  });
  std::size_t pos = 0;
  auto build = [&](auto&& self, int i, int j) -> BinaryTree {
    if (pos >= spans.size() || spans[pos].i != i || spans[pos].j != j)
      throw std::invalid_argument("spans do not form a full binary bracketing");
    BinaryTree node;
    node.span = spans[pos++];
    if (j - i > 1) {
      if (pos >= spans.size() || spans[pos].i != i) throw std::invalid_argument("missing left child");
      const int k = spans[pos].j;
      node.children.push_back(self(self, i, k));
      node.children.push_back(self(self, k, j));
    }
    return node;
  };
  BinaryTree root = build(build, 0, n);
  if (pos != spans.size()) throw std::invalid_argument("spans do not form a full binary bracketing");
  return root;
}

// ---------------------------------------------------------------------------

InOrderMachine::InOrderMachine(int n) : n_(n) {
  if (n < 1) throw std::invalid_argument("empty sentence");
  frames_.push_back({0, 1, n, false});
}

InOrderMachine::Need InOrderMachine::need() const {
  if (frames_.empty()) return Need::Done;
  return frames_.back().labeled ? Need::Parent : Need::Label;
}

int InOrderMachine::i() const { return frames_.at(frames_.size() - 1).i; }
int InOrderMachine::j() const { return frames_.at(frames_.size() - 1).j; }
int InOrderMachine::R() const { return frames_.at(frames_.size() - 1).R; }

void InOrderMachine::apply_label(const std::string& label) {
  if (need() != Need::Label) throw std::logic_error("in-order state does not expect a label");
  Frame& f = frames_.back();
  spans_.push_back({f.i, f.j, label});
  f.labeled = true;
  settle();
}

void InOrderMachine::apply_parent(int k) {
  if (need() != Need::Parent) throw std::logic_error("in-order state does not expect a parent");
  const Frame f = frames_.back();
  if (k <= f.j || k > f.R) throw std::invalid_argument("parent boundary outside (j, R]");
  frames_.back().j = k;  // the frame now stands for the pending parent (i, k)
  frames_.back().labeled = false;
  frames_.push_back({f.j, f.j + 1, k, false});
}

// A labeled frame that reached its bound is a finished right subtree; its parent
// frame below now needs a label.
void InOrderMachine::settle() {
  while (!frames_.empty() && frames_.back().labeled && frames_.back().j == frames_.back().R) frames_.pop_back();
}

BinaryTree InOrderMachine::result() const {
  if (need() != Need::Done) throw std::logic_error("in-order decode is not finished");
  return binary_from_spans(spans_, n_);
}

TopDownMachine::TopDownMachine(int n) : n_(n) {
  if (n < 1) throw std::invalid_argument("empty sentence");
  frames_.push_back({0, n, false});
}

TopDownMachine::Need TopDownMachine::need() const {
  if (frames_.empty()) return Need::Done;
  return frames_.back().labeled ? Need::Split : Need::Label;
}

int TopDownMachine::i() const { return frames_.at(frames_.size() - 1).i; }
int TopDownMachine::j() const { return frames_.at(frames_.size() - 1).j; }

void TopDownMachine::apply_label(const std::string& label) {
  if (need() != Need::Label) throw std::logic_error("top-down state does not expect a label");
  Frame& f = frames_.back();
  spans_.push_back({f.i, f.j, label});
  if (f.j - f.i == 1) frames_.pop_back();
  else f.labeled = true;
}

void TopDownMachine::apply_split(int k) {
  if (need() != Need::Split) throw std::logic_error("top-down state does not expect a split");
  const Frame f = frames_.back();
  if (k <= f.i || k >= f.j) throw std::invalid_argument("split outside (i, j)");
  frames_.pop_back();
  frames_.push_back({k, f.j, false});
  frames_.push_back({f.i, k, false});
}

BinaryTree TopDownMachine::result() const {
  if (need() != Need::Done) throw std::logic_error("top-down decode is not finished");
  return binary_from_spans(spans_, n_);
}

// ---------------------------------------------------------------------------

namespace {

// Best label per span, read straight off the n-ary gold tree: the chain of
// labels over that span, outermost first.
int collect_chains(const Tree& t, int start, std::map<SpanKey, std::vector<std::string>>& out) {
  if (t.is_preterminal()) return start + 1;
  std::vector<std::string> own = split_chain(t.label);
  int pos = start;
  for (const Tree& c : t.children) pos = collect_chains(c, pos, out);
  auto& chain = out[{start, pos}];
  chain.insert(chain.begin(), own.begin(), own.end());
  return pos;
}

struct Reference {
  std::vector<Leaf> leaves;
  std::vector<LabeledSpan> gold_spans;
  std::map<SpanKey, std::string> best;

  explicit Reference(const Tree& gold) : leaves(leaves_of(gold)), gold_spans(spans_of(gold)) {
    std::map<SpanKey, std::vector<std::string>> chains;
    collect_chains(gold, 0, chains);
    for (const auto& [span, chain] : chains) best[span] = join_chain(chain);
  }

  const std::string& label_for(int i, int j) const {
    auto it = best.find({i, j});
    return it == best.end() ? kEmptyLabel : it->second;
  }

  int matched(const BinaryTree& bt) const {
    const std::vector<LabeledSpan> pred = spans_of(unbinarize(bt, leaves));
    std::vector<LabeledSpan> common;
    std::set_intersection(pred.begin(), pred.end(), gold_spans.begin(), gold_spans.end(),
                          std::back_inserter(common));
    return static_cast<int>(common.size());
  }
};

template <typename Machine>
void fill_labels(const Reference& ref, Machine& m) {
  while (m.need() == Machine::Need::Label) m.apply_label(ref.label_for(m.i(), m.j()));
}

int reach_inorder(const Reference& ref, InOrderMachine m) {
  fill_labels(ref, m);
  if (m.need() == InOrderMachine::Need::Done) return ref.matched(m.result());
  int best = -1;
  for (int k = m.j() + 1; k <= m.R(); ++k) {
    InOrderMachine next = m;
    next.apply_parent(k);
    best = std::max(best, reach_inorder(ref, std::move(next)));
  }
  return best;
}

int reach_topdown(const Reference& ref, TopDownMachine m) {
  fill_labels(ref, m);
  if (m.need() == TopDownMachine::Need::Done) return ref.matched(m.result());
  int best = -1;
  for (int k = m.i() + 1; k < m.j(); ++k) {
    TopDownMachine next = m;
    next.apply_split(k);
    best = std::max(best, reach_topdown(ref, std::move(next)));
  }
  return best;
}

}  // namespace

int brute_force_reachable(const Tree& gold, const InOrderMachine& state) {
  if (state.length() != sentence_length(gold)) throw std::invalid_argument("state and gold tree differ in length");
  return reach_inorder(Reference(gold), state);
}

int brute_force_reachable(const Tree& gold, const TopDownMachine& state) {
  if (state.length() != sentence_length(gold)) throw std::invalid_argument("state and gold tree differ in length");
  return reach_topdown(Reference(gold), state);
}

void OracleCheckReport::merge(const OracleCheckReport& o) {
  trees += o.trees;
  inorder_states += o.inorder_states;
  topdown_states += o.topdown_states;
  soundness_violations += o.soundness_violations;
  completeness_violations += o.completeness_violations;
  bound_violations += o.bound_violations;
  full_set_violations += o.full_set_violations;
  topdown_violations += o.topdown_violations;
}

namespace {

// One exhaustive pass: the value of every state is computed once from its
// children, and each decision state is checked against the oracle on the way.
struct Checker {
  const Reference& ref;
  const GoldIndex& gold;
  const OracleCheckOptions& opt;
  OracleCheckReport& rep;

  int inorder(InOrderMachine m) {
    fill_labels(ref, m);
    if (m.need() == InOrderMachine::Need::Done) return ref.matched(m.result());
    const int i = m.i(), j = m.j(), R = m.R();
    std::vector<int> value(static_cast<std::size_t>(R + 1), -1);
    int best = -1;
    for (int k = j + 1; k <= R; ++k) {
      InOrderMachine next = m;
      next.apply_parent(k);
      value[static_cast<std::size_t>(k)] = inorder(std::move(next));
      best = std::max(best, value[static_cast<std::size_t>(k)]);
    }
    ++rep.inorder_states;
    std::vector<int> S;
    try {
      S = oracle_parents(gold, i, j, R, opt.rule);
    } catch (const std::logic_error&) {
      ++rep.bound_violations;
      return best;
    }
    if (std::any_of(S.begin(), S.end(), [&](int k) { return k <= j || k > R; })) {
      ++rep.bound_violations;
      return best;
    }
    if (value[static_cast<std::size_t>(S.back())] != best) ++rep.soundness_violations;
    if (std::any_of(S.begin(), S.end(), [&](int k) { return value[static_cast<std::size_t>(k)] != best; }))
      ++rep.full_set_violations;
    return best;
  }

  int topdown(TopDownMachine m) {
    fill_labels(ref, m);
    if (m.need() == TopDownMachine::Need::Done) return ref.matched(m.result());
    const int i = m.i(), j = m.j();
    std::vector<int> value(static_cast<std::size_t>(j + 1), -1);
    int best = -1;
    for (int k = i + 1; k < j; ++k) {
      TopDownMachine next = m;
      next.apply_split(k);
      value[static_cast<std::size_t>(k)] = topdown(std::move(next));
      best = std::max(best, value[static_cast<std::size_t>(k)]);
    }
    ++rep.topdown_states;
    std::vector<int> expected;
    for (int k = i + 1; k < j; ++k)
      if (value[static_cast<std::size_t>(k)] == best) expected.push_back(k);
    if (oracle_splits_topdown(gold, i, j) != expected) ++rep.topdown_violations;
    return best;
  }
};

}  // namespace

OracleCheckReport check_oracle(const Tree& gold, const OracleCheckOptions& options) {
  OracleCheckReport rep;
  rep.trees = 1;
  const int n = sentence_length(gold);
  const Reference ref(gold);
  const GoldIndex index = gold_index(gold);
  Checker checker{ref, index, options, rep};

  const int total = static_cast<int>(ref.gold_spans.size());
  if (checker.inorder(InOrderMachine(n)) != total) ++rep.completeness_violations;
  if (options.check_topdown) checker.topdown(TopDownMachine(n));

  // Following the oracle from the start must rebuild the gold tree.
  const std::vector<std::string> labels = oracle_label_table(index);
  OracleDecisions oracle(index, labels, options.rule);
  try {
    if (unbinarize(decode_inorder(oracle, n, labels), ref.leaves) != gold) ++rep.completeness_violations;
    if (options.check_topdown && unbinarize(decode_topdown(oracle, n, labels), ref.leaves) != gold)
      ++rep.completeness_violations;
  } catch (const std::logic_error&) {
    ++rep.completeness_violations;
  }
  return rep;
}

}  // namespace chartparse
