#pragma once

#include <map>
#include <string>
#include <vector>

#include "chartparse/decoders.hpp"
#include "chartparse/treebank.hpp"

namespace chartparse {

/// How the second enclosure query of the boundary oracle treats a gold span equal to (j, j*).
enum class EnclosureRule {
  Strict,     // smallest gold span strictly enclosing (j, j*)
  Inclusive,  // (j, j*) itself counts when it is gold
};

std::string to_string(EnclosureRule rule);
EnclosureRule parse_enclosure_rule(const std::string& text);

struct OracleAnswer {
  std::string label;
  std::vector<int> boundary_set;  // sorted ascending
  int chosen = -1;                // max(boundary_set), or -1 when empty
};

/// Gold collapsed label of (i, j), or the empty label.
std::string oracle_label(const GoldIndex& gold, int i, int j);

/// Smallest gold span containing (i, j); (0, n) always counts as gold.
/// Throws std::invalid_argument when strict and (i, j) = (0, n).
SpanKey smallest_enclosing(const GoldIndex& gold, int i, int j, bool strict);

/// Right boundaries k in (j, R] that keep every still-reachable gold span reachable.
std::vector<int> oracle_parents(const GoldIndex& gold, int i, int j, int R,
                                EnclosureRule rule = EnclosureRule::Strict);
OracleAnswer oracle_answer(const GoldIndex& gold, int i, int j, int R, EnclosureRule rule = EnclosureRule::Strict);

/// Split points k in (i, j) that cross no gold span lying strictly inside (i, j).
std::vector<int> oracle_splits_topdown(const GoldIndex& gold, int i, int j);

/// Oracle label, rightmost oracle boundary, smallest oracle split.
class OracleDecisions : public DecisionMaker {
 public:
  OracleDecisions(const GoldIndex& gold, const std::vector<std::string>& labels,
                  EnclosureRule rule = EnclosureRule::Strict);
  LabelId label(int i, int j) override;
  int split(int i, int j) override;
  int parent(int i, int j, int R) override;

 private:
  const GoldIndex& gold_;
  std::map<std::string, LabelId> ids_;
  EnclosureRule rule_;
};

/// Label table covering every collapsed label of `gold`, empty label first.
std::vector<std::string> oracle_label_table(const GoldIndex& gold);

/// Rebuilds a binary tree from the labeled spans of a full binary bracketing over (0, n).
BinaryTree binary_from_spans(std::vector<LabeledSpan> spans, int n);

// ---------------------------------------------------------------------------
// Explicit decoder states, used to enumerate every completion of a partial decode.

class InOrderMachine {
 public:
  enum class Need { Label, Parent, Done };

  explicit InOrderMachine(int n);

  Need need() const;
  int i() const;
  int j() const;
  int R() const;
  void apply_label(const std::string& label);
  void apply_parent(int k);

  int length() const { return n_; }
  const std::vector<LabeledSpan>& spans() const { return spans_; }
  BinaryTree result() const;

 private:
  struct Frame {
    int i, j, R;
    bool labeled;
  };
  void settle();

  int n_;
  std::vector<Frame> frames_;
  std::vector<LabeledSpan> spans_;
};

class TopDownMachine {
 public:
  enum class Need { Label, Split, Done };

  explicit TopDownMachine(int n);

  Need need() const;
  int i() const;
  int j() const;
  void apply_label(const std::string& label);
  void apply_split(int k);

  int length() const { return n_; }
  const std::vector<LabeledSpan>& spans() const { return spans_; }
  BinaryTree result() const;

 private:
  struct Frame {
    int i, j;
    bool labeled;
  };

  int n_;
  std::vector<Frame> frames_;
  std::vector<LabeledSpan> spans_;
};

/// Reference oracle: completes the decode in every possible way, giving each
/// future span its best label, and returns the largest number of gold labeled
/// spans in any completed and unbinarized tree. `gold` is the n-ary tree.
int brute_force_reachable(const Tree& gold, const InOrderMachine& state);
int brute_force_reachable(const Tree& gold, const TopDownMachine& state);

struct OracleCheckOptions {
  EnclosureRule rule = EnclosureRule::Strict;
  bool check_topdown = true;
};

struct OracleCheckReport {
  std::size_t trees = 0;
  std::size_t inorder_states = 0;   // parent decision states visited
  std::size_t topdown_states = 0;   // split decision states visited
  std::size_t soundness_violations = 0;     // rightmost boundary loses reachable gold spans
  std::size_t completeness_violations = 0;  // oracle-following decode differs from gold
  std::size_t bound_violations = 0;         // empty set or k outside (j, R]
  std::size_t full_set_violations = 0;      // some element of S loses reachable gold spans
  std::size_t topdown_violations = 0;       // split oracle differs from brute force

  std::size_t violations() const {
    return soundness_violations + completeness_violations + bound_violations + topdown_violations;
  }
  void merge(const OracleCheckReport& other);
};

/// Exhaustively checks the oracles on one gold tree (n-ary, already normalized).
OracleCheckReport check_oracle(const Tree& gold, const OracleCheckOptions& options = {});

}  // namespace chartparse
