#pragma once

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace chartparse {

/// Label of spans that exist only as binarization artifacts. Its score is fixed to 0.
inline const std::string kEmptyLabel = "\xE2\x88\x85";  // U+2205
/// Spelling of the empty label in files.
inline const std::string kEmptyLabelAscii = "EMPTY";
/// Root label emitted when a decoder leaves the whole-sentence span unlabeled.
inline const std::string kFallbackRootLabel = "TOP";
/// Joins the labels of a collapsed unary chain, outermost first.
inline constexpr char kUnarySeparator = '+';

/// `index` is the 0-based byte where reading stopped; offset() reports it 1-based.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t index)
      : std::runtime_error(what + " at offset " + std::to_string(index + 1)), offset_(index + 1) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// N-ary constituency tree. A node without children is a preterminal: `label` is the
/// POS tag and `word` the token. Internal nodes carry a nonterminal label.
struct Tree {
  std::string label;
  std::string word;
  std::vector<Tree> children;

  bool is_preterminal() const { return children.empty(); }
  bool operator==(const Tree&) const = default;

  static Tree preterminal(std::string tag, std::string word) {
    return Tree{std::move(tag), std::move(word), {}};
  }
  static Tree node(std::string label, std::vector<Tree> children) {
    return Tree{std::move(label), {}, std::move(children)};
  }
};

struct Leaf {
  std::string word;
  std::string tag;
  bool operator==(const Leaf&) const = default;
};

/// Span (i, j) over tokens i..j-1 with a label.
struct LabeledSpan {
  int i = 0;
  int j = 0;
  std::string label;

  auto operator<=>(const LabeledSpan&) const = default;
};

/// Binarized decode tree. Either a leaf over (i, i+1) or a node with exactly two
/// children (i, k) and (k, j). Labels may be the empty label or a collapsed chain.
struct BinaryTree {
  LabeledSpan span;
  std::vector<BinaryTree> children;

  bool is_leaf() const { return children.empty(); }
  const BinaryTree& left() const { return children.at(0); }
  const BinaryTree& right() const { return children.at(1); }
  bool operator==(const BinaryTree&) const = default;
};

using SpanKey = std::pair<int, int>;

/// Gold constituents of a unary-collapsed tree, keyed by span.
struct GoldIndex {
  int n = 0;
  std::map<SpanKey, std::string> spans;
  /// b(i, j): sorted right boundaries of the children of each gold span of length > 1.
  std::map<SpanKey, std::vector<int>> children_boundaries;

  bool contains(int i, int j) const { return spans.count({i, j}) != 0; }
};

struct NormalizeOptions {
  bool strip_function_tags = true;
  bool remove_traces = false;
};

struct RenderOptions {
  char unary_separator = kUnarySeparator;
};

Tree parse_sexpr(std::string_view text);
std::string render_sexpr(const Tree& tree, const RenderOptions& options = {});

/// Strips `-FUNC`/`=index` suffixes and optionally deletes -NONE- subtrees.
void normalize_tree(Tree& tree, const NormalizeOptions& options = {});

Tree collapse_unaries(const Tree& tree);
GoldIndex gold_index(const Tree& tree);

/// Right-branching implicit binarization of a collapsed tree; extra nodes get the empty label.
BinaryTree binarize(const Tree& collapsed);

/// Deletes empty-labeled nodes, expands collapsed chains and reattaches the leaves.
Tree unbinarize(const BinaryTree& tree, const std::vector<Leaf>& leaves,
                const std::string& fallback_root = kFallbackRootLabel);

/// One labeled span per internal node (chains expanded), sorted.
std::vector<LabeledSpan> spans_of(const Tree& tree);

std::vector<Leaf> leaves_of(const Tree& tree);
int sentence_length(const Tree& tree);

std::vector<std::string> split_chain(const std::string& label);
std::string join_chain(const std::vector<std::string>& labels);

std::string render_binary(const BinaryTree& tree);

class TreebankError : public std::runtime_error {
 public:
  TreebankError(const std::string& what, std::size_t line)
      : std::runtime_error(what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Reads one tree per non-blank line. Throws TreebankError carrying the 1-based line.
std::vector<Tree> read_treebank(const std::string& path, const NormalizeOptions& options = {});
std::vector<Tree> parse_treebank(std::string_view text, const NormalizeOptions& options = {});
void write_treebank(const std::string& path, const std::vector<Tree>& trees);

}  // namespace chartparse
