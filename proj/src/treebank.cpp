#include "chartparse/treebank.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace chartparse {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

class SexprReader {
 public:
  explicit SexprReader(std::string_view text) : text_(text) {}

  Tree read_root() {
    skip_space();
    if (pos_ >= text_.size()) throw ParseError("empty input", pos_);
    const std::size_t start = pos_;
    Tree tree = read_node();
    skip_space();
    if (pos_ != text_.size()) throw ParseError("trailing input after tree", pos_);
    // PTB files wrap each tree in an unlabeled bracket: "( (S ...) )".
    while (tree.label.empty() && tree.children.size() == 1) tree = std::move(tree.children.front());
    if (tree.label.empty()) throw ParseError("unlabeled node with several children", start);
    if (tree.is_preterminal()) throw ParseError("root is a preterminal", start);
    return tree;
  }

 private:
  void skip_space() {
    while (pos_ < text_.size() && is_space(text_[pos_])) ++pos_;
  }

  bool at_end() const { return pos_ >= text_.size(); }

  std::string read_atom() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && !is_space(text_[pos_]) && text_[pos_] != '(' && text_[pos_] != ')')
      ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  Tree read_node() {
    const std::size_t open = pos_;
    if (at_end() || text_[pos_] != '(') throw ParseError("expected '('", pos_);
    ++pos_;
    skip_space();
    if (at_end()) throw ParseError("unbalanced parentheses", pos_);

    Tree node;
    if (text_[pos_] != '(' && text_[pos_] != ')') {
      node.label = read_atom();
      if (node.label == kEmptyLabelAscii) node.label = kEmptyLabel;
    }

    std::vector<std::string> words;
    while (true) {
      skip_space();
      if (at_end()) throw ParseError("unbalanced parentheses", pos_);
      const char c = text_[pos_];
      if (c == ')') {
        ++pos_;
        break;
      }
      if (c == '(') {
        node.children.push_back(read_node());
      } else {
        words.push_back(read_atom());
      }
    }

    if (words.empty() && node.children.empty()) throw ParseError("empty node", open);
    if (!words.empty()) {
      if (!node.children.empty()) throw ParseError("node mixes words and subtrees", open);
      if (words.size() != 1)
        throw ParseError("preterminal with " + std::to_string(words.size()) + " words", open);
      if (node.label.empty()) throw ParseError("preterminal without a tag", open);
      node.word = std::move(words.front());
    }
    return node;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

void check_atom(const std::string& atom, const char* what) {
  if (atom.empty()) throw std::invalid_argument(std::string("empty ") + what);
  for (char c : atom) {
    if (c == '(' || c == ')' || is_space(c))
      throw std::invalid_argument(std::string("illegal ") + what + " character in '" + atom + "'");
  }
}

std::string file_label(const std::string& label, char separator) {
  if (label == kEmptyLabel) return kEmptyLabelAscii;
  if (separator == kUnarySeparator) return label;
  std::string out = label;
  std::replace(out.begin(), out.end(), kUnarySeparator, separator);
  return out;
}

void render_into(const Tree& tree, const RenderOptions& options, std::string& out) {
  check_atom(tree.label, "label");
  out += '(';
  out += file_label(tree.label, options.unary_separator);
  if (tree.is_preterminal()) {
    check_atom(tree.word, "word");
    out += ' ';
    out += tree.word;
  } else {
    for (const Tree& child : tree.children) {
      out += ' ';
      render_into(child, options, out);
    }
  }
  out += ')';
}

std::string strip_function_tag(const std::string& label) {
  if (label.empty() || label.front() == '-' || label == kEmptyLabel) return label;
  const auto cut = label.find_first_of("-=");
  return cut == std::string::npos ? label : label.substr(0, cut);
}

// Returns false when the subtree became empty and should be dropped.
bool normalize_node(Tree& tree, const NormalizeOptions& options) {
  if (tree.is_preterminal()) return !(options.remove_traces && tree.label == "-NONE-");
  if (options.strip_function_tags) tree.label = strip_function_tag(tree.label);
  std::vector<Tree> kept;
  kept.reserve(tree.children.size());
  for (Tree& child : tree.children) {
    if (normalize_node(child, options)) kept.push_back(std::move(child));
  }
  tree.children = std::move(kept);
  return !tree.children.empty();
}

Tree collapse_node(const Tree& tree) {
  if (tree.is_preterminal()) return tree;
  std::string label = tree.label;
  const Tree* cur = &tree;
  while (cur->children.size() == 1 && !cur->children.front().is_preterminal()) {
    cur = &cur->children.front();
    label += kUnarySeparator;
    label += cur->label;
  }
  Tree out = Tree::node(std::move(label), {});
  out.children.reserve(cur->children.size());
  for (const Tree& child : cur->children) out.children.push_back(collapse_node(child));
  return out;
}

int index_node(const Tree& tree, int start, GoldIndex& index) {
  if (tree.is_preterminal()) return start + 1;
  int pos = start;
  std::vector<int> boundaries;
  for (const Tree& child : tree.children) {
    pos = index_node(child, pos, index);
    boundaries.push_back(pos);
  }
  index.spans[{start, pos}] = tree.label;
  if (pos - start > 1) index.children_boundaries[{start, pos}] = std::move(boundaries);
  return pos;
}

BinaryTree binarize_node(const Tree& tree, int start, int& end) {
  if (tree.is_preterminal()) {
    end = start + 1;
    return BinaryTree{{start, start + 1, kEmptyLabel}, {}};
  }
  if (tree.children.size() == 1) {
    // Collapsed trees only keep single-child nodes above a preterminal.
    BinaryTree leaf = binarize_node(tree.children.front(), start, end);
    if (!leaf.is_leaf()) throw std::invalid_argument("binarize: tree is not unary-collapsed");
    leaf.span.label = tree.label;
    return leaf;
  }
  std::vector<BinaryTree> parts;
  int pos = start;
  for (const Tree& child : tree.children) {
    int child_end = pos;
    parts.push_back(binarize_node(child, pos, child_end));
    pos = child_end;
  }
  end = pos;
  BinaryTree right = std::move(parts.back());
  for (std::size_t t = parts.size() - 2; t >= 1; --t) {
    LabeledSpan span{parts[t].span.i, right.span.j, kEmptyLabel};
    right = BinaryTree{span, {std::move(parts[t]), std::move(right)}};
  }
  return BinaryTree{{start, end, tree.label}, {std::move(parts.front()), std::move(right)}};
}

Tree wrap_chain(const std::string& label, std::vector<Tree> children) {
  const auto chain = split_chain(label);
  Tree inner = Tree::node(chain.back(), std::move(children));
  for (auto it = chain.rbegin() + 1; it != chain.rend(); ++it) {
    std::vector<Tree> one;
    one.push_back(std::move(inner));
    inner = Tree::node(*it, std::move(one));
  }
  return inner;
}

std::vector<Tree> unbinarize_node(const BinaryTree& node, const std::vector<Leaf>& leaves) {
  std::vector<Tree> inner;
  if (node.is_leaf()) {
    if (node.span.j != node.span.i + 1) throw std::invalid_argument("unbinarize: leaf spans more than one token");
    const Leaf& leaf = leaves.at(static_cast<std::size_t>(node.span.i));
    inner.push_back(Tree::preterminal(leaf.tag, leaf.word));
  } else {
    if (node.children.size() != 2 || node.left().span.i != node.span.i ||
        node.left().span.j != node.right().span.i || node.right().span.j != node.span.j)
      throw std::invalid_argument("unbinarize: children do not partition their parent");
    inner = unbinarize_node(node.left(), leaves);
    auto right = unbinarize_node(node.right(), leaves);
    for (Tree& t : right) inner.push_back(std::move(t));
  }
  if (node.span.label == kEmptyLabel || node.span.label.empty()) return inner;
  std::vector<Tree> out;
  out.push_back(wrap_chain(node.span.label, std::move(inner)));
  return out;
}

int collect_spans(const Tree& tree, int start, std::vector<LabeledSpan>& out) {
  if (tree.is_preterminal()) return start + 1;
  int pos = start;
  for (const Tree& child : tree.children) pos = collect_spans(child, pos, out);
  for (const auto& label : split_chain(tree.label)) out.push_back({start, pos, label});
  return pos;
}

void collect_leaves(const Tree& tree, std::vector<Leaf>& out) {
  if (tree.is_preterminal()) {
    out.push_back({tree.word, tree.label});
    return;
  }
  for (const Tree& child : tree.children) collect_leaves(child, out);
}

void render_binary_into(const BinaryTree& tree, std::string& out) {
  out += '(';
  out += tree.span.label == kEmptyLabel ? kEmptyLabelAscii : tree.span.label;
  out += ' ' + std::to_string(tree.span.i) + ' ' + std::to_string(tree.span.j);
  for (const auto& child : tree.children) {
    out += ' ';
    render_binary_into(child, out);
  }
  out += ')';
}

}  // namespace

Tree parse_sexpr(std::string_view text) { return SexprReader(text).read_root(); }

std::string render_sexpr(const Tree& tree, const RenderOptions& options) {
  std::string out;
  render_into(tree, options, out);
  return out;
}

void normalize_tree(Tree& tree, const NormalizeOptions& options) {
  if (!normalize_node(tree, options)) throw std::invalid_argument("tree is empty after normalization");
}

Tree collapse_unaries(const Tree& tree) { return collapse_node(tree); }

GoldIndex gold_index(const Tree& tree) {
  GoldIndex index;
  index.n = index_node(collapse_unaries(tree), 0, index);
  return index;
}

BinaryTree binarize(const Tree& collapsed) {
  int end = 0;
  return binarize_node(collapse_unaries(collapsed), 0, end);
}

Tree unbinarize(const BinaryTree& tree, const std::vector<Leaf>& leaves, const std::string& fallback_root) {
  if (tree.span.i != 0 || tree.span.j != static_cast<int>(leaves.size()))
    throw std::invalid_argument("unbinarize: root does not cover the sentence");
  auto nodes = unbinarize_node(tree, leaves);
  if (nodes.size() == 1 && !nodes.front().is_preterminal()) return std::move(nodes.front());
  return Tree::node(fallback_root, std::move(nodes));
}

std::vector<LabeledSpan> spans_of(const Tree& tree) {
  std::vector<LabeledSpan> out;
  collect_spans(tree, 0, out);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Leaf> leaves_of(const Tree& tree) {
  std::vector<Leaf> out;
  collect_leaves(tree, out);
  return out;
}

int sentence_length(const Tree& tree) {
  if (tree.is_preterminal()) return 1;
  int n = 0;
  for (const Tree& child : tree.children) n += sentence_length(child);
  return n;
}

std::vector<std::string> split_chain(const std::string& label) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto cut = label.find(kUnarySeparator, start);
    out.push_back(label.substr(start, cut - start));
    if (cut == std::string::npos) break;
    start = cut + 1;
  }
  return out;
}

std::string join_chain(const std::vector<std::string>& labels) {
  std::string out;
  for (const auto& label : labels) {
    if (!out.empty()) out += kUnarySeparator;
    out += label;
  }
  return out;
}

std::string render_binary(const BinaryTree& tree) {
  std::string out;
  render_binary_into(tree, out);
  return out;
}

std::vector<Tree> parse_treebank(std::string_view text, const NormalizeOptions& options) {
  std::vector<Tree> trees;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    const auto line = text.substr(start, end - start);
    if (!std::all_of(line.begin(), line.end(), is_space)) {
      try {
        Tree tree = parse_sexpr(line);
        normalize_tree(tree, options);
        trees.push_back(std::move(tree));
      } catch (const std::exception& e) {
        throw TreebankError("line " + std::to_string(line_no) + ": " + e.what(), line_no);
      }
    }
    start = end + 1;
  }
  return trees;
}

std::vector<Tree> read_treebank(const std::string& path, const NormalizeOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TreebankError("cannot open " + path, 0);
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_treebank(buffer.str(), options);
  } catch (const TreebankError& e) {
    throw TreebankError(path + ": " + e.what(), e.line());
  }
}

void write_treebank(const std::string& path, const std::vector<Tree>& trees) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const Tree& tree : trees) out << render_sexpr(tree) << '\n';
}

}  // namespace chartparse
