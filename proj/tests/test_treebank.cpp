#include <random>

#include "chartparse/synth.hpp"
#include "chartparse/treebank.hpp"
#include "doctest.h"

using namespace chartparse;

namespace {
const char* kFig1 = "(S (NP (PRP She)) (VP (VBZ loves) (S (VP (VBG writing) (NN code)))) (. .))";
}

TEST_SUITE("treebank") {
  TEST_CASE("parse the example sentence") {
    const Tree t = parse_sexpr(kFig1);
    CHECK(t.label == "S");
    CHECK(sentence_length(t) == 5);
    CHECK(leaves_of(t)[2] == Leaf{"writing", "VBG"});
    CHECK(render_sexpr(t) == kFig1);
  }

  TEST_CASE("minimal tree") {
    const Tree t = parse_sexpr("(X (T a))");
    CHECK(t.label == "X");
    CHECK(sentence_length(t) == 1);
    CHECK(render_sexpr(t) == "(X (T a))");
  }

  TEST_CASE("parse errors carry byte offsets") {
    try {
      parse_sexpr("(S (NP");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.offset() == 7);
    }
    try {
      parse_sexpr("(S x)");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.offset() == 1);
    }
    CHECK_THROWS_AS(parse_sexpr("(S (NP (DT a) (NN b))) extra"), ParseError);
    CHECK_THROWS_AS(parse_sexpr("()"), ParseError);
    CHECK_THROWS_AS(parse_sexpr("(X (T a b))"), ParseError);
    CHECK_THROWS_AS(render_sexpr(Tree::node("A)", {Tree::preterminal("T", "a")})), std::invalid_argument);
  }

  TEST_CASE("function tags and traces") {
    Tree t = parse_sexpr("(S (NP-SBJ=2 (-NONE- *T*)) (VP (VB go)))");
    normalize_tree(t, {true, true});
    CHECK(render_sexpr(t) == "(S (VP (VB go)))");
  }

  TEST_CASE("unary collapse") {
    const Tree c = collapse_unaries(parse_sexpr(kFig1));
    CHECK(render_sexpr(c) == "(S (NP (PRP She)) (VP (VBZ loves) (S+VP (VBG writing) (NN code))) (. .))");
    const Tree chain = collapse_unaries(parse_sexpr("(A (B (C (T x) (T y))))"));
    CHECK(chain.label == "A+B+C");
    const Tree plain = parse_sexpr("(A (T x) (T y))");
    CHECK(collapse_unaries(plain) == plain);
    CHECK(split_chain("S+VP") == std::vector<std::string>{"S", "VP"});
    CHECK(join_chain({"A", "B"}) == "A+B");
  }

  TEST_CASE("gold index of the example") {
    const GoldIndex g = gold_index(collapse_unaries(parse_sexpr(kFig1)));
    CHECK(g.n == 5);
    CHECK(g.spans == std::map<SpanKey, std::string>{{{0, 5}, "S"}, {{0, 1}, "NP"}, {{1, 4}, "VP"}, {{2, 4}, "S+VP"}});
    CHECK(g.children_boundaries.at({0, 5}) == std::vector<int>{1, 4, 5});
    CHECK(g.children_boundaries.at({1, 4}) == std::vector<int>{2, 4});
    CHECK(g.children_boundaries.at({2, 4}) == std::vector<int>{3, 4});
  }

  TEST_CASE("children boundaries of a ternary node") {
    const Tree t = parse_sexpr("(R (T a) (X (A (T b) (T c)) (B (T d) (T e) (T f)) (C (T g))))");
    const GoldIndex g = gold_index(collapse_unaries(t));
    CHECK(g.children_boundaries.at({1, 7}) == std::vector<int>{3, 6, 7});
  }

  TEST_CASE("single-leaf gold index") {
    const GoldIndex g = gold_index(collapse_unaries(parse_sexpr("(X (T a))")));
    CHECK(g.spans == std::map<SpanKey, std::string>{{{0, 1}, "X"}});
    CHECK(g.children_boundaries.empty());
  }

  TEST_CASE("binarize and unbinarize the example") {
    const Tree t = parse_sexpr(kFig1);
    const BinaryTree b = binarize(collapse_unaries(t));
    CHECK(render_binary(b) ==
          "(S 0 5 (NP 0 1) (EMPTY 1 5 (VP 1 4 (EMPTY 1 2) (S+VP 2 4 (EMPTY 2 3) (EMPTY 3 4))) (EMPTY 4 5)))");
    CHECK(unbinarize(b, leaves_of(t)) == t);
  }

  TEST_CASE("spans of the example") {
    const auto spans = spans_of(parse_sexpr(kFig1));
    const std::vector<LabeledSpan> want{{0, 1, "NP"}, {0, 5, "S"}, {1, 4, "VP"}, {2, 4, "S"}, {2, 4, "VP"}};
    CHECK(spans == want);
    CHECK(spans_of(parse_sexpr("(X (T a))")) == std::vector<LabeledSpan>{{0, 1, "X"}});
    CHECK(spans_of(parse_sexpr("(A (B (T a) (T b)))")) == std::vector<LabeledSpan>{{0, 2, "A"}, {0, 2, "B"}});
  }

  TEST_CASE("empty root falls back") {
    const std::vector<Leaf> leaves{{"a", "T"}, {"b", "T"}};
    BinaryTree b{{0, 2, kEmptyLabel}, {BinaryTree{{0, 1, kEmptyLabel}, {}}, BinaryTree{{1, 2, kEmptyLabel}, {}}}};
    CHECK(render_sexpr(unbinarize(b, leaves)) == "(TOP (T a) (T b))");
  }

  TEST_CASE("round trips on fuzzed trees") {
    std::mt19937_64 rng(7);
    for (int t = 0; t < 2000; ++t) {
      const Tree tree = random_tree(rng, 1 + static_cast<int>(rng() % 12));
      REQUIRE(parse_sexpr(render_sexpr(tree)) == tree);
      REQUIRE(unbinarize(binarize(collapse_unaries(tree)), leaves_of(tree)) == tree);
    }
  }
}
