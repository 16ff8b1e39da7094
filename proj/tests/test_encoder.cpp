#include <random>

#include "chartparse/encoder.hpp"
#include "chartparse/treebank.hpp"
#include "chartparse/vocab.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace chartparse;

namespace {

struct Fixture {
  Vocab vocab = Vocab::build({parse_sexpr(testsupport::kFig1)});
  EncoderDims dims{8, 4, 4, 6, 10, 12};
  ad::ParamStore store;
  Encoder encoder;
  Scorer scorer;

  Fixture() {
    std::mt19937_64 rng(3);
    Encoder::declare(store, dims, vocab, rng);
    Scorer::declare(store, 20, 20, dims.mlp_dim, vocab.labels.size(), rng);
    encoder = Encoder(store, dims);
    scorer = Scorer(store);
  }

  std::vector<std::string> words{"She", "loves", "writing", "code", "."};
  std::vector<std::string> tags{"PRP", "VBZ", "VBG", "NN", "."};
};

// Plain loops, independent of the graph code.
std::vector<double> affine_relu(const ad::Tensor& w, const ad::Tensor& b, const std::vector<double>& x) {
  std::vector<double> out(w.rows());
  for (std::size_t r = 0; r < w.rows(); ++r) {
    double acc = b[r];
    for (std::size_t c = 0; c < w.cols(); ++c) acc += w.at(r, c) * x[c];
    out[r] = acc > 0 ? acc : 0;
  }
  return out;
}

}  // namespace

TEST_SUITE("encoder") {
  TEST_CASE("encoding shape and determinism") {
    Fixture f;
    ad::Graph g1, g2;
    const auto a = f.encoder.encode(g1, f.vocab, f.words, f.tags);
    const auto b = f.encoder.encode(g2, f.vocab, f.words, f.tags);
    CHECK(a.fwd.size() == 6);
    CHECK(a.bwd.size() == 6);
    for (std::size_t k = 0; k < 6; ++k) {
      CHECK(a.fwd[k].value() == b.fwd[k].value());
      CHECK(a.bwd[k].value() == b.bwd[k].value());
    }
    ad::Graph g3;
    CHECK_THROWS_AS(f.encoder.encode(g3, f.vocab, {}, {}), std::invalid_argument);
  }

  TEST_CASE("span vector is the fencepost difference") {
    Fixture f;
    ad::Graph g;
    const auto enc = f.encoder.encode(g, f.vocab, f.words, f.tags);
    const auto s = span_vector(enc, 1, 4).value();
    REQUIRE(s.size() == 20);
    for (std::size_t k = 0; k < 10; ++k) {
      CHECK(s[k] == enc.fwd[4].value()[k] - enc.fwd[1].value()[k]);
      CHECK(s[10 + k] == enc.bwd[1].value()[k] - enc.bwd[4].value()[k]);
    }
    CHECK_THROWS(span_vector(enc, 2, 2));
    CHECK_THROWS(span_vector(enc, 3, 1));

    SentenceEncoding zero;
    zero.n = 2;
    for (int k = 0; k <= 2; ++k) {
      zero.fwd.push_back(g.zeros(3));
      zero.bwd.push_back(g.zeros(3));
    }
    for (double x : span_vector(zero, 0, 2).value().data()) CHECK(x == 0.0);
  }

  TEST_CASE("label scores match a hand-rolled evaluation") {
    Fixture f;
    ad::Graph g;
    const auto enc = f.encoder.encode(g, f.vocab, f.words, f.tags);
    const ad::Expr s = span_vector(enc, 0, 3);
    const auto got = f.scorer.label_scores(g, s).value();
    const auto& st = f.store;
    const std::vector<double> x(s.value().data().begin(), s.value().data().end());
    const auto h1 = affine_relu(st.get("label.W1").value, st.get("label.b1").value, x);
    const auto h2 = affine_relu(st.get("label.W2").value, st.get("label.b2").value, h1);
    const auto& out = st.get("label.out").value;
    REQUIRE(got.size() == static_cast<std::size_t>(f.vocab.labels.size()));
    CHECK(got[0] == 0.0);
    for (std::size_t r = 0; r < out.rows(); ++r) {
      double acc = 0;
      for (std::size_t c = 0; c < out.cols(); ++c) acc += out.at(r, c) * h2[c];
      CHECK(got[r + 1] == doctest::Approx(acc).epsilon(1e-12));
    }
  }

  TEST_CASE("empty label scores zero with zero gradient") {
    Fixture f;
    ad::Graph g;
    const auto enc = f.encoder.encode(g, f.vocab, f.words, f.tags);
    const ad::Expr e = f.scorer.label_score(g, span_vector(enc, 1, 5), kEmptyLabelId);
    CHECK(e.value()[0] == 0.0);
    g.backward(e);
    for (const ad::Parameter* p : f.store.parameters())
      for (double x : p->grad.data()) CHECK(x == 0.0);
    CHECK_THROWS_AS(f.scorer.label_score(g, span_vector(enc, 1, 5), 99), std::out_of_range);
  }

  TEST_CASE("span score is linear in the output layer") {
    Fixture f;
    ad::Graph g;
    const auto enc = f.encoder.encode(g, f.vocab, f.words, f.tags);
    const double before = f.scorer.span_score(g, span_vector(enc, 0, 2)).value()[0];
    for (double& w : f.store.get("span.out").value.data()) w *= 2;
    CHECK(f.scorer.span_score(g, span_vector(enc, 0, 2)).value()[0] == doctest::Approx(2 * before).epsilon(1e-12));
    f.store.get("span.out").value.fill(0.0);
    CHECK(f.scorer.span_score(g, span_vector(enc, 0, 2)).value()[0] == 0.0);
    f.store.get("label.out").value.fill(0.0);
    for (double x : f.scorer.label_scores(g, span_vector(enc, 0, 2)).value().data()) CHECK(x == 0.0);
  }

  TEST_CASE("scorer gradients match finite differences") {
    Fixture f;
    std::mt19937_64 rng(11);
    auto loss = [&](bool backward, double*) {
      ad::Graph g;
      const auto enc = f.encoder.encode(g, f.vocab, f.words, f.tags);
      ad::Expr total = g.constant(0.0);
      for (auto [i, j] : {std::pair{0, 2}, {1, 4}, {2, 5}}) {
        const ad::Expr s = span_vector(enc, i, j);
        total = total + f.scorer.span_score(g, s) + sum(f.scorer.label_scores(g, s));
      }
      if (backward) g.backward(total);
      return total.scalar();
    };
    const auto r = testsupport::finite_difference(f.store, 150, rng, loss);
    CHECK(r.checked == 150);
    CHECK(r.failed == 0);
  }

  TEST_CASE("vocabulary") {
    const Vocab v = Vocab::build({parse_sexpr(testsupport::kFig1), parse_sexpr("(S (NP (PRP She)) (VP (VBZ runs)))")});
    CHECK(v.words.at(Vocab::kUnk) == kUnkToken);
    CHECK(v.count(v.word_id("She")) == 2);
    CHECK(v.count(v.word_id("code")) == 1);
    CHECK(v.word_id("unseen") == Vocab::kUnk);
    CHECK(v.labels.at(kEmptyLabelId) == kEmptyLabel);
    CHECK(v.label_id("S+VP") > 0);
    CHECK(utf8_chars("a\xE2\x88\x85" "b").size() == 3);
  }
}
