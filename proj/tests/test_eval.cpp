#include "chartparse/eval.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace chartparse;

TEST_SUITE("eval") {
  TEST_CASE("identical trees") {
    const Tree t = parse_sexpr(testsupport::kFig1);
    const EvalReport r = score_corpus({t}, {t});
    CHECK(r.recall() == 100.0);
    CHECK(r.precision() == 100.0);
    CHECK(r.f1() == 100.0);
  }

  TEST_CASE("hand example") {
    // Gold spans: (0,5) S, (0,1) NP, (1,4) VP, (2,4) S, (2,4) VP.
    const Tree gold = parse_sexpr(testsupport::kFig1);
    // Prediction keeps S, NP, VP(1,4) and adds a wrong NP(2,4).
    const Tree pred = parse_sexpr("(S (NP (PRP She)) (VP (VBZ loves) (NP (VBG writing) (NN code))) (. .))");
    const EvalReport r = score_tree(gold, pred);
    CHECK(r.matched == 3);
    CHECK(r.gold_total == 5);
    CHECK(r.pred_total == 4);
    CHECK(r.recall() == doctest::Approx(60.0).epsilon(1e-12));
    CHECK(r.precision() == doctest::Approx(75.0).epsilon(1e-12));
    CHECK(r.f1() == doctest::Approx(66.6667).epsilon(1e-5));
    CHECK(format_report(r) == "LR=60.00 LP=75.00 F1=66.67 matched=3 gold=5 pred=4");
  }

  TEST_CASE("errors") {
    const Tree t = parse_sexpr(testsupport::kFig1);
    CHECK_THROWS_AS(score_corpus({}, {}), std::invalid_argument);
    CHECK_THROWS_AS(score_corpus({t}, {t, t}), std::invalid_argument);
    try {
      score_corpus({t, t}, {t, parse_sexpr("(X (T a))")});
      FAIL("expected an error");
    } catch (const std::invalid_argument& e) {
      CHECK(std::string(e.what()).find("sentence 2") != std::string::npos);
    }
  }
}
