#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "chartparse/autodiff.hpp"
#include "chartparse/decoders.hpp"
#include "chartparse/treebank.hpp"

namespace testsupport {

inline const char* kFig1 = "(S (NP (PRP She)) (VP (VBZ loves) (S (VP (VBG writing) (NN code)))) (. .))";

struct GradCheck {
  int checked = 0;
  int failed = 0;
  int rejected = 0;
  double worst = 0.0;
};

/// Central differences with step 1e-5 against the analytic gradient.
/// `loss` builds a fresh graph, returns the loss value and, when `backward`
/// is set, accumulates gradients into the parameters. `margin` reports the
/// distance from the nearest kink at the current parameter values; coordinates
/// closer than `min_margin` are skipped.
inline GradCheck finite_difference(chartparse::ad::ParamStore& store, int coordinates, std::mt19937_64& rng,
                                   const std::function<double(bool backward, double* margin)>& loss,
                                   double min_margin = 1e-3) {
  constexpr double h = 1e-5;
  GradCheck out;
  std::vector<chartparse::ad::Parameter*> params = store.parameters();
  int attempts = 0;
  while (out.checked < coordinates && attempts < coordinates * 50) {
    ++attempts;
    chartparse::ad::Parameter* p = params[rng() % params.size()];
    const std::size_t c = rng() % p->value.size();
    store.zero_grad();
    double margin = std::numeric_limits<double>::infinity();
    loss(true, &margin);
    if (margin < min_margin) {
      ++out.rejected;
      continue;
    }
    const double analytic = p->grad[c];
    const double saved = p->value[c];
    double m_plus = std::numeric_limits<double>::infinity(), m_minus = m_plus;
    p->value[c] = saved + h;
    const double plus = loss(false, &m_plus);
    p->value[c] = saved - h;
    const double minus = loss(false, &m_minus);
    p->value[c] = saved;
    if (m_plus < min_margin || m_minus < min_margin) {
      ++out.rejected;
      continue;
    }
    const double numeric = (plus - minus) / (2 * h);
    const double diff = std::abs(analytic - numeric);
    const double rel = diff / std::max({std::abs(analytic), std::abs(numeric), 1e-300});
    ++out.checked;
    if (diff > 1e-8 && rel > 1e-4) {
      ++out.failed;
      out.worst = std::max(out.worst, rel);
    }
  }
  store.zero_grad();
  return out;
}

/// Every binarized tree over (i, j) with each node given its best label.
inline void enumerate_best(chartparse::ScoreSource& s, int i, int j, std::vector<double>& out) {
  const auto scores = s.label_scores(i, j);
  const double node = *std::max_element(scores.begin(), scores.end()) + s.span_score(i, j);
  if (j - i == 1) {
    out.push_back(node);
    return;
  }
  for (int k = i + 1; k < j; ++k) {
    std::vector<double> left, right;
    enumerate_best(s, i, k, left);
    enumerate_best(s, k, j, right);
    for (double l : left)
      for (double r : right) out.push_back(node + l + r);
  }
}

inline double exhaustive_max(chartparse::ScoreSource& s) {
  std::vector<double> all;
  enumerate_best(s, 0, s.length(), all);
  return *std::max_element(all.begin(), all.end());
}

}  // namespace testsupport
