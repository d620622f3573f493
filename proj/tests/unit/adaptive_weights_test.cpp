#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "../support/helpers.hpp"

using namespace rtslab;
using namespace rtslab::testing;

namespace {

// Reference optimizer written from the update rules, using pow() for bias
// correction instead of running products.
struct RefComponent {
  double m = 0, v = 0, md = 0, vd = 0;
  int t = 0;
  double w;

  explicit RefComponent(double w0) : w(w0) {}

  void feed(double g, const OptimizerConfig& c) {
    ++t;
    m = c.beta1 * m + (1 - c.beta1) * g;
    v = c.beta2 * v + (1 - c.beta2) * g * g;
    md = c.beta1 * md + (1 - c.beta1) * std::abs(g);
    vd = c.beta2 * vd + (1 - c.beta2) * g * g;
    const double mh = m / (1 - std::pow(c.beta1, t)), vh = v / (1 - std::pow(c.beta2, t));
    const double mdh = md / (1 - std::pow(c.beta1, t)), vdh = vd / (1 - std::pow(c.beta2, t));
    const double L = c.eta0 * mh / std::sqrt(vh + c.eps);
    const double D = std::min(std::max(c.d0 * mdh / std::sqrt(vdh + c.eps), 0.0), c.d_max);
    if (g != 0) w = std::min(std::max((w + L * g) * (1 - D), c.w_floor), c.w_ceil);
  }
};

}  // namespace

TEST(ScoreDelta, Values) {
  EXPECT_NEAR(score_delta(1.1, 1.0), 0.1, 1e-12);
  EXPECT_EQ(score_delta(4.0, 4.0), 0.0);
  EXPECT_EQ(score_delta(3.0, 0.0), 3.0);          // guarded denominator
  EXPECT_EQ(score_delta(0.0, 0.5), -0.5);         // |prev| < guard
  EXPECT_EQ(score_delta(-6.0, -3.0), -1.0);       // sign of the change, not of prev
  EXPECT_EQ(score_delta(3.0, 0.0, 0.5), 6.0);
}

TEST(Moments, FirstStep) {
  const OptimizerConfig c;
  const auto ms = update_moments({}, 0.5, c);
  EXPECT_NEAR(ms.m_lr, 0.05, 1e-15);
  EXPECT_NEAR(ms.v_lr, 0.00025, 1e-15);
  EXPECT_NEAR(ms.m_dr, 0.05, 1e-15);
  EXPECT_NEAR(ms.v_dr, 0.00025, 1e-15);
  EXPECT_EQ(ms.step, 1);
  const auto neg = update_moments({}, -0.5, c);
  EXPECT_NEAR(neg.m_lr, -0.05, 1e-15);
  EXPECT_NEAR(neg.m_dr, 0.05, 1e-15);
}

TEST(Moments, BiasCorrectionRecoversSignalAtStepOne) {
  const OptimizerConfig c;
  for (double g : {-2.0, -0.3, 0.0, 0.7, 5.0}) {
    const auto cm = bias_correct(update_moments({}, g, c), c);
    EXPECT_NEAR(cm.m_lr, g, 1e-12);
    EXPECT_NEAR(cm.v_lr, g * g, 1e-12);
    EXPECT_NEAR(cm.m_dr, std::abs(g), 1e-12);
  }
  EXPECT_THROW(bias_correct(AdamWMomentState{}, c), Error);
}

TEST(Moments, ConstantSignalIsAFixedPointOfCorrection) {
  const OptimizerConfig c;
  AdamWMomentState ms;
  for (int t = 0; t < 500; ++t) {
    ms = update_moments(ms, 0.25, c);
    const auto cm = bias_correct(ms, c);
    ASSERT_NEAR(cm.m_lr, 0.25, 1e-9);
    ASSERT_NEAR(cm.v_lr, 0.0625, 1e-9);
    ASSERT_NEAR(ms.beta1_pow, std::pow(c.beta1, t + 1), 1e-12);
  }
}

TEST(Rates, ClosedForm) {
  const OptimizerConfig c;
  const CorrectedMoments cm{0.2, 0.04, 0.2, 0.04};
  const auto r = adaptive_rates(cm, c);
  EXPECT_NEAR(r.L, 1e-4 * 0.2 / std::sqrt(0.04 + 1e-8), 1e-15);
  EXPECT_NEAR(r.D, 1e-4 * 0.2 / std::sqrt(0.04 + 1e-8), 1e-15);
  OptimizerConfig big = c;
  big.d0 = 1.0;
  EXPECT_EQ(adaptive_rates(cm, big).D, c.d_max);
  EXPECT_EQ(adaptive_rates({0, 0, 0, 0}, c).L, 0.0);
}

TEST(UpdateWeight, KnownValues) {
  const OptimizerConfig c;
  EXPECT_NEAR(update_weight(1.75, 1e-4, 0, 1.2, 1.0, c), 1.75002, 1e-12);
  EXPECT_NEAR(update_weight(0.129, 0, 0.5, 1.0, 1.0, c), 0.0645, 1e-12);
  EXPECT_EQ(update_weight(5e-4, 0, 0, 1, 1, c), c.w_floor);
  EXPECT_EQ(update_weight(2e3, 0, 0, 1, 1, c), c.w_ceil);
}

TEST(AdaptComponent, ZeroSignalHoldsWeight) {
  const OptimizerConfig c;
  AdamWMomentState ms = update_moments({}, 0.4, c);
  const auto st = adapt_component(ms, 3.9, 0.0, c);
  EXPECT_EQ(st.weight, 3.9);
  EXPECT_EQ(st.moments.step, 2);
}

TEST(Adaptive, UnchangedStateIsAFixedPoint) {
  const auto s = make_initial_state(bundled_map("M1"));
  for (auto k : {EvalKind::Lanchester, EvalKind::Simple, EvalKind::SimpleSqrt}) {
    const EvalParams p;
    auto st = init_adaptive(k, p.initial_weights(k), {}, s);
    for (int i = 0; i < 20; ++i) adapt_and_evaluate(st, s);
    EXPECT_EQ(st.weights, p.initial_weights(k));
    EXPECT_EQ(adapt_and_evaluate(st, s).s_eval, evaluate(s, k, p.initial_weights(k)).s_eval);
  }
}

TEST(Adaptive, WorkerDamageMatchesReferenceOptimizer) {
  auto s = empty_state(8, 8, {2, 2});
  add_unit(s, 0, UnitKind::MainBase, {0, 0});
  add_unit(s, 0, UnitKind::Heavy, {3, 3});
  add_unit(s, 1, UnitKind::MainBase, {7, 7});
  const OptimizerConfig c;
  const EvalParams p;
  auto st = init_adaptive(EvalKind::Lanchester, p.lanchester.initial_weights(), c, s, 0, p, 10);

  std::vector<RefComponent> ref;
  for (std::size_t i = 0; i < kComponents; ++i) ref.emplace_back(p.lanchester.initial_weights()[i]);
  auto prev = component_features(s, EvalKind::Lanchester, p)[0];

  for (int hp : {7, 5, 2}) {
    s.units[1].hp = hp;
    s.cycle += 10;
    adapt_and_evaluate(st, s);
    const auto f = component_features(s, EvalKind::Lanchester, p)[0];
    for (std::size_t i = 0; i < kComponents; ++i) ref[i].feed(score_delta(f[i], prev[i]), c);
    prev = f;
    for (std::size_t i = 0; i < kComponents; ++i) ASSERT_NEAR(st.weights[i], ref[i].w, 1e-15) << i;
  }
  // Only the damaged heavy's weight moved, and it moved down.
  for (std::size_t i = 0; i < kComponents; ++i) {
    if (i == index_of(UnitKind::Heavy))
      EXPECT_LT(st.weights[i], p.lanchester.initial_weights()[i]);
    else
      EXPECT_EQ(st.weights[i], p.lanchester.initial_weights()[i]);
  }
  EXPECT_EQ(st.history.size(), 3u);
  EXPECT_EQ(st.history.back().cycle, 30);

  std::ostringstream csv;
  write_history_csv(csv, st);
  const std::string text = csv.str();
  EXPECT_EQ(text.rfind("cycle,component,weight,L_t,D_t\n", 0), 0u);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1 + 3 * long(kComponents));
}

TEST(Adaptive, RandomGamesMatchReferenceAndStayInBounds) {
  const OptimizerConfig c;
  const EvalParams p;
  std::mt19937_64 rng(5);
  for (auto k : {EvalKind::Lanchester, EvalKind::Simple, EvalKind::SimpleSqrt}) {
    auto s = make_initial_state(bundled_map("M1"));
    auto st = init_adaptive(k, p.initial_weights(k), c, s, 1, p);
    std::vector<RefComponent> ref;
    for (std::size_t i = 0; i < kComponents; ++i) ref.emplace_back(p.initial_weights(k)[i]);
    auto prev = component_features(s, k, p)[1];
    for (int t = 0; t < 600 && !winner(s); ++t) {
      step(s, random_policy(s, 0, rng), random_policy(s, 1, rng));
      const auto r = adapt_and_evaluate(st, s);
      const auto f = component_features(s, k, p)[1];
      for (std::size_t i = 0; i < kComponents; ++i) ref[i].feed(score_delta(f[i], prev[i]), c);
      prev = f;
      ASSERT_GT(r.s_eval, -1.0);
      ASSERT_LT(r.s_eval, 1.0);
      for (std::size_t i = 0; i < kComponents; ++i) {
        ASSERT_NEAR(st.weights[i], ref[i].w, 1e-12 * std::max(1.0, ref[i].w));
        ASSERT_GE(st.weights[i], c.w_floor);
        ASSERT_LE(st.weights[i], c.w_ceil);
        ASSERT_LE(st.rates(i).D, c.d_max);
        ASSERT_GE(st.rates(i).D, 0.0);
      }
    }
  }
}

TEST(Adaptive, InitDefaultsAndErrors) {
  const auto s = make_initial_state(bundled_map("D8"));
  const OptimizerConfig c;
  EXPECT_EQ(c.eta0, 1e-4);
  EXPECT_EQ(c.d0, 1e-4);
  EXPECT_EQ(c.d_max, 0.01);
  const auto st = init_adaptive(EvalKind::Simple, SimpleParams{}.initial_weights(), c, s);
  EXPECT_TRUE(st.initialized);
  EXPECT_EQ(st.moments[0], AdamWMomentState{});
  EXPECT_EQ(st.last_scores, component_features(s, EvalKind::Simple)[0]);

  EXPECT_THROW(init_adaptive(EvalKind::Lanchester, WeightVector::zero(), c, s), Error);
  EXPECT_THROW(init_adaptive(EvalKind::Lanchester, LanchesterParams{}.initial_weights(), c, s, 2), Error);
  OptimizerConfig bad = c;
  bad.beta1 = 1.0;
  EXPECT_THROW(init_adaptive(EvalKind::Lanchester, LanchesterParams{}.initial_weights(), bad, s), Error);
  bad = c;
  bad.w_floor = 0;
  EXPECT_THROW(bad.validate(), Error);
  AdaptiveEvalState blank;
  EXPECT_THROW(adapt_and_evaluate(blank, s), Error);
}

TEST(Adaptive, HistoryRingBufferIsBounded) {
  auto s = make_initial_state(bundled_map("M1"));
  auto st = init_adaptive(EvalKind::Lanchester, LanchesterParams{}.initial_weights(), {}, s, 0, {}, 4);
  for (int t = 0; t < 10; ++t) {
    s = run_script_playout(s, Script::WorkerRush, Script::LightRush, 5);
    adapt_and_evaluate(st, s);
  }
  EXPECT_EQ(st.history.size(), 4u);
  EXPECT_EQ(st.history.back().cycle, s.cycle);
}
