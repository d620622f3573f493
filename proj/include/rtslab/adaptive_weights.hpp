#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <ostream>

#include "rtslab/eval_static.hpp"

namespace rtslab {

struct OptimizerConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double eta0 = 1e-4;
  double d0 = 1e-4;
  double d_max = 0.01;
  double w_floor = 1e-3;
  double w_ceil = 1e3;
  double delta_guard = 1.0;

  void validate() const {
    if (!(beta1 >= 0 && beta1 < 1)) throw Error("optimizer.beta1 must lie in [0, 1)");
    if (!(beta2 >= 0 && beta2 < 1)) throw Error("optimizer.beta2 must lie in [0, 1)");
    if (!(eps > 0)) throw Error("optimizer.eps must be > 0");
    if (!(d_max >= 0 && d_max < 1)) throw Error("optimizer.d_max must lie in [0, 1)");
    if (!(w_floor > 0 && w_floor < w_ceil)) throw Error("optimizer needs 0 < w_floor < w_ceil");
    if (!(delta_guard > 0)) throw Error("optimizer.delta_guard must be > 0");
    if (!std::isfinite(eta0) || !std::isfinite(d0)) throw Error("optimizer rate scales must be finite");
  }
};

struct AdamWMomentState {
  double m_lr = 0, v_lr = 0;
  double m_dr = 0, v_dr = 0;
  long step = 0;
  // Running beta^step products, so bias correction needs no pow() call.
  double beta1_pow = 1, beta2_pow = 1;
  bool operator==(const AdamWMomentState&) const = default;
};

struct CorrectedMoments {
  double m_lr = 0, v_lr = 0;
  double m_dr = 0, v_dr = 0;
};

struct Rates {
  double L = 0;
  double D = 0;
};

/// Relative change of one component score between consecutive calls.
inline double score_delta(double current, double previous, double delta_guard = 1.0) {
  return (current - previous) / std::max(std::abs(previous), delta_guard);
}

namespace detail {

// Long runs of zero signal decay the moments geometrically; left alone they
// end up subnormal, where every multiply is two orders of magnitude slower.
// Anything this small has no effect on a rate or a weight.
inline double flush_tiny(double x) { return std::abs(x) < 1e-200 ? 0.0 : x; }

}  // namespace detail

/// First/second moment update. The decay pair tracks |g|.
inline AdamWMomentState update_moments(AdamWMomentState ms, double g, const OptimizerConfig& cfg) {
  const double a = std::abs(g);
  ms.m_lr = detail::flush_tiny(cfg.beta1 * ms.m_lr + (1 - cfg.beta1) * g);
  ms.v_lr = detail::flush_tiny(cfg.beta2 * ms.v_lr + (1 - cfg.beta2) * g * g);
  ms.m_dr = detail::flush_tiny(cfg.beta1 * ms.m_dr + (1 - cfg.beta1) * a);
  ms.v_dr = detail::flush_tiny(cfg.beta2 * ms.v_dr + (1 - cfg.beta2) * a * a);
  ms.beta1_pow = detail::flush_tiny(ms.beta1_pow * cfg.beta1);
  ms.beta2_pow = detail::flush_tiny(ms.beta2_pow * cfg.beta2);
  ++ms.step;
  return ms;
}

inline CorrectedMoments bias_correct(const AdamWMomentState& ms, const OptimizerConfig& = {}) {
  if (ms.step < 1) throw Error("bias_correct: step must be >= 1");
  const double c1 = 1 - ms.beta1_pow;
  const double c2 = 1 - ms.beta2_pow;
  return {ms.m_lr / c1, ms.v_lr / c2, ms.m_dr / c1, ms.v_dr / c2};
}

inline Rates adaptive_rates(const CorrectedMoments& cm, const OptimizerConfig& cfg) {
  Rates r;
  r.L = cfg.eta0 * cm.m_lr / std::sqrt(cm.v_lr + cfg.eps);
  r.D = std::clamp(cfg.d0 * cm.m_dr / std::sqrt(cm.v_dr + cfg.eps), 0.0, cfg.d_max);
  return r;
}

/// Weight step given the relative delta g directly.
inline double apply_weight_step(double w0, double L, double D, double g, const OptimizerConfig& cfg) {
  return std::clamp((w0 + L * g) * (1 - D), cfg.w_floor, cfg.w_ceil);
}

inline double update_weight(double w0, double L, double D, double s1, double s0,
                            const OptimizerConfig& cfg) {
  return apply_weight_step(w0, L, D, score_delta(s1, s0, cfg.delta_guard), cfg);
}

/// Everything one component update produced; kept for audits and CSV export.
struct ComponentStep {
  double g = 0;
  AdamWMomentState moments;
  CorrectedMoments corrected;
  Rates rates;
  double weight = 0;
};

/// One full update chain for a single component fed the signal g.
/// A zero signal still advances the moments, but leaves the weight as is:
/// unchanged scores must not move the weights.
inline ComponentStep adapt_component(const AdamWMomentState& ms, double w0, double g,
                                     const OptimizerConfig& cfg) {
  ComponentStep st;
  st.g = g;
  st.moments = update_moments(ms, g, cfg);
  st.corrected = bias_correct(st.moments, cfg);
  st.rates = adaptive_rates(st.corrected, cfg);
  st.weight = (g == 0) ? w0 : apply_weight_step(w0, st.rates.L, st.rates.D, g, cfg);
  return st;
}

struct HistoryEntry {
  int cycle = 0;
  WeightVector weights;
  std::array<Rates, kComponents> rates{};
  double s_eval = 0;
};

struct AdaptiveEvalState {
  EvalKind kind = EvalKind::Lanchester;
  EvalParams params;
  OptimizerConfig config;
  int player = 0;  // side whose components drive adaptation
  WeightVector weights;
  Features last_scores{};
  std::array<AdamWMomentState, kComponents> moments{};
  bool initialized = false;
  std::size_t history_capacity = 0;  // 0 disables the ring buffer
  std::deque<HistoryEntry> history;

  StaticEvaluator frozen() const { return {kind, weights, params}; }

  /// Rates implied by the current moments of component `c`; zero before the
  /// first update.
  Rates rates(std::size_t c) const {
    if (moments[c].step < 1) return {};
    return adaptive_rates(bias_correct(moments[c], config), config);
  }
};

inline AdaptiveEvalState init_adaptive(EvalKind kind, const WeightVector& initial,
                                       const OptimizerConfig& cfg, const GameState& state0,
                                       int player = 0, const EvalParams& params = {},
                                       std::size_t history_capacity = 0) {
  cfg.validate();
  if (player != 0 && player != 1) throw Error("init_adaptive: player must be 0 or 1");
  for (std::size_t c = 0; c < kComponents; ++c)
    if (!(initial[c] >= cfg.w_floor && initial[c] <= cfg.w_ceil))
      throw Error("init_adaptive: " + std::string(component_name(c)) + " = " +
                  std::to_string(initial[c]) + " outside [w_floor, w_ceil]");
  AdaptiveEvalState st;
  st.kind = kind;
  st.params = params;
  st.config = cfg;
  st.player = player;
  st.weights = initial;
  st.last_scores = component_features(state0, kind, params)[player];
  st.initialized = true;
  st.history_capacity = history_capacity;
  return st;
}

/// One pass of the adaptation loop on a real game state: score deltas drive
/// each component's weight, then both sides are scored with the new weights.
inline EvalResult adapt_and_evaluate(AdaptiveEvalState& st, const GameState& s) {
  if (!st.initialized) throw Error("adapt_and_evaluate: state not initialized");
  const auto f = component_features(s, st.kind, st.params);
  const Features& own = f[st.player];
  for (std::size_t c = 0; c < kComponents; ++c) {
    const double g = score_delta(own[c], st.last_scores[c], st.config.delta_guard);
    st.moments[c] = update_moments(st.moments[c], g, st.config);
    // Same chain as adapt_component; the rates only matter when the weight moves.
    if (g != 0) {
      const Rates r = st.rates(c);
      st.weights[c] = apply_weight_step(st.weights[c], r.L, r.D, g, st.config);
    }
  }
  st.last_scores = own;
  const auto r = normalize_eval(weighted_sum(own, st.weights), weighted_sum(f[1 - st.player], st.weights));
  if (st.history_capacity > 0) {
    if (st.history.size() == st.history_capacity) st.history.pop_front();
    HistoryEntry h{s.cycle, st.weights, {}, r.s_eval};
    for (std::size_t c = 0; c < kComponents; ++c) h.rates[c] = st.rates(c);
    st.history.push_back(h);
  }
  return r;
}

/// CSV rows: cycle,component,weight,L_t,D_t
inline void write_history_csv(std::ostream& out, const AdaptiveEvalState& st) {
  out << "cycle,component,weight,L_t,D_t\n";
  const auto old = out.precision(6);
  for (const auto& h : st.history)
    for (std::size_t c = 0; c < kComponents; ++c)
      out << h.cycle << ',' << component_name(c) << ',' << h.weights[c] << ',' << h.rates[c].L << ','
          << h.rates[c].D << '\n';
  out.precision(old);
}

}  // namespace rtslab
