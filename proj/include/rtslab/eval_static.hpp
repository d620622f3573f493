#pragma once

#include <array>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <string_view>

#include "rtslab/game_state.hpp"

namespace rtslab {

/// Tracked evaluation components: one per unit kind, then owned resources
/// (W_R) and carried resources (W_RW).
inline constexpr std::size_t kComponents = kUnitKinds + 2;
inline constexpr std::size_t kOwnedRes = kUnitKinds;
inline constexpr std::size_t kCarriedRes = kUnitKinds + 1;

inline std::string_view component_name(std::size_t c) {
  static constexpr std::array<std::string_view, kComponents> names = {
      "W_MAINBASE", "W_RAX", "W_WORKER", "W_LIGHT", "W_RANGE", "W_HEAVY", "W_R", "W_RW"};
  return names.at(c);
}

struct WeightVector {
  std::array<double, kComponents> w{};

  double& operator[](std::size_t c) { return w[c]; }
  double operator[](std::size_t c) const { return w[c]; }
  double& of(UnitKind k) { return w[index_of(k)]; }
  double of(UnitKind k) const { return w[index_of(k)]; }
  bool operator==(const WeightVector&) const = default;

  static WeightVector zero() { return {}; }
};

enum class EvalKind : std::uint8_t { Lanchester, Simple, SimpleSqrt };

constexpr std::string_view to_string(EvalKind k) {
  switch (k) {
    case EvalKind::Lanchester: return "L";
    case EvalKind::Simple:     return "S";
    case EvalKind::SimpleSqrt: return "SQ";
  }
  return "?";
}

struct LanchesterParams {
  // base, barracks, worker, light, ranged, heavy
  std::array<double, kUnitKinds> unit_weights{0.129, 0.231, 0.181, 1.75, 1.679, 3.9};
  double attrition_exponent = 0.7;
  double w_carried = 1.0;
  double w_mined = 1.0;

  WeightVector initial_weights() const {
    WeightVector v;
    for (std::size_t i = 0; i < kUnitKinds; ++i) v[i] = unit_weights[i];
    v[kOwnedRes] = w_mined;
    v[kCarriedRes] = w_carried;
    return v;
  }
  void validate() const {
    for (double x : unit_weights)
      if (!(x >= 0)) throw Error("lanchester unit weights must be >= 0");
    if (!(w_carried >= 0) || !(w_mined >= 0)) throw Error("lanchester resource weights must be >= 0");
    if (!(attrition_exponent > 0 && attrition_exponent <= 1))
      throw Error("attrition_exponent must lie in (0, 1]");
  }
};

struct SimpleParams {
  double R = 20;
  double R_W = 10;
  double U_B = 40;

  /// Every kind starts at U_B; the per-kind entries are what adaptation moves.
  WeightVector initial_weights() const {
    WeightVector v;
    for (std::size_t i = 0; i < kUnitKinds; ++i) v[i] = U_B;
    v[kOwnedRes] = R;
    v[kCarriedRes] = R_W;
    return v;
  }
  void validate() const {
    if (!(R >= 0) || !(R_W >= 0) || !(U_B >= 0)) throw Error("simple weights must be >= 0");
  }
};

struct EvalParams {
  LanchesterParams lanchester;
  SimpleParams simple;

  WeightVector initial_weights(EvalKind k) const {
    return k == EvalKind::Lanchester ? lanchester.initial_weights() : simple.initial_weights();
  }
};

/// Weight-free per-component features: S_base = sum_c W_c * features[c].
using Features = std::array<double, kComponents>;

struct ScoreBreakdown {
  Features features{};
  std::array<double, kComponents> weighted{};  // W_c * features[c]
  double total = 0;
  int n_a = 0;  // mobile units alive (Lanchester attrition count)

  double unit_score(UnitKind k) const { return weighted[index_of(k)]; }
  double resource_score() const { return weighted[kOwnedRes] + weighted[kCarriedRes]; }
};

struct EvalResult {
  double s_base_max = 0;
  double s_base_min = 0;
  double s_eval = 0;
};

// Largest double below 1; saturated outputs are pinned here so the open
// interval holds even when |x| is large.
inline constexpr double kBelowOne = 1.0 - 0x1p-53;

inline double sigmoid(double x) {
  if (!std::isfinite(x)) throw Error("sigmoid: non-finite input");
  if (x >= 0) return std::min(1.0 / (1.0 + std::exp(-x)), kBelowOne);
  const double e = std::exp(x);
  return std::max(e / (1.0 + e), std::numeric_limits<double>::denorm_min());
}

inline EvalResult normalize_eval(double s_max, double s_min) {
  if (!std::isfinite(s_max) || !std::isfinite(s_min)) throw Error("normalize_eval: non-finite input");
  // 2*sigmoid(d) - 1 == tanh(d/2); the tanh form keeps swap antisymmetry exact.
  const double d = s_max - s_min;
  return {s_max, s_min, std::clamp(std::tanh(0.5 * d), -kBelowOne, kBelowOne)};
}

/// Features of both players in one pass over the units.
inline std::array<Features, 2> component_features(const GameState& s, EvalKind kind,
                                                  const EvalParams& p = {}) {
  std::array<Features, 2> f{};
  std::array<int, 2> mobile{0, 0};
  for (const auto& u : s.units) {
    if (u.owner != 0 && u.owner != 1) continue;
    const auto& spec = s.spec(u);
    auto& fp = f[u.owner];
    const std::size_t k = index_of(u.kind);
    const double ratio = double(u.hp) / spec.max_hp;
    switch (kind) {
      case EvalKind::Lanchester:
        if (u.kind == UnitKind::Light || u.kind == UnitKind::Heavy)
          fp[k] += ratio;
        else
          fp[k] += u.hp;
        if (spec.can_move) ++mobile[u.owner];
        break;
      case EvalKind::Simple:
        fp[k] += spec.cost * ratio;
        break;
      case EvalKind::SimpleSqrt:
        fp[k] += spec.cost * std::sqrt(ratio);
        break;
    }
    fp[kCarriedRes] += u.carried;
  }
  for (int pl = 0; pl < 2; ++pl) {
    f[pl][kOwnedRes] = s.player_resources[pl];
    if (kind == EvalKind::Lanchester) {
      const double attrition = std::pow(double(mobile[pl]), p.lanchester.attrition_exponent);
      for (auto k : {UnitKind::Worker, UnitKind::Light, UnitKind::Range, UnitKind::Heavy})
        f[pl][index_of(k)] *= attrition;
    }
  }
  return f;
}

inline double weighted_sum(const Features& f, const WeightVector& w) {
  double total = 0;
  for (std::size_t c = 0; c < kComponents; ++c) total += w[c] * f[c];
  return total;
}

inline ScoreBreakdown breakdown(const GameState& s, int player, EvalKind kind, const WeightVector& w,
                                const EvalParams& p = {}) {
  ScoreBreakdown b;
  b.features = component_features(s, kind, p)[player];
  for (std::size_t c = 0; c < kComponents; ++c) b.weighted[c] = w[c] * b.features[c];
  b.total = weighted_sum(b.features, w);
  if (kind == EvalKind::Lanchester)
    for (const auto& u : s.units) b.n_a += (u.owner == player && s.spec(u).can_move);
  return b;
}

inline ScoreBreakdown lanchester_score(const GameState& s, int player, const LanchesterParams& p,
                                       const WeightVector& w) {
  return breakdown(s, player, EvalKind::Lanchester, w, EvalParams{p, {}});
}

inline ScoreBreakdown simple_score(const GameState& s, int player, const SimpleParams& p,
                                   const WeightVector& w) {
  return breakdown(s, player, EvalKind::Simple, w, EvalParams{{}, p});
}

inline ScoreBreakdown simple_sqrt_score(const GameState& s, int player, const SimpleParams& p,
                                        const WeightVector& w) {
  return breakdown(s, player, EvalKind::SimpleSqrt, w, EvalParams{{}, p});
}

/// Highest Simple score reachable from `s`: (R_free + max R_player) * U_B,
/// where R_player counts banked, carried and unit-cost resources.
inline double simple_upper_bound(const GameState& s, const SimpleParams& p = {}) {
  std::array<long, 2> owned{s.player_resources[0], s.player_resources[1]};
  for (const auto& u : s.units) {
    if (u.owner != 0 && u.owner != 1) continue;
    owned[u.owner] += u.carried + s.spec(u).cost;
  }
  return double(s.free_resources() + std::max(owned[0], owned[1])) * p.U_B;
}

inline EvalResult evaluate(const GameState& s, EvalKind kind, const WeightVector& w,
                           int max_player = 0, const EvalParams& p = {}) {
  const auto f = component_features(s, kind, p);
  return normalize_eval(weighted_sum(f[max_player], w), weighted_sum(f[1 - max_player], w));
}

/// Fixed-weight evaluator from one player's point of view; the form the
/// planners call at every leaf.
struct StaticEvaluator {
  EvalKind kind = EvalKind::Lanchester;
  WeightVector weights = LanchesterParams{}.initial_weights();
  EvalParams params;

  double operator()(const GameState& s, int max_player) const {
    return evaluate(s, kind, weights, max_player, params).s_eval;
  }

  static StaticEvaluator defaults(EvalKind k, const EvalParams& p = {}) {
    return {k, p.initial_weights(k), p};
  }
};

}  // namespace rtslab
