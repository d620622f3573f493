#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "rtslab/adaptive_weights.hpp"
#include "rtslab/portfolio.hpp"

namespace rtslab {

enum class PlannerKind : std::uint8_t { IdAbcd, IdRtMinimax, Portfolio, Script, Idle };

constexpr std::string_view to_string(PlannerKind p) {
  switch (p) {
    case PlannerKind::IdAbcd:      return "idabcd";
    case PlannerKind::IdRtMinimax: return "idrtminimax";
    case PlannerKind::Portfolio:   return "portfolio";
    case PlannerKind::Script:      return "script";
    case PlannerKind::Idle:        return "idle";
  }
  return "?";
}

inline PlannerKind parse_planner(std::string_view s) {
  for (auto p : {PlannerKind::IdAbcd, PlannerKind::IdRtMinimax, PlannerKind::Portfolio,
                 PlannerKind::Script, PlannerKind::Idle})
    if (to_string(p) == s) return p;
  throw Error("unknown planner '" + std::string(s) + "'");
}

/// Who plays a seat: `planner:variant` (variant in L, S, SQ, DL, DS, DSQ),
/// `script:WORKER_RUSH` or `idle`.
struct AgentSpec {
  PlannerKind planner = PlannerKind::IdRtMinimax;
  EvalKind eval = EvalKind::Lanchester;
  bool dynamic = false;
  Script script = Script::WorkerRush;

  std::string variant() const {
    if (planner == PlannerKind::Script) return std::string(to_string(script));
    if (planner == PlannerKind::Idle) return "";
    return (dynamic ? "D" : "") + std::string(to_string(eval));
  }
  std::string name() const {
    if (planner == PlannerKind::Idle) return "idle";
    return std::string(to_string(planner)) + ":" + variant();
  }
  bool operator==(const AgentSpec& o) const { return name() == o.name(); }

  static AgentSpec parse(std::string_view text) {
    AgentSpec a;
    const auto colon = text.find(':');
    a.planner = parse_planner(text.substr(0, colon));
    if (a.planner == PlannerKind::Idle) {
      if (colon != std::string_view::npos) throw Error("agent 'idle' takes no variant");
      return a;
    }
    if (colon == std::string_view::npos) throw Error("agent '" + std::string(text) + "' needs ':variant'");
    std::string_view v = text.substr(colon + 1);
    if (a.planner == PlannerKind::Script) {
      a.script = parse_script(v);
      return a;
    }
    if (!v.empty() && v.front() == 'D') {
      a.dynamic = true;
      v.remove_prefix(1);
    }
    if (v == "L") a.eval = EvalKind::Lanchester;
    else if (v == "S") a.eval = EvalKind::Simple;
    else if (v == "SQ") a.eval = EvalKind::SimpleSqrt;
    else throw Error("unknown evaluation variant '" + std::string(text.substr(colon + 1)) + "'");
    return a;
  }
};

inline const std::array<std::string_view, 6> kVariants = {"L", "S", "SQ", "DL", "DS", "DSQ"};

/// Everything about how agents search, shared by every agent in a run.
struct PlannerSettings {
  SearchBudget budget;
  PortfolioConfig portfolio;
  EvalParams eval_params;
  OptimizerConfig optimizer;
  bool virtual_clock = true;
  VirtualCosts costs;
  double forfeit_factor = 10;  // decisions slower than this many budgets forfeit
};

struct AgentStats {
  long decisions = 0;
  double total_ms = 0;
  double max_ms = 0;
  long eval_calls = 0;
  double eval_ns = 0;
  long adapt_calls = 0;
  long nodes = 0;
  long max_depth_reached = 0;

  double mean_ms() const { return decisions ? total_ms / decisions : 0; }
};

class Agent {
 public:
  Agent(AgentSpec spec, const PlannerSettings& settings, int player, std::uint64_t seed)
      : spec_(spec), settings_(settings), player_(player) {
    settings_.budget.seed = mix64(seed) | 1;
    if (settings_.virtual_clock)
      clock_ = std::make_unique<VirtualClock>(settings_.costs);
    else
      clock_ = std::make_unique<SteadyClock>();
    evaluator_ = StaticEvaluator::defaults(spec.eval, settings.eval_params);
  }

  /// Fresh adaptive state for a new game.
  void start(const GameState& s0) {
    if (spec_.dynamic)
      adaptive_ = init_adaptive(spec_.eval, settings_.eval_params.initial_weights(spec_.eval),
                                settings_.optimizer, s0, player_, settings_.eval_params);
  }

  JointAction decide(const GameState& s) {
    const auto t0 = clock_->now_ns();
    JointAction out;
    switch (spec_.planner) {
      case PlannerKind::Idle:
        for (const auto& u : s.units)
          if (u.owner == player_ && u.idle()) out.push_back(UnitAction::idle(u.id, settings_.budget.idle_wait));
        break;
      case PlannerKind::Script:
        out = script_action(s, player_, spec_.script);
        break;
      default:
        out = search(s);
        break;
    }
    const double ms = double(clock_->now_ns() - t0) / 1e6;
    ++stats_.decisions;
    stats_.total_ms += ms;
    stats_.max_ms = std::max(stats_.max_ms, ms);
    last_ms_ = ms;
    return out;
  }

  bool over_forfeit_limit() const {
    return spec_.planner != PlannerKind::Script && spec_.planner != PlannerKind::Idle &&
           last_ms_ > settings_.forfeit_factor * settings_.budget.wall_ms;
  }

  const AgentSpec& spec() const { return spec_; }
  const AgentStats& stats() const { return stats_; }
  const std::optional<AdaptiveEvalState>& adaptive() const { return adaptive_; }

 private:
  JointAction search(const GameState& s) {
    const StaticEvaluator* eval = &evaluator_;
    if (adaptive_) {
      const auto t0 = clock_->now_ns();
      clock_->charge_adapt();
      adapt_and_evaluate(*adaptive_, s);
      ++stats_.adapt_calls;
      ++stats_.eval_calls;
      stats_.eval_ns += double(clock_->now_ns() - t0);
      frozen_ = adaptive_->frozen();
      eval = &frozen_;
    }
    const StaticEvaluator& te = *eval;
    Decision d;
    switch (spec_.planner) {
      case PlannerKind::IdAbcd:
        d = idabcd_decide(s, player_, settings_.budget, te, *clock_);
        break;
      case PlannerKind::IdRtMinimax:
        d = idrtminimax_decide(s, player_, settings_.budget, te, *clock_);
        break;
      case PlannerKind::Portfolio: {
        SearchBudget b = settings_.budget;
        d = portfolio_decide(s, player_, b, settings_.portfolio, te, *clock_);
        break;
      }
      default: break;
    }
    stats_.eval_calls += d.eval_calls;
    stats_.eval_ns += d.eval_ns;
    stats_.nodes += d.nodes_visited;
    stats_.max_depth_reached = std::max<long>(stats_.max_depth_reached, d.completed_depth);
    return d.action;
  }

  AgentSpec spec_;
  PlannerSettings settings_;
  int player_;
  std::unique_ptr<SearchClock> clock_;
  StaticEvaluator evaluator_;
  StaticEvaluator frozen_;
  std::optional<AdaptiveEvalState> adaptive_;
  AgentStats stats_;
  double last_ms_ = 0;
};

}  // namespace rtslab
