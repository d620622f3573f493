#pragma once

#include <algorithm>
#include <chrono>
#include <vector>

#include "rtslab/adaptive_weights.hpp"
#include "rtslab/map_io.hpp"
#include "rtslab/search.hpp"

namespace rtslab {

/// States sampled along scripted playouts of `map`, in game order. Different
/// script pairings are cycled so the corpus covers early and late positions.
inline std::vector<GameState> generate_corpus(const MapSpec& map, std::size_t n, int stride = 20,
                                              const UnitTable& table = UnitTable::standard()) {
  std::vector<GameState> out;
  const std::array<std::pair<Script, Script>, 4> pairings{{{Script::WorkerRush, Script::LightRush},
                                                           {Script::LightRush, Script::HeavyRush},
                                                           {Script::RangedRush, Script::WorkerRush},
                                                           {Script::HeavyRush, Script::RangedRush}}};
  for (std::size_t k = 0; out.size() < n; ++k) {
    const auto [s0, s1] = pairings[k % pairings.size()];
    GameState s = make_initial_state(map, table);
    const std::size_t before = out.size();
    while (out.size() < n && !winner(s)) {
      out.push_back(s);
      s = run_script_playout(std::move(s), s0, s1, stride);
    }
    if (out.size() == before) throw Error("generate_corpus: playout produced no states");
  }
  return out;
}

struct TimingEntry {
  std::string name;
  long calls = 0;
  double mean_ns = 0;
  double p99_ns = 0;  // 99th percentile of per-batch mean cost
};

struct OverheadRow {
  EvalKind kind = EvalKind::Lanchester;
  TimingEntry static_eval;
  TimingEntry dynamic_eval;          // adaptation on every call
  double ratio_per_call = 0;         // dynamic / static, adapting every call
  double evals_per_decision = 0;     // K: mean evaluator calls per root decision
  double ratio_in_planner = 0;       // one adaptation per K calls, as the planners use it
  double ratio_no_learning = 0;      // per-call ratio with eta0 = d0 = 0
};

struct TimingStats {
  std::vector<OverheadRow> rows;
  double self_ratio = 0;  // one function timed against itself
  long reps = 0;
  std::size_t corpus_size = 0;
};

namespace detail {

using BenchClock = std::chrono::steady_clock;

inline double ns_since(BenchClock::time_point t0) {
  return double(std::chrono::duration_cast<std::chrono::nanoseconds>(BenchClock::now() - t0).count());
}

inline double percentile(std::vector<double> v, double q) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  const std::size_t i = std::min(v.size() - 1, std::size_t(q * double(v.size() - 1) + 0.5));
  return v[i];
}

// Keeps results observable so the optimizer cannot drop the work.
inline volatile double g_sink = 0;

/// Times two callables in alternating batches of `batch` calls each, which
/// cancels slow drifts of the machine between them. The order within a pair
/// of batches flips every round so neither side always runs on a warm cache.
/// Returns per-batch ns/call samples.
template <class A, class B>
std::pair<std::vector<double>, std::vector<double>> interleaved(A&& a, B&& b, long reps, long batch) {
  std::vector<double> ta, tb;
  double sink = 0;
  auto time_batch = [&](auto& f, long done, std::vector<double>& out) {
    const auto t0 = BenchClock::now();
    for (long i = 0; i < batch; ++i) sink += f(done + i);
    out.push_back(ns_since(t0) / double(batch));
  };
  for (long done = 0, round = 0; done < reps; done += batch, ++round) {
    if (round % 2 == 0) {
      time_batch(a, done, ta);
      time_batch(b, done, tb);
    } else {
      time_batch(b, done, tb);
      time_batch(a, done, ta);
    }
  }
  g_sink = sink;
  return {ta, tb};
}

inline double mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return v.empty() ? 0 : s / double(v.size());
}

}  // namespace detail

struct OverheadOptions {
  long reps = 100'000;  // calls per function
  long batch = 1000;
  long warmup = 10'000;
  EvalParams params;
  OptimizerConfig optimizer;
  /// K per base function; if zero it is measured with `k_budget` over the corpus.
  double evals_per_decision = 0;
  SearchBudget k_budget{20, 8, 100};
  std::size_t k_samples = 20;
};

/// Mean evaluator calls per root decision of the real-time minimax planner
/// on corpus states, on a virtual clock.
inline double measure_evals_per_decision(const std::vector<GameState>& corpus, EvalKind kind,
                                         const OverheadOptions& opt) {
  const auto ev = StaticEvaluator::defaults(kind, opt.params);
  long calls = 0, decisions = 0;
  const std::size_t step = std::max<std::size_t>(1, corpus.size() / opt.k_samples);
  for (std::size_t i = 0; i < corpus.size(); i += step) {
    const GameState& s = corpus[i];
    for (int p = 0; p < 2; ++p) {
      if (!s.has_idle_units(p) || winner(s)) continue;
      VirtualClock clock;
      const auto d = idrtminimax_decide(s, p, opt.k_budget, ev, clock);
      calls += d.eval_calls + 1;  // + the adaptation call at the root
      ++decisions;
    }
  }
  return decisions ? double(calls) / double(decisions) : 1.0;
}

/// Static vs adaptive evaluation cost for the three base functions.
/// Single-threaded; never run it next to match workers.
inline TimingStats measure_eval_overhead(const std::vector<GameState>& corpus, const OverheadOptions& opt = {}) {
  if (corpus.size() < 100) throw Error("measure_eval_overhead: corpus needs at least 100 states");
  if (opt.reps < 1 || opt.batch < 1) throw Error("measure_eval_overhead: reps and batch must be >= 1");
  TimingStats out;
  out.reps = opt.reps;
  out.corpus_size = corpus.size();
  const std::size_t n = corpus.size();

  for (EvalKind kind : {EvalKind::Lanchester, EvalKind::Simple, EvalKind::SimpleSqrt}) {
    const auto w = opt.params.initial_weights(kind);
    auto stat = [&](long i) { return evaluate(corpus[std::size_t(i) % n], kind, w, 0, opt.params).s_eval; };
    auto make_state = [&](const OptimizerConfig& cfg) {
      return init_adaptive(kind, w, cfg, corpus[0], 0, opt.params);
    };
    auto st = make_state(opt.optimizer);
    auto dyn = [&](long i) { return adapt_and_evaluate(st, corpus[std::size_t(i) % n]).s_eval; };

    detail::interleaved(stat, dyn, opt.warmup, opt.batch);
    auto [ts, td] = detail::interleaved(stat, dyn, opt.reps, opt.batch);

    OverheadRow row;
    row.kind = kind;
    row.static_eval = {std::string(to_string(kind)), opt.reps, detail::mean(ts), detail::percentile(ts, 0.99)};
    row.dynamic_eval = {"D" + std::string(to_string(kind)), opt.reps, detail::mean(td), detail::percentile(td, 0.99)};
    row.ratio_per_call = row.dynamic_eval.mean_ns / row.static_eval.mean_ns;

    // Deployed form: one adaptation on the root, then K - 1 fixed-weight calls.
    row.evals_per_decision =
        opt.evals_per_decision > 0 ? opt.evals_per_decision : measure_evals_per_decision(corpus, kind, opt);
    const long k = std::max<long>(1, std::lround(row.evals_per_decision));
    auto st2 = make_state(opt.optimizer);
    StaticEvaluator frozen = st2.frozen();
    auto planner_dyn = [&](long i) {
      const GameState& s = corpus[std::size_t(i) % n];
      if (i % k == 0) {
        const double v = adapt_and_evaluate(st2, s).s_eval;
        frozen = st2.frozen();
        return v;
      }
      return frozen(s, 0);
    };
    const long batch_k = std::max(opt.batch, k);
    auto [ps, pd] = detail::interleaved(stat, planner_dyn, opt.reps, batch_k);
    row.ratio_in_planner = detail::mean(pd) / detail::mean(ps);

    OptimizerConfig frozen_cfg = opt.optimizer;
    frozen_cfg.eta0 = 0;
    frozen_cfg.d0 = 0;
    auto st3 = make_state(frozen_cfg);
    auto dyn0 = [&](long i) { return adapt_and_evaluate(st3, corpus[std::size_t(i) % n]).s_eval; };
    auto [zs, zd] = detail::interleaved(stat, dyn0, opt.reps, opt.batch);
    row.ratio_no_learning = detail::mean(zd) / detail::mean(zs);
    out.rows.push_back(row);
  }

  const auto w = opt.params.initial_weights(EvalKind::Lanchester);
  auto a = [&](long i) { return evaluate(corpus[std::size_t(i) % n], EvalKind::Lanchester, w, 0, opt.params).s_eval; };
  auto b = [&](long i) { return evaluate(corpus[std::size_t(i) % n], EvalKind::Lanchester, w, 0, opt.params).s_eval; };
  auto [sa, sb] = detail::interleaved(a, b, opt.reps, opt.batch);
  out.self_ratio = detail::mean(sb) / detail::mean(sa);
  return out;
}

inline nlohmann::json to_json(const TimingEntry& e) {
  return {{"name", e.name}, {"calls", e.calls}, {"mean_ns", e.mean_ns}, {"p99_ns", e.p99_ns}};
}

inline nlohmann::json to_json(const TimingStats& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : t.rows)
    rows.push_back({{"function", std::string(to_string(r.kind))},
                    {"static", to_json(r.static_eval)},
                    {"dynamic", to_json(r.dynamic_eval)},
                    {"ratio_per_call", r.ratio_per_call},
                    {"evals_per_decision", r.evals_per_decision},
                    {"ratio_in_planner", r.ratio_in_planner},
                    {"ratio_no_learning", r.ratio_no_learning}});
  return {{"reps", t.reps}, {"corpus_size", t.corpus_size}, {"self_ratio", t.self_ratio}, {"rows", rows}};
}

}  // namespace rtslab
