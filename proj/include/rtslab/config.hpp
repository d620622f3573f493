#pragma once

#include <filesystem>
#include <memory>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "rtslab/tournament.hpp"

namespace rtslab {

/// Run configuration problem; `path` is the offending field, e.g.
/// "tournament.planners[1]".
class ConfigError : public Error {
 public:
  ConfigError(std::string path, const std::string& what)
      : Error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct RunConfig {
  int schema = kSchemaVersion;
  std::string units_file;  // empty: built-in stats
  int max_cycles = kDefaultMaxCycles;
  PlannerSettings settings;
  PlannerKind default_planner = PlannerKind::IdRtMinimax;
  TournamentConfig tournament;
  std::string output_dir = "out";
  nlohmann::json source;  // the document as read, for the manifest
};

namespace detail {

/// Walks one JSON object, rejecting keys nobody asked for.
class Section {
 public:
  Section(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }
  ~Section() noexcept(false) {
    if (std::uncaught_exceptions()) return;
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) throw ConfigError(child(it.key()), "unknown key");
  }

  bool has(const std::string& key) {
    used_.insert(key);
    return j_.contains(key);
  }
  const nlohmann::json& at(const std::string& key) { return j_.at(key); }
  std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  template <class T>
  void read(const std::string& key, T& out) {
    if (!has(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError(child(key), "wrong type");
    }
  }
  void read_number(const std::string& key, double& out, bool positive = false) {
    read(key, out);
    if (has(key) && (!std::isfinite(out) || (positive && !(out > 0))))
      throw ConfigError(child(key), positive ? "must be a positive number" : "must be finite");
  }
  void read_int(const std::string& key, int& out, int lo) {
    if (!has(key)) return;
    if (!j_.at(key).is_number_integer()) throw ConfigError(child(key), "must be an integer");
    out = j_.at(key).get<int>();
    if (out < lo) throw ConfigError(child(key), "must be >= " + std::to_string(lo));
  }

 private:
  const nlohmann::json& j_;
  std::string path_;
  std::set<std::string> used_;
};

template <class F>
auto at_path(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(path, e.what());
  }
}

}  // namespace detail

/// `base_dir` anchors relative file references (the units file).
inline RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
  RunConfig rc;
  rc.source = j;
  detail::Section root(j, "");
  root.read_int("schema", rc.schema, 1);
  if (rc.schema != kSchemaVersion) throw ConfigError("schema", "unsupported schema version");

  auto& st = rc.settings;
  if (root.has("engine")) {
    detail::Section e(root.at("engine"), "engine");
    e.read("units", rc.units_file);
    e.read_int("max_cycles", rc.max_cycles, 1);
    if (!rc.units_file.empty()) {
      std::filesystem::path p(rc.units_file);
      if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
      rc.tournament.units = detail::at_path("engine.units", [&] {
        return std::make_shared<const UnitTable>(load_unit_table(p.string()));
      });
    }
  }
  if (root.has("eval")) {
    detail::Section ev(root.at("eval"), "eval");
    if (ev.has("lanchester")) {
      detail::Section l(ev.at("lanchester"), "eval.lanchester");
      auto& p = st.eval_params.lanchester;
      l.read("unit_weights", p.unit_weights);
      l.read_number("attrition_exponent", p.attrition_exponent);
      l.read_number("w_carried", p.w_carried);
      l.read_number("w_mined", p.w_mined);
      detail::at_path("eval.lanchester", [&] { p.validate(); });
    }
    if (ev.has("simple")) {
      detail::Section s(ev.at("simple"), "eval.simple");
      auto& p = st.eval_params.simple;
      s.read_number("R", p.R);
      s.read_number("R_W", p.R_W);
      s.read_number("U_B", p.U_B);
      detail::at_path("eval.simple", [&] { p.validate(); });
    }
    if (ev.has("optimizer")) {
      detail::Section o(ev.at("optimizer"), "eval.optimizer");
      auto& c = st.optimizer;
      o.read_number("beta1", c.beta1);
      o.read_number("beta2", c.beta2);
      o.read_number("eps", c.eps);
      o.read_number("eta0", c.eta0);
      o.read_number("d0", c.d0);
      o.read_number("d_max", c.d_max);
      o.read_number("w_floor", c.w_floor);
      o.read_number("w_ceil", c.w_ceil);
      o.read_number("delta_guard", c.delta_guard);
      detail::at_path("eval.optimizer", [&] { c.validate(); });
    }
  }
  if (root.has("planner")) {
    detail::Section p(root.at("planner"), "planner");
    auto& b = st.budget;
    if (p.has("planner")) {
      std::string name;
      p.read("planner", name);
      rc.default_planner = detail::at_path("planner.planner", [&] { return parse_planner(name); });
    }
    p.read_number("wall_ms", b.wall_ms, true);
    p.read_int("max_depth", b.max_depth, 1);
    p.read_int("playout_horizon", b.playout_horizon, 1);
    p.read_number("safety_margin_ms", b.safety_margin_ms);
    p.read_int("response_iterations", st.portfolio.response_iterations, 1);
    p.read("leaf_playout", b.leaf_playout);
    p.read_int("max_unit_choices", b.max_unit_choices, 1);
    p.read_int("max_joint_actions", b.max_joint_actions, 1);
    p.read_int("idle_wait", b.idle_wait, 1);
    if (p.has("scripts")) {
      st.portfolio.scripts.clear();
      const auto& arr = p.at("scripts");
      if (!arr.is_array()) throw ConfigError("planner.scripts", "expected an array");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string path = "planner.scripts[" + std::to_string(i) + "]";
        if (!arr[i].is_string()) throw ConfigError(path, "expected a string");
        st.portfolio.scripts.push_back(detail::at_path(path, [&] { return parse_script(arr[i].get<std::string>()); }));
      }
      if (st.portfolio.scripts.size() < 2) throw ConfigError("planner.scripts", "needs at least 2 scripts");
    }
    if (p.has("clock")) {
      std::string clock;
      p.read("clock", clock);
      if (clock != "virtual" && clock != "wall") throw ConfigError("planner.clock", "must be 'virtual' or 'wall'");
      st.virtual_clock = clock == "virtual";
    }
    if (p.has("virtual_costs")) {
      detail::Section v(p.at("virtual_costs"), "planner.virtual_costs");
      for (auto [key, field] : {std::pair{"node_ns", &VirtualCosts::node_ns},
                                {"node_unit_ns", &VirtualCosts::node_unit_ns},
                                {"eval_ns", &VirtualCosts::eval_ns},
                                {"eval_unit_ns", &VirtualCosts::eval_unit_ns},
                                {"playout_unit_cycle_ns", &VirtualCosts::playout_unit_cycle_ns},
                                {"adapt_ns", &VirtualCosts::adapt_ns}}) {
        v.read(key, st.costs.*field);
        if (st.costs.*field < 0) throw ConfigError(v.child(key), "must be >= 0");
      }
    }
    p.read_number("forfeit_factor", st.forfeit_factor, true);
    detail::at_path("planner", [&] { b.validate(); });
  }
  st.portfolio.playout_horizon = st.budget.playout_horizon;

  auto& t = rc.tournament;
  t.max_cycles = rc.max_cycles;
  if (root.has("tournament")) {
    detail::Section s(root.at("tournament"), "tournament");
    if (s.has("maps")) {
      s.read("maps", t.maps);
      if (t.maps.empty()) throw ConfigError("tournament.maps", "needs at least one map");
    }
    std::vector<PlannerKind> planners{rc.default_planner};
    if (s.has("planners")) {
      planners.clear();
      const auto& arr = s.at("planners");
      if (!arr.is_array()) throw ConfigError("tournament.planners", "expected an array");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string path = "tournament.planners[" + std::to_string(i) + "]";
        if (!arr[i].is_string()) throw ConfigError(path, "expected a string");
        const auto pk = detail::at_path(path, [&] { return parse_planner(arr[i].get<std::string>()); });
        if (pk == PlannerKind::Script || pk == PlannerKind::Idle)
          throw ConfigError(path, "not a search planner");
        planners.push_back(pk);
      }
    }
    std::vector<std::string> variants(kVariants.begin(), kVariants.end());
    if (s.has("variants")) s.read("variants", variants);
    if (s.has("agents")) {
      const auto& arr = s.at("agents");
      if (!arr.is_array()) throw ConfigError("tournament.agents", "expected an array");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string path = "tournament.agents[" + std::to_string(i) + "]";
        if (!arr[i].is_string()) throw ConfigError(path, "expected a string");
        t.agents.push_back(detail::at_path(path, [&] { return AgentSpec::parse(arr[i].get<std::string>()); }));
      }
    } else {
      for (auto pk : planners)
        for (std::size_t i = 0; i < variants.size(); ++i)
          t.agents.push_back(detail::at_path("tournament.variants[" + std::to_string(i) + "]", [&] {
            return AgentSpec::parse(std::string(to_string(pk)) + ":" + variants[i]);
          }));
    }
    s.read_int("games_per_pairing", t.games_per_pairing, 2);
    if (t.games_per_pairing % 2) throw ConfigError("tournament.games_per_pairing", "must be even");
    if (s.has("seed")) {
      if (!s.at("seed").is_number_unsigned()) throw ConfigError("tournament.seed", "must be a non-negative integer");
      t.seed = s.at("seed").get<std::uint64_t>();
    }
    s.read_int("parallel_matches", t.parallel_matches, 1);
    s.read("pair_within_planner", t.pair_within_planner);
  }
  if (root.has("output")) {
    detail::Section o(root.at("output"), "output");
    o.read("dir", rc.output_dir);
  }
  t.settings = st;
  return rc;
}

inline RunConfig load_run_config(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(detail::read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path, std::string("parse failure: ") + e.what());
  } catch (const MapError& e) {
    throw ConfigError(path, e.what());
  }
  return parse_run_config(j, std::filesystem::path(path).parent_path());
}

/// Hash of the canonical (sorted-key, compact) form of a config document.
inline std::string config_hash(const nlohmann::json& j) {
  Fnv64 h;
  h.str(j.dump());
  return hex64(h.value());
}

}  // namespace rtslab
