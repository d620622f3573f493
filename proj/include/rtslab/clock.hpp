#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>

namespace rtslab {

/// Time source injected into the planners. The virtual clock advances only
/// when work is charged to it, which makes time-budgeted search replayable.
class SearchClock {
 public:
  virtual ~SearchClock() = default;
  virtual std::int64_t now_ns() = 0;
  // `units` is the unit count of the state the work was done on.
  virtual void charge_node(std::int64_t /*units*/) {}
  virtual void charge_eval(std::int64_t /*units*/) {}
  virtual void charge_playout_cycles(std::int64_t /*cycles*/, std::int64_t /*units*/) {}
  virtual void charge_adapt() {}
  virtual bool is_virtual() const { return false; }
};

class SteadyClock final : public SearchClock {
 public:
  std::int64_t now_ns() override {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
  }
};

// Defaults track the measured cost of the reference build on one core:
// expanding a node is dominated by copying and stepping the state, so it
// scales with the unit count, as do evaluations and simulated cycles.
struct VirtualCosts {
  std::int64_t node_ns = 1000;
  std::int64_t node_unit_ns = 600;
  std::int64_t eval_ns = 40;
  std::int64_t eval_unit_ns = 5;
  std::int64_t playout_unit_cycle_ns = 45;
  std::int64_t adapt_ns = 500;
};

class VirtualClock final : public SearchClock {
 public:
  explicit VirtualClock(VirtualCosts costs = {}) : costs_(costs) {}

  std::int64_t now_ns() override { return t_; }
  void charge_node(std::int64_t units) override { t_ += costs_.node_ns + units * costs_.node_unit_ns; }
  void charge_eval(std::int64_t units) override { t_ += costs_.eval_ns + units * costs_.eval_unit_ns; }
  void charge_playout_cycles(std::int64_t n, std::int64_t units) override {
    t_ += n * std::max<std::int64_t>(1, units) * costs_.playout_unit_cycle_ns;
  }
  void charge_adapt() override { t_ += costs_.adapt_ns; }
  bool is_virtual() const override { return true; }

  void advance(std::int64_t ns) { t_ += ns; }
  const VirtualCosts& costs() const { return costs_; }

 private:
  VirtualCosts costs_;
  std::int64_t t_ = 0;
};

}  // namespace rtslab
