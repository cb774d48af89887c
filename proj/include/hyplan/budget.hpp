#pragma once

// Time budgets. In Wall mode a budget is a steady-clock deadline. In Work mode
// the same number of seconds is converted into a fixed count of elementary
// operations (annealing flip proposals, search nodes) using reference rates
// measured once on the development machine, so budgeted runs are
// reproducible bit-for-bit.

#include <chrono>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace hyplan {

enum class BudgetMode { Work, Wall };

inline const char* to_string(BudgetMode m) { return m == BudgetMode::Work ? "work" : "wall"; }

inline BudgetMode budget_mode_from_string(const std::string& s) {
  if (s == "work") return BudgetMode::Work;
  if (s == "wall") return BudgetMode::Wall;
  throw std::invalid_argument("unknown budget mode '" + s + "' (expected work|wall)");
}

// Single-core throughputs of the development machine (Release build), measured
// with tools/calibrate.cpp and frozen here.
inline constexpr double kSaFlipsPerSecond = 3.7e7;
inline constexpr double kSearchNodesPerSecond = 5.3e6;

class Budget {
 public:
  Budget(double seconds, BudgetMode mode, double ops_per_second)
      : mode_(mode),
        ops_limit_(static_cast<std::uint64_t>(seconds * ops_per_second)),
        deadline_(std::chrono::steady_clock::now() +
                  std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                      std::chrono::duration<double>(seconds))) {
    if (!(seconds > 0.0)) throw std::invalid_argument("budget must be positive");
  }

  void spend(std::uint64_t ops) noexcept { used_ += ops; }

  [[nodiscard]] bool exhausted() const {
    if (mode_ == BudgetMode::Work) return used_ >= ops_limit_;
    return std::chrono::steady_clock::now() >= deadline_;
  }

  [[nodiscard]] BudgetMode mode() const noexcept { return mode_; }
  [[nodiscard]] std::uint64_t used() const noexcept { return used_; }
  [[nodiscard]] std::uint64_t limit() const noexcept { return ops_limit_; }

 private:
  BudgetMode mode_;
  std::uint64_t ops_limit_;
  std::uint64_t used_ = 0;
  std::chrono::steady_clock::time_point deadline_;
};

}  // namespace hyplan
