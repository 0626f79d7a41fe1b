#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "engdiv/check.hpp"
#include "engdiv/instance.hpp"
#include "engdiv/net_core.hpp"

namespace engdiv::dynamics {

/// Injections for steps 0..K.
struct Schedule {
  std::vector<InjectionPolicy> steps;

  static Schedule constant(const InjectionPolicy& policy, std::size_t horizon) {
    return {std::vector<InjectionPolicy>(horizon + 1, policy)};
  }
  std::size_t horizon() const noexcept { return steps.empty() ? 0 : steps.size() - 1; }
};

struct Trajectory {
  std::vector<State> states;  ///< states[0] equals the first injection
  Schedule schedule;
};

/// Certified geometric tail: ||x(b)_t - x^(k)_t||_1 <= lambda · gamma^(k+1)
/// for every type t and every valid policy b.
struct TailBound {
  double lambda = 0.0;
  double gamma = 0.0;

  double at(std::size_t k) const;
};

struct SimulationLimits {
  /// Upper bound on (K+1)·n·T stored cells.
  std::size_t cell_budget = 100'000'000;
};

/// x' = A_t x_t + b_t for every type.
State step(const TypeMatrices& matrices, const State& state, const InjectionPolicy& injection);

/// Throws ShapeError on an empty schedule and RangeError when the trajectory
/// would exceed the cell budget.
Trajectory simulate(const TypeMatrices& matrices, const Schedule& schedule,
                    const SimulationLimits& limits = {});

double average_engagement(const Trajectory& trajectory, const Instance& instance);

/// gamma = max row sum over all A_t, lambda = n / (1 - gamma).
TailBound tail_bound(const TypeMatrices& matrices);

/// Entrywise mean of the schedule's injections.
InjectionPolicy average_policy(const Schedule& schedule);

/// Random schedule over steps 0..horizon whose every injection gives each
/// user δ of every type plus a random split of a random share of the
/// remaining 1 - Tδ, so every state along it is δ-diverse.
Schedule random_diverse_schedule(std::size_t types, std::size_t users, double delta,
                                 std::size_t horizon, std::uint64_t seed);

struct Theorem1Report {
  double delta = 0.0;
  std::size_t horizon = 0;
  TailBound tail;
  double eng_limit = 0.0;      ///< eng(b*)
  double eng_average = 0.0;    ///< eng^av of b* over 0..K
  double constant_c = 0.0;     ///< C in eng(b*) - eng^av <= C/K
  double worst_diversity_slack = 0.0;  ///< min_k div(x^k) - (δ - λγ^(k+1))
  std::optional<double> challenger_average;  ///< eng^av of the challenger
  std::optional<double> challenger_policy;   ///< eng(b_av)
  std::vector<Check> checks;

  bool passed() const;
};

/// Runs the three convergence/optimality checks against the optimal
/// δ-diverse policy b*. The challenger must be δ-diverse at every step
/// including step 0; a schedule that is not is rejected with RangeError.
Theorem1Report verify_theorem1(const Instance& instance, double delta, std::size_t horizon,
                               const std::optional<Schedule>& challenger = std::nullopt);

/// CSV with columns step,type,user,exposure.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);

}  // namespace engdiv::dynamics
