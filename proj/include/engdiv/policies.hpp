#pragma once

#include <cstddef>
#include <vector>

#include "engdiv/instance.hpp"
#include "engdiv/net_core.hpp"

namespace engdiv {

/// c(t, i): limiting engagement produced by one unit of type t injected to
/// user i. favorite[i] is the lowest type index attaining max_t c(t, i).
struct Coefficients {
  TypeUserMatrix c;
  std::vector<std::size_t> favorite;
};

Coefficients engagement_coefficients(const Instance& instance, const LimitSolver& solver);
Coefficients engagement_coefficients(const Instance& instance);

struct OptimalPolicy {
  InjectionPolicy policy;
  double value = 0.0;  ///< OPT_eng = Σ_i max_t c(t, i)
};

/// One unit of each user's favorite type.
OptimalPolicy optimal_policy(const Instance& instance, const LimitSolver& solver);
OptimalPolicy optimal_policy(const Instance& instance);

/// δ of every non-favorite type, 1 - (T-1)δ of the favorite.
InjectionPolicy delta_uniform(const Instance& instance, const LimitSolver& solver, double delta);
InjectionPolicy delta_uniform(const Instance& instance, double delta);

/// δ(1 - inc(t, i)) of every non-favorite type, so the limiting exposure of
/// those types is at least δ; the rest of the unit budget goes to the
/// favorite.
InjectionPolicy delta_exact(const Instance& instance, const LimitSolver& solver, double delta);
InjectionPolicy delta_exact(const Instance& instance, double delta);

/// c·b, i.e. the limiting engagement of `policy` without solving for the state.
double policy_engagement(const Coefficients& coefficients, const InjectionPolicy& policy);

}  // namespace engdiv
