#include "engdiv/policies.hpp"

#include <algorithm>

#include "engdiv/error.hpp"
#include "engdiv/lp.hpp"

namespace engdiv {

Coefficients engagement_coefficients(const Instance& instance, const LimitSolver& solver) {
  const auto& w = instance.engagement_weights();
  Coefficients out;
  out.c = TypeUserMatrix(w.rows(), w.cols());
  for (std::size_t t = 0; t < instance.types(); ++t) {
    const auto ti = static_cast<Eigen::Index>(t);
    out.c.row(ti) = solver.solve_transposed(t, w.row(ti).transpose()).transpose();
  }
  out.favorite.assign(instance.users(), 0);
  for (Eigen::Index i = 0; i < out.c.cols(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index t = 1; t < out.c.rows(); ++t) {
      if (out.c(t, i) > out.c(best, i)) best = t;
    }
    out.favorite[static_cast<std::size_t>(i)] = static_cast<std::size_t>(best);
  }
  return out;
}

Coefficients engagement_coefficients(const Instance& instance) {
  return engagement_coefficients(instance, LimitSolver(build_type_matrices(instance)));
}

OptimalPolicy optimal_policy(const Instance& instance, const LimitSolver& solver) {
  const Coefficients coef = engagement_coefficients(instance, solver);
  OptimalPolicy out{InjectionPolicy::zeros(instance.types(), instance.users()), 0.0};
  for (std::size_t i = 0; i < instance.users(); ++i) {
    const auto f = static_cast<Eigen::Index>(coef.favorite[i]);
    const auto ii = static_cast<Eigen::Index>(i);
    out.policy.b(f, ii) = 1.0;
    out.value += coef.c(f, ii);
  }
  return out;
}

OptimalPolicy optimal_policy(const Instance& instance) {
  return optimal_policy(instance, LimitSolver(build_type_matrices(instance)));
}

InjectionPolicy delta_uniform(const Instance& instance, const LimitSolver& solver, double delta) {
  lp::check_delta(delta, instance.types());
  const Coefficients coef = engagement_coefficients(instance, solver);
  const auto T = static_cast<double>(instance.types());
  InjectionPolicy out{TypeUserMatrix::Constant(static_cast<Eigen::Index>(instance.types()),
                                               static_cast<Eigen::Index>(instance.users()),
                                               delta)};
  for (std::size_t i = 0; i < instance.users(); ++i) {
    out.b(static_cast<Eigen::Index>(coef.favorite[i]), static_cast<Eigen::Index>(i)) =
        std::max(0.0, 1.0 - (T - 1.0) * delta);
  }
  return out;
}

InjectionPolicy delta_uniform(const Instance& instance, double delta) {
  return delta_uniform(instance, LimitSolver(build_type_matrices(instance)), delta);
}

InjectionPolicy delta_exact(const Instance& instance, const LimitSolver& solver, double delta) {
  lp::check_delta(delta, instance.types());
  const Coefficients coef = engagement_coefficients(instance, solver);
  const auto& inc = solver.matrices().incoming;
  const auto T = static_cast<double>(instance.types());
  InjectionPolicy out = InjectionPolicy::zeros(instance.types(), instance.users());
  for (Eigen::Index i = 0; i < out.b.cols(); ++i) {
    const auto f = static_cast<Eigen::Index>(coef.favorite[static_cast<std::size_t>(i)]);
    double other_incoming = 0.0;
    for (Eigen::Index t = 0; t < out.b.rows(); ++t) {
      if (t == f) continue;
      out.b(t, i) = delta * (1.0 - inc(t, i));
      other_incoming += inc(t, i);
    }
    // Analytically in [1 - (T-1)δ, 1]; clamp rounding noise.
    out.b(f, i) = std::clamp(1.0 - delta * (T - 1.0 - other_incoming), 0.0, 1.0);
  }
  return out;
}

InjectionPolicy delta_exact(const Instance& instance, double delta) {
  return delta_exact(instance, LimitSolver(build_type_matrices(instance)), delta);
}

double policy_engagement(const Coefficients& coefficients, const InjectionPolicy& policy) {
  if (coefficients.c.rows() != policy.b.rows() || coefficients.c.cols() != policy.b.cols()) {
    throw ShapeError("policy shape does not match the coefficients");
  }
  return coefficients.c.cwiseProduct(policy.b).sum();
}

}  // namespace engdiv
