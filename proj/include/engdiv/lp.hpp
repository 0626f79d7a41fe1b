#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "engdiv/instance.hpp"
#include "engdiv/net_core.hpp"

namespace engdiv::lp {

enum class Relation { less_equal, greater_equal };

struct Constraint {
  std::vector<double> coefficients;
  Relation relation = Relation::less_equal;
  double bound = 0.0;
};

/// maximize objective·x subject to constraints, x >= 0.
struct LinearProgram {
  std::vector<double> objective;
  std::vector<Constraint> constraints;

  std::size_t variables() const noexcept { return objective.size(); }
  /// Throws ShapeError / RangeError when a row has the wrong length or a
  /// non-finite entry.
  void validate() const;
};

enum class Status { optimal, infeasible, unbounded };

struct LpSolution {
  Status status = Status::infeasible;
  std::vector<double> values;
  double objective = 0.0;
  std::size_t iterations = 0;
};

struct SimplexOptions {
  double tolerance = 1e-9;
  /// 0 selects 50 · (rows + columns).
  std::size_t iteration_cap = 0;
};

/// Two-phase dense-tableau simplex with Bland's rule. Deterministic; throws
/// IterationLimitError when the pivot cap is reached.
LpSolution solve(const LinearProgram& program, const SimplexOptions& options = {});

/// Largest violation of any constraint or sign restriction at `values`.
double max_violation(const LinearProgram& program, const std::vector<double>& values);

/// Variable (t, i) sits at index t·n + i.
inline std::size_t variable_index(std::size_t type, std::size_t user, std::size_t n) {
  return type * n + user;
}

/// Engagement-optimal program: n budget rows, objective c flattened.
LinearProgram build_engagement_lp(const Instance& instance);
LinearProgram build_engagement_lp(const Instance& instance, const LimitSolver& solver);

enum class DiversityForm {
  /// Rows of (I - A_t)^{-1} materialized as constraint coefficients.
  materialized,
  /// Variables y_t = (I - A_t)^{-1} b_t; the policy is recovered as
  /// (I - A_t) y_t.
  substituted,
};

/// δ-diversity program. Throws RangeError unless 0 <= δ <= 1/T.
LinearProgram build_diversity_lp(const Instance& instance, double delta,
                                 DiversityForm form = DiversityForm::materialized);
LinearProgram build_diversity_lp(const Instance& instance, const LimitSolver& solver,
                                 double delta, DiversityForm form = DiversityForm::materialized);

struct DeltaOptimum {
  InjectionPolicy policy;
  double value = 0.0;  ///< OPT_δ
  std::size_t iterations = 0;
};

/// Solves the δ-diversity program and returns the optimal policy.
DeltaOptimum opt_delta(const Instance& instance, double delta,
                       DiversityForm form = DiversityForm::materialized);
DeltaOptimum opt_delta(const Instance& instance, const LimitSolver& solver, double delta,
                       DiversityForm form = DiversityForm::materialized);

/// Fixed-layout MPS. MPS minimizes, so the objective row holds -objective.
void write_mps(std::ostream& out, const LinearProgram& program, const std::string& name);

/// Throws RangeError unless 0 <= δ <= 1/T (plus rounding slack).
void check_delta(double delta, std::size_t types);

}  // namespace engdiv::lp
