#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "engdiv/instance.hpp"

namespace engdiv {

using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Per-type propagation matrices A_t with A_t(i, j) = p_t(j) / following(i)
/// on every edge (i, j).
struct TypeMatrices {
  std::vector<SparseRowMatrix> A;     ///< one n×n matrix per type
  std::vector<std::size_t> following; ///< out-degree per user
  TypeUserMatrix incoming;            ///< row sums of A_t, T×n

  std::size_t users() const noexcept { return following.size(); }
  std::size_t types() const noexcept { return A.size(); }
  /// max over t, i of incoming(t, i); a certified bound on every ρ(A_t).
  double max_row_sum() const;
};

/// Tweet mass injected per user and type at every step.
struct InjectionPolicy {
  TypeUserMatrix b;

  std::size_t types() const noexcept { return static_cast<std::size_t>(b.rows()); }
  std::size_t users() const noexcept { return static_cast<std::size_t>(b.cols()); }
  static InjectionPolicy zeros(std::size_t T, std::size_t n) {
    return {TypeUserMatrix::Zero(static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(n))};
  }
};

/// Expected exposures per type and user.
struct State {
  TypeUserMatrix x;

  std::size_t types() const noexcept { return static_cast<std::size_t>(x.rows()); }
  std::size_t users() const noexcept { return static_cast<std::size_t>(x.cols()); }
};

inline constexpr double kBudgetTolerance = 1e-9;

struct PolicyViolation {
  enum class Kind { negative, budget, not_finite };
  Kind kind;
  std::size_t type = 0;  ///< unused for budget violations
  std::size_t user = 0;
  double value = 0.0;    ///< offending entry, or the user's total for budget
};

struct PolicyReport {
  std::vector<PolicyViolation> violations;
  bool valid() const noexcept { return violations.empty(); }
  std::string describe() const;
};

/// Lists every negative entry and every user whose injections exceed one
/// unit (beyond kBudgetTolerance). Never throws.
PolicyReport validate_policy(const InjectionPolicy& policy);

/// Throws RangeError when p has an entry >= 1 (checked again here because
/// a single such entry makes I - A_t singular).
TypeMatrices build_type_matrices(const Instance& instance);

struct SolverConfig {
  /// Dense LU up to this many users, Neumann series above.
  std::size_t dense_threshold = 2000;
  double neumann_tolerance = 1e-12;
  std::size_t neumann_max_terms = 1'000'000;
};

/// Solves (I - A_t) x = b and (I - A_t)^T c = w for every type, factorizing
/// once per type. Immutable after construction.
class LimitSolver {
public:
  explicit LimitSolver(const TypeMatrices& matrices, SolverConfig config = {});
  ~LimitSolver();
  LimitSolver(LimitSolver&&) noexcept;
  LimitSolver& operator=(LimitSolver&&) noexcept;

  Eigen::VectorXd solve(std::size_t type, const Eigen::VectorXd& rhs) const;
  Eigen::VectorXd solve_transposed(std::size_t type, const Eigen::VectorXd& rhs) const;
  /// Dense (I - A_t)^{-1}, built column-block by factorized solves.
  Eigen::MatrixXd limit_matrix(std::size_t type) const;

  const TypeMatrices& matrices() const noexcept { return matrices_; }
  bool dense() const noexcept;

private:
  struct Impl;
  TypeMatrices matrices_;
  SolverConfig config_;
  std::unique_ptr<Impl> impl_;
};

/// x_t = (I - A_t)^{-1} b_t for every t.
State limiting_state(const LimitSolver& solver, const InjectionPolicy& policy);
State limiting_state(const TypeMatrices& matrices, const InjectionPolicy& policy);

/// Σ_t <w_t, x_t> with w = e if the instance has affinities, else p.
double engagement(const State& state, const Instance& instance);

/// Smallest exposure over all types and users.
double diversity(const State& state);

}  // namespace engdiv
