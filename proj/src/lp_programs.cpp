#include <algorithm>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "engdiv/error.hpp"
#include "engdiv/lp.hpp"
#include "engdiv/policies.hpp"

namespace engdiv::lp {

void check_delta(double delta, std::size_t types) {
  if (!(delta >= 0.0) || delta > 1.0 / static_cast<double>(types) + 1e-12) {
    std::ostringstream os;
    os << "delta = " << delta << " is outside [0, 1/T] with T = " << types;
    throw RangeError(os.str());
  }
}

namespace {

void add_budget_rows(LinearProgram& lp, std::size_t n, std::size_t T) {
  for (std::size_t i = 0; i < n; ++i) {
    Constraint row{std::vector<double>(n * T, 0.0), Relation::less_equal, 1.0};
    for (std::size_t t = 0; t < T; ++t) row.coefficients[variable_index(t, i, n)] = 1.0;
    lp.constraints.push_back(std::move(row));
  }
}

}  // namespace

LinearProgram build_engagement_lp(const Instance& instance, const LimitSolver& solver) {
  const std::size_t n = instance.users();
  const std::size_t T = instance.types();
  const Coefficients coef = engagement_coefficients(instance, solver);
  LinearProgram lp;
  lp.objective.resize(n * T);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      lp.objective[variable_index(t, i, n)] =
          coef.c(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(i));
    }
  }
  add_budget_rows(lp, n, T);
  return lp;
}

LinearProgram build_engagement_lp(const Instance& instance) {
  return build_engagement_lp(instance, LimitSolver(build_type_matrices(instance)));
}

LinearProgram build_diversity_lp(const Instance& instance, const LimitSolver& solver,
                                 double delta, DiversityForm form) {
  check_delta(delta, instance.types());
  const std::size_t n = instance.users();
  const std::size_t T = instance.types();

  if (form == DiversityForm::materialized) {
    LinearProgram lp = build_engagement_lp(instance, solver);
    for (std::size_t t = 0; t < T; ++t) {
      const Eigen::MatrixXd limit = solver.limit_matrix(t);
      for (std::size_t i = 0; i < n; ++i) {
        Constraint row{std::vector<double>(n * T, 0.0), Relation::greater_equal, delta};
        for (std::size_t j = 0; j < n; ++j) {
          row.coefficients[variable_index(t, j, n)] =
              limit(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        }
        lp.constraints.push_back(std::move(row));
      }
    }
    return lp;
  }

  // Substituted: maximize Σ_t w_t·y_t with y >= δ, (I - A_t) y_t >= 0 and
  // Σ_t ((I - A_t) y_t)_i <= 1.
  const auto& w = instance.engagement_weights();
  const auto& matrices = solver.matrices();
  LinearProgram lp;
  lp.objective.resize(n * T);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      lp.objective[variable_index(t, i, n)] =
          w(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(i));
    }
  }
  // Row i of (I - A_t) as coefficients on y_t.
  auto injection_row = [&](std::size_t t, std::size_t i, std::vector<double>& coeffs) {
    coeffs[variable_index(t, i, n)] += 1.0;
    const auto& A = matrices.A[t];
    for (SparseRowMatrix::InnerIterator it(A, static_cast<Eigen::Index>(i)); it; ++it) {
      coeffs[variable_index(t, static_cast<std::size_t>(it.col()), n)] -= it.value();
    }
  };
  for (std::size_t i = 0; i < n; ++i) {
    Constraint row{std::vector<double>(n * T, 0.0), Relation::less_equal, 1.0};
    for (std::size_t t = 0; t < T; ++t) injection_row(t, i, row.coefficients);
    lp.constraints.push_back(std::move(row));
  }
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      Constraint row{std::vector<double>(n * T, 0.0), Relation::greater_equal, 0.0};
      injection_row(t, i, row.coefficients);
      lp.constraints.push_back(std::move(row));
    }
  }
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      Constraint row{std::vector<double>(n * T, 0.0), Relation::greater_equal, delta};
      row.coefficients[variable_index(t, i, n)] = 1.0;
      lp.constraints.push_back(std::move(row));
    }
  }
  return lp;
}

LinearProgram build_diversity_lp(const Instance& instance, double delta, DiversityForm form) {
  return build_diversity_lp(instance, LimitSolver(build_type_matrices(instance)), delta, form);
}

DeltaOptimum opt_delta(const Instance& instance, const LimitSolver& solver, double delta,
                       DiversityForm form) {
  const LinearProgram lp = build_diversity_lp(instance, solver, delta, form);
  const LpSolution sol = solve(lp);
  if (sol.status != Status::optimal) {
    std::ostringstream os;
    os << "delta-diversity program reported "
       << (sol.status == Status::infeasible ? "infeasible" : "unbounded") << " at delta = "
       << delta << "; the uniform policy should be feasible";
    throw InternalError(os.str());
  }

  const std::size_t n = instance.users();
  const std::size_t T = instance.types();
  DeltaOptimum out{InjectionPolicy::zeros(T, n), sol.objective, sol.iterations};
  for (std::size_t t = 0; t < T; ++t) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      v(static_cast<Eigen::Index>(i)) = sol.values[variable_index(t, i, n)];
    }
    if (form == DiversityForm::substituted) {
      v = v - solver.matrices().A[t] * v;
    }
    out.policy.b.row(static_cast<Eigen::Index>(t)) = v.cwiseMax(0.0).transpose();
  }
  // Solver round-off (amplified by the recovery in substituted form) can
  // push a user's total a hair past one unit; scale such columns back.
  for (Eigen::Index i = 0; i < out.policy.b.cols(); ++i) {
    const double total = out.policy.b.col(i).sum();
    if (total > 1.0) out.policy.b.col(i) /= total;
  }
  return out;
}

DeltaOptimum opt_delta(const Instance& instance, double delta, DiversityForm form) {
  return opt_delta(instance, LimitSolver(build_type_matrices(instance)), delta, form);
}

namespace {

std::string mps_name(char prefix, std::size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%c%07zu", prefix, index);
  return buf;
}

std::string mps_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.5E", v);
  return buf;
}

// Fixed MPS fields start at columns 2, 5, 15, 25, 40, 50.
std::string mps_line(const std::string& f1, const std::string& f2, const std::string& f3 = {},
                     const std::string& f4 = {}, const std::string& f5 = {},
                     const std::string& f6 = {}) {
  std::string line(61, ' ');
  auto put = [&line](std::size_t col, const std::string& s) { line.replace(col - 1, s.size(), s); };
  put(2, f1);
  put(5, f2);
  put(15, f3);
  put(25, f4);
  put(40, f5);
  put(50, f6);
  while (!line.empty() && line.back() == ' ') line.pop_back();
  return line;
}

}  // namespace

void write_mps(std::ostream& out, const LinearProgram& program, const std::string& name) {
  program.validate();
  out << "* maximization written as minimization of the negated objective\n";
  out << "NAME          " << name.substr(0, 8) << "\n";
  out << "ROWS\n";
  out << mps_line("N", "COST") << "\n";
  for (std::size_t r = 0; r < program.constraints.size(); ++r) {
    const char* kind = program.constraints[r].relation == Relation::less_equal ? "L" : "G";
    out << mps_line(kind, mps_name('R', r)) << "\n";
  }
  out << "COLUMNS\n";
  for (std::size_t j = 0; j < program.variables(); ++j) {
    const std::string col = mps_name('X', j);
    if (program.objective[j] != 0.0) {
      out << mps_line("", col, "COST", mps_number(-program.objective[j])) << "\n";
    }
    for (std::size_t r = 0; r < program.constraints.size(); ++r) {
      const double a = program.constraints[r].coefficients[j];
      if (a != 0.0) out << mps_line("", col, mps_name('R', r), mps_number(a)) << "\n";
    }
  }
  out << "RHS\n";
  for (std::size_t r = 0; r < program.constraints.size(); ++r) {
    const double b = program.constraints[r].bound;
    if (b != 0.0) out << mps_line("", "RHS", mps_name('R', r), mps_number(b)) << "\n";
  }
  out << "ENDATA\n";
}

}  // namespace engdiv::lp
