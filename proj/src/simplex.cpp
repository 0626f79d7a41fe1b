// Dense-tableau two-phase simplex.
//
// Column layout: structural variables, then one slack (≤ rows) or surplus
// (≥ rows) per row, then one artificial per ≥ row with a positive bound.
// Rows with a negative bound are negated first, and ≥ rows with a zero
// bound are negated into ≤ rows so they start with a feasible slack.

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "engdiv/error.hpp"
#include "engdiv/lp.hpp"

namespace engdiv::lp {

void LinearProgram::validate() const {
  for (double c : objective) {
    if (!std::isfinite(c)) throw RangeError("objective coefficient is not finite");
  }
  for (std::size_t r = 0; r < constraints.size(); ++r) {
    const Constraint& row = constraints[r];
    if (row.coefficients.size() != objective.size()) {
      std::ostringstream os;
      os << "constraint " << r << " has " << row.coefficients.size() << " coefficients, expected "
         << objective.size();
      throw ShapeError(os.str());
    }
    if (!std::isfinite(row.bound)) throw RangeError("constraint bound is not finite");
    for (double a : row.coefficients) {
      if (!std::isfinite(a)) throw RangeError("constraint coefficient is not finite");
    }
  }
}

double max_violation(const LinearProgram& program, const std::vector<double>& values) {
  double worst = 0.0;
  for (double v : values) worst = std::max(worst, -v);
  for (const Constraint& row : program.constraints) {
    double lhs = 0.0;
    for (std::size_t j = 0; j < values.size(); ++j) lhs += row.coefficients[j] * values[j];
    const double excess = row.relation == Relation::less_equal ? lhs - row.bound : row.bound - lhs;
    worst = std::max(worst, excess);
  }
  return worst;
}

namespace {

class Tableau {
public:
  Tableau(const LinearProgram& lp, double tol) : tol_(tol) {
    vars_ = lp.variables();
    rows_ = lp.constraints.size();

    std::vector<char> needs_artificial(rows_, 0);
    std::vector<double> sign(rows_, 1.0);
    std::vector<char> is_ge(rows_, 0);
    for (std::size_t r = 0; r < rows_; ++r) {
      const Constraint& c = lp.constraints[r];
      bool ge = c.relation == Relation::greater_equal;
      double s = 1.0;
      if (c.bound < 0.0 || (ge && c.bound == 0.0)) {
        s = -1.0;
        ge = !ge;
      }
      sign[r] = s;
      is_ge[r] = ge ? 1 : 0;
      needs_artificial[r] = ge ? 1 : 0;
    }
    artificials_ = static_cast<std::size_t>(
        std::count(needs_artificial.begin(), needs_artificial.end(), 1));
    cols_ = vars_ + rows_ + artificials_;
    width_ = cols_;

    a_.assign(rows_ * cols_, 0.0);
    rhs_.assign(rows_, 0.0);
    basis_.assign(rows_, 0);
    std::size_t next_art = vars_ + rows_;
    for (std::size_t r = 0; r < rows_; ++r) {
      const Constraint& c = lp.constraints[r];
      double* row = &a_[r * cols_];
      for (std::size_t j = 0; j < vars_; ++j) row[j] = sign[r] * c.coefficients[j];
      rhs_[r] = sign[r] * c.bound;
      row[vars_ + r] = is_ge[r] ? -1.0 : 1.0;
      if (needs_artificial[r]) {
        row[next_art] = 1.0;
        basis_[r] = next_art++;
      } else {
        basis_[r] = vars_ + r;
      }
    }
  }

  std::size_t artificials() const { return artificials_; }
  bool is_artificial(std::size_t j) const { return j >= vars_ + rows_; }

  /// Loads reduced costs for `cost` (length cols_) given the current basis.
  void load_objective(const std::vector<double>& cost) {
    d_.assign(cost.begin(), cost.end());
    d_.resize(cols_, 0.0);
    neg_value_ = 0.0;
    for (std::size_t r = 0; r < rows_; ++r) {
      const double cb = cost[basis_[r]];
      if (cb == 0.0) continue;
      const double* row = &a_[r * cols_];
      for (std::size_t j = 0; j < width_; ++j) d_[j] -= cb * row[j];
      neg_value_ -= cb * rhs_[r];
    }
  }

  double value() const { return -neg_value_; }

  enum class Outcome { optimal, unbounded };

  Outcome run(bool allow_artificial, std::size_t cap, std::size_t& iterations) {
    while (true) {
      std::size_t enter = cols_;
      for (std::size_t j = 0; j < width_; ++j) {
        if (!allow_artificial && is_artificial(j)) continue;
        if (d_[j] > tol_) {
          enter = j;
          break;
        }
      }
      if (enter == cols_) return Outcome::optimal;

      std::size_t leave = rows_;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < rows_; ++r) {
        const double coef = a_[r * cols_ + enter];
        if (coef <= tol_) continue;
        const double ratio = std::max(rhs_[r], 0.0) / coef;
        if (ratio < best - 1e-12 ||
            (ratio <= best + 1e-12 && leave < rows_ && basis_[r] < basis_[leave])) {
          if (ratio < best) best = ratio;
          leave = r;
        }
      }
      if (leave == rows_) return Outcome::unbounded;
      if (iterations >= cap) throw IterationLimitError(cap);
      pivot(leave, enter);
      ++iterations;
    }
  }

  /// Pivots basic artificials out of the basis where a structural or
  /// slack column can replace them; rows that cannot are redundant.
  void expel_artificials() {
    for (std::size_t r = 0; r < rows_; ++r) {
      if (!is_artificial(basis_[r])) continue;
      const double* row = &a_[r * cols_];
      std::size_t best = cols_;
      double best_abs = tol_;
      for (std::size_t j = 0; j < vars_ + rows_; ++j) {
        if (std::fabs(row[j]) > best_abs) {
          best_abs = std::fabs(row[j]);
          best = j;
        }
      }
      if (best != cols_) pivot(r, best);
    }
    // Artificial columns are dead from here on.
    width_ = vars_ + rows_;
  }

  std::vector<double> primal() const {
    std::vector<double> x(vars_, 0.0);
    for (std::size_t r = 0; r < rows_; ++r) {
      if (basis_[r] < vars_) x[basis_[r]] = std::max(rhs_[r], 0.0);
    }
    return x;
  }

  std::size_t cols() const { return cols_; }

private:
  void pivot(std::size_t pr, std::size_t pc) {
    double* prow = &a_[pr * cols_];
    const double inv = 1.0 / prow[pc];
    for (std::size_t j = 0; j < width_; ++j) prow[j] *= inv;
    prow[pc] = 1.0;
    rhs_[pr] *= inv;

    for (std::size_t r = 0; r < rows_; ++r) {
      if (r == pr) continue;
      double* row = &a_[r * cols_];
      const double f = row[pc];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < width_; ++j) row[j] -= f * prow[j];
      row[pc] = 0.0;
      rhs_[r] -= f * rhs_[pr];
    }
    const double f = d_[pc];
    if (f != 0.0) {
      for (std::size_t j = 0; j < width_; ++j) d_[j] -= f * prow[j];
      d_[pc] = 0.0;
      neg_value_ -= f * rhs_[pr];
    }
    basis_[pr] = pc;
  }

  double tol_;
  std::size_t vars_ = 0, rows_ = 0, artificials_ = 0, cols_ = 0, width_ = 0;
  std::vector<double> a_;
  std::vector<double> rhs_;
  std::vector<std::size_t> basis_;
  std::vector<double> d_;
  double neg_value_ = 0.0;
};

}  // namespace

LpSolution solve(const LinearProgram& program, const SimplexOptions& options) {
  program.validate();
  const std::size_t rows = program.constraints.size();
  const std::size_t vars = program.variables();
  const std::size_t cap =
      options.iteration_cap != 0 ? options.iteration_cap : 50 * (rows + vars);

  Tableau tab(program, options.tolerance);
  LpSolution out;

  if (tab.artificials() > 0) {
    std::vector<double> phase1(tab.cols(), 0.0);
    for (std::size_t j = 0; j < tab.cols(); ++j) {
      if (tab.is_artificial(j)) phase1[j] = -1.0;
    }
    tab.load_objective(phase1);
    tab.run(true, cap, out.iterations);
    double scale = 1.0;
    for (const Constraint& c : program.constraints) scale = std::max(scale, std::fabs(c.bound));
    if (tab.value() < -options.tolerance * scale * 10.0) {
      out.status = Status::infeasible;
      return out;
    }
    tab.expel_artificials();
  }

  std::vector<double> cost(tab.cols(), 0.0);
  std::copy(program.objective.begin(), program.objective.end(), cost.begin());
  tab.load_objective(cost);
  if (tab.run(false, cap, out.iterations) == Tableau::Outcome::unbounded) {
    out.status = Status::unbounded;
    return out;
  }
  out.status = Status::optimal;
  out.values = tab.primal();
  out.objective = 0.0;
  for (std::size_t j = 0; j < vars; ++j) out.objective += program.objective[j] * out.values[j];
  return out;
}

}  // namespace engdiv::lp
