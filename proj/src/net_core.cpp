#include "engdiv/net_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/LU>

#include "engdiv/error.hpp"

namespace engdiv {

double TypeMatrices::max_row_sum() const {
  return incoming.size() == 0 ? 0.0 : incoming.maxCoeff();
}

std::string PolicyReport::describe() const {
  std::ostringstream os;
  for (const PolicyViolation& v : violations) {
    switch (v.kind) {
      case PolicyViolation::Kind::negative:
        os << "b[" << v.type << "][" << v.user << "] = " << v.value << " is negative\n";
        break;
      case PolicyViolation::Kind::not_finite:
        os << "b[" << v.type << "][" << v.user << "] is not finite\n";
        break;
      case PolicyViolation::Kind::budget:
        os << "user " << v.user << " receives " << v.value << " > 1 unit\n";
        break;
    }
  }
  return os.str();
}

PolicyReport validate_policy(const InjectionPolicy& policy) {
  PolicyReport report;
  const auto& b = policy.b;
  for (Eigen::Index i = 0; i < b.cols(); ++i) {
    double total = 0.0;
    for (Eigen::Index t = 0; t < b.rows(); ++t) {
      const double v = b(t, i);
      const auto ti = static_cast<std::size_t>(t);
      const auto ui = static_cast<std::size_t>(i);
      if (!std::isfinite(v)) {
        report.violations.push_back({PolicyViolation::Kind::not_finite, ti, ui, v});
        continue;
      }
      if (v < 0.0) report.violations.push_back({PolicyViolation::Kind::negative, ti, ui, v});
      total += v;
    }
    if (total > 1.0 + kBudgetTolerance) {
      report.violations.push_back(
          {PolicyViolation::Kind::budget, 0, static_cast<std::size_t>(i), total});
    }
  }
  return report;
}

TypeMatrices build_type_matrices(const Instance& instance) {
  const std::size_t n = instance.users();
  const std::size_t T = instance.types();
  const auto& p = instance.retweet();
  if (n > 0 && T > 0 && p.maxCoeff() >= 1.0) {
    throw RangeError("retweet probability >= 1 breaks convergence of the dynamics");
  }

  TypeMatrices out;
  out.following.assign(n, 0);
  for (const Edge& e : instance.edges()) ++out.following[e.follower];

  const auto ni = static_cast<Eigen::Index>(n);
  out.incoming = TypeUserMatrix::Zero(static_cast<Eigen::Index>(T), ni);
  out.A.reserve(T);
  for (std::size_t t = 0; t < T; ++t) {
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(instance.edges().size());
    for (const Edge& e : instance.edges()) {
      const double w = p(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(e.followee)) /
                       static_cast<double>(out.following[e.follower]);
      triplets.emplace_back(static_cast<int>(e.follower), static_cast<int>(e.followee), w);
      out.incoming(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(e.follower)) += w;
    }
    SparseRowMatrix A(ni, ni);
    A.setFromTriplets(triplets.begin(), triplets.end());
    A.makeCompressed();
    out.A.push_back(std::move(A));
  }
  return out;
}

struct LimitSolver::Impl {
  std::vector<Eigen::PartialPivLU<Eigen::MatrixXd>> lu;
};

LimitSolver::LimitSolver(const TypeMatrices& matrices, SolverConfig config)
    : matrices_(matrices), config_(config), impl_(std::make_unique<Impl>()) {
  const std::size_t n = matrices_.users();
  if (n > config_.dense_threshold) return;
  const auto ni = static_cast<Eigen::Index>(n);
  impl_->lu.reserve(matrices_.types());
  for (const auto& A : matrices_.A) {
    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(ni, ni) - Eigen::MatrixXd(A);
    impl_->lu.emplace_back(M);
  }
}

LimitSolver::~LimitSolver() = default;
LimitSolver::LimitSolver(LimitSolver&&) noexcept = default;
LimitSolver& LimitSolver::operator=(LimitSolver&&) noexcept = default;

bool LimitSolver::dense() const noexcept { return !impl_->lu.empty() || matrices_.users() == 0; }

namespace {

template <class Mat>
Eigen::VectorXd neumann(const Mat& A, const Eigen::VectorXd& rhs, const SolverConfig& cfg) {
  Eigen::VectorXd sum = rhs;
  Eigen::VectorXd term = rhs;
  for (std::size_t k = 0; k < cfg.neumann_max_terms; ++k) {
    term = A * term;
    sum += term;
    if (term.lpNorm<1>() < cfg.neumann_tolerance) return sum;
  }
  throw InternalError("Neumann series did not converge; row sums must be below 1");
}

void check_finite(const Eigen::VectorXd& v) {
  if (!v.allFinite()) throw InternalError("limiting-state solve produced non-finite values");
}

}  // namespace

Eigen::VectorXd LimitSolver::solve(std::size_t type, const Eigen::VectorXd& rhs) const {
  if (static_cast<std::size_t>(rhs.size()) != matrices_.users()) {
    throw ShapeError("right-hand side length does not match user count");
  }
  Eigen::VectorXd x = impl_->lu.empty() ? neumann(matrices_.A.at(type), rhs, config_)
                                        : Eigen::VectorXd(impl_->lu.at(type).solve(rhs));
  check_finite(x);
  return x;
}

Eigen::VectorXd LimitSolver::solve_transposed(std::size_t type, const Eigen::VectorXd& rhs) const {
  if (static_cast<std::size_t>(rhs.size()) != matrices_.users()) {
    throw ShapeError("right-hand side length does not match user count");
  }
  Eigen::VectorXd x;
  if (impl_->lu.empty()) {
    const SparseRowMatrix At = matrices_.A.at(type).transpose();
    x = neumann(At, rhs, config_);
  } else {
    x = impl_->lu.at(type).transpose().solve(rhs);
  }
  check_finite(x);
  return x;
}

Eigen::MatrixXd LimitSolver::limit_matrix(std::size_t type) const {
  const auto ni = static_cast<Eigen::Index>(matrices_.users());
  if (!impl_->lu.empty()) {
    Eigen::MatrixXd out = impl_->lu.at(type).solve(Eigen::MatrixXd::Identity(ni, ni));
    if (!out.allFinite()) throw InternalError("limit matrix is not finite");
    return out;
  }
  Eigen::MatrixXd out(ni, ni);
  for (Eigen::Index j = 0; j < ni; ++j) {
    out.col(j) = solve(type, Eigen::VectorXd::Unit(ni, j));
  }
  return out;
}

State limiting_state(const LimitSolver& solver, const InjectionPolicy& policy) {
  const auto& m = solver.matrices();
  if (policy.types() != m.types() || policy.users() != m.users()) {
    throw ShapeError("policy shape does not match the type matrices");
  }
  State s{TypeUserMatrix(policy.b.rows(), policy.b.cols())};
  for (std::size_t t = 0; t < m.types(); ++t) {
    const auto ti = static_cast<Eigen::Index>(t);
    s.x.row(ti) = solver.solve(t, policy.b.row(ti).transpose()).transpose();
  }
  return s;
}

State limiting_state(const TypeMatrices& matrices, const InjectionPolicy& policy) {
  return limiting_state(LimitSolver(matrices), policy);
}

double engagement(const State& state, const Instance& instance) {
  const auto& w = instance.engagement_weights();
  if (state.x.rows() != w.rows() || state.x.cols() != w.cols()) {
    throw ShapeError("state shape does not match the instance");
  }
  return w.cwiseProduct(state.x).sum();
}

double diversity(const State& state) {
  if (state.x.size() == 0) return std::numeric_limits<double>::infinity();
  return state.x.minCoeff();
}

}  // namespace engdiv
