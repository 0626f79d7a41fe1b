#include <doctest.h>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include "engdiv/error.hpp"
#include "engdiv/instances.hpp"
#include "engdiv/net_core.hpp"
#include "oracles.hpp"

using namespace engdiv;

namespace {

Instance random_instance(std::uint64_t seed) {
  return instances::generate(instances::corpus_spec(seed, 0, 12, 4));
}

InjectionPolicy random_policy(std::size_t T, std::size_t n, std::uint64_t seed) {
  boost::random::mt19937_64 rng(seed);
  boost::random::uniform_real_distribution<double> u(0.0, 1.0);
  InjectionPolicy b = InjectionPolicy::zeros(T, n);
  for (Eigen::Index i = 0; i < b.b.cols(); ++i) {
    for (Eigen::Index t = 0; t < b.b.rows(); ++t) b.b(t, i) = u(rng);
    b.b.col(i) /= b.b.col(i).sum() + u(rng);
  }
  return b;
}

}  // namespace

TEST_SUITE("net_core") {

TEST_CASE("instance validation") {
  TypeUserMatrix p = TypeUserMatrix::Constant(2, 3, 0.2);
  CHECK_THROWS_AS(Instance::create(3, 3, {}, p), ShapeError);
  CHECK_THROWS_AS(Instance::create(3, 2, {{0, 5}}, p), ShapeError);
  p(1, 2) = 1.0;
  CHECK_THROWS_AS(Instance::create(3, 2, {}, p), RangeError);
  p(1, 2) = -0.1;
  CHECK_THROWS_AS(Instance::create(3, 2, {}, p), RangeError);
  p(1, 2) = 0.3;
  TypeUserMatrix e = TypeUserMatrix::Constant(2, 3, -1.0);
  CHECK_THROWS_AS(Instance::create(3, 2, {}, p, e), RangeError);

  std::vector<std::string> warnings;
  const Instance inst = Instance::create(3, 2, {{1, 0}, {0, 0}, {1, 0}}, p, std::nullopt, &warnings);
  CHECK(inst.edges().size() == 1);
  CHECK(warnings.size() == 2);
}

TEST_CASE("type matrices on CHAIN2") {
  const TypeMatrices m = build_type_matrices(oracle::chain2());
  const Eigen::MatrixXd A0 = Eigen::MatrixXd(m.A[0]);
  CHECK(A0(0, 0) == 0.0);
  CHECK(A0(0, 1) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(A0.row(1).norm() == 0.0);
  CHECK(m.incoming(0, 0) == doctest::Approx(0.5));
  CHECK(m.incoming(1, 0) == doctest::Approx(0.1));
  CHECK(m.incoming(0, 1) == 0.0);
  CHECK(m.incoming(1, 1) == 0.0);
  CHECK(m.max_row_sum() == doctest::Approx(0.5));
}

TEST_CASE("type matrices match the dense definition") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Instance inst = random_instance(s);
    const TypeMatrices m = build_type_matrices(inst);
    for (std::size_t t = 0; t < inst.types(); ++t) {
      const Eigen::MatrixXd ref = oracle::propagation(inst, t);
      CHECK((Eigen::MatrixXd(m.A[t]) - ref).cwiseAbs().maxCoeff() <= 1e-15);
      CHECK((m.incoming.row(static_cast<Eigen::Index>(t)).transpose() - ref.rowwise().sum())
                .cwiseAbs()
                .maxCoeff() <= 1e-14);
    }
  }
}

TEST_CASE("empty graph and outdegree two") {
  const Instance empty = Instance::create(3, 2, {}, TypeUserMatrix::Constant(2, 3, 0.7));
  const TypeMatrices m = build_type_matrices(empty);
  for (const auto& A : m.A) CHECK(A.nonZeros() == 0);
  CHECK(m.incoming.cwiseAbs().maxCoeff() == 0.0);

  const Instance two = Instance::create(3, 1, {{0, 1}, {0, 2}}, TypeUserMatrix::Constant(1, 3, 0.6));
  const TypeMatrices m2 = build_type_matrices(two);
  CHECK(m2.A[0].coeff(0, 1) == doctest::Approx(0.3));
  CHECK(m2.A[0].coeff(0, 2) == doctest::Approx(0.3));
  CHECK(m2.incoming(0, 0) == doctest::Approx(0.6));
}

TEST_CASE("row sums below one and spectral radius estimate") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Instance inst = random_instance(100 + s);
    const TypeMatrices m = build_type_matrices(inst);
    CHECK(m.max_row_sum() < 1.0);
    for (const auto& A : m.A) {
      const Eigen::MatrixXd D = Eigen::MatrixXd(A).cwiseAbs();
      Eigen::VectorXd v = Eigen::VectorXd::Ones(D.rows());
      double rho = 0.0;
      for (int k = 0; k < 200; ++k) {
        Eigen::VectorXd w = D * v;
        rho = w.norm() / v.norm();
        if (w.norm() == 0.0) break;
        v = w / w.norm();
      }
      CHECK(rho < 1.0);
    }
  }
}

TEST_CASE("limiting state examples") {
  const Instance inst = oracle::chain2();
  const LimitSolver solver(build_type_matrices(inst));
  InjectionPolicy b = InjectionPolicy::zeros(2, 2);
  b.b(0, 1) = 1.0;
  const State x = limiting_state(solver, b);
  CHECK(x.x(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(x.x(0, 1) == doctest::Approx(1.0).epsilon(1e-12));

  InjectionPolicy u{TypeUserMatrix(2, 2)};
  u.b << 0.25, 0.75,
         0.75, 0.25;
  const State y = limiting_state(solver, u);
  CHECK(y.x(0, 0) == doctest::Approx(0.625));
  CHECK(y.x(0, 1) == doctest::Approx(0.75));
  CHECK(y.x(1, 0) == doctest::Approx(0.775));
  CHECK(y.x(1, 1) == doctest::Approx(0.25));
  CHECK(diversity(y) == doctest::Approx(0.25));
  const TypeUserMatrix ref = oracle::iterate_to_limit(inst, u.b);
  CHECK((y.x - ref).cwiseAbs().maxCoeff() <= 1e-14);

  const Instance empty = Instance::create(2, 2, {}, TypeUserMatrix::Constant(2, 2, 0.3));
  CHECK(limiting_state(build_type_matrices(empty), u).x == u.b);
}

TEST_CASE("limiting state agrees with iteration and the fixed point") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Instance inst = random_instance(200 + s);
    const TypeMatrices m = build_type_matrices(inst);
    const LimitSolver solver(m);
    const InjectionPolicy b = random_policy(inst.types(), inst.users(), s);
    const State x = limiting_state(solver, b);
    CHECK((x.x - oracle::iterate_to_limit(inst, b.b)).cwiseAbs().maxCoeff() <= 1e-10);
    for (std::size_t t = 0; t < inst.types(); ++t) {
      const auto ti = static_cast<Eigen::Index>(t);
      const Eigen::VectorXd xt = x.x.row(ti).transpose();
      const Eigen::VectorXd fixed = m.A[t] * xt + b.b.row(ti).transpose();
      CHECK((fixed - xt).cwiseAbs().maxCoeff() <= 1e-8);
    }
  }
}

TEST_CASE("Neumann path matches the dense path") {
  const Instance inst = random_instance(7);
  const TypeMatrices m = build_type_matrices(inst);
  const LimitSolver dense(m);
  SolverConfig cfg;
  cfg.dense_threshold = 0;
  const LimitSolver series(m, cfg);
  CHECK(dense.dense());
  CHECK_FALSE(series.dense());
  const InjectionPolicy b = random_policy(inst.types(), inst.users(), 3);
  CHECK((limiting_state(dense, b).x - limiting_state(series, b).x).cwiseAbs().maxCoeff() <= 1e-10);
  const Eigen::VectorXd w = Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(inst.users()), 0.1, 0.9);
  CHECK((dense.solve_transposed(0, w) - series.solve_transposed(0, w)).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("limiting state is monotone in the policy") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Instance inst = random_instance(300 + s);
    const LimitSolver solver(build_type_matrices(inst));
    InjectionPolicy b = random_policy(inst.types(), inst.users(), 40 + s);
    const State before = limiting_state(solver, b);
    b.b(static_cast<Eigen::Index>(s % inst.types()), 0) += 0.1;
    const State after = limiting_state(solver, b);
    CHECK(((after.x - before.x).array() >= -1e-15).all());
  }
}

TEST_CASE("engagement and diversity") {
  const Instance single = Instance::create(1, 2, {}, (TypeUserMatrix(2, 1) << 0.3, 0.6).finished());
  CHECK(engagement(State{(TypeUserMatrix(2, 1) << 0.0, 1.0).finished()}, single) ==
        doctest::Approx(0.6));
  CHECK(engagement(State{TypeUserMatrix::Zero(2, 1)}, single) == 0.0);
  CHECK_THROWS_AS(engagement(State{TypeUserMatrix::Zero(2, 2)}, single), ShapeError);

  CHECK(diversity(State{TypeUserMatrix::Constant(3, 4, 0.25)}) == 0.25);
  TypeUserMatrix z = TypeUserMatrix::Constant(3, 4, 0.25);
  z(2, 1) = 0.0;
  CHECK(diversity(State{z}) == 0.0);

  // Uses affinities when present.
  const TypeUserMatrix e = (TypeUserMatrix(2, 1) << 2.0, 0.0).finished();
  const Instance aff = Instance::create(1, 2, {}, single.retweet(), e);
  CHECK(engagement(State{(TypeUserMatrix(2, 1) << 1.0, 1.0).finished()}, aff) == doctest::Approx(2.0));
}

TEST_CASE("engagement and diversity are monotone in the state") {
  const Instance inst = random_instance(9);
  const LimitSolver solver(build_type_matrices(inst));
  const State x = limiting_state(solver, random_policy(inst.types(), inst.users(), 1));
  State y = x;
  y.x.array() += 0.01;
  CHECK(engagement(y, inst) >= engagement(x, inst));
  CHECK(diversity(y) >= diversity(x));
}

TEST_CASE("zero injection on a source user gives zero diversity") {
  // User 1 follows nobody, so inc = 0 and its exposure equals its injection.
  const Instance inst = oracle::chain2();
  InjectionPolicy b{TypeUserMatrix::Constant(2, 2, 0.5)};
  b.b(1, 1) = 0.0;
  CHECK(diversity(limiting_state(build_type_matrices(inst), b)) == 0.0);
}

TEST_CASE("policy validation") {
  CHECK(validate_policy(InjectionPolicy{TypeUserMatrix::Constant(4, 3, 0.25)}).valid());

  TypeUserMatrix over = TypeUserMatrix::Constant(2, 3, 0.5);
  over(0, 1) = 1.0;
  const PolicyReport r = validate_policy(InjectionPolicy{over});
  REQUIRE(r.violations.size() == 1);
  CHECK(r.violations[0].kind == PolicyViolation::Kind::budget);
  CHECK(r.violations[0].user == 1);
  CHECK(r.violations[0].value == doctest::Approx(1.5));

  TypeUserMatrix neg = TypeUserMatrix::Constant(2, 3, 0.2);
  neg(1, 2) = -0.1;
  const PolicyReport q = validate_policy(InjectionPolicy{neg});
  REQUIRE(q.violations.size() == 1);
  CHECK(q.violations[0].kind == PolicyViolation::Kind::negative);
  CHECK(q.violations[0].type == 1);
  CHECK_FALSE(q.describe().empty());
}

}  // TEST_SUITE
