#include <doctest.h>

#include <sstream>

#include "engdiv/dynamics.hpp"
#include "engdiv/error.hpp"
#include "engdiv/instances.hpp"
#include "engdiv/lp.hpp"
#include "engdiv/policies.hpp"
#include "oracles.hpp"

using namespace engdiv;
using namespace engdiv::dynamics;

namespace {

InjectionPolicy unit_type0_user1() {
  InjectionPolicy b = InjectionPolicy::zeros(2, 2);
  b.b(0, 1) = 1.0;
  return b;
}

}  // namespace

TEST_SUITE("dynamics") {

TEST_CASE("single steps") {
  const TypeMatrices m = build_type_matrices(oracle::chain2());
  const InjectionPolicy b = unit_type0_user1();
  const State next = step(m, State{b.b}, b);
  CHECK(next.x(0, 0) == doctest::Approx(0.5));
  CHECK(next.x(0, 1) == doctest::Approx(1.0));
  CHECK(step(m, State{TypeUserMatrix::Zero(2, 2)}, b).x == b.b);

  const TypeMatrices e = build_type_matrices(Instance::create(2, 2, {}, TypeUserMatrix::Constant(2, 2, 0.4)));
  CHECK(step(e, State{TypeUserMatrix::Constant(2, 2, 9.0)}, b).x == b.b);
  CHECK_THROWS_AS(step(m, State{TypeUserMatrix::Zero(3, 2)}, b), ShapeError);
}

TEST_CASE("CHAIN2 trajectory converges after one step") {
  const TypeMatrices m = build_type_matrices(oracle::chain2());
  const Trajectory tr = simulate(m, Schedule::constant(unit_type0_user1(), 3));
  REQUIRE(tr.states.size() == 4);
  CHECK(tr.states[0].x(0, 0) == 0.0);
  for (std::size_t k = 1; k < 4; ++k) {
    CHECK(tr.states[k].x(0, 0) == doctest::Approx(0.5));
    CHECK(tr.states[k].x(0, 1) == doctest::Approx(1.0));
  }
  const Trajectory zero = simulate(m, Schedule::constant(unit_type0_user1(), 0));
  REQUIRE(zero.states.size() == 1);
  CHECK(zero.states[0].x == unit_type0_user1().b);
}

TEST_CASE("simulate rejects empty schedules and oversized runs") {
  const TypeMatrices m = build_type_matrices(oracle::chain2());
  CHECK_THROWS_AS(simulate(m, Schedule{}), ShapeError);
  SimulationLimits tiny;
  tiny.cell_budget = 10;
  CHECK_THROWS_AS(simulate(m, Schedule::constant(unit_type0_user1(), 5), tiny), RangeError);
}

TEST_CASE("average engagement") {
  const Instance inst = oracle::chain2();
  const TypeMatrices m = build_type_matrices(inst);
  const Trajectory tr = simulate(m, Schedule::constant(unit_type0_user1(), 1));
  CHECK(average_engagement(tr, inst) == doctest::Approx(0.55));

  Trajectory flat;
  flat.states.assign(3, State{(TypeUserMatrix(2, 2) << 0.0, 1.0, 0.0, 1.0).finished()});
  const Instance p = Instance::create(2, 2, {}, (TypeUserMatrix(2, 2) << 0.1, 0.2, 0.3, 0.4).finished());
  CHECK(average_engagement(flat, p) == doctest::Approx(0.6));
  CHECK(average_engagement(simulate(m, Schedule::constant(InjectionPolicy::zeros(2, 2), 4)), inst) == 0.0);
}

TEST_CASE("tail bound parameters") {
  const TailBound chain = tail_bound(build_type_matrices(oracle::chain2()));
  CHECK(chain.gamma == doctest::Approx(0.5));
  CHECK(chain.lambda == doctest::Approx(4.0));
  CHECK(chain.at(0) == doctest::Approx(2.0));

  const TailBound empty = tail_bound(build_type_matrices(Instance::create(5, 2, {}, TypeUserMatrix::Constant(2, 5, 0.3))));
  CHECK(empty.gamma == 0.0);
  CHECK(empty.lambda == doctest::Approx(5.0));
  CHECK(empty.at(0) == 0.0);

  std::vector<Edge> star;
  for (std::size_t i = 1; i < 4; ++i) star.push_back({i, 0});
  star.push_back({0, 1});
  const TailBound s = tail_bound(build_type_matrices(Instance::create(4, 1, star, TypeUserMatrix::Constant(1, 4, 0.9))));
  CHECK(s.gamma == doctest::Approx(0.9));
}

TEST_CASE("trajectories: monotone, within the tail, averages rising") {
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    const Instance inst = instances::generate(instances::corpus_spec(seed, 1, 15, 4));
    const TypeMatrices m = build_type_matrices(inst);
    const LimitSolver solver(m);
    const InjectionPolicy b = delta_uniform(inst, solver, 0.5 / static_cast<double>(inst.types()));
    const Trajectory tr = simulate(m, Schedule::constant(b, 60));
    const State lim = limiting_state(solver, b);
    const TailBound tail = tail_bound(m);
    double prev_avg = -1.0, sum = 0.0;
    for (std::size_t k = 0; k < tr.states.size(); ++k) {
      if (k > 0) CHECK(((tr.states[k].x - tr.states[k - 1].x).array() >= -1e-15).all());
      for (Eigen::Index t = 0; t < lim.x.rows(); ++t) {
        CHECK((lim.x.row(t) - tr.states[k].x.row(t)).lpNorm<1>() <= tail.at(k) + 1e-12);
      }
      sum += engagement(tr.states[k], inst);
      const double avg = sum / static_cast<double>(k + 1);
      CHECK(avg >= prev_avg - 1e-15);
      CHECK(avg <= engagement(lim, inst) + 1e-12);
      prev_avg = avg;
    }
  }
}

TEST_CASE("long runs reach the limiting state") {
  const Instance inst = instances::generate(instances::corpus_spec(77, 0, 20, 3));
  const TypeMatrices m = build_type_matrices(inst);
  const InjectionPolicy b = optimal_policy(inst).policy;
  const Trajectory tr = simulate(m, Schedule::constant(b, 400));
  CHECK((tr.states.back().x - oracle::limit_by_inverse(inst, b.b)).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("average policy") {
  const InjectionPolicy b{TypeUserMatrix::Constant(2, 3, 0.3)};
  CHECK((average_policy(Schedule::constant(b, 4)).b - b.b).cwiseAbs().maxCoeff() <= 1e-15);

  Schedule alt;
  for (int k = 0; k < 4; ++k) {
    InjectionPolicy p = InjectionPolicy::zeros(2, 3);
    p.b.row(k % 2).setOnes();
    alt.steps.push_back(p);
  }
  CHECK((average_policy(alt).b.array() == 0.5).all());
  CHECK_THROWS_AS(average_policy(Schedule{}), ShapeError);

  for (std::uint64_t s = 0; s < 10; ++s) {
    const Schedule r = random_diverse_schedule(3, 5, 0.1, 20, s);
    CHECK(validate_policy(average_policy(r)).valid());
  }
}

TEST_CASE("averaged policy dominates the time-averaged state") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Instance inst = instances::generate(instances::corpus_spec(s, 5, 12, 3));
    const TypeMatrices m = build_type_matrices(inst);
    const Schedule sched = random_diverse_schedule(inst.types(), inst.users(), 0.05, 30, s);
    const Trajectory tr = simulate(m, sched);
    TypeUserMatrix mean = TypeUserMatrix::Zero(m.A.size() ? static_cast<Eigen::Index>(inst.types()) : 0,
                                               static_cast<Eigen::Index>(inst.users()));
    for (const State& x : tr.states) mean += x.x;
    mean /= static_cast<double>(tr.states.size());
    const State lim = limiting_state(m, average_policy(sched));
    CHECK(((lim.x - mean).array() >= -1e-12).all());
  }
}

TEST_CASE("random diverse schedules are valid and diverse") {
  const Schedule s = random_diverse_schedule(4, 6, 0.2, 10, 5);
  REQUIRE(s.steps.size() == 11);
  for (const auto& b : s.steps) {
    CHECK(validate_policy(b).valid());
    CHECK(b.b.minCoeff() >= 0.2);
  }
  CHECK_THROWS_AS(random_diverse_schedule(4, 6, 0.3, 10, 5), RangeError);
}

TEST_CASE("verify_theorem1 on CHAIN2") {
  const Instance inst = oracle::chain2();
  const Theorem1Report r = verify_theorem1(inst, 0.25, 50, random_diverse_schedule(2, 2, 0.25, 50, 1));
  CHECK(r.passed());
  CHECK(r.checks.size() == 4);
  CHECK(r.tail.lambda == doctest::Approx(4.0));
  CHECK(r.tail.gamma == doctest::Approx(0.5));
  CHECK(r.eng_limit == doctest::Approx(0.885).epsilon(1e-9));
  CHECK(r.worst_diversity_slack >= -1e-7);

  // Deficit at step k within 4·0.5^(k+1).
  const InjectionPolicy best = lp::opt_delta(inst, 0.25).policy;
  const Trajectory tr = simulate(build_type_matrices(inst), Schedule::constant(best, 50));
  for (std::size_t k = 0; k < tr.states.size(); ++k) {
    CHECK(0.25 - diversity(tr.states[k]) <= 4.0 * std::pow(0.5, static_cast<double>(k + 1)) + 1e-7);
  }
}

TEST_CASE("verify_theorem1 on an empty graph is exact") {
  const Instance inst = instances::generate({instances::Kind::tightness, 6, 3, 0.3, 0.6});
  const double delta = 1.0 / 3.0;
  const InjectionPolicy best = lp::opt_delta(inst, delta).policy;
  // b* itself as challenger: admissible here because A = 0 makes step 0 diverse.
  const Theorem1Report r = verify_theorem1(inst, delta, 1, Schedule::constant(best, 1));
  CHECK(r.passed());
  CHECK(r.eng_average == doctest::Approx(r.eng_limit).epsilon(1e-12));
  REQUIRE(r.challenger_average);
  CHECK(*r.challenger_average == doctest::Approx(r.eng_limit).epsilon(1e-12));
  CHECK(*r.challenger_policy == doctest::Approx(r.eng_limit).epsilon(1e-12));
}

TEST_CASE("verify_theorem1 rejects non-diverse challengers") {
  const Instance inst = oracle::chain2();
  CHECK_THROWS_AS(verify_theorem1(inst, 0.25, 5, Schedule::constant(InjectionPolicy::zeros(2, 2), 5)),
                  RangeError);
  InjectionPolicy bad{TypeUserMatrix::Constant(2, 2, 0.8)};
  CHECK_THROWS_AS(verify_theorem1(inst, 0.25, 5, Schedule::constant(bad, 5)), RangeError);
  CHECK_THROWS_AS(verify_theorem1(inst, 0.6, 5), RangeError);
}

TEST_CASE("trajectory CSV") {
  const Trajectory tr = simulate(build_type_matrices(oracle::chain2()), Schedule::constant(unit_type0_user1(), 1));
  std::ostringstream os;
  write_trajectory_csv(os, tr);
  const std::string s = os.str();
  CHECK(s.rfind("step,type,user,exposure\n", 0) == 0);
  CHECK(s.find("1,0,0,0.5\n") != std::string::npos);
  CHECK(std::count(s.begin(), s.end(), '\n') == 9);
}

}  // TEST_SUITE
