#include "engdiv/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include "engdiv/error.hpp"
#include "engdiv/lp.hpp"

namespace engdiv::dynamics {

double TailBound::at(std::size_t k) const {
  if (gamma == 0.0) return 0.0;
  return lambda * std::pow(gamma, static_cast<double>(k + 1));
}

State step(const TypeMatrices& matrices, const State& state, const InjectionPolicy& injection) {
  if (state.types() != matrices.types() || state.users() != matrices.users() ||
      injection.types() != matrices.types() || injection.users() != matrices.users()) {
    throw ShapeError("state/injection shape does not match the type matrices");
  }
  State next{injection.b};
  for (std::size_t t = 0; t < matrices.types(); ++t) {
    const auto ti = static_cast<Eigen::Index>(t);
    const Eigen::VectorXd x = state.x.row(ti).transpose();
    next.x.row(ti) += (matrices.A[t] * x).transpose();
  }
  return next;
}

Trajectory simulate(const TypeMatrices& matrices, const Schedule& schedule,
                    const SimulationLimits& limits) {
  if (schedule.steps.empty()) throw ShapeError("schedule must contain at least one injection");
  const double cells = static_cast<double>(schedule.steps.size()) *
                       static_cast<double>(matrices.users()) *
                       static_cast<double>(matrices.types());
  if (cells > static_cast<double>(limits.cell_budget)) {
    std::ostringstream os;
    os << "trajectory needs " << cells << " cells, above the budget of " << limits.cell_budget;
    throw RangeError(os.str());
  }
  const InjectionPolicy& first = schedule.steps.front();
  if (first.types() != matrices.types() || first.users() != matrices.users()) {
    throw ShapeError("schedule shape does not match the type matrices");
  }
  Trajectory out;
  out.schedule = schedule;
  out.states.reserve(schedule.steps.size());
  out.states.push_back(State{first.b});
  for (std::size_t k = 1; k < schedule.steps.size(); ++k) {
    out.states.push_back(step(matrices, out.states.back(), schedule.steps[k]));
  }
  return out;
}

double average_engagement(const Trajectory& trajectory, const Instance& instance) {
  if (trajectory.states.empty()) return 0.0;
  double sum = 0.0;
  for (const State& s : trajectory.states) sum += engagement(s, instance);
  return sum / static_cast<double>(trajectory.states.size());
}

TailBound tail_bound(const TypeMatrices& matrices) {
  const double gamma = matrices.max_row_sum();
  if (gamma >= 1.0) throw InternalError("row sum >= 1: the dynamics do not converge");
  const auto n = static_cast<double>(matrices.users());
  return {n / (1.0 - gamma), gamma};
}

InjectionPolicy average_policy(const Schedule& schedule) {
  if (schedule.steps.empty()) throw ShapeError("schedule must contain at least one injection");
  InjectionPolicy out{schedule.steps.front().b};
  for (std::size_t k = 1; k < schedule.steps.size(); ++k) {
    if (schedule.steps[k].b.rows() != out.b.rows() || schedule.steps[k].b.cols() != out.b.cols()) {
      throw ShapeError("schedule steps disagree in shape");
    }
    out.b += schedule.steps[k].b;
  }
  out.b /= static_cast<double>(schedule.steps.size());
  return out;
}

Schedule random_diverse_schedule(std::size_t types, std::size_t users, double delta,
                                 std::size_t horizon, std::uint64_t seed) {
  lp::check_delta(delta, types);
  boost::random::mt19937_64 rng(seed);
  boost::random::uniform_real_distribution<double> unit(0.0, 1.0);
  const double spare = std::max(0.0, 1.0 - static_cast<double>(types) * delta);
  const auto T = static_cast<Eigen::Index>(types);
  Schedule out;
  out.steps.reserve(horizon + 1);
  Eigen::VectorXd share(T);
  for (std::size_t k = 0; k <= horizon; ++k) {
    InjectionPolicy b{TypeUserMatrix::Constant(T, static_cast<Eigen::Index>(users), delta)};
    for (Eigen::Index i = 0; i < b.b.cols(); ++i) {
      for (Eigen::Index t = 0; t < T; ++t) share(t) = unit(rng);
      const double used = unit(rng) * spare;
      const double total = share.sum();
      if (total > 0.0) b.b.col(i) += share * (used / total);
    }
    out.steps.push_back(std::move(b));
  }
  return out;
}

bool Theorem1Report::passed() const { return all_passed(checks); }

namespace {

constexpr double kRoundoff = 1e-9;
// The δ-diversity program is solved to primal feasibility 1e-7.
constexpr double kLpSlack = 1e-7;

}  // namespace

Theorem1Report verify_theorem1(const Instance& instance, double delta, std::size_t horizon,
                               const std::optional<Schedule>& challenger) {
  lp::check_delta(delta, instance.types());
  const TypeMatrices matrices = build_type_matrices(instance);
  const LimitSolver solver(matrices);

  if (challenger) {
    for (std::size_t k = 0; k < challenger->steps.size(); ++k) {
      const PolicyReport report = validate_policy(challenger->steps[k]);
      if (!report.valid()) {
        throw RangeError("challenger step " + std::to_string(k) +
                         " is not a valid policy: " + report.describe());
      }
    }
  }

  Theorem1Report rep;
  rep.delta = delta;
  rep.horizon = horizon;
  rep.tail = tail_bound(matrices);

  const InjectionPolicy best = lp::opt_delta(instance, solver, delta).policy;
  rep.eng_limit = engagement(limiting_state(solver, best), instance);
  const Trajectory traj = simulate(matrices, Schedule::constant(best, horizon));
  rep.eng_average = average_engagement(traj, instance);

  const auto T = static_cast<double>(instance.types());
  const double gamma = rep.tail.gamma;
  // <w, x> <= max(w)·||x||_1; retweet probabilities have max(w) < 1.
  const auto& w = instance.engagement_weights();
  const double weight_scale = std::max(1.0, w.size() ? w.maxCoeff() : 0.0);
  rep.constant_c = gamma == 0.0 ? 0.0 : weight_scale * T * rep.tail.lambda * gamma / (1.0 - gamma);
  const double scale = 1.0 + std::fabs(rep.eng_limit);

  {
    const double gap = rep.eng_limit - rep.eng_average;
    const double bound = rep.constant_c / static_cast<double>(horizon + 1);
    Check c{"part1_average_engagement_converges", false, gap, bound, {}};
    c.passed = gap >= -kRoundoff * scale && gap <= bound + kRoundoff * scale;
    std::ostringstream os;
    os << "0 <= eng(b*) - eng_av <= T*lambda*gamma/((1-gamma)(K+1))";
    c.detail = os.str();
    rep.checks.push_back(std::move(c));
  }

  {
    double worst = std::numeric_limits<double>::infinity();
    std::size_t worst_step = 0;
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
      const double slack = diversity(traj.states[k]) - (delta - rep.tail.at(k));
      if (slack < worst) {
        worst = slack;
        worst_step = k;
      }
    }
    rep.worst_diversity_slack = worst;
    Check c{"part2_diversity_deficit_geometric", worst >= -kLpSlack, worst, -kLpSlack, {}};
    c.detail = "div(x^k) >= delta - lambda*gamma^(k+1) for all k; tightest at step " +
               std::to_string(worst_step);
    rep.checks.push_back(std::move(c));
  }

  if (challenger) {
    const Trajectory ytraj = simulate(matrices, *challenger);
    for (std::size_t k = 0; k < ytraj.states.size(); ++k) {
      const double d = diversity(ytraj.states[k]);
      if (d < delta - kRoundoff) {
        std::ostringstream os;
        os << "challenger is not delta-diverse at step " << k << " (diversity " << d
           << " < " << delta << ")";
        throw RangeError(os.str());
      }
    }
    const double avg = average_engagement(ytraj, instance);
    const double pol = engagement(limiting_state(solver, average_policy(*challenger)), instance);
    rep.challenger_average = avg;
    rep.challenger_policy = pol;

    Check a{"part3_challenger_below_average_policy", avg <= pol + kRoundoff * scale, avg, pol,
            "eng_av(challenger) <= eng(b_av)"};
    Check b{"part3_average_policy_below_optimum", pol <= rep.eng_limit + kLpSlack * scale, pol,
            rep.eng_limit, "eng(b_av) <= eng(b*)"};
    rep.checks.push_back(std::move(a));
    rep.checks.push_back(std::move(b));
  }
  return rep;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
  out << "step,type,user,exposure\n";
  char buf[64];
  for (std::size_t k = 0; k < trajectory.states.size(); ++k) {
    const auto& x = trajectory.states[k].x;
    for (Eigen::Index t = 0; t < x.rows(); ++t) {
      for (Eigen::Index i = 0; i < x.cols(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", x(t, i));
        out << k << ',' << t << ',' << i << ',' << buf << '\n';
      }
    }
  }
}

}  // namespace engdiv::dynamics
