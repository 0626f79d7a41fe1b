#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "engdiv/check.hpp"
#include "engdiv/error.hpp"
#include "engdiv/instance.hpp"
#include "engdiv/lp.hpp"

namespace engdiv::analysis {

/// alpha: smallest per-user mean retweet probability; beta: largest entry.
struct BoundInputs {
  double alpha = 0.0;
  double beta = 0.0;
};

BoundInputs alpha_beta(const Instance& instance);

/// min{Tδ(1 - α/β), (T-1)δ}. Throws RangeError when beta is 0 or δ > 1/T.
double main_bound(std::size_t types, double delta, const BoundInputs& inputs);

/// (T-1)δ, the guarantee of the δ-uniform policy.
double worst_case_bound(std::size_t types, double delta);

/// 1 - OPT_δ / OPT_eng, or 0 when OPT_eng is 0.
double cost_of_diversity(const Instance& instance, double delta);
double cost_from_values(double opt_delta, double opt_eng);

/// p' = min(factor·p, cap); graph and affinities unchanged.
Instance scale_probabilities(const Instance& instance, double factor, double cap);

inline constexpr double kDefaultCap = 0.99;
inline const std::vector<double> kDefaultScales{1.0, 3.0, 10.0, 30.0};

/// δ_i = i / (steps·T) for i = 1..steps, preceded by 0 when include_zero.
std::vector<double> default_grid(std::size_t types, std::size_t steps = 10,
                                 bool include_zero = false);

struct FrontierRow {
  double delta = 0.0;
  double opt_delta = 0.0;
  double opt_eng = 0.0;
  double cost = 0.0;
  double bound_main = 0.0;
  double bound_worst = 0.0;
  double eng_uniform = 0.0;
  double eng_exact = 0.0;
};

/// Raised when one grid point fails; carries the offending δ.
class FrontierError : public Error {
public:
  FrontierError(double delta, const std::string& what)
      : Error("delta = " + std::to_string(delta) + ": " + what), delta_(delta) {}
  double delta() const noexcept { return delta_; }

private:
  double delta_;
};

struct FrontierOptions {
  lp::DiversityForm form = lp::DiversityForm::materialized;
};

/// One row per grid value, sorted by δ. When beta is 0 the main bound is
/// undefined and bound_main falls back to (T-1)δ.
std::vector<FrontierRow> frontier(const Instance& instance, std::vector<double> grid,
                                  const FrontierOptions& options = {});

/// Tolerances used when auditing a frontier.
struct AuditTolerances {
  double bound = 1e-7;      ///< cost against the analytical bounds
  double diversity = 1e-9;  ///< limiting exposure of δ-uniform / δ-exact
  double engagement = 1e-9; ///< relative slack on engagement comparisons
};

/// Checks every row of a frontier computed on `instance`:
///   cost <= min{Tδ(1 - α/β), (T-1)δ} and cost <= (T-1)δ;
///   eng(δ-uniform) >= (1 - (T-1)δ)·OPT_eng;
///   eng(δ-exact) >= (1 - Tδ(1 - α/β))·OPT_eng;
///   both policies' limiting states are δ-diverse;
///   eng(δ-exact) <= OPT_δ <= OPT_eng;
/// and across rows that OPT_δ is nonincreasing and cost nondecreasing in δ.
std::vector<Check> audit_frontier(const Instance& instance, const std::vector<FrontierRow>& rows,
                                  const AuditTolerances& tol = {});

/// A frontier labelled by how its instance was derived.
struct LabelledFrontier {
  double scale = 1.0;
  std::string prob_source;
  std::vector<FrontierRow> rows;
};

/// delta,opt_delta,opt_eng,cost,bound_main,bound_worst,eng_uniform,eng_exact,scale,prob_source
void write_frontier_csv(std::ostream& out, const std::vector<LabelledFrontier>& frontiers);

/// Line chart of cost against δ, one polyline per frontier, with the
/// (T-1)δ and main bounds of the first frontier overlaid.
void write_frontier_svg(std::ostream& out, const std::vector<LabelledFrontier>& frontiers,
                        const std::string& title);

}  // namespace engdiv::analysis
