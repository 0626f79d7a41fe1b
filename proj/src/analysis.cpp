#include "engdiv/analysis.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "engdiv/error.hpp"
#include "engdiv/net_core.hpp"
#include "engdiv/policies.hpp"

namespace engdiv::analysis {

BoundInputs alpha_beta(const Instance& instance) {
  const auto& p = instance.retweet();
  if (p.size() == 0) return {};
  return {p.colwise().mean().minCoeff(), p.maxCoeff()};
}

double worst_case_bound(std::size_t types, double delta) {
  return (static_cast<double>(types) - 1.0) * delta;
}

double main_bound(std::size_t types, double delta, const BoundInputs& inputs) {
  lp::check_delta(delta, types);
  if (!(inputs.beta > 0.0)) {
    throw RangeError("main bound needs beta > 0 (all retweet probabilities are zero)");
  }
  const auto T = static_cast<double>(types);
  return std::min(T * delta * (1.0 - inputs.alpha / inputs.beta), worst_case_bound(types, delta));
}

double cost_from_values(double opt_delta, double opt_eng) {
  if (!(opt_eng > 0.0)) return 0.0;
  return std::max(0.0, 1.0 - opt_delta / opt_eng);
}

double cost_of_diversity(const Instance& instance, double delta) {
  lp::check_delta(delta, instance.types());
  const LimitSolver solver(build_type_matrices(instance));
  const double opt_eng = optimal_policy(instance, solver).value;
  if (!(opt_eng > 0.0)) return 0.0;
  return cost_from_values(lp::opt_delta(instance, solver, delta).value, opt_eng);
}

Instance scale_probabilities(const Instance& instance, double factor, double cap) {
  if (!(factor > 0.0)) throw RangeError("scale factor must be positive");
  if (!(cap > 0.0 && cap < 1.0)) throw RangeError("probability cap must lie in (0, 1)");
  TypeUserMatrix p = (instance.retweet() * factor).cwiseMin(cap);
  return instance.with_retweet(std::move(p));
}

std::vector<double> default_grid(std::size_t types, std::size_t steps, bool include_zero) {
  std::vector<double> grid;
  if (include_zero) grid.push_back(0.0);
  const double denom = static_cast<double>(steps) * static_cast<double>(types);
  for (std::size_t i = 1; i <= steps; ++i) grid.push_back(static_cast<double>(i) / denom);
  return grid;
}

std::vector<FrontierRow> frontier(const Instance& instance, std::vector<double> grid,
                                  const FrontierOptions& options) {
  std::sort(grid.begin(), grid.end());
  for (double d : grid) lp::check_delta(d, instance.types());

  const LimitSolver solver(build_type_matrices(instance));
  const Coefficients coef = engagement_coefficients(instance, solver);
  const double opt_eng = optimal_policy(instance, solver).value;
  const BoundInputs ab = alpha_beta(instance);
  const std::size_t T = instance.types();

  std::vector<FrontierRow> rows(grid.size());
  auto compute = [&](std::size_t k) {
    const double delta = grid[k];
    try {
      FrontierRow& row = rows[k];
      row.delta = delta;
      row.opt_eng = opt_eng;
      row.opt_delta = lp::opt_delta(instance, solver, delta, options.form).value;
      row.cost = cost_from_values(row.opt_delta, opt_eng);
      row.bound_worst = worst_case_bound(T, delta);
      row.bound_main = ab.beta > 0.0 ? main_bound(T, delta, ab) : row.bound_worst;
      row.eng_uniform = policy_engagement(coef, delta_uniform(instance, solver, delta));
      row.eng_exact = policy_engagement(coef, delta_exact(instance, solver, delta));
    } catch (const FrontierError&) {
      throw;
    } catch (const std::exception& e) {
      throw FrontierError(delta, e.what());
    }
  };

  for (std::size_t k = 0; k < grid.size(); ++k) compute(k);
  return rows;
}

std::vector<Check> audit_frontier(const Instance& instance, const std::vector<FrontierRow>& rows,
                                  const AuditTolerances& tol) {
  std::vector<Check> checks;
  const LimitSolver solver(build_type_matrices(instance));
  const BoundInputs ab = alpha_beta(instance);
  const std::size_t T = instance.types();
  const auto Td = static_cast<double>(T);

  auto add = [&checks](std::string name, bool ok, double measured, double bound, double delta) {
    checks.push_back({std::move(name), ok, measured, bound, "delta = " + std::to_string(delta)});
  };

  for (const FrontierRow& r : rows) {
    const double d = r.delta;
    const double eng_slack = tol.engagement * (1.0 + r.opt_eng);
    add("cost_within_worst_case_bound", r.cost <= r.bound_worst + tol.bound, r.cost,
        r.bound_worst, d);
    if (ab.beta > 0.0) {
      const double bound = main_bound(T, d, ab);
      add("cost_within_main_bound", r.cost <= bound + tol.bound, r.cost, bound, d);
      const double exact_floor = (1.0 - Td * d * (1.0 - ab.alpha / ab.beta)) * r.opt_eng;
      add("delta_exact_guarantee", r.eng_exact >= exact_floor - eng_slack, r.eng_exact,
          exact_floor, d);
    }
    const double uniform_floor = (1.0 - (Td - 1.0) * d) * r.opt_eng;
    add("delta_uniform_guarantee", r.eng_uniform >= uniform_floor - eng_slack, r.eng_uniform,
        uniform_floor, d);

    const double div_uniform = diversity(limiting_state(solver, delta_uniform(instance, solver, d)));
    const double div_exact = diversity(limiting_state(solver, delta_exact(instance, solver, d)));
    add("delta_uniform_diverse", div_uniform >= d - tol.diversity, div_uniform, d, d);
    add("delta_exact_diverse", div_exact >= d - tol.diversity, div_exact, d, d);

    add("delta_exact_below_opt_delta", r.eng_exact <= r.opt_delta + eng_slack * 100.0, r.eng_exact,
        r.opt_delta, d);
    add("opt_delta_below_opt_eng", r.opt_delta <= r.opt_eng + eng_slack * 100.0, r.opt_delta,
        r.opt_eng, d);
  }

  for (std::size_t k = 1; k < rows.size(); ++k) {
    const FrontierRow& prev = rows[k - 1];
    const FrontierRow& cur = rows[k];
    const double slack = tol.engagement * (1.0 + cur.opt_eng) * 100.0;
    add("opt_delta_nonincreasing", cur.opt_delta <= prev.opt_delta + slack, cur.opt_delta,
        prev.opt_delta, cur.delta);
    add("cost_nondecreasing", cur.cost >= prev.cost - slack, cur.cost, prev.cost, cur.delta);
  }
  return checks;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt3(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

void write_frontier_csv(std::ostream& out, const std::vector<LabelledFrontier>& frontiers) {
  out << "delta,opt_delta,opt_eng,cost,bound_main,bound_worst,eng_uniform,eng_exact,scale,"
         "prob_source\n";
  for (const LabelledFrontier& f : frontiers) {
    for (const FrontierRow& r : f.rows) {
      out << fmt(r.delta) << ',' << fmt(r.opt_delta) << ',' << fmt(r.opt_eng) << ','
          << fmt(r.cost) << ',' << fmt(r.bound_main) << ',' << fmt(r.bound_worst) << ','
          << fmt(r.eng_uniform) << ',' << fmt(r.eng_exact) << ',' << fmt(f.scale) << ','
          << csv_field(f.prob_source) << '\n';
    }
  }
}

void write_frontier_svg(std::ostream& out, const std::vector<LabelledFrontier>& frontiers,
                        const std::string& title) {
  constexpr double width = 720, height = 440;
  constexpr double left = 70, right = 190, top = 40, bottom = 60;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;

  double max_x = 0.0, max_y = 0.0;
  for (const auto& f : frontiers) {
    for (const auto& r : f.rows) {
      max_x = std::max(max_x, r.delta);
      max_y = std::max({max_y, r.cost, r.bound_worst, r.bound_main});
    }
  }
  if (max_x <= 0.0) max_x = 1.0;
  if (max_y <= 0.0) max_y = 1.0;
  auto px = [&](double x) { return left + plot_w * x / max_x; };
  auto py = [&](double y) { return top + plot_h * (1.0 - y / max_y); };

  static const char* palette[] = {"#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#17becf"};

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << fmt3(left) << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\">"
      << xml_escape(title) << "</text>\n";
  out << "<line x1=\"" << fmt3(left) << "\" y1=\"" << fmt3(py(0)) << "\" x2=\""
      << fmt3(left + plot_w) << "\" y2=\"" << fmt3(py(0)) << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << fmt3(left) << "\" y1=\"" << fmt3(top) << "\" x2=\"" << fmt3(left)
      << "\" y2=\"" << fmt3(py(0)) << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = max_x * k / 4.0, yv = max_y * k / 4.0;
    out << "<text x=\"" << fmt3(px(xv)) << "\" y=\"" << fmt3(py(0) + 18)
        << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">" << fmt3(xv)
        << "</text>\n";
    out << "<text x=\"" << fmt3(left - 8) << "\" y=\"" << fmt3(py(yv) + 4)
        << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">" << fmt3(yv)
        << "</text>\n";
  }
  out << "<text x=\"" << fmt3(left + plot_w / 2) << "\" y=\"" << fmt3(height - 16)
      << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">delta</text>\n";
  out << "<text x=\"18\" y=\"" << fmt3(top + plot_h / 2)
      << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" "
         "transform=\"rotate(-90 18 "
      << fmt3(top + plot_h / 2) << ")\">cost</text>\n";

  auto polyline = [&](const std::vector<std::pair<double, double>>& pts, const char* color,
                      const char* dash) {
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\"";
    if (dash) out << " stroke-dasharray=\"" << dash << "\"";
    out << " points=\"";
    for (std::size_t k = 0; k < pts.size(); ++k) {
      if (k) out << ' ';
      out << fmt3(px(pts[k].first)) << ',' << fmt3(py(pts[k].second));
    }
    out << "\"/>\n";
  };
  auto legend = [&](std::size_t slot, const char* color, const std::string& label) {
    const double y = top + 14.0 + 18.0 * static_cast<double>(slot);
    const double x = left + plot_w + 14.0;
    out << "<line x1=\"" << fmt3(x) << "\" y1=\"" << fmt3(y) << "\" x2=\"" << fmt3(x + 20)
        << "\" y2=\"" << fmt3(y) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << fmt3(x + 26) << "\" y=\"" << fmt3(y + 4)
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << xml_escape(label) << "</text>\n";
  };

  std::size_t slot = 0;
  if (!frontiers.empty()) {
    std::vector<std::pair<double, double>> worst, main;
    worst.emplace_back(0.0, 0.0);
    main.emplace_back(0.0, 0.0);
    for (const auto& r : frontiers.front().rows) {
      worst.emplace_back(r.delta, r.bound_worst);
      main.emplace_back(r.delta, r.bound_main);
    }
    polyline(worst, "#1f77b4", nullptr);
    legend(slot++, "#1f77b4", "(T-1) delta");
    polyline(main, "#1f77b4", "6 4");
    legend(slot++, "#1f77b4", "main bound");
  }
  for (std::size_t f = 0; f < frontiers.size(); ++f) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : frontiers[f].rows) pts.emplace_back(r.delta, r.cost);
    const char* color = palette[f % (sizeof palette / sizeof *palette)];
    polyline(pts, color, nullptr);
    legend(slot++, color, frontiers[f].prob_source + " x" + fmt(frontiers[f].scale));
  }
  out << "</svg>\n";
}

}  // namespace engdiv::analysis
