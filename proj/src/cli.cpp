#include "engdiv/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <boost/version.hpp>
#include <json.hpp>

#include "engdiv/analysis.hpp"
#include "engdiv/dynamics.hpp"
#include "engdiv/error.hpp"
#include "engdiv/ingest.hpp"
#include "engdiv/instances.hpp"
#include "engdiv/io.hpp"
#include "engdiv/lp.hpp"
#include "engdiv/net_core.hpp"
#include "engdiv/policies.hpp"

namespace engdiv::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Bad flag combinations or values that only become invalid after loading.
class ConfigError : public Error {
public:
  using Error::Error;
};

// Unreadable or malformed input files.
class InputError : public Error {
public:
  using Error::Error;
};

// All checks ran but at least one failed.
class VerificationFailed : public Error {
public:
  using Error::Error;
};

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string file_hash(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::istreambuf_iterator<char> it(in), end; it != end; ++it) {
    h ^= static_cast<unsigned char>(*it);
    h *= 0x100000001b3ULL;
  }
  return hex64(h);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  return in;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

struct Loaded {
  std::string path;
  std::string label;
  Instance instance;
  std::string hash;
};

Loaded load(const std::string& path, std::ostream& err) {
  std::vector<std::string> warnings;
  try {
    Instance inst = instances::read_instance(path, &warnings);
    for (const auto& w : warnings) err << "warning: " << path << ": " << w << '\n';
    std::string hash = instances::content_hash(inst);
    return {path, fs::path(path).stem().string(), std::move(inst), std::move(hash)};
  } catch (const Error& e) {
    throw InputError(path + ": " + e.what());
  }
}

void check_deltas(const std::vector<double>& deltas, const Loaded& l) {
  for (double d : deltas) {
    if (!(d >= 0.0) || d > 1.0 / static_cast<double>(l.instance.types()) + 1e-12) {
      throw ConfigError("delta " + std::to_string(d) + " is outside [0, 1/T] for " + l.path +
                        " (T = " + std::to_string(l.instance.types()) + ")");
    }
  }
}

/// Runs f(0..count-1) on up to `threads` workers and rethrows the failure
/// with the smallest index, so errors do not depend on scheduling.
template <class F>
void parallel_for(std::size_t count, std::size_t threads, F&& f) {
  const std::size_t workers = std::min(std::max<std::size_t>(threads, 1), count);
  if (workers <= 1) {
    for (std::size_t k = 0; k < count; ++k) f(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::size_t failed = count;
  std::mutex mu;
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < count; k = next++) {
          try {
            f(k);
          } catch (...) {
            std::lock_guard lock(mu);
            if (k < failed) {
              failed = k;
              failure = std::current_exception();
            }
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

json checks_json(const std::vector<Check>& checks) {
  json arr = json::array();
  for (const Check& c : checks) {
    arr.push_back({{"name", c.name},
                   {"passed", c.passed},
                   {"measured", c.measured},
                   {"bound", c.bound},
                   {"detail", c.detail}});
  }
  return arr;
}

std::size_t failures(const std::vector<Check>& checks) {
  return static_cast<std::size_t>(
      std::count_if(checks.begin(), checks.end(), [](const Check& c) { return !c.passed; }));
}

/// manifest.json: what was run, on which inputs, with which seeds. No
/// timestamps, so identical runs give identical manifests.
struct Manifest {
  json doc;

  Manifest(const std::string& command, const std::vector<std::string>& args) {
    doc["tool"] = "engdiv";
    doc["version"] = kVersion;
    doc["command"] = command;
    doc["arguments"] = args;
    doc["library_versions"] = {
        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                      "." + std::to_string(EIGEN_MINOR_VERSION)},
        {"boost", BOOST_LIB_VERSION},
        {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
    };
    doc["inputs"] = json::array();
    doc["instances"] = json::array();
    doc["seeds"] = json::object();
    doc["outputs"] = json::array();
  }

  void input(const std::string& path) {
    doc["inputs"].push_back({{"path", path}, {"fnv1a", file_hash(path)}});
  }
  void instance(const std::string& label, const std::string& hash) {
    doc["instances"].push_back({{"label", label}, {"hash", hash}});
  }
  void output(const std::string& name) { doc["outputs"].push_back(name); }

  void write(const fs::path& dir) {
    io::write_json(doc, dir / "manifest.json");
  }
};

lp::DiversityForm parse_form(const std::string& s) {
  if (s == "materialized") return lp::DiversityForm::materialized;
  if (s == "substituted") return lp::DiversityForm::substituted;
  throw ConfigError("unknown LP form '" + s + "'");
}

// ---------------------------------------------------------------- gen

struct GenArgs {
  std::string kind = "random_graph";
  std::string spec_file;
  std::size_t n = 10, T = 2;
  double alpha = 0.0, beta = 0.5, edge_prob = 0.1, p_lo = 0.0, p_hi = 0.5;
  std::uint64_t seed = 0;
  std::string out = ".";
  std::string name = "instance";
};

int cmd_gen(CLI::App& sub, const GenArgs& a, const std::vector<std::string>& args,
            std::ostream& out) {
  instances::GeneratorSpec spec;
  if (!a.spec_file.empty()) {
    try {
      spec = instances::spec_from_json(io::read_json(a.spec_file));
    } catch (const Error& e) {
      throw InputError(a.spec_file + ": " + e.what());
    }
  }
  auto given = [&sub](const char* flag) { return sub.count(flag) > 0; };
  if (given("kind") || a.spec_file.empty()) spec.kind = instances::parse_kind(a.kind);
  if (given("--n") || a.spec_file.empty()) spec.n = a.n;
  if (given("--T") || a.spec_file.empty()) spec.T = a.T;
  if (given("--alpha") || a.spec_file.empty()) spec.alpha = a.alpha;
  if (given("--beta") || a.spec_file.empty()) spec.beta = a.beta;
  if (given("--edge-prob") || a.spec_file.empty()) spec.edge_prob = a.edge_prob;
  if (given("--p-lo") || a.spec_file.empty()) spec.p_lo = a.p_lo;
  if (given("--p-hi") || a.spec_file.empty()) spec.p_hi = a.p_hi;
  if (given("--seed") || a.spec_file.empty()) spec.seed = a.seed;

  const auto problems = spec.problems();
  if (!problems.empty()) {
    std::string msg = "invalid generator parameters:";
    for (const auto& p : problems) msg += " " + p + ";";
    throw ConfigError(msg);
  }
  const Instance inst = instances::generate(spec);
  const fs::path dir(a.out);
  ensure_dir(dir);
  const std::string file = a.name + ".json";
  instances::write_instance(inst, dir / file);

  Manifest m("gen", args);
  if (!a.spec_file.empty()) m.input(a.spec_file);
  m.doc["generator"] = {{"kind", instances::kind_name(spec.kind)},
                        {"n", spec.n},
                        {"T", spec.T},
                        {"alpha", spec.alpha},
                        {"beta", spec.beta},
                        {"edge_prob", spec.edge_prob},
                        {"p_lo", spec.p_lo},
                        {"p_hi", spec.p_hi}};
  m.doc["seeds"]["generator"] = spec.seed;
  const std::string hash = instances::content_hash(inst);
  m.instance(a.name, hash);
  m.output(file);
  m.write(dir);
  out << (dir / file).string() << " n=" << inst.users() << " T=" << inst.types()
      << " edges=" << inst.edges().size() << " hash=" << hash << '\n';
  return kOk;
}

// ------------------------------------------------------------- ingest

struct IngestArgs {
  std::string edges, tweets;
  std::size_t top = 2000;
  std::uint64_t seed = 0;
  std::size_t samples = 2;
  double prior_a = 1.0, prior_b = 100.0;
  std::string out = ".";
};

int cmd_ingest(const IngestArgs& a, const std::vector<std::string>& args, std::ostream& out,
               std::ostream& err) {
  ingest::PipelineOptions opt;
  opt.top_hashtags = a.top;
  opt.louvain_seed = a.seed;
  opt.prior.a = a.prior_a;
  opt.prior.b = a.prior_b;
  opt.prior.samples = a.samples;
  opt.prior.seed = a.seed;
  if (a.top == 0) throw ConfigError("--top-hashtags must be at least 1");
  if (!(a.prior_a > 0.0 && a.prior_b > 0.0)) throw ConfigError("prior parameters must be positive");

  std::ifstream edges = open_input(a.edges);
  std::ifstream tweets = open_input(a.tweets);
  ingest::PipelineResult res;
  try {
    res = ingest::run_pipeline(edges, tweets, opt);
  } catch (const ParseError& e) {
    throw InputError(e.what());
  } catch (const RangeError& e) {
    throw InputError(e.what());
  }
  for (const auto& w : res.warnings) err << "warning: " << w << '\n';

  const fs::path dir(a.out);
  ensure_dir(dir);
  Manifest m("ingest", args);
  m.input(a.edges);
  m.input(a.tweets);
  m.doc["seeds"]["louvain"] = a.seed;
  m.doc["seeds"]["beta_samples"] = a.seed;
  m.doc["users"] = res.users.size();
  m.doc["hashtags"] = res.network.nodes.size();
  m.doc["communities"] = res.communities.count;
  m.doc["modularity"] = res.communities.level_modularity;
  m.doc["warnings"] = res.warnings;
  for (const auto& [label, inst] : res.instances) {
    const std::string file = label + ".json";
    instances::write_instance(inst, dir / file);
    m.instance(label, instances::content_hash(inst));
    m.output(file);
  }
  std::ostringstream csv;
  ingest::write_assignment_csv(csv, res.network, res.communities);
  write_text(dir / "types.csv", csv.str());
  m.output("types.csv");
  m.write(dir);
  out << "users=" << res.users.size() << " edges=" << res.edges.size()
      << " hashtags=" << res.network.nodes.size() << " types=" << res.communities.count << '\n';
  return kOk;
}

// -------------------------------------------------------------- solve

struct SolveArgs {
  std::string instance;
  std::optional<double> delta;
  std::string form = "materialized";
  std::string mps;
  std::string out = ".";
};

int cmd_solve(const SolveArgs& a, const std::vector<std::string>& args, std::ostream& out,
              std::ostream& err) {
  const auto form = parse_form(a.form);
  const Loaded l = load(a.instance, err);
  if (a.delta) check_deltas({*a.delta}, l);
  const Instance& inst = l.instance;
  const LimitSolver solver(build_type_matrices(inst));

  const OptimalPolicy best = optimal_policy(inst, solver);
  const lp::LinearProgram eng_lp = lp::build_engagement_lp(inst, solver);
  const lp::LpSolution eng_sol = lp::solve(eng_lp);
  if (eng_sol.status != lp::Status::optimal) throw InternalError("engagement LP did not reach an optimum");

  json report;
  report["instance"] = a.instance;
  report["instance_hash"] = l.hash;
  report["opt_eng"] = best.value;
  report["opt_eng_lp"] = eng_sol.objective;
  std::vector<Check> checks;
  const double tol = 1e-6 * (1.0 + std::fabs(best.value));
  checks.push_back({"closed_form_matches_lp", std::fabs(best.value - eng_sol.objective) <= tol,
                    std::fabs(best.value - eng_sol.objective), tol,
                    "|sum_i max_t c_ti - engagement LP optimum|"});

  const fs::path dir(a.out);
  ensure_dir(dir);
  Manifest m("solve", args);
  m.input(a.instance);
  m.instance(l.label, l.hash);

  io::write_policy(best.policy, {"policy", "optimal", l.hash, std::nullopt}, dir / "policy_optimal.json");
  m.output("policy_optimal.json");
  out << "OPT_eng = " << best.value << " (LP " << eng_sol.objective << ")\n";

  if (a.delta) {
    const double d = *a.delta;
    const lp::DeltaOptimum opt = lp::opt_delta(inst, solver, d, form);
    const Coefficients coef = engagement_coefficients(inst, solver);
    const analysis::BoundInputs ab = analysis::alpha_beta(inst);
    report["delta"] = d;
    report["form"] = a.form;
    report["opt_delta"] = opt.value;
    report["cost"] = analysis::cost_from_values(opt.value, best.value);
    report["bound_worst"] = analysis::worst_case_bound(inst.types(), d);
    if (ab.beta > 0.0) report["bound_main"] = analysis::main_bound(inst.types(), d, ab);
    report["eng_uniform"] = policy_engagement(coef, delta_uniform(inst, solver, d));
    report["eng_exact"] = policy_engagement(coef, delta_exact(inst, solver, d));
    report["lp_iterations"] = opt.iterations;
    const double div = diversity(limiting_state(solver, opt.policy));
    checks.push_back({"lp_policy_delta_diverse", div >= d - 1e-7, div, d, "div(x(b*)) >= delta"});
    io::write_policy(opt.policy, {"policy", "lp", l.hash, d}, dir / "policy_lp.json");
    m.output("policy_lp.json");
    out << "OPT_delta(" << d << ") = " << opt.value << ", cost = " << report["cost"].get<double>()
        << '\n';
  }

  if (!a.mps.empty()) {
    std::ostringstream mps;
    if (a.delta) {
      lp::write_mps(mps, lp::build_diversity_lp(inst, solver, *a.delta, form), "DIVERSITY");
    } else {
      lp::write_mps(mps, eng_lp, "ENGAGEMENT");
    }
    write_text(dir / a.mps, mps.str());
    m.output(a.mps);
  }

  report["checks"] = checks_json(checks);
  report["passed"] = all_passed(checks);
  io::write_json(report, dir / "solve.json");
  m.output("solve.json");
  m.write(dir);
  if (!all_passed(checks)) throw VerificationFailed("solve: a consistency check failed");
  return kOk;
}

// ----------------------------------------------------------- frontier

struct FrontierArgs {
  std::vector<std::string> instances;
  std::size_t grid = 10;
  bool zero = false;
  std::vector<double> scales = analysis::kDefaultScales;
  double cap = analysis::kDefaultCap;
  std::size_t threads = 1;
  std::string form = "materialized";
  std::string out = ".";
};

int cmd_frontier(const FrontierArgs& a, const std::vector<std::string>& args, std::ostream& out,
                 std::ostream& err) {
  const auto form = parse_form(a.form);
  if (a.grid == 0) throw ConfigError("--grid must be at least 1");
  if (!(a.cap > 0.0 && a.cap < 1.0)) throw ConfigError("--cap must lie in (0, 1)");
  for (double s : a.scales) {
    if (!(s > 0.0)) throw ConfigError("scale factors must be positive");
  }
  std::vector<Loaded> loaded;
  for (const auto& path : a.instances) loaded.push_back(load(path, err));

  struct Job {
    std::size_t source;
    double scale;
  };
  std::vector<Job> jobs;
  for (std::size_t s = 0; s < loaded.size(); ++s) {
    for (double scale : a.scales) jobs.push_back({s, scale});
  }
  std::vector<analysis::LabelledFrontier> results(jobs.size());
  std::vector<std::vector<Check>> audits(jobs.size());
  parallel_for(jobs.size(), a.threads, [&](std::size_t k) {
    const Loaded& src = loaded[jobs[k].source];
    const Instance inst = analysis::scale_probabilities(src.instance, jobs[k].scale, a.cap);
    const auto grid = analysis::default_grid(inst.types(), a.grid, a.zero);
    analysis::LabelledFrontier f{jobs[k].scale, src.label, analysis::frontier(inst, grid, {form})};
    audits[k] = analysis::audit_frontier(inst, f.rows);
    results[k] = std::move(f);
  });

  const fs::path dir(a.out);
  ensure_dir(dir);
  std::ostringstream csv, svg;
  analysis::write_frontier_csv(csv, results);
  analysis::write_frontier_svg(svg, results, "Cost of diversity");
  write_text(dir / "frontier.csv", csv.str());
  write_text(dir / "frontier.svg", svg.str());

  json report = json::array();
  std::size_t failed = 0;
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    failed += failures(audits[k]);
    report.push_back({{"prob_source", results[k].prob_source},
                      {"scale", results[k].scale},
                      {"failed", failures(audits[k])},
                      {"checks", checks_json(audits[k])}});
  }
  io::write_json(report, dir / "frontier_checks.json");

  Manifest m("frontier", args);
  for (const auto& l : loaded) {
    m.input(l.path);
    m.instance(l.label, l.hash);
  }
  m.doc["grid_steps"] = a.grid;
  m.doc["include_zero"] = a.zero;
  m.doc["scales"] = a.scales;
  m.doc["cap"] = a.cap;
  m.doc["form"] = a.form;
  m.output("frontier.csv");
  m.output("frontier.svg");
  m.output("frontier_checks.json");
  m.write(dir);

  out << jobs.size() << " frontier(s), " << failed << " failed check(s)\n";
  if (failed > 0) throw VerificationFailed("frontier: " + std::to_string(failed) + " check(s) failed");
  return kOk;
}

// ----------------------------------------------------------- simulate

struct SimulateArgs {
  std::string instance;
  std::string policy;
  std::string method = "optimal";
  std::optional<double> delta;
  std::size_t steps = 100;
  std::string out = ".";
};

InjectionPolicy policy_by_method(const std::string& method, const Instance& inst,
                                 const LimitSolver& solver, std::optional<double> delta) {
  if (method == "optimal") return optimal_policy(inst, solver).policy;
  if (!delta) throw ConfigError("method '" + method + "' needs --delta");
  if (method == "uniform") return delta_uniform(inst, solver, *delta);
  if (method == "exact") return delta_exact(inst, solver, *delta);
  if (method == "lp") return lp::opt_delta(inst, solver, *delta).policy;
  throw ConfigError("unknown policy method '" + method + "'");
}

int cmd_simulate(const SimulateArgs& a, const std::vector<std::string>& args, std::ostream& out,
                 std::ostream& err) {
  const Loaded l = load(a.instance, err);
  if (a.delta) check_deltas({*a.delta}, l);
  const Instance& inst = l.instance;
  const TypeMatrices matrices = build_type_matrices(inst);
  const LimitSolver solver(matrices);

  InjectionPolicy policy;
  std::string method = a.method;
  if (!a.policy.empty()) {
    try {
      policy = io::read_policy(a.policy);
    } catch (const Error& e) {
      throw InputError(a.policy + ": " + e.what());
    }
    if (policy.types() != inst.types() || policy.users() != inst.users()) {
      throw InputError(a.policy + ": policy shape does not match the instance");
    }
    const PolicyReport rep = validate_policy(policy);
    if (!rep.valid()) throw InputError(a.policy + ": " + rep.describe());
    method = "file";
  } else {
    policy = policy_by_method(a.method, inst, solver, a.delta);
  }

  const dynamics::Trajectory traj =
      dynamics::simulate(matrices, dynamics::Schedule::constant(policy, a.steps));
  const State limit = limiting_state(solver, policy);
  const dynamics::TailBound tail = dynamics::tail_bound(matrices);
  double gap = 0.0;
  for (Eigen::Index t = 0; t < limit.x.rows(); ++t) {
    gap = std::max(gap, (limit.x.row(t) - traj.states.back().x.row(t)).lpNorm<1>());
  }
  const double bound = tail.at(a.steps);
  std::vector<Check> checks{{"final_state_within_tail_bound", gap <= bound + 1e-12 * (1.0 + limit.x.sum()),
                             gap, bound, "max_t ||x_t - x_t^(K)||_1 <= lambda*gamma^(K+1)"}};

  const fs::path dir(a.out);
  ensure_dir(dir);
  std::ostringstream csv;
  dynamics::write_trajectory_csv(csv, traj);
  write_text(dir / "trajectory.csv", csv.str());

  json report{{"instance", a.instance},
              {"instance_hash", l.hash},
              {"method", method},
              {"steps", a.steps},
              {"engagement_limit", engagement(limit, inst)},
              {"engagement_average", dynamics::average_engagement(traj, inst)},
              {"lambda", tail.lambda},
              {"gamma", tail.gamma},
              {"checks", checks_json(checks)}};
  if (a.delta) report["delta"] = *a.delta;
  io::write_json(report, dir / "simulate.json");

  Manifest m("simulate", args);
  m.input(a.instance);
  if (!a.policy.empty()) m.input(a.policy);
  m.instance(l.label, l.hash);
  m.output("trajectory.csv");
  m.output("simulate.json");
  m.write(dir);

  out << "K=" << a.steps << " gap=" << gap << " bound=" << bound << '\n';
  if (!all_passed(checks)) throw VerificationFailed("simulate: trajectory left the tail bound");
  return kOk;
}

// ------------------------------------------------------------- verify

struct VerifyArgs {
  std::vector<std::string> instances;
  std::size_t random = 0;
  std::uint64_t seed = 0;
  std::size_t max_n = 30, max_T = 4;
  std::optional<double> delta;
  std::size_t steps = 100;
  std::size_t grid = 10;
  std::size_t threads = 1;
  std::string out = ".";
};

int cmd_verify(const VerifyArgs& a, const std::vector<std::string>& args, std::ostream& out,
               std::ostream& err) {
  if (a.instances.empty() && a.random == 0) throw ConfigError("verify needs --instance or --random N");
  if (a.grid == 0) throw ConfigError("--grid must be at least 1");
  if (a.steps == 0) throw ConfigError("--steps must be at least 1");

  std::vector<Loaded> subjects;
  for (const auto& path : a.instances) subjects.push_back(load(path, err));
  if (a.random > 0) {
    if (a.max_n < 2 || a.max_T < 2) throw ConfigError("--max-n and --max-T must be at least 2");
    for (std::size_t k = 0; k < a.random; ++k) {
      Instance inst = instances::generate(instances::corpus_spec(a.seed, k, a.max_n, a.max_T));
      std::string hash = instances::content_hash(inst);
      subjects.push_back({"", "random_" + std::to_string(k), std::move(inst), std::move(hash)});
    }
  }
  if (a.delta) {
    for (const auto& s : subjects) check_deltas({*a.delta}, s);
  }

  std::vector<json> reports(subjects.size());
  std::vector<std::size_t> failed(subjects.size(), 0);
  parallel_for(subjects.size(), a.threads, [&](std::size_t k) {
    const Instance& inst = subjects[k].instance;
    const double delta = a.delta ? *a.delta : 0.5 / static_cast<double>(inst.types());
    const auto rows = analysis::frontier(inst, analysis::default_grid(inst.types(), a.grid, true));
    const std::vector<Check> t2 = analysis::audit_frontier(inst, rows);
    const dynamics::Schedule challenger = dynamics::random_diverse_schedule(
        inst.types(), inst.users(), delta, a.steps, a.seed * 0x9E3779B97F4A7C15ULL + k);
    const dynamics::Theorem1Report t1 = dynamics::verify_theorem1(inst, delta, a.steps, challenger);
    failed[k] = failures(t2) + failures(t1.checks);
    reports[k] = {{"label", subjects[k].label},
                  {"instance_hash", subjects[k].hash},
                  {"n", inst.users()},
                  {"T", inst.types()},
                  {"delta", delta},
                  {"failed", failed[k]},
                  {"theorem1", checks_json(t1.checks)},
                  {"theorem2", checks_json(t2)}};
  });

  std::size_t total_failed = 0;
  for (auto f : failed) total_failed += f;

  const fs::path dir(a.out);
  ensure_dir(dir);
  json report{{"instances", reports}, {"failed", total_failed}, {"passed", total_failed == 0}};
  io::write_json(report, dir / "verify.json");
  Manifest m("verify", args);
  for (const auto& s : subjects) {
    if (!s.path.empty()) m.input(s.path);
    m.instance(s.label, s.hash);
  }
  m.doc["seeds"]["corpus"] = a.seed;
  m.doc["steps"] = a.steps;
  m.doc["grid_steps"] = a.grid;
  m.output("verify.json");
  m.write(dir);

  out << subjects.size() << " instance(s), " << total_failed << " failed check(s)\n";
  if (total_failed > 0) {
    throw VerificationFailed("verify: " + std::to_string(total_failed) + " check(s) failed");
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Engagement and diversity of injected content on follower networks", "engdiv"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Generate a synthetic instance");
  g->add_option("kind", gen.kind, "tightness | random_graph | homogeneous | empty");
  g->add_option("--spec", gen.spec_file, "JSON generator spec; flags given override it");
  g->add_option("--n", gen.n, "Users");
  g->add_option("--T", gen.T, "Types");
  g->add_option("--alpha", gen.alpha, "Tightness: average probability");
  g->add_option("--beta", gen.beta, "Tightness: largest probability");
  g->add_option("--edge-prob", gen.edge_prob, "Edge density");
  g->add_option("--p-lo", gen.p_lo, "Lowest retweet probability");
  g->add_option("--p-hi", gen.p_hi, "Highest retweet probability");
  g->add_option("--seed", gen.seed, "Random seed");
  g->add_option("--out", gen.out, "Output directory");
  g->add_option("--name", gen.name, "Instance file stem");

  IngestArgs ing;
  auto* i = app.add_subcommand("ingest", "Build instances from follower edges and tweets");
  i->add_option("--edges", ing.edges, "follower<TAB>followee file")->required();
  i->add_option("--tweets", ing.tweets, "Tweets as JSON lines")->required();
  i->add_option("--top-hashtags", ing.top, "Hashtags kept for the co-occurrence network");
  i->add_option("--seed", ing.seed, "Seed for community tie-breaks and Beta draws");
  i->add_option("--samples", ing.samples, "Beta posterior samples");
  i->add_option("--prior-a", ing.prior_a, "Beta prior a");
  i->add_option("--prior-b", ing.prior_b, "Beta prior b");
  i->add_option("--out", ing.out, "Output directory");

  SolveArgs sol;
  auto* s = app.add_subcommand("solve", "Optimal and δ-diverse policies");
  s->add_option("--instance", sol.instance, "Instance JSON")->required();
  s->add_option("--delta", sol.delta, "Diversity level");
  s->add_option("--form", sol.form, "materialized | substituted");
  s->add_option("--mps", sol.mps, "Also write the LP as MPS under this name");
  s->add_option("--out", sol.out, "Output directory");

  FrontierArgs fr;
  auto* f = app.add_subcommand("frontier", "Cost of diversity across a δ grid");
  f->add_option("--instance", fr.instances, "Instance JSON, repeatable")->required();
  f->add_option("--grid", fr.grid, "Grid points i/(N·T), i = 1..N");
  f->add_flag("--zero", fr.zero, "Include δ = 0");
  f->add_option("--scales", fr.scales, "Probability scale factors")->delimiter(',');
  f->add_option("--cap", fr.cap, "Cap on scaled probabilities");
  f->add_option("--threads", fr.threads, "Worker threads");
  f->add_option("--form", fr.form, "materialized | substituted");
  f->add_option("--out", fr.out, "Output directory");

  SimulateArgs sim;
  auto* m = app.add_subcommand("simulate", "Run the dynamics under a constant policy");
  m->add_option("--instance", sim.instance, "Instance JSON")->required();
  m->add_option("--policy", sim.policy, "Policy JSON");
  m->add_option("--method", sim.method, "optimal | uniform | exact | lp");
  m->add_option("--delta", sim.delta, "Diversity level for uniform, exact, lp");
  m->add_option("--steps", sim.steps, "Horizon K");
  m->add_option("--out", sim.out, "Output directory");

  VerifyArgs ver;
  auto* v = app.add_subcommand("verify", "Check the convergence and cost bounds");
  v->add_option("--instance", ver.instances, "Instance JSON, repeatable");
  v->add_option("--random", ver.random, "Also check N seeded random instances");
  v->add_option("--seed", ver.seed, "Corpus and challenger seed");
  v->add_option("--max-n", ver.max_n, "Largest random n");
  v->add_option("--max-T", ver.max_T, "Largest random T");
  v->add_option("--delta", ver.delta, "Diversity level for the convergence checks (default 1/(2T))");
  v->add_option("--steps", ver.steps, "Horizon K");
  v->add_option("--grid", ver.grid, "Grid points per instance");
  v->add_option("--threads", ver.threads, "Worker threads");
  v->add_option("--out", ver.out, "Output directory");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*g) return cmd_gen(*g, gen, args, out);
    if (*i) return cmd_ingest(ing, args, out, err);
    if (*s) return cmd_solve(sol, args, out, err);
    if (*f) return cmd_frontier(fr, args, out, err);
    if (*m) return cmd_simulate(sim, args, out, err);
    if (*v) return cmd_verify(ver, args, out, err);
  } catch (const VerificationFailed& e) {
    err << "error: " << e.what() << '\n';
    return kVerificationFailed;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << '\n';
    return kIoError;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kIoError;
  } catch (const ParseError& e) {
    err << "input error: " << e.what() << '\n';
    return kIoError;
  } catch (const RangeError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const ShapeError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "solver failure: " << e.what() << '\n';
    return kSolverFailure;
  }
  return kConfigError;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int k = 1; k < argc; ++k) args.emplace_back(argv[k]);
  return run(args, out, err);
}

}  // namespace engdiv::cli
