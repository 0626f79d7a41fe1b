#include "engdiv/instances.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <boost/random/bernoulli_distribution.hpp>
#include <boost/random/mersenne_twister.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include "engdiv/error.hpp"

namespace engdiv::instances {

using nlohmann::json;

Kind parse_kind(const std::string& name) {
  if (name == "tightness" || name == "tight") return Kind::tightness;
  if (name == "random_graph" || name == "random") return Kind::random_graph;
  if (name == "homogeneous") return Kind::homogeneous;
  if (name == "empty") return Kind::empty;
  throw RangeError("unknown generator kind '" + name + "'");
}

std::string kind_name(Kind kind) {
  switch (kind) {
    case Kind::tightness: return "tightness";
    case Kind::random_graph: return "random_graph";
    case Kind::homogeneous: return "homogeneous";
    case Kind::empty: return "empty";
  }
  return "unknown";
}

std::vector<std::string> GeneratorSpec::problems() const {
  std::vector<std::string> out;
  if (T == 0) out.emplace_back("T must be at least 1");
  switch (kind) {
    case Kind::tightness:
      if (T < 2) out.emplace_back("tightness needs T >= 2");
      if (!(beta > 0.0 && beta < 1.0)) out.emplace_back("tightness needs 0 < beta < 1");
      if (!(alpha >= 0.0)) out.emplace_back("tightness needs alpha >= 0");
      if (alpha > beta) out.emplace_back("tightness needs alpha <= beta");
      break;
    case Kind::random_graph:
    case Kind::homogeneous:
      if (!(edge_prob >= 0.0 && edge_prob <= 1.0)) out.emplace_back("edge_prob must lie in [0, 1]");
      [[fallthrough]];
    case Kind::empty:
      if (kind == Kind::empty && p) {
        if (static_cast<std::size_t>(p->rows()) != T || static_cast<std::size_t>(p->cols()) != n) {
          out.emplace_back("supplied p must have shape T x n");
        }
        break;
      }
      if (!(p_lo >= 0.0)) out.emplace_back("p_lo must be >= 0");
      if (!(p_hi <= 0.99)) out.emplace_back("p_hi must be <= 0.99");
      if (p_lo > p_hi) out.emplace_back("p_lo must not exceed p_hi");
      break;
  }
  return out;
}

double tightness_floor(double alpha, double beta, std::size_t T) {
  return std::max(alpha - (beta - alpha) / (static_cast<double>(T) - 1.0), 0.0);
}

namespace {

using Engine = boost::random::mt19937_64;

TypeUserMatrix uniform_matrix(Engine& rng, std::size_t T, std::size_t n, double lo, double hi) {
  boost::random::uniform_real_distribution<double> dist(lo, hi);
  TypeUserMatrix p(static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(n));
  // Fill column by column (user-major) so a fixed seed is stable in n.
  for (Eigen::Index i = 0; i < p.cols(); ++i) {
    for (Eigen::Index t = 0; t < p.rows(); ++t) p(t, i) = lo == hi ? lo : dist(rng);
  }
  return p;
}

std::vector<Edge> random_edges(Engine& rng, std::size_t n, double prob) {
  boost::random::bernoulli_distribution<double> coin(prob);
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      if (coin(rng)) edges.push_back({i, j});
    }
  }
  return edges;
}

}  // namespace

Instance generate(const GeneratorSpec& spec) {
  const auto problems = spec.problems();
  if (!problems.empty()) {
    std::string msg = "invalid generator spec:";
    for (const auto& p : problems) msg += " " + p + ";";
    throw RangeError(msg);
  }
  Engine rng(spec.seed);
  const auto T = static_cast<Eigen::Index>(spec.T);
  const auto n = static_cast<Eigen::Index>(spec.n);

  switch (spec.kind) {
    case Kind::tightness: {
      TypeUserMatrix p = TypeUserMatrix::Constant(T, n, tightness_floor(spec.alpha, spec.beta, spec.T));
      p.row(0).setConstant(spec.beta);
      return Instance::create(spec.n, spec.T, {}, std::move(p));
    }
    case Kind::empty: {
      TypeUserMatrix p = spec.p ? *spec.p : uniform_matrix(rng, spec.T, spec.n, spec.p_lo, spec.p_hi);
      return Instance::create(spec.n, spec.T, {}, std::move(p));
    }
    case Kind::random_graph: {
      std::vector<Edge> edges = random_edges(rng, spec.n, spec.edge_prob);
      TypeUserMatrix p = uniform_matrix(rng, spec.T, spec.n, spec.p_lo, spec.p_hi);
      return Instance::create(spec.n, spec.T, std::move(edges), std::move(p));
    }
    case Kind::homogeneous: {
      std::vector<Edge> edges = random_edges(rng, spec.n, spec.edge_prob);
      const TypeUserMatrix column = uniform_matrix(rng, spec.T, 1, spec.p_lo, spec.p_hi);
      TypeUserMatrix p = column.replicate(1, n);
      return Instance::create(spec.n, spec.T, std::move(edges), std::move(p));
    }
  }
  throw InternalError("unhandled generator kind");
}

GeneratorSpec corpus_spec(std::uint64_t seed, std::size_t index, std::size_t max_n,
                          std::size_t max_T) {
  if (max_n < 2 || max_T < 2) throw RangeError("corpus needs max_n >= 2 and max_T >= 2");
  Engine rng(seed * 0x9E3779B97F4A7C15ULL + index);
  using boost::random::uniform_int_distribution;
  using boost::random::uniform_real_distribution;
  GeneratorSpec s;
  s.kind = Kind::random_graph;
  s.n = uniform_int_distribution<std::size_t>(2, max_n)(rng);
  s.T = uniform_int_distribution<std::size_t>(2, max_T)(rng);
  s.edge_prob = uniform_real_distribution<double>(0.0, 0.3)(rng);
  s.p_hi = uniform_real_distribution<double>(0.05, 0.95)(rng);
  s.p_lo = uniform_real_distribution<double>(0.0, s.p_hi)(rng);
  s.seed = rng();
  return s;
}

namespace {

json matrix_to_json(const TypeUserMatrix& m) {
  json rows = json::array();
  for (Eigen::Index t = 0; t < m.rows(); ++t) {
    json row = json::array();
    for (Eigen::Index i = 0; i < m.cols(); ++i) row.push_back(m(t, i));
    rows.push_back(std::move(row));
  }
  return rows;
}

TypeUserMatrix matrix_from_json(const json& j, std::size_t T, std::size_t n, const char* name) {
  if (!j.is_array()) throw ParseError(std::string(name) + " must be an array of arrays");
  if (j.size() != T) {
    throw ShapeError(std::string(name) + " has " + std::to_string(j.size()) + " rows, expected T = " +
                     std::to_string(T));
  }
  TypeUserMatrix m(static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(n));
  for (std::size_t t = 0; t < T; ++t) {
    const json& row = j[t];
    if (!row.is_array()) throw ParseError(std::string(name) + " rows must be arrays");
    if (row.size() != n) {
      throw ShapeError(std::string(name) + " row " + std::to_string(t) + " has " +
                       std::to_string(row.size()) + " entries, expected n = " + std::to_string(n));
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!row[i].is_number()) throw ParseError(std::string(name) + " entries must be numbers");
      m(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(i)) = row[i].get<double>();
    }
  }
  return m;
}

std::size_t count_field(const json& j, const char* name) {
  if (!j.contains(name)) throw ParseError(std::string("missing field '") + name + "'");
  const json& v = j.at(name);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ParseError(std::string("field '") + name + "' must be a nonnegative integer");
  }
  return v.get<std::size_t>();
}

}  // namespace

GeneratorSpec spec_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("generator spec must be a JSON object");
  GeneratorSpec s;
  try {
    if (j.contains("kind")) s.kind = parse_kind(j.at("kind").get<std::string>());
    if (j.contains("n")) s.n = j.at("n").get<std::size_t>();
    if (j.contains("T")) s.T = j.at("T").get<std::size_t>();
    if (j.contains("alpha")) s.alpha = j.at("alpha").get<double>();
    if (j.contains("beta")) s.beta = j.at("beta").get<double>();
    if (j.contains("edge_prob")) s.edge_prob = j.at("edge_prob").get<double>();
    if (j.contains("p_lo")) s.p_lo = j.at("p_lo").get<double>();
    if (j.contains("p_hi")) s.p_hi = j.at("p_hi").get<double>();
    if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("generator spec: ") + e.what());
  }
  if (j.contains("p")) s.p = matrix_from_json(j.at("p"), s.T, s.n, "p");
  return s;
}

json to_json(const Instance& instance) {
  json j;
  j["n"] = instance.users();
  j["T"] = instance.types();
  json edges = json::array();
  for (const Edge& e : instance.edges()) edges.push_back({e.follower, e.followee});
  j["edges"] = std::move(edges);
  j["p"] = matrix_to_json(instance.retweet());
  if (instance.affinity()) j["e"] = matrix_to_json(*instance.affinity());
  return j;
}

Instance from_json(const json& j, std::vector<std::string>* warnings) {
  if (!j.is_object()) throw ParseError("instance must be a JSON object");
  const std::size_t n = count_field(j, "n");
  const std::size_t T = count_field(j, "T");
  if (!j.contains("edges") || !j.at("edges").is_array()) {
    throw ParseError("field 'edges' must be an array of [follower, followee] pairs");
  }
  std::vector<Edge> edges;
  for (const json& e : j.at("edges")) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer() ||
        e[0].get<long long>() < 0 || e[1].get<long long>() < 0) {
      throw ParseError("every edge must be a pair of nonnegative integers");
    }
    edges.push_back({e[0].get<std::size_t>(), e[1].get<std::size_t>()});
  }
  if (!j.contains("p")) throw ParseError("missing field 'p'");
  TypeUserMatrix p = matrix_from_json(j.at("p"), T, n, "p");
  std::optional<TypeUserMatrix> e;
  if (j.contains("e") && !j.at("e").is_null()) e = matrix_from_json(j.at("e"), T, n, "e");
  return Instance::create(n, T, std::move(edges), std::move(p), std::move(e), warnings);
}

void write_instance(const Instance& instance, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << to_json(instance).dump() << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

Instance read_instance(const std::filesystem::path& path, std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return from_json(j, warnings);
}

std::string content_hash(const Instance& instance) {
  const std::string text = to_json(instance).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace engdiv::instances
