#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "engdiv/instance.hpp"

namespace engdiv::instances {

enum class Kind { tightness, random_graph, homogeneous, empty };

/// Parameters for a synthetic instance. Randomness comes only from `seed`
/// (boost::random::mt19937_64), so a spec always yields the same instance.
struct GeneratorSpec {
  Kind kind = Kind::random_graph;
  std::size_t n = 10;
  std::size_t T = 2;
  double alpha = 0.0;      ///< tightness: target average retweet probability
  double beta = 0.5;       ///< tightness: maximum retweet probability
  double edge_prob = 0.1;  ///< random_graph / homogeneous: Erdős–Rényi density
  double p_lo = 0.0;       ///< retweet probabilities drawn uniformly in [p_lo, p_hi]
  double p_hi = 0.5;
  std::uint64_t seed = 0;
  std::optional<TypeUserMatrix> p;  ///< empty: probabilities to use verbatim

  /// Every problem with the parameters, empty when they are usable.
  std::vector<std::string> problems() const;
};

Kind parse_kind(const std::string& name);
std::string kind_name(Kind kind);

/// Throws RangeError listing every problem reported by spec.problems().
Instance generate(const GeneratorSpec& spec);

/// Member `index` of a seeded random corpus: a random_graph spec with
/// n in [2, max_n], T in [2, max_T], and varied density and probability range.
GeneratorSpec corpus_spec(std::uint64_t seed, std::size_t index, std::size_t max_n = 30,
                          std::size_t max_T = 4);

/// max{α - (β - α)/(T - 1), 0}, the non-leading probability of the
/// tightness family.
double tightness_floor(double alpha, double beta, std::size_t T);

GeneratorSpec spec_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Instance& instance);
/// Throws ParseError for structurally malformed documents, ShapeError for
/// dimension mismatches, RangeError for out-of-range probabilities.
Instance from_json(const nlohmann::json& j, std::vector<std::string>* warnings = nullptr);

void write_instance(const Instance& instance, const std::filesystem::path& path);
Instance read_instance(const std::filesystem::path& path,
                       std::vector<std::string>* warnings = nullptr);

/// 16 hex digits of FNV-1a over the canonical JSON text.
std::string content_hash(const Instance& instance);

}  // namespace engdiv::instances
