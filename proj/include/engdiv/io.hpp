#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "engdiv/net_core.hpp"

namespace engdiv::io {

/// Provenance carried alongside a serialized policy or state.
struct MatrixMeta {
  std::string kind;           ///< "policy" or "state"
  std::string method;         ///< optimal | delta_uniform | delta_exact | lp (policies)
  std::string instance_hash;
  std::optional<double> delta;
};

nlohmann::json matrix_document(const TypeUserMatrix& values, const MatrixMeta& meta);

/// Reads a policy/state document. Throws ParseError or ShapeError.
TypeUserMatrix matrix_from_document(const nlohmann::json& doc, MatrixMeta* meta = nullptr);

void write_json(const nlohmann::json& doc, const std::filesystem::path& path);
nlohmann::json read_json(const std::filesystem::path& path);

void write_policy(const InjectionPolicy& policy, const MatrixMeta& meta,
                  const std::filesystem::path& path);
InjectionPolicy read_policy(const std::filesystem::path& path, MatrixMeta* meta = nullptr);

void write_state(const State& state, const MatrixMeta& meta, const std::filesystem::path& path);

}  // namespace engdiv::io
