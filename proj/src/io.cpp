#include "engdiv/io.hpp"

#include <fstream>

#include "engdiv/error.hpp"

namespace engdiv::io {

using nlohmann::json;

json matrix_document(const TypeUserMatrix& values, const MatrixMeta& meta) {
  json doc;
  doc["kind"] = meta.kind;
  if (!meta.method.empty()) doc["method"] = meta.method;
  doc["instance_hash"] = meta.instance_hash;
  if (meta.delta) doc["delta"] = *meta.delta;
  doc["T"] = values.rows();
  doc["n"] = values.cols();
  json rows = json::array();
  for (Eigen::Index t = 0; t < values.rows(); ++t) {
    json row = json::array();
    for (Eigen::Index i = 0; i < values.cols(); ++i) row.push_back(values(t, i));
    rows.push_back(std::move(row));
  }
  doc["values"] = std::move(rows);
  return doc;
}

TypeUserMatrix matrix_from_document(const json& doc, MatrixMeta* meta) {
  if (!doc.is_object() || !doc.contains("values") || !doc.at("values").is_array()) {
    throw ParseError("document needs a 'values' matrix");
  }
  const json& rows = doc.at("values");
  const std::size_t T = rows.size();
  const std::size_t n = T == 0 ? 0 : rows[0].size();
  TypeUserMatrix m(static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(n));
  for (std::size_t t = 0; t < T; ++t) {
    if (!rows[t].is_array()) throw ParseError("'values' rows must be arrays");
    if (rows[t].size() != n) throw ShapeError("'values' rows differ in length");
    for (std::size_t i = 0; i < n; ++i) {
      if (!rows[t][i].is_number()) throw ParseError("'values' entries must be numbers");
      m(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(i)) = rows[t][i].get<double>();
    }
  }
  if (meta) {
    meta->kind = doc.value("kind", "");
    meta->method = doc.value("method", "");
    meta->instance_hash = doc.value("instance_hash", "");
    if (doc.contains("delta") && doc.at("delta").is_number()) meta->delta = doc.at("delta").get<double>();
  }
  return m;
}

void write_json(const json& doc, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_policy(const InjectionPolicy& policy, const MatrixMeta& meta,
                  const std::filesystem::path& path) {
  MatrixMeta m = meta;
  m.kind = "policy";
  write_json(matrix_document(policy.b, m), path);
}

InjectionPolicy read_policy(const std::filesystem::path& path, MatrixMeta* meta) {
  return {matrix_from_document(read_json(path), meta)};
}

void write_state(const State& state, const MatrixMeta& meta, const std::filesystem::path& path) {
  MatrixMeta m = meta;
  m.kind = "state";
  write_json(matrix_document(state.x, m), path);
}

}  // namespace engdiv::io
