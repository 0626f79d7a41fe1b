#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace engdiv {

/// Rows index types, columns index users.
using TypeUserMatrix = Eigen::MatrixXd;

/// Directed follow relation: `follower` follows `followee`, so content flows
/// from followee to follower.
struct Edge {
  std::size_t follower = 0;
  std::size_t followee = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// A follower graph with per-type retweet probabilities and optional
/// engagement affinities.
///
/// Construction normalizes the edge list (sorted, self-loops and duplicates
/// dropped) and validates every probability. Once built, an Instance never
/// changes.
class Instance {
public:
  /// Builds and validates an instance. Dropped edges are described in
  /// `warnings` when it is non-null.
  ///
  /// Throws ShapeError when p/e do not have shape T×n or an edge endpoint is
  /// out of range, RangeError when some probability is outside [0, 1) or an
  /// affinity is negative.
  static Instance create(std::size_t n, std::size_t T, std::vector<Edge> edges,
                         TypeUserMatrix p, std::optional<TypeUserMatrix> e = std::nullopt,
                         std::vector<std::string>* warnings = nullptr);

  std::size_t users() const noexcept { return n_; }
  std::size_t types() const noexcept { return T_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const TypeUserMatrix& retweet() const noexcept { return p_; }
  const std::optional<TypeUserMatrix>& affinity() const noexcept { return e_; }

  /// Weights used by the engagement functional: e when set, else p.
  const TypeUserMatrix& engagement_weights() const noexcept { return e_ ? *e_ : p_; }

  /// Same graph and affinity, new retweet probabilities (validated).
  Instance with_retweet(TypeUserMatrix p) const;

  friend bool operator==(const Instance& a, const Instance& b);

private:
  Instance() = default;

  std::size_t n_ = 0;
  std::size_t T_ = 0;
  std::vector<Edge> edges_;
  TypeUserMatrix p_;
  std::optional<TypeUserMatrix> e_;
};

}  // namespace engdiv
