#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "engdiv/instance.hpp"

namespace engdiv::ingest {

/// One tweet or retweet. Hashtags are normalized (lowercase, no leading
/// '#') and unique within the record, in first-seen order.
struct TweetRecord {
  std::string user;
  std::vector<std::string> hashtags;
  bool is_retweet = false;

  static TweetRecord make(std::string user, const std::vector<std::string>& hashtags,
                          bool is_retweet);
};

std::string normalize_hashtag(std::string tag);

/// JSON lines with fields user, hashtags, retweet. Throws ParseError naming
/// the offending line.
std::vector<TweetRecord> read_tweets_jsonl(std::istream& in);

/// Follow relation over raw user ids, deduplicated and sorted.
struct FollowerEdges {
  std::vector<std::pair<std::string, std::string>> edges;  ///< (follower, followee)
  std::vector<std::string> warnings;
};

/// Rows "follower<TAB>followee"; blank lines are skipped. Self-loops and
/// duplicates are dropped with a warning; malformed rows throw ParseError
/// with their line number.
FollowerEdges read_follower_edges(std::istream& in);

/// Sorted union of edge endpoints and tweet authors.
struct UserIndex {
  std::vector<std::string> ids;
  std::unordered_map<std::string, std::size_t> position;

  std::size_t size() const noexcept { return ids.size(); }
  std::size_t at(const std::string& id) const { return position.at(id); }
};

UserIndex user_universe(const FollowerEdges& graph, const std::vector<TweetRecord>& records);

/// Indexed follower graph for `users`.
std::vector<Edge> index_edges(const FollowerEdges& graph, const UserIndex& users);

/// The H hashtags appearing in the most records, ties broken
/// lexicographically; returned in rank order.
std::vector<std::string> top_hashtags(const std::vector<TweetRecord>& records, std::size_t H);

/// Undirected co-occurrence graph; nodes sorted lexicographically.
struct HashtagNetwork {
  std::vector<std::string> nodes;
  /// (a, b) with a < b, node indices -> number of records containing both.
  std::map<std::pair<std::size_t, std::size_t>, double> weights;

  double weight(std::size_t a, std::size_t b) const;
  std::size_t index_of(const std::string& tag) const;  ///< throws if absent
};

HashtagNetwork cooccurrence_network(const std::vector<TweetRecord>& records,
                                    const std::vector<std::string>& retained);

struct Communities {
  std::vector<std::size_t> assignment;    ///< per network node, 0..count-1
  std::size_t count = 0;
  std::vector<double> level_modularity;   ///< after each aggregation level
};

/// Weighted modularity of a node partition.
double modularity(const HashtagNetwork& network, const std::vector<std::size_t>& assignment);

/// Two-phase Louvain. Nodes are visited in index order; the seed only
/// decides between equally good moves. Community labels follow first
/// appearance in node order. Throws RangeError on an empty network.
Communities louvain_communities(const HashtagNetwork& network, std::uint64_t seed);

using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

/// T×n hashtag-occurrence counts: retweeted (r) and seen via followees (s).
struct TypeCounts {
  CountMatrix retweeted;
  CountMatrix seen;
};

TypeCounts count_types(const std::vector<TweetRecord>& records, const UserIndex& users,
                       const std::vector<Edge>& edges, const HashtagNetwork& network,
                       const Communities& communities);

inline constexpr double kProbabilityCap = 0.99;

/// r/s where s > 0, else 0; capped at kProbabilityCap.
TypeUserMatrix infer_mode(const TypeCounts& counts);

struct PriorConfig {
  double a = 1.0;
  double b = 100.0;
  std::size_t samples = 2;
  std::uint64_t seed = 0;
};

/// Beta(a + r, b + s), exactly as the inference rule prescribes.
std::pair<double, double> posterior_parameters(std::int64_t retweeted, std::int64_t seen,
                                               const PriorConfig& prior);

/// `prior.samples` matrices of posterior draws clamped to [0, kProbabilityCap].
std::vector<TypeUserMatrix> infer_beta_samples(const TypeCounts& counts, const PriorConfig& prior);

struct PipelineOptions {
  std::size_t top_hashtags = 2000;
  std::uint64_t louvain_seed = 0;
  PriorConfig prior;
};

struct PipelineResult {
  UserIndex users;
  std::vector<Edge> edges;
  HashtagNetwork network;
  Communities communities;
  TypeCounts counts;
  /// ("mode", ...), ("beta_sample_1", ...), ...
  std::vector<std::pair<std::string, Instance>> instances;
  std::vector<std::string> warnings;
};

PipelineResult run_pipeline(std::istream& edges_tsv, std::istream& tweets_jsonl,
                            const PipelineOptions& options);

/// hashtag,community
void write_assignment_csv(std::ostream& out, const HashtagNetwork& network,
                          const Communities& communities);

}  // namespace engdiv::ingest
