#include <algorithm>
#include <numeric>

#include <boost/random/mersenne_twister.hpp>

#include "engdiv/error.hpp"
#include "engdiv/ingest.hpp"

namespace engdiv::ingest {

namespace {

// Symmetric weighted graph; loops[i] holds A_ii (internal weight counted
// in both directions after aggregation).
struct WeightedGraph {
  std::vector<std::vector<std::pair<std::size_t, double>>> adj;  // off-diagonal
  std::vector<double> loops;

  std::size_t size() const { return adj.size(); }
  double strength(std::size_t i) const {
    double k = loops[i];
    for (const auto& [j, w] : adj[i]) k += w;
    return k;
  }
};

WeightedGraph from_network(const HashtagNetwork& network) {
  WeightedGraph g;
  g.adj.resize(network.nodes.size());
  g.loops.assign(network.nodes.size(), 0.0);
  for (const auto& [key, w] : network.weights) {
    g.adj[key.first].emplace_back(key.second, w);
    g.adj[key.second].emplace_back(key.first, w);
  }
  for (auto& row : g.adj) std::sort(row.begin(), row.end());
  return g;
}

/// Relabels so labels appear in increasing order of first node.
std::size_t compact_labels(std::vector<std::size_t>& labels) {
  std::vector<std::size_t> remap(labels.size() + 1, labels.size() + 1);
  std::size_t next = 0;
  for (auto& l : labels) {
    if (remap[l] == labels.size() + 1) remap[l] = next++;
    l = remap[l];
  }
  return next;
}

/// One local-moving phase. Returns true when any node changed community.
bool local_moving(const WeightedGraph& g, std::vector<std::size_t>& community,
                  boost::random::mt19937_64& rng) {
  const std::size_t n = g.size();
  std::vector<double> k(n);
  double two_m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    k[i] = g.strength(i);
    two_m += k[i];
  }
  if (two_m <= 0.0) return false;

  std::vector<double> total(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) total[community[i]] += k[i];

  // Seeded priorities decide between equally good target communities.
  std::vector<std::uint64_t> priority(n);
  for (auto& p : priority) p = rng();

  std::vector<double> link(n, 0.0);
  std::vector<std::size_t> touched;
  bool moved_any = false;
  bool moved = true;
  while (moved) {
    moved = false;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t own = community[i];
      touched.clear();
      for (const auto& [j, w] : g.adj[i]) {
        const std::size_t c = community[j];
        if (link[c] == 0.0) touched.push_back(c);
        link[c] += w;
      }
      total[own] -= k[i];

      const double own_gain = link[own] - total[own] * k[i] / two_m;
      std::size_t best = own;
      double best_gain = own_gain;
      std::sort(touched.begin(), touched.end());
      for (std::size_t c : touched) {
        if (c == own) continue;
        const double gain = link[c] - total[c] * k[i] / two_m;
        constexpr double eps = 1e-12;
        if (gain > best_gain + eps ||
            (best != own && gain > best_gain - eps && priority[c] < priority[best])) {
          best = c;
          best_gain = std::max(gain, best_gain);
        }
      }
      if (best_gain <= own_gain + 1e-12) best = own;

      total[best] += k[i];
      for (std::size_t c : touched) link[c] = 0.0;
      if (best != own) {
        community[i] = best;
        moved = true;
        moved_any = true;
      }
    }
  }
  return moved_any;
}

WeightedGraph aggregate(const WeightedGraph& g, const std::vector<std::size_t>& community,
                        std::size_t count) {
  std::vector<std::map<std::size_t, double>> acc(count);
  WeightedGraph out;
  out.adj.resize(count);
  out.loops.assign(count, 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const std::size_t ci = community[i];
    out.loops[ci] += g.loops[i];
    for (const auto& [j, w] : g.adj[i]) {
      const std::size_t cj = community[j];
      if (ci == cj) {
        out.loops[ci] += w;
      } else {
        acc[ci][cj] += w;
      }
    }
  }
  for (std::size_t c = 0; c < count; ++c) {
    out.adj[c].assign(acc[c].begin(), acc[c].end());
  }
  return out;
}

}  // namespace

double modularity(const HashtagNetwork& network, const std::vector<std::size_t>& assignment) {
  if (assignment.size() != network.nodes.size()) {
    throw ShapeError("assignment does not cover the network");
  }
  const std::size_t count =
      assignment.empty() ? 0 : *std::max_element(assignment.begin(), assignment.end()) + 1;
  std::vector<double> inside(count, 0.0), total(count, 0.0);
  double two_m = 0.0;
  for (const auto& [key, w] : network.weights) {
    const auto [a, b] = key;
    total[assignment[a]] += w;
    total[assignment[b]] += w;
    two_m += 2.0 * w;
    if (assignment[a] == assignment[b]) inside[assignment[a]] += 2.0 * w;
  }
  if (two_m <= 0.0) return 0.0;
  double q = 0.0;
  for (std::size_t c = 0; c < count; ++c) {
    q += inside[c] / two_m - (total[c] / two_m) * (total[c] / two_m);
  }
  return q;
}

Communities louvain_communities(const HashtagNetwork& network, std::uint64_t seed) {
  if (network.nodes.empty()) throw RangeError("cannot cluster an empty hashtag network");
  boost::random::mt19937_64 rng(seed);

  Communities out;
  // node -> community of the current level graph
  std::vector<std::size_t> membership(network.nodes.size());
  std::iota(membership.begin(), membership.end(), 0);

  WeightedGraph level = from_network(network);
  while (true) {
    std::vector<std::size_t> community(level.size());
    std::iota(community.begin(), community.end(), 0);
    const bool moved = local_moving(level, community, rng);
    if (!moved) break;
    const std::size_t count = compact_labels(community);
    for (auto& m : membership) m = community[m];
    out.level_modularity.push_back(modularity(network, membership));
    level = aggregate(level, community, count);
  }

  out.count = compact_labels(membership);
  out.assignment = std::move(membership);
  if (out.level_modularity.empty()) out.level_modularity.push_back(modularity(network, out.assignment));
  return out;
}

}  // namespace engdiv::ingest
