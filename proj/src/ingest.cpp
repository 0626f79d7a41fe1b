#include "engdiv/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include <boost/random/beta_distribution.hpp>
#include <boost/random/mersenne_twister.hpp>
#include <json.hpp>

#include "engdiv/error.hpp"

namespace engdiv::ingest {

using nlohmann::json;

std::string normalize_hashtag(std::string tag) {
  std::size_t start = 0;
  while (start < tag.size() && tag[start] == '#') ++start;
  tag.erase(0, start);
  std::transform(tag.begin(), tag.end(), tag.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return tag;
}

TweetRecord TweetRecord::make(std::string user, const std::vector<std::string>& hashtags,
                              bool is_retweet) {
  TweetRecord r{std::move(user), {}, is_retweet};
  for (const auto& raw : hashtags) {
    std::string tag = normalize_hashtag(raw);
    if (tag.empty()) continue;
    if (std::find(r.hashtags.begin(), r.hashtags.end(), tag) == r.hashtags.end()) {
      r.hashtags.push_back(std::move(tag));
    }
  }
  return r;
}

std::vector<TweetRecord> read_tweets_jsonl(std::istream& in) {
  std::vector<TweetRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fail = [&](const std::string& why) {
      throw ParseError("tweets line " + std::to_string(lineno) + ": " + why);
    };
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      fail(e.what());
    }
    if (!j.is_object()) fail("expected a JSON object");
    if (!j.contains("user")) fail("missing 'user'");
    std::string user;
    if (j["user"].is_string()) {
      user = j["user"].get<std::string>();
    } else if (j["user"].is_number_integer()) {
      user = std::to_string(j["user"].get<long long>());
    } else {
      fail("'user' must be a string or integer");
    }
    std::vector<std::string> tags;
    if (j.contains("hashtags")) {
      if (!j["hashtags"].is_array()) fail("'hashtags' must be an array");
      for (const auto& h : j["hashtags"]) {
        if (!h.is_string()) fail("hashtags must be strings");
        tags.push_back(h.get<std::string>());
      }
    }
    bool retweet = false;
    if (j.contains("retweet")) {
      if (!j["retweet"].is_boolean()) fail("'retweet' must be a boolean");
      retweet = j["retweet"].get<bool>();
    }
    out.push_back(TweetRecord::make(std::move(user), tags, retweet));
  }
  return out;
}

FollowerEdges read_follower_edges(std::istream& in) {
  FollowerEdges out;
  std::set<std::pair<std::string, std::string>> seen;
  std::string line;
  std::size_t lineno = 0;
  std::size_t duplicates = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
      throw ParseError("edges line " + std::to_string(lineno) +
                       ": expected 'follower<TAB>followee'");
    }
    std::string follower = line.substr(0, tab);
    std::string followee = line.substr(tab + 1);
    if (follower.empty() || followee.empty()) {
      throw ParseError("edges line " + std::to_string(lineno) + ": empty user id");
    }
    if (follower == followee) {
      out.warnings.push_back("edges line " + std::to_string(lineno) + ": dropped self-loop " +
                             follower);
      continue;
    }
    if (!seen.emplace(std::move(follower), std::move(followee)).second) ++duplicates;
  }
  if (duplicates > 0) {
    out.warnings.push_back("dropped " + std::to_string(duplicates) + " duplicate edge(s)");
  }
  out.edges.assign(seen.begin(), seen.end());
  return out;
}

UserIndex user_universe(const FollowerEdges& graph, const std::vector<TweetRecord>& records) {
  std::set<std::string> ids;
  for (const auto& [a, b] : graph.edges) {
    ids.insert(a);
    ids.insert(b);
  }
  for (const auto& r : records) ids.insert(r.user);
  UserIndex out;
  out.ids.assign(ids.begin(), ids.end());
  for (std::size_t i = 0; i < out.ids.size(); ++i) out.position.emplace(out.ids[i], i);
  return out;
}

std::vector<Edge> index_edges(const FollowerEdges& graph, const UserIndex& users) {
  std::vector<Edge> out;
  out.reserve(graph.edges.size());
  for (const auto& [a, b] : graph.edges) out.push_back({users.at(a), users.at(b)});
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> top_hashtags(const std::vector<TweetRecord>& records, std::size_t H) {
  if (H == 0) throw RangeError("top_hashtags needs H >= 1");
  std::map<std::string, std::size_t> freq;
  for (const auto& r : records) {
    for (const auto& h : r.hashtags) ++freq[h];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(freq.begin(), freq.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (ranked.size() > H) ranked.resize(H);
  std::vector<std::string> out;
  out.reserve(ranked.size());
  for (auto& [tag, count] : ranked) out.push_back(std::move(tag));
  return out;
}

double HashtagNetwork::weight(std::size_t a, std::size_t b) const {
  if (a > b) std::swap(a, b);
  const auto it = weights.find({a, b});
  return it == weights.end() ? 0.0 : it->second;
}

std::size_t HashtagNetwork::index_of(const std::string& tag) const {
  const auto it = std::lower_bound(nodes.begin(), nodes.end(), tag);
  if (it == nodes.end() || *it != tag) throw RangeError("hashtag '" + tag + "' is not in the network");
  return static_cast<std::size_t>(it - nodes.begin());
}

HashtagNetwork cooccurrence_network(const std::vector<TweetRecord>& records,
                                    const std::vector<std::string>& retained) {
  HashtagNetwork net;
  net.nodes = retained;
  std::sort(net.nodes.begin(), net.nodes.end());
  net.nodes.erase(std::unique(net.nodes.begin(), net.nodes.end()), net.nodes.end());

  std::vector<std::size_t> present;
  for (const auto& r : records) {
    present.clear();
    for (const auto& h : r.hashtags) {
      const auto it = std::lower_bound(net.nodes.begin(), net.nodes.end(), h);
      if (it != net.nodes.end() && *it == h) present.push_back(static_cast<std::size_t>(it - net.nodes.begin()));
    }
    std::sort(present.begin(), present.end());
    for (std::size_t a = 0; a < present.size(); ++a) {
      for (std::size_t b = a + 1; b < present.size(); ++b) net.weights[{present[a], present[b]}] += 1.0;
    }
  }
  return net;
}

TypeCounts count_types(const std::vector<TweetRecord>& records, const UserIndex& users,
                       const std::vector<Edge>& edges, const HashtagNetwork& network,
                       const Communities& communities) {
  if (communities.assignment.size() != network.nodes.size()) {
    throw ShapeError("community assignment does not cover the retained hashtags");
  }
  const auto T = static_cast<Eigen::Index>(communities.count);
  const auto n = static_cast<Eigen::Index>(users.size());
  TypeCounts out{CountMatrix::Zero(T, n), CountMatrix::Zero(T, n)};

  std::vector<std::vector<std::size_t>> followers(users.size());
  for (const Edge& e : edges) followers[e.followee].push_back(e.follower);

  Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1> per_type(T);
  for (const auto& r : records) {
    per_type.setZero();
    bool any = false;
    for (const auto& h : r.hashtags) {
      const auto it = std::lower_bound(network.nodes.begin(), network.nodes.end(), h);
      if (it == network.nodes.end() || *it != h) continue;
      const auto node = static_cast<std::size_t>(it - network.nodes.begin());
      ++per_type(static_cast<Eigen::Index>(communities.assignment[node]));
      any = true;
    }
    if (!any) continue;
    const std::size_t author = users.at(r.user);
    if (r.is_retweet) out.retweeted.col(static_cast<Eigen::Index>(author)) += per_type;
    for (std::size_t f : followers[author]) out.seen.col(static_cast<Eigen::Index>(f)) += per_type;
  }
  return out;
}

TypeUserMatrix infer_mode(const TypeCounts& counts) {
  TypeUserMatrix p(counts.seen.rows(), counts.seen.cols());
  for (Eigen::Index t = 0; t < p.rows(); ++t) {
    for (Eigen::Index i = 0; i < p.cols(); ++i) {
      const auto s = counts.seen(t, i);
      p(t, i) = s > 0 ? std::min(static_cast<double>(counts.retweeted(t, i)) / static_cast<double>(s),
                                 kProbabilityCap)
                      : 0.0;
    }
  }
  return p;
}

std::pair<double, double> posterior_parameters(std::int64_t retweeted, std::int64_t seen,
                                               const PriorConfig& prior) {
  return {prior.a + static_cast<double>(retweeted), prior.b + static_cast<double>(seen)};
}

std::vector<TypeUserMatrix> infer_beta_samples(const TypeCounts& counts, const PriorConfig& prior) {
  if (!(prior.a > 0.0 && prior.b > 0.0)) throw RangeError("Beta prior parameters must be positive");
  boost::random::mt19937_64 rng(prior.seed);
  std::vector<TypeUserMatrix> out;
  out.reserve(prior.samples);
  for (std::size_t s = 0; s < prior.samples; ++s) {
    TypeUserMatrix p(counts.seen.rows(), counts.seen.cols());
    for (Eigen::Index i = 0; i < p.cols(); ++i) {
      for (Eigen::Index t = 0; t < p.rows(); ++t) {
        const auto [a, b] = posterior_parameters(counts.retweeted(t, i), counts.seen(t, i), prior);
        boost::random::beta_distribution<double> dist(a, b);
        p(t, i) = std::clamp(dist(rng), 0.0, kProbabilityCap);
      }
    }
    out.push_back(std::move(p));
  }
  return out;
}

PipelineResult run_pipeline(std::istream& edges_tsv, std::istream& tweets_jsonl,
                            const PipelineOptions& options) {
  PipelineResult out;
  FollowerEdges graph = read_follower_edges(edges_tsv);
  const std::vector<TweetRecord> records = read_tweets_jsonl(tweets_jsonl);
  out.warnings = graph.warnings;

  out.users = user_universe(graph, records);
  out.edges = index_edges(graph, out.users);
  out.network = cooccurrence_network(records, top_hashtags(records, options.top_hashtags));
  out.communities = louvain_communities(out.network, options.louvain_seed);
  out.counts = count_types(records, out.users, out.edges, out.network, out.communities);

  const std::size_t n = out.users.size();
  const std::size_t T = out.communities.count;
  out.instances.emplace_back("mode", Instance::create(n, T, out.edges, infer_mode(out.counts)));
  const auto samples = infer_beta_samples(out.counts, options.prior);
  for (std::size_t s = 0; s < samples.size(); ++s) {
    out.instances.emplace_back("beta_sample_" + std::to_string(s + 1),
                               Instance::create(n, T, out.edges, samples[s]));
  }
  return out;
}

void write_assignment_csv(std::ostream& out, const HashtagNetwork& network,
                          const Communities& communities) {
  out << "hashtag,community\n";
  for (std::size_t k = 0; k < network.nodes.size(); ++k) {
    out << network.nodes[k] << ',' << communities.assignment[k] << '\n';
  }
}

}  // namespace engdiv::ingest
