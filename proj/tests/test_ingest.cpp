#include <doctest.h>

#include <numeric>
#include <set>
#include <sstream>

#include "corpus.hpp"
#include "engdiv/error.hpp"
#include "engdiv/ingest.hpp"
#include "engdiv/instances.hpp"

using namespace engdiv;
using namespace engdiv::ingest;

namespace {

std::vector<TweetRecord> records(const std::string& jsonl) {
  std::istringstream in(jsonl);
  return read_tweets_jsonl(in);
}

HashtagNetwork triangles() {
  const auto r = records(
      R"({"user":"a","hashtags":["x","y","z"]})"
      "\n"
      R"({"user":"a","hashtags":["p","q","r"]})"
      "\n");
  return cooccurrence_network(r, top_hashtags(r, 10));
}

}  // namespace

TEST_SUITE("ingest") {

TEST_CASE("tweet records") {
  const auto r = records(
      R"({"user":"u1","hashtags":["#Climate","climate","#Vote"],"retweet":true})"
      "\n\n"
      R"({"user":42,"hashtags":[]})"
      "\n");
  REQUIRE(r.size() == 2);
  CHECK(r[0].user == "u1");
  CHECK(r[0].hashtags == std::vector<std::string>{"climate", "vote"});
  CHECK(r[0].is_retweet);
  CHECK(r[1].user == "42");
  CHECK_FALSE(r[1].is_retweet);

  try {
    records("{\"user\":\"a\"}\n{\"hashtags\":[]}\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(records("not json\n"), ParseError);
  CHECK_THROWS_AS(records(R"({"user":"a","retweet":"yes"})"), ParseError);
}

TEST_CASE("follower edges") {
  std::istringstream dup("a\tb\nb\tc\na\tb\n");
  const FollowerEdges d = read_follower_edges(dup);
  CHECK(d.edges.size() == 2);
  CHECK(d.warnings.size() == 1);

  std::istringstream loop("a\ta\n");
  const FollowerEdges l = read_follower_edges(loop);
  CHECK(l.edges.empty());
  REQUIRE(l.warnings.size() == 1);
  CHECK(l.warnings[0].find("self-loop") != std::string::npos);

  std::istringstream bad("a\tb\nab\n");
  try {
    read_follower_edges(bad);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("top hashtags") {
  const auto r = records(
      R"({"user":"a","hashtags":["b","c"]})"
      "\n"
      R"({"user":"a","hashtags":["a","c"]})"
      "\n"
      R"({"user":"a","hashtags":["c","b","d"]})"
      "\n");
  CHECK(top_hashtags(r, 2) == std::vector<std::string>{"c", "b"});
  CHECK(top_hashtags(r, 10).size() == 4);
  // a and d tie at one record each; a wins.
  CHECK(top_hashtags(r, 3) == std::vector<std::string>{"c", "b", "a"});
  CHECK_THROWS_AS(top_hashtags(r, 0), RangeError);
}

TEST_CASE("co-occurrence network") {
  const auto one = records(R"({"user":"a","hashtags":["a","b","c"]})");
  const HashtagNetwork n1 = cooccurrence_network(one, {"a", "b", "c"});
  CHECK(n1.weights.size() == 3);
  CHECK(n1.weight(0, 1) == 1.0);
  CHECK(n1.weight(2, 0) == 1.0);

  const auto two = records("{\"user\":\"a\",\"hashtags\":[\"a\",\"b\"]}\n{\"user\":\"b\",\"hashtags\":[\"b\",\"a\"]}\n");
  CHECK(cooccurrence_network(two, {"a", "b"}).weight(0, 1) == 2.0);
  CHECK(cooccurrence_network(one, {"a"}).weights.empty());
  CHECK(n1.index_of("c") == 2);
  CHECK_THROWS_AS(n1.index_of("z"), RangeError);
}

TEST_CASE("louvain on simple graphs") {
  const HashtagNetwork t = triangles();
  const Communities c = louvain_communities(t, 0);
  CHECK(c.count == 2);
  CHECK(c.assignment[t.index_of("p")] == c.assignment[t.index_of("q")]);
  CHECK(c.assignment[t.index_of("x")] == c.assignment[t.index_of("z")]);
  CHECK(c.assignment[t.index_of("x")] != c.assignment[t.index_of("p")]);

  const auto clique = records(R"({"user":"a","hashtags":["a","b","c","d","e"]})");
  CHECK(louvain_communities(cooccurrence_network(clique, top_hashtags(clique, 10)), 3).count == 1);
  CHECK_THROWS_AS(louvain_communities(HashtagNetwork{}, 0), RangeError);
}

TEST_CASE("louvain modularity never drops") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto planted = corpus::planted(s, 120);
    const auto r = records(planted.tweets_jsonl);
    const HashtagNetwork net = cooccurrence_network(r, top_hashtags(r, 50));
    const Communities c = louvain_communities(net, s);
    std::vector<std::size_t> singletons(net.nodes.size());
    std::iota(singletons.begin(), singletons.end(), 0);
    double prev = modularity(net, singletons);
    for (double q : c.level_modularity) {
      CHECK(q >= prev - 1e-12);
      prev = q;
    }
    CHECK(modularity(net, c.assignment) >= modularity(net, singletons) - 1e-12);
    CHECK(c.count == 2);
  }
}

TEST_CASE("count_types") {
  // i follows j; j posts {h}; h has type 1.
  const auto r = records(
      R"({"user":"j","hashtags":["h"]})"
      "\n"
      R"({"user":"i","hashtags":["g","k"],"retweet":true})"
      "\n");
  FollowerEdges g;
  g.edges = {{"i", "j"}};
  const UserIndex users = user_universe(g, r);
  const auto edges = index_edges(g, users);
  const HashtagNetwork net = cooccurrence_network(r, {"g", "h", "k"});
  Communities c;
  c.assignment = {0, 1, 0};  // g, h, k
  c.count = 2;
  const TypeCounts counts = count_types(r, users, edges, net, c);
  const auto i = static_cast<Eigen::Index>(users.at("i"));
  const auto j = static_cast<Eigen::Index>(users.at("j"));
  CHECK(counts.seen(1, i) == 1);
  CHECK(counts.retweeted(0, i) == 2);
  CHECK(counts.seen.col(j).sum() == 0);  // j follows nobody
  CHECK(counts.retweeted(1, i) == 0);
}

TEST_CASE("retweet counts are conserved") {
  const auto planted = corpus::planted(3);
  const auto r = records(planted.tweets_jsonl);
  std::istringstream es(planted.edges_tsv);
  const FollowerEdges g = read_follower_edges(es);
  const UserIndex users = user_universe(g, r);
  const HashtagNetwork net = cooccurrence_network(r, top_hashtags(r, 100));
  const Communities c = louvain_communities(net, 1);
  const TypeCounts counts = count_types(r, users, index_edges(g, users), net, c);
  std::vector<std::int64_t> expect(users.size(), 0);
  for (const auto& rec : r) {
    if (rec.is_retweet) expect[users.at(rec.user)] += static_cast<std::int64_t>(rec.hashtags.size());
  }
  for (std::size_t i = 0; i < users.size(); ++i) {
    CHECK(counts.retweeted.col(static_cast<Eigen::Index>(i)).sum() == expect[i]);
  }
}

TEST_CASE("mode probabilities") {
  TypeCounts c{CountMatrix(1, 3), CountMatrix(1, 3)};
  c.retweeted << 2, 5, 10;
  c.seen << 50, 0, 10;
  const TypeUserMatrix p = infer_mode(c);
  CHECK(p(0, 0) == 2.0 / 50.0);
  CHECK(p(0, 1) == 0.0);
  CHECK(p(0, 2) == 0.99);
}

TEST_CASE("beta posterior") {
  const PriorConfig prior;
  CHECK(posterior_parameters(2, 50, prior) == std::pair{3.0, 150.0});
  CHECK(posterior_parameters(0, 0, prior) == std::pair{1.0, 100.0});

  TypeCounts c{CountMatrix::Constant(1, 4000, 2), CountMatrix::Constant(1, 4000, 50)};
  PriorConfig cfg;
  cfg.samples = 1;
  cfg.seed = 9;
  const auto draws = infer_beta_samples(c, cfg);
  REQUIRE(draws.size() == 1);
  CHECK(draws[0].mean() == doctest::Approx(3.0 / 153.0).epsilon(0.05));
  CHECK(draws[0].minCoeff() >= 0.0);
  CHECK(draws[0].maxCoeff() <= 0.99);
  CHECK(infer_beta_samples(c, cfg)[0] == draws[0]);

  TypeCounts none{CountMatrix::Zero(1, 4000), CountMatrix::Zero(1, 4000)};
  CHECK(infer_beta_samples(none, cfg)[0].mean() == doctest::Approx(1.0 / 101.0).epsilon(0.05));

  cfg.a = 0.0;
  CHECK_THROWS_AS(infer_beta_samples(c, cfg), RangeError);
}

TEST_CASE("pipeline") {
  const auto planted = corpus::planted(11);
  std::istringstream es(planted.edges_tsv), ts(planted.tweets_jsonl);
  PipelineOptions opt;
  opt.louvain_seed = 4;
  opt.prior.seed = 4;
  const PipelineResult res = run_pipeline(es, ts, opt);
  CHECK(res.communities.count == 2);
  REQUIRE(res.instances.size() == 3);
  CHECK(res.instances[0].first == "mode");
  CHECK(res.instances[2].first == "beta_sample_2");
  for (const auto& [name, inst] : res.instances) {
    CHECK(inst.types() == 2);
    CHECK(inst.users() == res.users.size());
    CHECK(inst.retweet().maxCoeff() <= 0.99);
    CHECK(inst.retweet().minCoeff() >= 0.0);
  }
  std::ostringstream csv;
  write_assignment_csv(csv, res.network, res.communities);
  CHECK(csv.str().rfind("hashtag,community\nblue0,", 0) == 0);
}

}  // TEST_SUITE
