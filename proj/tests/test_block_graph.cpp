#include <doctest.h>

#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "optsmart/block_graph.hpp"
#include "optsmart/errors.hpp"
#include "oracle.hpp"

using namespace optsmart;

TEST_CASE("vertices and edges are inserted once") {
  BlockGraph g;
  CHECK(g.addVertex(3, 30) == BlockGraph::Insert::Added);
  CHECK(g.addVertex(1, 10) == BlockGraph::Insert::Added);
  CHECK(g.addVertex(3, 99) == BlockGraph::Insert::AlreadyPresent);
  CHECK(g.addEdge(1, 3) == BlockGraph::Insert::Added);
  CHECK(g.addEdge(1, 3) == BlockGraph::Insert::AlreadyPresent);
  CHECK(g.vertexCount() == 2);
  CHECK(g.edgeCount() == 1);
  CHECK(g.findVertex(3)->auId == 30);
  CHECK(g.findVertex(3)->inCnt == 1);
  CHECK(g.findVertex(1)->inCnt == 0);
  CHECK(g.findVertex(2) == nullptr);
  CHECK(g.quiescent());
}

TEST_CASE("bad edges and vertices are rejected") {
  BlockGraph g;
  g.addVertex(1, 0);
  g.addVertex(2, 1);
  CHECK_THROWS_AS(g.addEdge(2, 1), InputError);
  CHECK_THROWS_AS(g.addEdge(2, 2), InputError);
  CHECK_THROWS_AS(g.addEdge(1, 5), UsageError);
  CHECK_THROWS_AS(g.addVertex(-1, 0), InputError);
  CHECK(g.quiescent());
}

TEST_CASE("serialize lists vertices and edges in ascending order") {
  BlockGraph g;
  for (Timestamp t : {5, 2, 9, 7}) g.addVertex(t, t * 10);
  g.addEdge(5, 9);
  g.addEdge(2, 9);
  g.addEdge(2, 5);
  g.addEdge(7, 9);
  const auto s = g.serialize();
  CHECK(s.vertices == std::vector<SerializedBG::VertexRecord>{{2, 20}, {5, 50}, {7, 70}, {9, 90}});
  CHECK(s.edges == std::vector<SerializedBG::EdgeRecord>{{2, 5}, {2, 9}, {5, 9}, {7, 9}});
  CHECK(formatBg(s) == "BG 4 4\nV 2 20\nV 5 50\nV 7 70\nV 9 90\nE 2 5\nE 2 9\nE 5 9\nE 7 9\n");
  std::istringstream in(formatBg(s));
  CHECK(readBg(in) == s);
  auto back = BlockGraph::deserialize(s);
  CHECK(back->serialize() == s);
  CHECK(back->findVertex(9)->inCnt == 3);
}

TEST_CASE("deserialize rejects duplicates") {
  SerializedBG dupV{{{1, 0}, {1, 1}}, {}};
  CHECK_THROWS_AS(BlockGraph::deserialize(dupV), InputError);
  SerializedBG dupE{{{1, 0}, {2, 1}}, {{1, 2}, {1, 2}}};
  CHECK_THROWS_AS(BlockGraph::deserialize(dupE), InputError);
}

TEST_CASE("parse errors carry the offending line number") {
  auto lineOf = [](std::vector<std::string> lines, std::size_t first = 1) -> std::size_t {
    try {
      parseBg(lines, first);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  CHECK(lineOf({"BG 2 1", "V 1 0", "V 2 1", "E 2 1"}) == 4);
  CHECK(lineOf({"BG 2 1", "V 1 0", "V 2 1", "E 1 3"}) == 4);
  CHECK(lineOf({"BG 2 0", "V 2 0", "V 1 1"}) == 3);
  CHECK(lineOf({"BG 1 0", "V x 0"}) == 2);
  CHECK(lineOf({"V 1 0"}) == 1);
  CHECK(lineOf({"BG 1 0", "Q 1 0"}, 10) == 11);
  CHECK(lineOf({"BG 3 0", "V 1 0"}) == 1);
  CHECK(lineOf({"BG 2 1", "V 1 0", "E 1 2", "V 2 1"}) == 3);  // edge to unknown vertex
}

TEST_CASE("buildForCommit orients edges by timestamp") {
  BlockGraph g;
  const std::vector<Timestamp> conflicts{2, 7};
  buildForCommit(g, 5, 50, conflicts, [](Timestamp t) { return t * 10; });
  const auto s = g.serialize();
  CHECK(s.vertices == std::vector<SerializedBG::VertexRecord>{{2, 20}, {5, 50}, {7, 70}});
  CHECK(s.edges == std::vector<SerializedBG::EdgeRecord>{{2, 5}, {5, 7}});
  const std::vector<Timestamp> self{5};
  CHECK_THROWS_AS(buildForCommit(g, 5, 50, self, [](Timestamp t) { return t; }), InputError);
  // No conflicts adds nothing.
  buildForCommit(g, 11, 110, {}, [](Timestamp t) { return t; });
  CHECK(g.findVertex(11) == nullptr);
}

TEST_CASE("claims are exclusive and relaxation caches new sources") {
  BlockGraph g;
  for (Timestamp t = 1; t <= 4; ++t) g.addVertex(t, t - 1);
  g.addEdge(1, 3);
  g.addEdge(2, 3);
  g.addEdge(3, 4);
  BlockGraph::CacheList cache;
  auto* a = g.searchGlobal();
  REQUIRE(a);
  CHECK(a->ts == 1);
  CHECK(a->inCnt == -1);
  CHECK_THROWS_AS(g.decInCount(*g.findVertex(3), cache), UsageError);
  g.decInCount(*a, cache);
  CHECK(cache.empty());  // 3 still waits on 2
  auto* b = g.searchGlobal();
  REQUIRE(b);
  CHECK(b->ts == 2);
  g.decInCount(*b, cache);
  REQUIRE(cache.size() == 1);
  CHECK(cache.front()->ts == 3);
  CHECK(g.searchGlobal() == g.findVertex(3));  // global scan may steal it
  CHECK(g.searchLocal(cache) == nullptr);       // so the cached entry is dropped
  CHECK(cache.empty());
  g.decInCount(*g.findVertex(3), cache);
  auto* d = g.searchLocal(cache);
  REQUIRE(d);
  CHECK(d->ts == 4);
  CHECK(g.searchGlobal() == nullptr);
  CHECK(g.claimedCount() == 4);
}

namespace {

/// A random "commit log": each commit lists earlier commits it conflicts with.
struct CommitLog {
  std::vector<std::pair<Timestamp, std::vector<Timestamp>>> commits;
};

CommitLog randomLog(std::mt19937_64& rng, int n) {
  CommitLog log;
  std::bernoulli_distribution pick(0.05);
  for (Timestamp ts = 1; ts <= n; ++ts) {
    std::vector<Timestamp> c;
    for (Timestamp p = 1; p < ts; ++p)
      if (pick(rng)) c.push_back(p);
    log.commits.emplace_back(ts, std::move(c));
  }
  // Commit order is not ts order in a real miner.
  std::shuffle(log.commits.begin(), log.commits.end(), rng);
  return log;
}

}  // namespace

TEST_CASE("concurrent construction matches the sequential model") {
  std::mt19937_64 rng(2024);
  for (int round = 0; round < 20; ++round) {
    const auto log = randomLog(rng, 200);
    oracle::GraphModel model;
    for (auto& [ts, c] : log.commits) {
      std::vector<std::pair<Timestamp, AuId>> partners;
      for (auto p : c) partners.emplace_back(p, p + 1000);
      model.commit(ts, ts + 1000, partners);
    }

    BlockGraph g;
    std::atomic<std::size_t> next{0};
    {
      std::vector<std::jthread> pool;
      for (int t = 0; t < 8; ++t)
        pool.emplace_back([&] {
          for (std::size_t i; (i = next.fetch_add(1)) < log.commits.size();) {
            auto& [ts, c] = log.commits[i];
            buildForCommit(g, ts, ts + 1000, c, [](Timestamp x) { return x + 1000; });
          }
        });
    }
    CHECK(g.serialize() == model.serialized());
    const auto deg = model.inDegrees();
    g.forEachVertex([&](const BlockGraph::Vertex& v) { CHECK(v.inCnt == deg.at(v.ts)); });
    CHECK(g.vertexCount() == model.vertices.size());
    CHECK(g.edgeCount() == model.edges.size());
  }
}

TEST_CASE("concurrent claiming visits every vertex once in a topological order") {
  std::mt19937_64 rng(77);
  for (int round = 0; round < 20; ++round) {
    const auto log = randomLog(rng, 300);
    oracle::GraphModel model;
    for (auto& [ts, c] : log.commits) {
      std::vector<std::pair<Timestamp, AuId>> partners;
      for (auto p : c) partners.emplace_back(p, p);
      model.commit(ts, ts, partners);
    }
    auto g = BlockGraph::deserialize(model.serialized());
    std::mutex m;
    std::vector<Timestamp> order;
    {
      std::vector<std::jthread> pool;
      for (int t = 0; t < 8; ++t)
        pool.emplace_back([&] {
          BlockGraph::CacheList cache;
          while (g->claimedCount() < g->vertexCount()) {
            BlockGraph::Vertex* v = g->searchLocal(cache);
            if (!v) v = g->searchGlobal();
            if (!v) {
              std::this_thread::yield();
              continue;
            }
            {
              std::lock_guard lock(m);
              order.push_back(v->ts);
            }
            g->decInCount(*v, cache);
          }
        });
    }
    REQUIRE(order.size() == model.vertices.size());
    std::map<Timestamp, std::size_t> pos;
    for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = i;
    CHECK(pos.size() == order.size());
    for (auto [f, t] : model.edges) CHECK(pos.at(f) < pos.at(t));
  }
}
