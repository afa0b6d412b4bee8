#include <doctest.h>

#include <map>
#include <set>
#include <sstream>

#include "optsmart/bto.hpp"
#include "optsmart/checker.hpp"
#include "optsmart/errors.hpp"
#include "optsmart/miner.hpp"
#include "oracle.hpp"

using namespace optsmart;

namespace {

Workload makeWorkload(std::vector<AtomicUnit> aus, std::vector<Value> init) {
  Workload w;
  w.aus = std::move(aus);
  w.initialState = std::move(init);
  w.regions.push_back({Contract::Coin, 0, w.initialState.size(), 0});
  return w;
}

WorkloadSpec spec(ContractKind k, std::size_t aus, std::size_t objects, std::uint64_t seed) {
  WorkloadSpec s;
  s.kind = k;
  s.nAUs = aus;
  s.nObjects = objects;
  s.seed = seed;
  return s;
}

/// Bin plus graph vertices, each AU exactly once.
void checkPartition(const Block& b) {
  std::multiset<AuId> seen(b.concBin.begin(), b.concBin.end());
  for (const auto& v : b.bg.vertices) seen.insert(v.auId);
  REQUIRE(seen.size() == b.aus.size());
  AuId expect = 0;
  for (AuId id : seen) CHECK(id == expect++);
}

/// Rejects every read and every commit.
class HostileStm final : public Stm {
 public:
  explicit HostileStm(std::span<const Value> init) : Stm(init, {}), state_(init.begin(), init.end()) {}
  Protocol protocol() const noexcept override { return Protocol::Bto; }
  std::vector<Value> snapshot() const override { return state_; }

 protected:
  std::optional<Value> sharedRead(TxnDescriptor&, ObjectId) override { return std::nullopt; }
  std::optional<ConflictRecord> validateAndCommit(TxnDescriptor&) override { return std::nullopt; }

 private:
  std::vector<Value> state_;
};

}  // namespace

TEST_CASE("a read-only block needs no graph") {
  std::vector<AtomicUnit> aus;
  for (AuId i = 0; i < 20; ++i) aus.push_back(makeAu(i, Contract::Coin, "getbalance", {i % 5}));
  const auto w = makeWorkload(aus, std::vector<Value>(5, 7));
  for (auto p : {Protocol::Bto, Protocol::Mvto}) {
    const auto opt = mineBlock(w, p, {4, MinerMode::Optimized});
    CHECK(opt.block.bg.vertices.empty());
    CHECK(opt.block.bg.edges.empty());
    CHECK(opt.block.concBin.size() == 20);
    CHECK(opt.block.finalState == w.initialState);
    const auto def = mineBlock(w, p, {4, MinerMode::Default});
    CHECK(def.block.bg.vertices.size() == 20);
    CHECK(def.block.bg.edges.empty());
    CHECK(def.block.concBin.empty());
  }
}

TEST_CASE("two writers of one object give one edge and an empty bin") {
  // Two bids on the same auction slots: the second must follow the first.
  const auto w = makeWorkload({makeAu(0, Contract::Auction, "bid", {0, 10, 2, 3}),
                               makeAu(1, Contract::Auction, "bid", {1, 20, 2, 3})},
                              std::vector<Value>(4, 0));
  for (auto p : {Protocol::Bto, Protocol::Mvto}) {
    const auto m = mineBlock(w, p, {1, MinerMode::Optimized});
    CHECK(m.block.bg.vertices.size() == 2);
    CHECK(m.block.bg.edges.size() == 1);
    CHECK(m.block.concBin.empty());
    CHECK(m.block.finalState == std::vector<Value>{10, 0, 20, 2});
    CHECK(m.stats.bgVertices == 2);
    CHECK(m.stats.bgEdges == 1);
  }
}

TEST_CASE("mined blocks partition the AUs and match a serial replay") {
  for (auto k : {ContractKind::Coin, ContractKind::Ballot, ContractKind::Auction, ContractKind::Mix}) {
    for (auto p : {Protocol::Bto, Protocol::Mvto}) {
      for (auto mode : {MinerMode::Default, MinerMode::Optimized}) {
        CAPTURE(toString(k));
        CAPTURE(toString(p));
        CAPTURE(toString(mode));
        auto s = spec(k, 150, 200, 5);
        s.zipf = true;
        const auto w = generateWorkload(s);
        const auto m = mineBlock(w, p, {4, mode}, kZeroDigest, {false, 0.2});
        checkPartition(m.block);
        if (mode == MinerMode::Default) CHECK(m.block.concBin.empty());

        // Replaying in commit-timestamp order must give the block's state.
        auto stm = makeStm(p, w.initialState, {false, 0.2});
        const auto run = concMiner(w.aus, *stm, {4, mode});
        std::vector<AuId> order(w.aus.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](AuId a, AuId b) { return run.commitTs[a] < run.commitTs[b]; });
        std::vector<AtomicUnit> sorted;
        for (AuId id : order) sorted.push_back(w.aus[static_cast<std::size_t>(id)]);
        const auto block = assembleBlock(w.aus, w.initialState, run, kZeroDigest, *stm);
        CHECK(oracle::run(sorted, w.initialState) == block.finalState);
        CHECK(checkInvariants(w, w.initialState, block.finalState).empty());
        CHECK(checkMinerValidatorEquivalence(block, order).pass);
      }
    }
  }
}

TEST_CASE("the optimized graph is never larger than the default one") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const auto w = generateWorkload(spec(ContractKind::Coin, 200, 500, seed));
    const auto def = mineBlock(w, Protocol::Bto, {2, MinerMode::Default});
    const auto opt = mineBlock(w, Protocol::Bto, {2, MinerMode::Optimized});
    CHECK(def.block.bg.vertices.size() == 200);
    CHECK(opt.block.bg.vertices.size() <= def.block.bg.vertices.size());
    CHECK(opt.block.bg.vertices.size() + opt.block.concBin.size() == 200);
  }
}

TEST_CASE("every committed conflict is a graph edge") {
  for (auto p : {Protocol::Bto, Protocol::Mvto}) {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
      const auto w = generateWorkload(spec(ContractKind::Mix, 120, 150, seed));
      auto stm = makeStm(p, w.initialState, {true, 0.3});
      const auto run = concMiner(w.aus, *stm, {4, MinerMode::Optimized});
      const auto block = assembleBlock(w.aus, w.initialState, run, kZeroDigest, *stm);
      CHECK(missingConflictEdges(stm->history().events(), block.bg).empty());
    }
  }
}

TEST_CASE("assembly refuses a block while transactions are live") {
  const auto w = generateWorkload(spec(ContractKind::Coin, 10, 20, 1));
  auto stm = makeStm(Protocol::Bto, w.initialState);
  auto run = concMiner(w.aus, *stm, {1, MinerMode::Optimized});
  auto dangling = stm->begin(99);
  CHECK_THROWS_AS(assembleBlock(w.aus, w.initialState, run, kZeroDigest, *stm), UsageError);
  stm->tryAbort(dangling);
  CHECK_NOTHROW(assembleBlock(w.aus, w.initialState, run, kZeroDigest, *stm));
  MinedRun empty;
  CHECK_THROWS_AS(assembleBlock(w.aus, w.initialState, empty, kZeroDigest, *stm), UsageError);
}

TEST_CASE("miner input checks") {
  const auto w = generateWorkload(spec(ContractKind::Coin, 10, 20, 1));
  auto stm = makeStm(Protocol::Bto, w.initialState);
  CHECK_THROWS_AS(concMiner(w.aus, *stm, {0, MinerMode::Optimized}), UsageError);
  auto shuffled = w.aus;
  std::swap(shuffled[0], shuffled[1]);
  CHECK_THROWS_AS(concMiner(shuffled, *stm, {1, MinerMode::Optimized}), InputError);
}

TEST_CASE("an AU that never commits raises LivelockError") {
  const auto w = generateWorkload(spec(ContractKind::Coin, 8, 20, 1));
  for (std::size_t threads : {1u, 3u}) {
    HostileStm stm(w.initialState);
    MinerOptions opts{threads, MinerMode::Optimized, 5};
    CHECK_THROWS_AS(concMiner(w.aus, stm, opts), LivelockError);
  }
}

TEST_CASE("SHA-256 matches the published test vector") {
  CHECK(toHex(sha256("abc")) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(toHex(sha256("")) == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  const auto d = sha256("abc");
  CHECK(digestFromHex(toHex(d)) == d);
  CHECK_THROWS_AS(digestFromHex("abc"), InputError);
  CHECK_THROWS_AS(digestFromHex(std::string(64, 'g')), InputError);
}

TEST_CASE("blocks round-trip and any tampering changes the digest") {
  const auto w = generateWorkload(spec(ContractKind::Mix, 60, 90, 2));
  const auto prev = sha256("parent");
  const auto m = mineBlock(w, Protocol::Mvto, {2, MinerMode::Optimized}, prev);
  const std::string text = serializeBlock(m.block);
  const Block back = parseBlock(text);
  CHECK(serializeBlock(back) == text);
  CHECK(back.prevHash == prev);
  CHECK(back.bg == m.block.bg);
  CHECK(back.concBin == m.block.concBin);
  CHECK(blockDigest(back) == blockDigest(m.block));

  Block t = back;
  t.finalState[0] += 1;
  CHECK(blockDigest(t) != blockDigest(back));
  t = back;
  t.prevHash[0] ^= 1;
  CHECK(blockDigest(t) != blockDigest(back));
  if (!t.bg.edges.empty()) {
    t = back;
    t.bg.edges.pop_back();
    CHECK(blockDigest(t) != blockDigest(back));
  }
}

TEST_CASE("block parse errors point at the line") {
  auto lineOf = [](const std::string& text) -> std::size_t {
    try {
      parseBlock(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  const std::string hash(64, '0');
  const std::string ok = "[AUS]\n0 coin getbalance 0 0\n[INITSTATE]\n0 5\n[CONCBIN]\n0\n[BG]\nBG 0 0\n"
                         "[PREVHASH]\n" + hash + "\n[FINALSTATE]\n0 5\n";
  CHECK(lineOf(ok) == 0);
  CHECK(lineOf("[AUS]\n1 coin getbalance 0 0\n") == 2);
  CHECK(lineOf("[AUS]\n0 coin getbalance 0 0\n[INITSTATE]\n1 5\n") == 4);
  CHECK(lineOf("[CONCBIN]\n3\n2\n") == 3);
  CHECK(lineOf("[BG]\nBG 1 0\nV x 0\n[PREVHASH]\n" + hash + "\n") == 3);
  CHECK(lineOf("[BG]\nBG 0 0\n[PREVHASH]\nzz\n") == 4);
  CHECK(lineOf("junk\n") == 1);
  CHECK_THROWS_AS(parseBlock("[AUS]\n"), ParseError);
}

TEST_CASE("serial mining is the list-order replay") {
  const auto w = generateWorkload(spec(ContractKind::Auction, 100, 20, 3));
  CHECK(serialMine(w.aus, w.initialState) == oracle::run(w.aus, w.initialState));
}
