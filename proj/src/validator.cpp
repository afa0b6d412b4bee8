#include "optsmart/validator.hpp"

#include <algorithm>
#include <atomic>
#include <barrier>
#include <chrono>
#include <map>
#include <mutex>
#include <set>
#include <thread>
#include <unordered_map>

#include "optsmart/errors.hpp"

namespace optsmart {

const char* toString(ValidatorKind v) {
  switch (v) {
    case ValidatorKind::Dec: return "dec";
    case ValidatorKind::Fj: return "fj";
    case ValidatorKind::Serial: return "serial";
  }
  return "?";
}

ValidatorKind parseValidatorKind(const std::string& text) {
  if (text == "dec") return ValidatorKind::Dec;
  if (text == "fj") return ValidatorKind::Fj;
  if (text == "serial") return ValidatorKind::Serial;
  throw InputError("unknown validator: " + text);
}

namespace {

using Clock = std::chrono::steady_clock;

double msBetween(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double, std::milli>(b - a).count();
}

/// Shared state of one validation run.
class Replay {
 public:
  explicit Replay(const Block& block)
      : block_(block),
        store_(block.initialState.size()),
        access_(block.aus.size()),
        execCount_(block.aus.size()),
        order_(block.aus.size(), -1) {
    for (std::size_t i = 0; i < store_.size(); ++i)
      store_[i].store(block.initialState[i], std::memory_order_relaxed);
  }

  /// Structural checks that need no execution. Builds the graph.
  bool prepare() {
    const std::size_t n = block_.aus.size();
    if (block_.finalState.size() != block_.initialState.size())
      return fail("final state and initial state sizes differ");
    std::vector<int> owner(n, 0);
    for (AuId id : block_.concBin) {
      if (id < 0 || static_cast<std::size_t>(id) >= n) return fail("bin references unknown AU");
      ++owner[static_cast<std::size_t>(id)];
    }
    for (const auto& v : block_.bg.vertices) {
      if (v.auId < 0 || static_cast<std::size_t>(v.auId) >= n)
        return fail("graph vertex references unknown AU");
      ++owner[static_cast<std::size_t>(v.auId)];
    }
    if (std::any_of(owner.begin(), owner.end(), [](int c) { return c != 1; }))
      return fail("bin and graph do not partition the AUs");
    try {
      graph_ = BlockGraph::deserialize(block_.bg);
    } catch (const std::exception& e) {
      return fail(std::string("malformed graph: ") + e.what());
    }
    return true;
  }

  void run(AuId id) {
    const auto i = static_cast<std::size_t>(id);
    execCount_[i].fetch_add(1);
    order_[orderPos_.fetch_add(1)] = id;
    try {
      executeDirect(block_.aus[i], store_, &access_[i]);
    } catch (const std::exception& e) {
      fail(std::string("AU ") + std::to_string(id) + " failed: " + e.what());
    }
  }

  bool fail(const std::string& why) {
    std::lock_guard lock(mutex_);
    if (reason_.empty()) reason_ = why;
    failed_.store(true);
    return false;
  }

  bool failed() const { return failed_.load(); }
  BlockGraph& graph() { return *graph_; }
  const Block& block() const { return block_; }

  ValidatorOutcome finish(double phase1, double phase2) {
    ValidatorOutcome out;
    out.phase1Ms = phase1;
    out.phase2Ms = phase2;
    out.wallMs = phase1 + phase2;
    out.finalState.reserve(store_.size());
    for (const auto& v : store_) out.finalState.push_back(v.load());
    out.executionOrder.assign(order_.begin(),
                              order_.begin() + static_cast<std::ptrdiff_t>(orderPos_.load()));
    out.vertexCount = graph_ ? graph_->vertexCount() : 0;
    out.claimedCount = graph_ ? graph_->claimedCount() : 0;
    out.exactlyOnce = graph_ && out.claimedCount == out.vertexCount &&
                      std::all_of(execCount_.begin(), execCount_.end(),
                                  [](const auto& c) { return c.load() == 1; });
    if (graph_ && !failed()) {
      out.accessViolations = countUnorderedConflicts();
      if (!out.exactlyOnce) fail("some AU did not execute exactly once");
      if (out.accessViolations > 0)
        fail(std::to_string(out.accessViolations) + " conflicting AU pairs are unordered");
      if (out.finalState != block_.finalState) fail("final state mismatch");
    }
    out.accept = !failed();
    out.rejectReason = reason_;
    return out;
  }

 private:
  /// Pairs of AUs that touched a common object, at least one writing, and
  /// are not ordered by a graph path. Bin AUs are unordered with everything.
  std::size_t countUnorderedConflicts() const {
    const auto& verts = block_.bg.vertices;
    const std::size_t v = verts.size(), words = (v + 63) / 64;
    std::unordered_map<Timestamp, std::size_t> indexOfTs;
    std::vector<std::ptrdiff_t> vertexOfAu(block_.aus.size(), -1);
    for (std::size_t k = 0; k < v; ++k) {
      indexOfTs[verts[k].ts] = k;
      vertexOfAu[static_cast<std::size_t>(verts[k].auId)] = static_cast<std::ptrdiff_t>(k);
    }
    // Edges go from lower to higher ts, so descending ts is reverse
    // topological order and one sweep closes reachability.
    std::vector<std::vector<std::size_t>> out(v);
    for (const auto& e : block_.bg.edges) out[indexOfTs.at(e.from)].push_back(indexOfTs.at(e.to));
    std::vector<std::vector<std::uint64_t>> reach(v, std::vector<std::uint64_t>(words, 0));
    for (std::size_t k = v; k-- > 0;) {
      for (std::size_t w : out[k]) {
        reach[k][w / 64] |= 1ull << (w % 64);
        for (std::size_t j = 0; j < words; ++j) reach[k][j] |= reach[w][j];
      }
    }
    auto reaches = [&](std::size_t a, std::size_t b) { return (reach[a][b / 64] >> (b % 64)) & 1; };

    std::map<ObjectId, std::map<AuId, bool>> touched;  // object -> AU -> wrote
    for (std::size_t au = 0; au < access_.size(); ++au) {
      for (ObjectId o : access_[au].reads) touched[o].emplace(static_cast<AuId>(au), false);
      for (ObjectId o : access_[au].writes) touched[o][static_cast<AuId>(au)] = true;
    }
    std::set<std::pair<AuId, AuId>> bad;
    for (const auto& [obj, users] : touched) {
      for (auto a = users.begin(); a != users.end(); ++a) {
        for (auto b = std::next(a); b != users.end(); ++b) {
          if (!a->second && !b->second) continue;
          const auto va = vertexOfAu[static_cast<std::size_t>(a->first)];
          const auto vb = vertexOfAu[static_cast<std::size_t>(b->first)];
          if (va < 0 || vb < 0 ||
              !(reaches(static_cast<std::size_t>(va), static_cast<std::size_t>(vb)) ||
                reaches(static_cast<std::size_t>(vb), static_cast<std::size_t>(va))))
            bad.emplace(a->first, b->first);
        }
      }
    }
    return bad.size();
  }

  const Block& block_;
  std::unique_ptr<BlockGraph> graph_;
  std::vector<std::atomic<Value>> store_;
  std::vector<AccessSet> access_;
  std::vector<std::atomic<int>> execCount_;
  std::vector<AuId> order_;
  std::atomic<std::size_t> orderPos_{0};
  std::atomic<bool> failed_{false};
  std::mutex mutex_;
  std::string reason_;
};

ValidatorOutcome rejectEarly(Replay& replay) { return replay.finish(0.0, 0.0); }

}  // namespace

ValidatorOutcome decValidator(const Block& block, std::size_t threads) {
  if (threads < 1) throw UsageError("validator needs at least one thread");
  Replay replay(block);
  if (!replay.prepare()) return rejectEarly(replay);
  BlockGraph& bg = replay.graph();
  const std::size_t vertexCount = bg.vertexCount();

  std::atomic<std::size_t> binIndex{0};
  std::atomic<std::size_t> inFlight{0};
  std::atomic<std::size_t> completed{0};
  std::atomic<bool> stalled{false};
  Clock::time_point phase1End;
  std::barrier phaseBarrier(static_cast<std::ptrdiff_t>(threads),
                            [&]() noexcept { phase1End = Clock::now(); });

  auto execute = [&](BlockGraph::Vertex* v, BlockGraph::CacheList& cache) {
    replay.run(v->auId);
    bg.decInCount(*v, cache);
    completed.fetch_add(1);
  };

  auto worker = [&] {
    for (std::size_t i; (i = binIndex.fetch_add(1)) < block.concBin.size();)
      replay.run(block.concBin[i]);
    phaseBarrier.arrive_and_wait();

    BlockGraph::CacheList cache;
    while (!stalled.load() && !replay.failed() && bg.claimedCount() < vertexCount) {
      // inFlight covers search and execution so that an idle thread seeing
      // zero knows nobody can still publish a new source.
      inFlight.fetch_add(1);
      BlockGraph::Vertex* v = bg.searchLocal(cache);
      if (!v) v = bg.searchGlobal();
      if (v) execute(v, cache);
      inFlight.fetch_sub(1);
      if (v) continue;

      const std::size_t seen = completed.load();
      if (inFlight.load() == 0 && bg.claimedCount() < vertexCount) {
        inFlight.fetch_add(1);
        v = bg.searchGlobal();
        if (v) execute(v, cache);
        inFlight.fetch_sub(1);
        if (!v && inFlight.load() == 0 && completed.load() == seen &&
            bg.claimedCount() < vertexCount) {
          stalled.store(true);
          replay.fail("no claimable source left in the block graph");
        }
      }
      std::this_thread::yield();
    }
  };

  const auto start = Clock::now();
  {
    std::vector<std::jthread> pool;
    pool.reserve(threads - 1);
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }
  const auto end = Clock::now();
  return replay.finish(msBetween(start, phase1End), msBetween(phase1End, end));
}

ValidatorOutcome fjValidator(const Block& block, std::size_t threads) {
  if (threads < 1) throw UsageError("validator needs at least one thread");
  Replay replay(block);
  if (!replay.prepare()) return rejectEarly(replay);
  BlockGraph& bg = replay.graph();

  std::vector<AuId> wave;
  std::atomic<std::size_t> waveIndex{0};
  bool done = false;
  std::barrier sync(static_cast<std::ptrdiff_t>(threads));

  auto drain = [&] {
    for (std::size_t i; (i = waveIndex.fetch_add(1)) < wave.size();) replay.run(wave[i]);
  };
  auto slave = [&] {
    while (true) {
      sync.arrive_and_wait();
      if (done) return;
      drain();
      sync.arrive_and_wait();
    }
  };
  // The master takes part in every wave so one thread still makes progress.
  auto dispatch = [&](std::vector<AuId> next) {
    wave = std::move(next);
    waveIndex.store(0);
    sync.arrive_and_wait();
    drain();
    sync.arrive_and_wait();
  };

  std::size_t waves = 0;
  const auto start = Clock::now();
  Clock::time_point phase1End;
  {
    std::vector<std::jthread> pool;
    pool.reserve(threads - 1);
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(slave);

    dispatch(block.concBin);
    phase1End = Clock::now();

    BlockGraph::CacheList cache;
    std::vector<BlockGraph::Vertex*> claimed;
    while (BlockGraph::Vertex* v = bg.searchGlobal()) claimed.push_back(v);
    while (!claimed.empty() && !replay.failed()) {
      std::vector<AuId> ids;
      ids.reserve(claimed.size());
      for (auto* v : claimed) ids.push_back(v->auId);
      dispatch(std::move(ids));
      ++waves;
      for (auto* v : claimed) bg.decInCount(*v, cache);
      claimed.clear();
      while (BlockGraph::Vertex* v = bg.searchLocal(cache)) claimed.push_back(v);
    }
    if (!replay.failed() && bg.claimedCount() < bg.vertexCount())
      replay.fail("no claimable source left in the block graph");

    done = true;
    sync.arrive_and_wait();
  }
  const auto end = Clock::now();
  auto out = replay.finish(msBetween(start, phase1End), msBetween(phase1End, end));
  out.waves = waves;
  return out;
}

ValidatorOutcome serialValidator(const Block& block) {
  Replay replay(block);
  if (!replay.prepare()) return rejectEarly(replay);
  BlockGraph& bg = replay.graph();
  const auto start = Clock::now();
  for (AuId id : block.concBin) replay.run(id);
  const auto phase1End = Clock::now();
  // Claiming in ts order keeps the exactly-once counters meaningful.
  BlockGraph::CacheList cache;
  for (const auto& rec : block.bg.vertices) {
    BlockGraph::Vertex* v = bg.findVertex(rec.ts);
    cache.push_back(v);
    if (bg.searchLocal(cache) != v) {
      replay.fail("vertex " + std::to_string(rec.ts) + " is not a source in ts order");
      break;
    }
    replay.run(v->auId);
    BlockGraph::CacheList discard;
    bg.decInCount(*v, discard);
  }
  const auto end = Clock::now();
  return replay.finish(msBetween(start, phase1End), msBetween(phase1End, end));
}

ValidatorOutcome validateBlock(ValidatorKind kind, const Block& block, std::size_t threads) {
  switch (kind) {
    case ValidatorKind::Dec: return decValidator(block, threads);
    case ValidatorKind::Fj: return fjValidator(block, threads);
    case ValidatorKind::Serial: return serialValidator(block);
  }
  throw InputError("unknown validator kind");
}

}  // namespace optsmart
