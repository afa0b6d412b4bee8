#include "optsmart/miner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <mutex>
#include <thread>

#include "optsmart/errors.hpp"

namespace optsmart {

MinedRun concMiner(std::span<const AtomicUnit> aus, Stm& stm, const MinerOptions& options) {
  if (options.threads < 1) throw UsageError("miner needs at least one thread");
  for (std::size_t i = 0; i < aus.size(); ++i)
    if (aus[i].auId != static_cast<AuId>(i)) throw InputError("AU ids must equal list positions");

  const std::size_t n = aus.size();
  MinedRun run;
  run.bg = std::make_unique<BlockGraph>();
  run.commitTs.assign(n, 0);
  std::vector<std::atomic<bool>> binned(n);
  for (auto& b : binned) b.store(true, std::memory_order_relaxed);

  std::atomic<std::size_t> nextIndex{0};
  std::atomic<std::size_t> aborts{0};
  std::atomic<bool> stop{false};
  std::exception_ptr failure;
  std::mutex failureMutex;
  BlockGraph& bg = *run.bg;
  auto auIdOf = [&stm](Timestamp ts) { return stm.auIdOf(ts); };

  auto worker = [&] {
    try {
      while (!stop.load(std::memory_order_relaxed)) {
        const std::size_t i = nextIndex.fetch_add(1);
        if (i >= n) return;
        const AtomicUnit& au = aus[i];
        std::size_t attempts = 0;
        std::optional<ConflictRecord> rec;
        Timestamp ts = 0;
        while (true) {
          TxnDescriptor txn = stm.begin(au.auId);
          ts = txn.ts;
          if (executeCode(au, txn, stm) == ExecResult::Done) rec = stm.tryCommit(txn);
          if (rec) break;
          aborts.fetch_add(1);
          if (++attempts > options.maxRetries)
            throw LivelockError("AU " + std::to_string(au.auId) + " (" + au.method + ") aborted " +
                                std::to_string(attempts) + " times, last ts " +
                                std::to_string(ts));
          if (options.backoff)
            std::this_thread::sleep_for(std::chrono::microseconds(1u << std::min<std::size_t>(attempts, 10)));
        }
        run.commitTs[i] = ts;

        if (options.mode == MinerMode::Default) {
          bg.addVertex(ts, au.auId);
          buildForCommit(bg, ts, au.auId, rec->conflicting, auIdOf);
        } else if (!rec->conflicting.empty()) {
          buildForCommit(bg, ts, au.auId, rec->conflicting, auIdOf);
          binned[i].store(false);
          for (Timestamp p : rec->conflicting) binned[static_cast<std::size_t>(auIdOf(p))].store(false);
        }
      }
    } catch (...) {
      std::lock_guard lock(failureMutex);
      if (!failure) failure = std::current_exception();
      stop.store(true);
    }
  };

  const auto start = std::chrono::steady_clock::now();
  {
    std::vector<std::jthread> pool;
    pool.reserve(options.threads - 1);
    for (std::size_t t = 1; t < options.threads; ++t) pool.emplace_back(worker);
    worker();
  }
  run.stats.wallMs =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  if (failure) std::rethrow_exception(failure);

  if (options.mode == MinerMode::Optimized)
    for (std::size_t i = 0; i < n; ++i)
      if (binned[i].load()) run.concBin.push_back(static_cast<AuId>(i));

  run.stats.aborts = aborts.load();
  run.stats.retries = run.stats.aborts;
  run.stats.bgVertices = bg.vertexCount();
  run.stats.bgEdges = bg.edgeCount();
  run.stats.concBinSize = run.concBin.size();
  return run;
}

Block assembleBlock(std::span<const AtomicUnit> aus, std::span<const Value> initialState,
                    const MinedRun& run, const Digest& prevHash, const Stm& stm) {
  if (!run.bg || !run.bg->quiescent())
    throw UsageError("block graph is not quiescent; the miner has not finished");
  if (stm.liveTransactions() != 0) throw UsageError("transactions still live at block assembly");
  Block block;
  block.aus.assign(aus.begin(), aus.end());
  block.initialState.assign(initialState.begin(), initialState.end());
  block.concBin = run.concBin;
  block.bg = run.bg->serialize();
  block.prevHash = prevHash;
  block.finalState = stm.snapshot();
  return block;
}

MinedBlock mineBlock(const Workload& w, Protocol protocol, const MinerOptions& options,
                     const Digest& prevHash, StmOptions stmOptions) {
  auto stm = makeStm(protocol, w.initialState, stmOptions);
  auto run = concMiner(w.aus, *stm, options);
  return {assembleBlock(w.aus, w.initialState, run, prevHash, *stm), run.stats};
}

std::vector<Value> serialMine(std::span<const AtomicUnit> aus, std::span<const Value> initialState) {
  std::vector<Value> store(initialState.begin(), initialState.end());
  for (const auto& au : aus) executeSerial(au, store);
  return store;
}

}  // namespace optsmart
