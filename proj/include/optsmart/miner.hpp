#pragma once

#include <memory>
#include <span>
#include <vector>

#include "optsmart/block.hpp"
#include "optsmart/block_graph.hpp"
#include "optsmart/contracts.hpp"
#include "optsmart/stm.hpp"

namespace optsmart {

struct MinerOptions {
  std::size_t threads = 1;
  MinerMode mode = MinerMode::Optimized;
  /// Aborts tolerated per AU before LivelockError.
  std::size_t maxRetries = 1000;
  /// Exponential back-off between retries of the same AU.
  bool backoff = false;
};

struct MinerStats {
  double wallMs = 0.0;
  std::size_t aborts = 0;
  /// One retry per abort by construction.
  std::size_t retries = 0;
  std::size_t bgVertices = 0;
  std::size_t bgEdges = 0;
  std::size_t concBinSize = 0;
};

/// Output of one concurrent mining run, before block assembly.
struct MinedRun {
  std::unique_ptr<BlockGraph> bg;
  std::vector<AuId> concBin;  // ascending
  /// Commit timestamp of every AU, indexed by auId.
  std::vector<Timestamp> commitTs;
  MinerStats stats;
};

/// Executes every AU exactly once through `stm` with `threads` workers
/// drawing from a shared index. Each aborted attempt is retried at once
/// with a fresh transaction. `stm` must be fresh for this block.
MinedRun concMiner(std::span<const AtomicUnit> aus, Stm& stm, const MinerOptions& options);

/// Packs a finished run into a block. Throws UsageError if the graph still
/// has an insertion in flight.
Block assembleBlock(std::span<const AtomicUnit> aus, std::span<const Value> initialState,
                    const MinedRun& run, const Digest& prevHash, const Stm& stm);

struct MinedBlock {
  Block block;
  MinerStats stats;
};

/// Convenience: fresh STM, concMiner, assembleBlock.
MinedBlock mineBlock(const Workload& w, Protocol protocol, const MinerOptions& options,
                     const Digest& prevHash = kZeroDigest, StmOptions stmOptions = {});

/// Serial baseline: executes the AUs in list order on a plain store.
std::vector<Value> serialMine(std::span<const AtomicUnit> aus, std::span<const Value> initialState);

}  // namespace optsmart
