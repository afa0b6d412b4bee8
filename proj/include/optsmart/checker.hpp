#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "optsmart/block.hpp"
#include "optsmart/history.hpp"

namespace optsmart {

enum class TxnOutcome { Committed, Aborted, Live };

/// One transaction reconstructed from a history.
struct TxnInfo {
  struct Access {
    std::uint64_t seq = 0;
    bool isRead = false;
    ObjectId obj = 0;
    Value val = 0;
    /// A read of an object the transaction wrote earlier.
    bool local = false;
  };

  Timestamp ts = 0;
  TxnOutcome outcome = TxnOutcome::Live;
  std::uint64_t firstSeq = 0;
  /// Sequence number of the terminating event, if any.
  std::optional<std::uint64_t> endSeq;
  std::vector<Access> ops;
  /// Last value written per object.
  std::map<ObjectId, Value> writes;
};

/// Groups events by timestamp, ordered by first event. Throws ParseError
/// (line = 1-based event position) for malformed histories.
std::vector<TxnInfo> buildTransactions(std::span<const HistoryEvent> events);

struct CheckResult {
  bool pass = false;
  /// Timestamps along a cycle when a graph test fails.
  std::vector<Timestamp> cycle;
  std::string detail;
  explicit operator bool() const noexcept { return pass; }
};

/// Conflict-graph test over committed transactions.
CheckResult checkCSR(std::span<const HistoryEvent> events);

/// Largest transaction count accepted by the permutation searches.
inline constexpr std::size_t kBruteForceLimit = 8;

/// Some order of the committed transactions is legal. SizeError beyond the limit.
CheckResult checkMVSR(std::span<const HistoryEvent> events, std::span<const Value> initial = {});

/// Some legal order of all transactions respects real-time order. Live
/// transactions count as aborted.
CheckResult checkOpacity(std::span<const HistoryEvent> events, std::span<const Value> initial = {});

/// Opacity whose witness also preserves the conflict order.
CheckResult checkCoOpacity(std::span<const HistoryEvent> events, std::span<const Value> initial = {});

/// Polynomial co-opacity test: every successful read returns the value of
/// the latest commit before it, and real-time plus conflict order is acyclic.
CheckResult checkCoOpacityGraph(std::span<const HistoryEvent> events,
                                std::span<const Value> initial = {});

/// The timestamp order of all transactions is a legal serialization that
/// respects real-time order: the witness MVTO promises.
CheckResult checkTimestampWitness(std::span<const HistoryEvent> events,
                                  std::span<const Value> initial = {});

/// A run of events between two quiescent points (no live transaction)
/// together with the committed state at its start.
struct HistoryWindow {
  std::vector<HistoryEvent> events;
  std::vector<Value> initial;
  std::size_t txnCount = 0;
};

/// Greedily packs quiescent segments into windows of at most `maxTxns`
/// transactions. A single segment above the bound becomes its own window.
std::vector<HistoryWindow> quiescentWindows(std::span<const HistoryEvent> events,
                                            std::span<const Value> initial,
                                            std::size_t maxTxns = kBruteForceLimit);

/// Committed conflicting pairs (lower ts first) with no graph edge between them.
std::vector<std::pair<Timestamp, Timestamp>> missingConflictEdges(
    std::span<const HistoryEvent> events, const SerializedBG& bg);

/// `order` must be a permutation of the block's AUs that respects every
/// graph edge, and replaying it serially must give the block's final state.
/// Throws InputError if `order` names an unknown AU.
CheckResult checkMinerValidatorEquivalence(const Block& block, std::span<const AuId> order);

}  // namespace optsmart
