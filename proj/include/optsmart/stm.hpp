#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <thread>
#include <unordered_map>
#include <vector>

#include "optsmart/history.hpp"
#include "optsmart/types.hpp"

namespace optsmart {

enum class TxnStatus { Live, Committed, Aborted };

struct ReadEntry {
  ObjectId obj;
  Value value;
  /// Writer timestamp of the version that was read.
  Timestamp version;
};

/// A live STM transaction. Confined to one thread at a time.
struct TxnDescriptor {
  Timestamp ts = 0;
  AuId auId = -1;
  std::vector<ReadEntry> readSet;
  std::map<ObjectId, Value> writeSet;
  TxnStatus status = TxnStatus::Live;
};

/// Committed transactions that conflict with `owner`, ascending and unique.
struct ConflictRecord {
  Timestamp owner = 0;
  std::vector<Timestamp> conflicting;
};

struct StmOptions {
  bool recordHistory = false;
  /// Probability of a std::this_thread::yield() at each scheduling point.
  /// Used by stress tests to force interleavings.
  double yieldProbability = 0.0;
};

/// Test-and-test-and-set lock guarding one object record.
class SpinLock {
 public:
  void lock() noexcept {
    while (flag_.exchange(true, std::memory_order_acquire)) {
      while (flag_.load(std::memory_order_relaxed)) std::this_thread::yield();
    }
  }
  void unlock() noexcept { flag_.store(false, std::memory_order_release); }

 private:
  std::atomic<bool> flag_{false};
};

/// Transactional interface shared by BTO and MVTO.
///
/// Writes are buffered in the descriptor and reach shared state only
/// through a successful tryCommit. A read first consults the descriptor's
/// own write buffer.
class Stm {
 public:
  Stm(std::span<const Value> initialState, StmOptions options);
  virtual ~Stm() = default;

  Stm(const Stm&) = delete;
  Stm& operator=(const Stm&) = delete;

  virtual Protocol protocol() const noexcept = 0;

  TxnDescriptor begin(AuId auId);

  /// nullopt means the protocol aborted the transaction.
  std::optional<Value> read(TxnDescriptor& txn, ObjectId obj);
  void write(TxnDescriptor& txn, ObjectId obj, Value value);
  std::optional<ConflictRecord> tryCommit(TxnDescriptor& txn);
  void tryAbort(TxnDescriptor& txn);

  std::size_t objectCount() const noexcept { return objectCount_; }

  /// Latest committed value of every object. Call only when quiescent.
  virtual std::vector<Value> snapshot() const = 0;

  /// AU executed by a committed transaction.
  AuId auIdOf(Timestamp ts) const;

  std::size_t liveTransactions() const noexcept { return live_.load(); }
  Timestamp lastIssuedTs() const noexcept { return nextTs_.load() - 1; }

  History& history() noexcept { return history_; }
  const History& history() const noexcept { return history_; }

 protected:
  virtual std::optional<Value> sharedRead(TxnDescriptor& txn, ObjectId obj) = 0;
  virtual std::optional<ConflictRecord> validateAndCommit(TxnDescriptor& txn) = 0;

  /// Called by protocols inside the commit critical section.
  void noteCommitted(const TxnDescriptor& txn);
  void maybeYield();
  void checkObject(ObjectId obj) const;

  /// Sorted union of the objects in the read and write sets.
  static std::vector<ObjectId> lockOrder(const TxnDescriptor& txn);

  History history_;

 private:
  std::size_t objectCount_;
  StmOptions options_;
  std::atomic<Timestamp> nextTs_{1};
  std::atomic<std::size_t> live_{0};
  SpinLock beginLock_;
  mutable std::mutex commitLogMutex_;
  std::unordered_map<Timestamp, AuId> commitLog_;
};

std::unique_ptr<Stm> makeStm(Protocol protocol, std::span<const Value> initialState,
                             StmOptions options = {});

}  // namespace optsmart
