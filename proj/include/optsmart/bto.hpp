#pragma once

#include <atomic>
#include <vector>

#include "optsmart/stm.hpp"

namespace optsmart {

/// Single-version Basic Timestamp Ordering.
///
/// Read rule: abort if ts < maxWriteTs. Every read re-checks the versions
/// of the transaction's earlier reads so a doomed transaction never sees a
/// torn snapshot. Commit rule: abort if some written object has
/// ts < maxReadTs or ts < maxWriteTs, or some read version was overwritten.
/// maxReadTs advances when the reader commits.
class BtoStm final : public Stm {
 public:
  struct ObjectRecord {
    SpinLock lock;
    Value value = 0;
    std::atomic<Timestamp> maxWriteTs{kInitialTs};
    Timestamp maxReadTs = kInitialTs;
    std::vector<Timestamp> committedWriters;
    std::vector<Timestamp> committedReaders;
  };

  BtoStm(std::span<const Value> initialState, StmOptions options = {});

  Protocol protocol() const noexcept override { return Protocol::Bto; }
  std::vector<Value> snapshot() const override;

  Timestamp maxWriteTs(ObjectId obj) const { return records_.at(obj).maxWriteTs.load(); }
  Timestamp maxReadTs(ObjectId obj) const { return records_.at(obj).maxReadTs; }

 protected:
  std::optional<Value> sharedRead(TxnDescriptor& txn, ObjectId obj) override;
  std::optional<ConflictRecord> validateAndCommit(TxnDescriptor& txn) override;

 private:
  bool readsStillValid(const TxnDescriptor& txn) const;

  std::vector<ObjectRecord> records_;
};

}  // namespace optsmart
