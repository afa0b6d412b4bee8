#pragma once

#include <vector>

#include "optsmart/stm.hpp"

namespace optsmart {

/// Multi-Version Timestamp Ordering.
///
/// A read returns the version with the largest writer timestamp below the
/// reader's and never aborts. A commit writing x aborts if some version of
/// x older than the writer was read by a transaction younger than the writer.
class MvtoStm final : public Stm {
 public:
  struct Version {
    Timestamp writerTs = kInitialTs;
    Value value = 0;
    /// Every reader registered on this version, committed or not.
    std::vector<Timestamp> readList;
    /// Readers that went on to commit; source of r-w conflicts.
    std::vector<Timestamp> committedReaders;
  };

  struct ObjectRecord {
    SpinLock lock;
    /// Sorted by writerTs, never empty (T0 or the pruned baseline first).
    std::vector<Version> versions;
  };

  MvtoStm(std::span<const Value> initialState, StmOptions options = {});

  Protocol protocol() const noexcept override { return Protocol::Mvto; }
  std::vector<Value> snapshot() const override;

  /// Collapses every object to its latest version, relabelled as T0.
  /// Returns the number of versions dropped. Throws UsageError mid-block.
  std::size_t pruneVersions();

  std::size_t versionCount(ObjectId obj) const { return records_.at(obj).versions.size(); }
  const std::vector<Version>& versions(ObjectId obj) const { return records_.at(obj).versions; }

 protected:
  std::optional<Value> sharedRead(TxnDescriptor& txn, ObjectId obj) override;
  std::optional<ConflictRecord> validateAndCommit(TxnDescriptor& txn) override;

 private:
  /// Index of the version with the largest writerTs < ts.
  static std::size_t visibleIndex(const std::vector<Version>& versions, Timestamp ts);

  std::vector<ObjectRecord> records_;
};

}  // namespace optsmart
