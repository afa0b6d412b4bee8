#include "optsmart/bto.hpp"

#include <algorithm>

namespace optsmart {

BtoStm::BtoStm(std::span<const Value> initialState, StmOptions options)
    : Stm(initialState, options), records_(initialState.size()) {
  for (std::size_t i = 0; i < initialState.size(); ++i) records_[i].value = initialState[i];
}

std::vector<Value> BtoStm::snapshot() const {
  std::vector<Value> out;
  out.reserve(records_.size());
  for (const auto& r : records_) out.push_back(r.value);
  return out;
}

bool BtoStm::readsStillValid(const TxnDescriptor& txn) const {
  for (const auto& r : txn.readSet)
    if (records_[r.obj].maxWriteTs.load(std::memory_order_acquire) != r.version) return false;
  return true;
}

std::optional<Value> BtoStm::sharedRead(TxnDescriptor& txn, ObjectId obj) {
  auto& rec = records_[obj];
  std::lock_guard lock(rec.lock);
  const Timestamp version = rec.maxWriteTs.load(std::memory_order_relaxed);
  // A committer installs all of its writes before releasing any lock, so
  // holding this lock makes the atomic checks below a consistent cut.
  if (txn.ts < version || !readsStillValid(txn)) {
    history_.record(txn.ts, EventKind::Read, obj, std::nullopt, Outcome::Abort);
    return std::nullopt;
  }
  const Value v = rec.value;
  history_.record(txn.ts, EventKind::Read, obj, v, Outcome::Ok);
  auto seen = std::find_if(txn.readSet.begin(), txn.readSet.end(),
                           [obj](const ReadEntry& r) { return r.obj == obj; });
  if (seen == txn.readSet.end()) txn.readSet.push_back({obj, v, version});
  return v;
}

std::optional<ConflictRecord> BtoStm::validateAndCommit(TxnDescriptor& txn) {
  const auto objs = lockOrder(txn);
  for (ObjectId o : objs) records_[o].lock.lock();
  auto unlockAll = [&] {
    for (auto it = objs.rbegin(); it != objs.rend(); ++it) records_[*it].lock.unlock();
  };

  bool ok = readsStillValid(txn);
  for (auto it = txn.writeSet.begin(); ok && it != txn.writeSet.end(); ++it) {
    const auto& rec = records_[it->first];
    if (txn.ts < rec.maxReadTs || txn.ts < rec.maxWriteTs.load(std::memory_order_relaxed))
      ok = false;
  }
  if (!ok) {
    history_.record(txn.ts, EventKind::TryCommit, std::nullopt, std::nullopt, Outcome::Abort);
    unlockAll();
    return std::nullopt;
  }

  ConflictRecord conflicts{txn.ts, {}};
  for (ObjectId o : objs) {
    const auto& rec = records_[o];
    conflicts.conflicting.insert(conflicts.conflicting.end(), rec.committedWriters.begin(),
                                 rec.committedWriters.end());
    if (txn.writeSet.contains(o))
      conflicts.conflicting.insert(conflicts.conflicting.end(), rec.committedReaders.begin(),
                                   rec.committedReaders.end());
  }

  for (const auto& [o, v] : txn.writeSet) {
    auto& rec = records_[o];
    rec.value = v;
    rec.maxWriteTs.store(txn.ts, std::memory_order_release);
    rec.committedWriters.push_back(txn.ts);
  }
  for (const auto& r : txn.readSet) {
    auto& rec = records_[r.obj];
    rec.maxReadTs = std::max(rec.maxReadTs, txn.ts);
    rec.committedReaders.push_back(txn.ts);
  }
  noteCommitted(txn);
  history_.record(txn.ts, EventKind::TryCommit, std::nullopt, std::nullopt, Outcome::Commit);
  unlockAll();

  auto& c = conflicts.conflicting;
  std::sort(c.begin(), c.end());
  c.erase(std::unique(c.begin(), c.end()), c.end());
  std::erase(c, txn.ts);
  return conflicts;
}

}  // namespace optsmart
