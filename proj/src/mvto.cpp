#include "optsmart/mvto.hpp"

#include <algorithm>

#include "optsmart/errors.hpp"

namespace optsmart {

MvtoStm::MvtoStm(std::span<const Value> initialState, StmOptions options)
    : Stm(initialState, options), records_(initialState.size()) {
  for (std::size_t i = 0; i < initialState.size(); ++i)
    records_[i].versions.push_back(Version{kInitialTs, initialState[i], {}, {}});
}

std::vector<Value> MvtoStm::snapshot() const {
  std::vector<Value> out;
  out.reserve(records_.size());
  for (const auto& r : records_) out.push_back(r.versions.back().value);
  return out;
}

std::size_t MvtoStm::visibleIndex(const std::vector<Version>& versions, Timestamp ts) {
  auto it = std::lower_bound(versions.begin(), versions.end(), ts,
                             [](const Version& v, Timestamp t) { return v.writerTs < t; });
  return static_cast<std::size_t>(it - versions.begin()) - 1;
}

std::optional<Value> MvtoStm::sharedRead(TxnDescriptor& txn, ObjectId obj) {
  auto& rec = records_[obj];
  std::lock_guard lock(rec.lock);
  auto& version = rec.versions[visibleIndex(rec.versions, txn.ts)];
  if (std::find(version.readList.begin(), version.readList.end(), txn.ts) ==
      version.readList.end())
    version.readList.push_back(txn.ts);
  history_.record(txn.ts, EventKind::Read, obj, version.value, Outcome::Ok);
  auto seen = std::find_if(txn.readSet.begin(), txn.readSet.end(),
                           [obj](const ReadEntry& r) { return r.obj == obj; });
  if (seen == txn.readSet.end()) txn.readSet.push_back({obj, version.value, version.writerTs});
  return version.value;
}

std::optional<ConflictRecord> MvtoStm::validateAndCommit(TxnDescriptor& txn) {
  const auto objs = lockOrder(txn);
  for (ObjectId o : objs) records_[o].lock.lock();
  auto unlockAll = [&] {
    for (auto it = objs.rbegin(); it != objs.rend(); ++it) records_[*it].lock.unlock();
  };

  bool ok = true;
  for (const auto& r : txn.readSet) {
    const auto& versions = records_[r.obj].versions;
    if (versions[visibleIndex(versions, txn.ts)].writerTs != r.version) ok = false;
  }
  for (auto it = txn.writeSet.begin(); ok && it != txn.writeSet.end(); ++it) {
    for (const auto& v : records_[it->first].versions) {
      if (v.writerTs >= txn.ts) break;
      if (std::any_of(v.readList.begin(), v.readList.end(),
                      [&](Timestamp r) { return r > txn.ts; })) {
        ok = false;
        break;
      }
    }
  }
  if (!ok) {
    history_.record(txn.ts, EventKind::TryCommit, std::nullopt, std::nullopt, Outcome::Abort);
    unlockAll();
    return std::nullopt;
  }

  ConflictRecord conflicts{txn.ts, {}};
  for (ObjectId o : objs) {
    const bool writes = txn.writeSet.contains(o);
    for (const auto& v : records_[o].versions) {
      if (v.writerTs != kInitialTs) conflicts.conflicting.push_back(v.writerTs);
      if (writes)
        conflicts.conflicting.insert(conflicts.conflicting.end(), v.committedReaders.begin(),
                                     v.committedReaders.end());
    }
  }

  for (const auto& r : txn.readSet) {
    auto& versions = records_[r.obj].versions;
    versions[visibleIndex(versions, txn.ts)].committedReaders.push_back(txn.ts);
  }
  for (const auto& [o, value] : txn.writeSet) {
    auto& versions = records_[o].versions;
    auto pos = versions.begin() + static_cast<std::ptrdiff_t>(visibleIndex(versions, txn.ts)) + 1;
    versions.insert(pos, Version{txn.ts, value, {}, {}});
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

std::size_t MvtoStm::pruneVersions() {
  if (liveTransactions() != 0) throw UsageError("pruneVersions called while transactions are live");
  std::size_t pruned = 0;
  for (auto& rec : records_) {
    std::lock_guard lock(rec.lock);
    pruned += rec.versions.size() - 1;
    Version base{kInitialTs, rec.versions.back().value, {}, {}};
    rec.versions.clear();
    rec.versions.push_back(std::move(base));
  }
  return pruned;
}

}  // namespace optsmart
