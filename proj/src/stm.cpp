#include "optsmart/stm.hpp"

#include <algorithm>
#include <cstring>
#include <random>
#include <string>

#include "optsmart/bto.hpp"
#include "optsmart/errors.hpp"
#include "optsmart/mvto.hpp"

namespace optsmart {

const char* toString(Protocol p) { return p == Protocol::Bto ? "bto" : "mvto"; }
const char* toString(MinerMode m) { return m == MinerMode::Default ? "default" : "optimized"; }

Protocol parseProtocol(const char* text) {
  if (std::strcmp(text, "bto") == 0) return Protocol::Bto;
  if (std::strcmp(text, "mvto") == 0) return Protocol::Mvto;
  throw InputError(std::string("unknown protocol: ") + text);
}

MinerMode parseMinerMode(const char* text) {
  if (std::strcmp(text, "default") == 0) return MinerMode::Default;
  if (std::strcmp(text, "optimized") == 0) return MinerMode::Optimized;
  throw InputError(std::string("unknown mode: ") + text);
}

Stm::Stm(std::span<const Value> initialState, StmOptions options)
    : history_(options.recordHistory), objectCount_(initialState.size()), options_(options) {}

TxnDescriptor Stm::begin(AuId auId) {
  TxnDescriptor txn;
  txn.auId = auId;
  if (history_.enabled()) {
    // ts and the BEGIN sequence number are issued together so that
    // real-time order between transactions implies timestamp order.
    std::lock_guard lock(beginLock_);
    txn.ts = nextTs_.fetch_add(1);
    history_.record(txn.ts, EventKind::Begin);
  } else {
    txn.ts = nextTs_.fetch_add(1);
  }
  live_.fetch_add(1);
  return txn;
}

void Stm::checkObject(ObjectId obj) const {
  if (obj < 0 || static_cast<std::size_t>(obj) >= objectCount_)
    throw InputError("unknown object id " + std::to_string(obj));
}

std::optional<Value> Stm::read(TxnDescriptor& txn, ObjectId obj) {
  if (txn.status != TxnStatus::Live) throw UsageError("read on a completed transaction");
  checkObject(obj);
  if (auto own = txn.writeSet.find(obj); own != txn.writeSet.end()) {
    history_.record(txn.ts, EventKind::Read, obj, own->second, Outcome::Ok);
    return own->second;
  }
  maybeYield();
  auto v = sharedRead(txn, obj);
  if (!v) {
    txn.status = TxnStatus::Aborted;
    live_.fetch_sub(1);
  }
  return v;
}

void Stm::write(TxnDescriptor& txn, ObjectId obj, Value value) {
  if (txn.status != TxnStatus::Live) throw UsageError("write on a completed transaction");
  checkObject(obj);
  txn.writeSet[obj] = value;
  history_.record(txn.ts, EventKind::Write, obj, value);
}

std::optional<ConflictRecord> Stm::tryCommit(TxnDescriptor& txn) {
  if (txn.status != TxnStatus::Live) throw UsageError("tryCommit on a completed transaction");
  maybeYield();
  auto rec = validateAndCommit(txn);
  txn.status = rec ? TxnStatus::Committed : TxnStatus::Aborted;
  live_.fetch_sub(1);
  return rec;
}

void Stm::tryAbort(TxnDescriptor& txn) {
  if (txn.status != TxnStatus::Live) throw UsageError("tryAbort on a completed transaction");
  txn.status = TxnStatus::Aborted;
  live_.fetch_sub(1);
  history_.record(txn.ts, EventKind::TryAbort, std::nullopt, std::nullopt, Outcome::Abort);
}

AuId Stm::auIdOf(Timestamp ts) const {
  std::lock_guard lock(commitLogMutex_);
  auto it = commitLog_.find(ts);
  if (it == commitLog_.end())
    throw UsageError("timestamp " + std::to_string(ts) + " is not a committed transaction");
  return it->second;
}

void Stm::noteCommitted(const TxnDescriptor& txn) {
  std::lock_guard lock(commitLogMutex_);
  commitLog_.emplace(txn.ts, txn.auId);
}

void Stm::maybeYield() {
  if (options_.yieldProbability <= 0.0) return;
  thread_local std::minstd_rand rng{std::random_device{}()};
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (coin(rng) < options_.yieldProbability) std::this_thread::yield();
}

std::vector<ObjectId> Stm::lockOrder(const TxnDescriptor& txn) {
  std::vector<ObjectId> objs;
  objs.reserve(txn.readSet.size() + txn.writeSet.size());
  for (const auto& r : txn.readSet) objs.push_back(r.obj);
  for (const auto& [obj, _] : txn.writeSet) objs.push_back(obj);
  std::sort(objs.begin(), objs.end());
  objs.erase(std::unique(objs.begin(), objs.end()), objs.end());
  return objs;
}

std::unique_ptr<Stm> makeStm(Protocol protocol, std::span<const Value> initialState,
                             StmOptions options) {
  if (protocol == Protocol::Bto) return std::make_unique<BtoStm>(initialState, options);
  return std::make_unique<MvtoStm>(initialState, options);
}

}  // namespace optsmart
