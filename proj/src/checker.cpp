#include "optsmart/checker.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>
#include <unordered_map>

#include "optsmart/errors.hpp"

namespace optsmart {

std::vector<TxnInfo> buildTransactions(std::span<const HistoryEvent> events) {
  std::vector<TxnInfo> txns;
  std::unordered_map<Timestamp, std::size_t> index;
  std::uint64_t lastSeq = 0;
  for (std::size_t k = 0; k < events.size(); ++k) {
    const HistoryEvent& e = events[k];
    const std::size_t line = k + 1;
    if (k > 0 && e.seq <= lastSeq) throw ParseError(line, "sequence numbers must increase");
    lastSeq = e.seq;
    if (e.kind == EventKind::Begin) {
      if (!index.emplace(e.ts, txns.size()).second)
        throw ParseError(line, "transaction " + std::to_string(e.ts) + " begins twice");
      txns.push_back(TxnInfo{e.ts, TxnOutcome::Live, e.seq, std::nullopt, {}, {}});
      continue;
    }
    auto it = index.find(e.ts);
    if (it == index.end()) throw ParseError(line, "event before BEGIN of " + std::to_string(e.ts));
    TxnInfo& t = txns[it->second];
    if (t.endSeq) throw ParseError(line, "event after transaction " + std::to_string(e.ts) + " ended");
    auto terminate = [&](TxnOutcome o) {
      t.outcome = o;
      t.endSeq = e.seq;
    };
    switch (e.kind) {
      case EventKind::Read:
        if (!e.obj) throw ParseError(line, "read without object");
        if (e.outcome == Outcome::Ok) {
          if (!e.val) throw ParseError(line, "successful read without value");
          t.ops.push_back({e.seq, true, *e.obj, *e.val, t.writes.contains(*e.obj)});
        } else if (e.outcome == Outcome::Abort) {
          terminate(TxnOutcome::Aborted);
        } else {
          throw ParseError(line, "read needs outcome ok or A");
        }
        break;
      case EventKind::Write:
        if (!e.obj || !e.val) throw ParseError(line, "write needs object and value");
        t.ops.push_back({e.seq, false, *e.obj, *e.val, false});
        t.writes[*e.obj] = *e.val;
        break;
      case EventKind::TryCommit:
        if (e.outcome == Outcome::Commit)
          terminate(TxnOutcome::Committed);
        else if (e.outcome == Outcome::Abort)
          terminate(TxnOutcome::Aborted);
        else
          throw ParseError(line, "tryC needs outcome C or A");
        break;
      case EventKind::TryAbort: terminate(TxnOutcome::Aborted); break;
      case EventKind::Begin: break;
    }
  }
  return txns;
}

namespace {

using Graph = std::vector<std::vector<std::size_t>>;

Value initialValue(std::span<const Value> initial, ObjectId obj) {
  return obj >= 0 && static_cast<std::size_t>(obj) < initial.size()
             ? initial[static_cast<std::size_t>(obj)]
             : 0;
}

/// Store seen by a serial order: initial values overlaid with commits.
struct SerialStore {
  std::span<const Value> initial;
  std::map<ObjectId, Value> written;
  Value get(ObjectId o) const {
    auto it = written.find(o);
    return it == written.end() ? initialValue(initial, o) : it->second;
  }
};

/// Would `t` read exactly what it read in the history if it ran next?
bool readsLegal(const TxnInfo& t, const SerialStore& store) {
  std::map<ObjectId, Value> own;
  for (const auto& op : t.ops) {
    if (!op.isRead) {
      own[op.obj] = op.val;
      continue;
    }
    const Value expected = op.local ? own.at(op.obj) : store.get(op.obj);
    if (op.val != expected) return false;
  }
  return true;
}

void apply(const TxnInfo& t, SerialStore& store) {
  if (t.outcome != TxnOutcome::Committed) return;
  for (const auto& [o, v] : t.writes) store.written[o] = v;
}

/// Conflict edges between distinct transactions: a successful non-local
/// read or a commit-time write, ordered by sequence number, against a
/// later access to the same object where at least one side writes.
/// Only committed writes count; reads of non-committed transactions are
/// included when `allReads` is set.
void addConflictEdges(const std::vector<TxnInfo>& txns, bool allReads, Graph& g) {
  struct Access {
    std::uint64_t seq;
    std::size_t txn;
    bool write;
  };
  std::map<ObjectId, std::vector<Access>> byObject;
  for (std::size_t i = 0; i < txns.size(); ++i) {
    const TxnInfo& t = txns[i];
    const bool committed = t.outcome == TxnOutcome::Committed;
    if (committed || allReads)
      for (const auto& op : t.ops)
        if (op.isRead && !op.local) byObject[op.obj].push_back({op.seq, i, false});
    if (committed)
      for (const auto& [o, v] : t.writes) byObject[o].push_back({*t.endSeq, i, true});
  }
  for (auto& [obj, list] : byObject) {
    std::sort(list.begin(), list.end(), [](const Access& a, const Access& b) { return a.seq < b.seq; });
    for (std::size_t a = 0; a < list.size(); ++a)
      for (std::size_t b = a + 1; b < list.size(); ++b)
        if (list[a].txn != list[b].txn && (list[a].write || list[b].write))
          g[list[a].txn].push_back(list[b].txn);
  }
}

void addRealTimeEdges(const std::vector<TxnInfo>& txns, Graph& g) {
  for (std::size_t i = 0; i < txns.size(); ++i)
    for (std::size_t j = 0; j < txns.size(); ++j)
      if (i != j && txns[i].endSeq && *txns[i].endSeq < txns[j].firstSeq) g[i].push_back(j);
}

/// Indices along one cycle, or empty if the graph is acyclic.
std::vector<std::size_t> findCycle(Graph g) {
  for (auto& adj : g) {
    std::sort(adj.begin(), adj.end());
    adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
  }
  enum : char { White, Grey, Black };
  std::vector<char> colour(g.size(), White);
  std::vector<std::size_t> parent(g.size(), 0);
  for (std::size_t root = 0; root < g.size(); ++root) {
    if (colour[root] != White) continue;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
    colour[root] = Grey;
    while (!stack.empty()) {
      auto& [u, next] = stack.back();
      if (next == g[u].size()) {
        colour[u] = Black;
        stack.pop_back();
        continue;
      }
      const std::size_t w = g[u][next++];
      if (colour[w] == Grey) {
        std::vector<std::size_t> cycle{w};
        for (std::size_t x = u; x != w; x = parent[x]) cycle.push_back(x);
        std::reverse(cycle.begin() + 1, cycle.end());
        return cycle;
      }
      if (colour[w] == White) {
        colour[w] = Grey;
        parent[w] = u;
        stack.emplace_back(w, 0);
      }
    }
  }
  return {};
}

CheckResult fromCycle(const std::vector<TxnInfo>& txns, const std::vector<std::size_t>& cycle,
                      const char* what) {
  CheckResult r;
  r.pass = cycle.empty();
  if (!r.pass) {
    std::ostringstream d;
    d << what << " cycle:";
    for (auto i : cycle) {
      r.cycle.push_back(txns[i].ts);
      d << ' ' << txns[i].ts;
    }
    r.detail = d.str();
  }
  return r;
}

std::string describeOrder(const std::vector<TxnInfo>& txns, const std::vector<std::size_t>& order) {
  std::ostringstream d;
  d << "witness:";
  for (auto i : order) d << ' ' << txns[i].ts;
  return d.str();
}

/// Depth-first search for a legal order in which every transaction comes
/// after all of its `preds`.
CheckResult searchLegalOrder(const std::vector<TxnInfo>& txns, const std::vector<std::uint32_t>& preds,
                             std::span<const Value> initial) {
  const std::size_t n = txns.size();
  std::vector<std::size_t> order;
  std::function<bool(std::uint32_t, const SerialStore&)> dfs = [&](std::uint32_t placed,
                                                                   const SerialStore& store) {
    if (order.size() == n) return true;
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint32_t bit = 1u << i;
      if ((placed & bit) || (preds[i] & ~placed)) continue;
      if (!readsLegal(txns[i], store)) continue;
      SerialStore next = store;
      apply(txns[i], next);
      order.push_back(i);
      if (dfs(placed | bit, next)) return true;
      order.pop_back();
    }
    return false;
  };
  CheckResult r;
  r.pass = dfs(0, SerialStore{initial, {}});
  r.detail = r.pass ? describeOrder(txns, order) : "no legal order exists";
  return r;
}

std::vector<std::uint32_t> predecessorMasks(const Graph& g) {
  std::vector<std::uint32_t> preds(g.size(), 0);
  for (std::size_t u = 0; u < g.size(); ++u)
    for (std::size_t w : g[u])
      if (u != w) preds[w] |= 1u << u;
  return preds;
}

void requireSmall(std::size_t n, const char* what) {
  if (n > kBruteForceLimit)
    throw SizeError(std::string(what) + " search over " + std::to_string(n) +
                    " transactions exceeds the limit of " + std::to_string(kBruteForceLimit));
}

}  // namespace

CheckResult checkCSR(std::span<const HistoryEvent> events) {
  auto all = buildTransactions(events);
  std::vector<TxnInfo> committed;
  for (auto& t : all)
    if (t.outcome == TxnOutcome::Committed) committed.push_back(std::move(t));
  Graph g(committed.size());
  addConflictEdges(committed, false, g);
  return fromCycle(committed, findCycle(std::move(g)), "conflict");
}

CheckResult checkMVSR(std::span<const HistoryEvent> events, std::span<const Value> initial) {
  auto all = buildTransactions(events);
  std::vector<TxnInfo> committed;
  for (auto& t : all)
    if (t.outcome == TxnOutcome::Committed) committed.push_back(std::move(t));
  requireSmall(committed.size(), "MVSR");
  return searchLegalOrder(committed, std::vector<std::uint32_t>(committed.size(), 0), initial);
}

CheckResult checkOpacity(std::span<const HistoryEvent> events, std::span<const Value> initial) {
  const auto txns = buildTransactions(events);
  requireSmall(txns.size(), "opacity");
  Graph g(txns.size());
  addRealTimeEdges(txns, g);
  return searchLegalOrder(txns, predecessorMasks(g), initial);
}

CheckResult checkCoOpacity(std::span<const HistoryEvent> events, std::span<const Value> initial) {
  const auto txns = buildTransactions(events);
  requireSmall(txns.size(), "co-opacity");
  Graph g(txns.size());
  addRealTimeEdges(txns, g);
  addConflictEdges(txns, true, g);
  return searchLegalOrder(txns, predecessorMasks(g), initial);
}

CheckResult checkCoOpacityGraph(std::span<const HistoryEvent> events, std::span<const Value> initial) {
  const auto txns = buildTransactions(events);
  // Committed writes per object in commit order.
  std::map<ObjectId, std::vector<std::pair<std::uint64_t, Value>>> commits;
  for (const auto& t : txns)
    if (t.outcome == TxnOutcome::Committed)
      for (const auto& [o, v] : t.writes) commits[o].emplace_back(*t.endSeq, v);
  for (auto& [o, list] : commits) std::sort(list.begin(), list.end());

  for (const auto& t : txns) {
    std::map<ObjectId, Value> own;
    for (const auto& op : t.ops) {
      if (!op.isRead) {
        own[op.obj] = op.val;
        continue;
      }
      Value expected = 0;
      if (op.local) {
        expected = own.at(op.obj);
      } else {
        expected = initialValue(initial, op.obj);
        auto it = commits.find(op.obj);
        if (it != commits.end()) {
          auto after = std::lower_bound(it->second.begin(), it->second.end(),
                                        std::make_pair(op.seq, std::numeric_limits<Value>::min()));
          if (after != it->second.begin()) expected = std::prev(after)->second;
        }
      }
      if (op.val != expected) {
        CheckResult r;
        r.detail = "transaction " + std::to_string(t.ts) + " read " + std::to_string(op.val) +
                   " from object " + std::to_string(op.obj) + ", latest commit holds " +
                   std::to_string(expected);
        return r;
      }
    }
  }
  Graph g(txns.size());
  addRealTimeEdges(txns, g);
  addConflictEdges(txns, true, g);
  return fromCycle(txns, findCycle(std::move(g)), "real-time/conflict");
}

CheckResult checkTimestampWitness(std::span<const HistoryEvent> events,
                                  std::span<const Value> initial) {
  const auto txns = buildTransactions(events);
  std::vector<std::size_t> order(txns.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return txns[a].ts < txns[b].ts; });

  CheckResult r;
  for (std::size_t i = 0; i < txns.size(); ++i)
    for (std::size_t j = 0; j < txns.size(); ++j)
      if (txns[i].endSeq && *txns[i].endSeq < txns[j].firstSeq && txns[i].ts > txns[j].ts) {
        r.detail = "transaction " + std::to_string(txns[i].ts) + " ended before " +
                   std::to_string(txns[j].ts) + " began";
        return r;
      }
  SerialStore store{initial, {}};
  for (auto i : order) {
    if (!readsLegal(txns[i], store)) {
      r.detail = "transaction " + std::to_string(txns[i].ts) + " reads are illegal in ts order";
      return r;
    }
    apply(txns[i], store);
  }
  r.pass = true;
  r.detail = describeOrder(txns, order);
  return r;
}

std::vector<HistoryWindow> quiescentWindows(std::span<const HistoryEvent> events,
                                            std::span<const Value> initial, std::size_t maxTxns) {
  const auto txns = buildTransactions(events);
  std::unordered_map<Timestamp, const TxnInfo*> byTs;
  for (const auto& t : txns) byTs[t.ts] = &t;

  // Segment boundaries: positions right after an event that leaves no
  // transaction open.
  struct Segment {
    std::size_t begin, end, txns;
  };
  std::vector<Segment> segments;
  std::size_t open = 0, begins = 0, start = 0;
  for (std::size_t k = 0; k < events.size(); ++k) {
    const auto& e = events[k];
    if (e.kind == EventKind::Begin) {
      ++open;
      ++begins;
    } else if (byTs.at(e.ts)->endSeq == e.seq) {
      --open;
    }
    if (open == 0) {
      segments.push_back({start, k + 1, begins});
      start = k + 1;
      begins = 0;
    }
  }
  if (start < events.size()) segments.push_back({start, events.size(), begins});

  std::vector<HistoryWindow> windows;
  for (std::size_t s = 0; s < segments.size();) {
    std::size_t end = s + 1, count = segments[s].txns;
    while (end < segments.size() && count + segments[end].txns <= maxTxns) count += segments[end++].txns;

    HistoryWindow w;
    w.txnCount = count;
    w.events.assign(events.begin() + static_cast<std::ptrdiff_t>(segments[s].begin),
                    events.begin() + static_cast<std::ptrdiff_t>(segments[end - 1].end));
    // Committed state at the cut: replay earlier commits in ts order.
    const std::uint64_t cutSeq = w.events.empty() ? 0 : w.events.front().seq;
    std::vector<const TxnInfo*> earlier;
    for (const auto& t : txns)
      if (t.outcome == TxnOutcome::Committed && *t.endSeq < cutSeq) earlier.push_back(&t);
    std::sort(earlier.begin(), earlier.end(), [](auto a, auto b) { return a->ts < b->ts; });
    SerialStore store{initial, {}};
    for (auto* t : earlier) apply(*t, store);
    ObjectId maxObj = static_cast<ObjectId>(initial.size()) - 1;
    for (const auto& [o, v] : store.written) maxObj = std::max(maxObj, o);
    for (ObjectId o = 0; o <= maxObj; ++o) w.initial.push_back(store.get(o));
    windows.push_back(std::move(w));
    s = end;
  }
  return windows;
}

std::vector<std::pair<Timestamp, Timestamp>> missingConflictEdges(
    std::span<const HistoryEvent> events, const SerializedBG& bg) {
  auto all = buildTransactions(events);
  std::vector<TxnInfo> committed;
  for (auto& t : all)
    if (t.outcome == TxnOutcome::Committed) committed.push_back(std::move(t));
  Graph g(committed.size());
  addConflictEdges(committed, false, g);

  std::set<std::pair<Timestamp, Timestamp>> edges;
  for (const auto& e : bg.edges) edges.emplace(e.from, e.to);
  std::set<std::pair<Timestamp, Timestamp>> missing;
  for (std::size_t u = 0; u < g.size(); ++u)
    for (std::size_t w : g[u]) {
      const auto key = std::minmax(committed[u].ts, committed[w].ts);
      if (!edges.contains(key)) missing.insert(key);
    }
  return {missing.begin(), missing.end()};
}

CheckResult checkMinerValidatorEquivalence(const Block& block, std::span<const AuId> order) {
  const std::size_t n = block.aus.size();
  std::vector<std::ptrdiff_t> position(n, -1);
  CheckResult r;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const AuId id = order[k];
    if (id < 0 || static_cast<std::size_t>(id) >= n)
      throw InputError("order references unknown AU " + std::to_string(id));
    if (position[static_cast<std::size_t>(id)] >= 0) {
      r.detail = "AU " + std::to_string(id) + " appears twice";
      return r;
    }
    position[static_cast<std::size_t>(id)] = static_cast<std::ptrdiff_t>(k);
  }
  if (order.size() != n) {
    r.detail = "order covers " + std::to_string(order.size()) + " of " + std::to_string(n) + " AUs";
    return r;
  }
  std::unordered_map<Timestamp, AuId> auOf;
  for (const auto& v : block.bg.vertices) auOf[v.ts] = v.auId;
  for (const auto& e : block.bg.edges) {
    const AuId from = auOf.at(e.from), to = auOf.at(e.to);
    if (position[static_cast<std::size_t>(from)] > position[static_cast<std::size_t>(to)]) {
      r.detail = "edge " + std::to_string(e.from) + "->" + std::to_string(e.to) + " violated";
      return r;
    }
  }
  std::vector<Value> store = block.initialState;
  for (AuId id : order) executeSerial(block.aus[static_cast<std::size_t>(id)], store);
  if (store != block.finalState) {
    r.detail = "serial replay does not reproduce the final state";
    return r;
  }
  r.pass = true;
  return r;
}

}  // namespace optsmart
