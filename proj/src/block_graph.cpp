#include "optsmart/block_graph.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

#include "optsmart/errors.hpp"

namespace optsmart {

struct BlockGraph::InFlight {
  explicit InFlight(std::atomic<std::size_t>& c) : counter(c) { counter.fetch_add(1); }
  ~InFlight() { counter.fetch_sub(1); }
  std::atomic<std::size_t>& counter;
};

BlockGraph::Vertex::Vertex(Timestamp ts, AuId auId)
    : ts(ts), auId(auId), edgeHead(kMinusInfinity, nullptr), edgeTail(kPlusInfinity, nullptr) {
  edgeHead.next.store(&edgeTail, std::memory_order_relaxed);
}

BlockGraph::BlockGraph()
    : head_(std::make_unique<Vertex>(kMinusInfinity, -1)),
      tail_(std::make_unique<Vertex>(kPlusInfinity, -1)) {
  head_->next.store(tail_.get(), std::memory_order_relaxed);
}

BlockGraph::~BlockGraph() {
  Vertex* v = head_->next.load(std::memory_order_relaxed);
  while (v != tail_.get()) {
    Edge* e = v->edgeHead.next.load(std::memory_order_relaxed);
    while (e != &v->edgeTail) {
      Edge* nextEdge = e->next.load(std::memory_order_relaxed);
      delete e;
      e = nextEdge;
    }
    Vertex* nextVertex = v->next.load(std::memory_order_relaxed);
    delete v;
    v = nextVertex;
  }
}

BlockGraph::Insert BlockGraph::addVertex(Timestamp ts, AuId auId) {
  if (ts < 0) throw InputError("vertex timestamp must be non-negative");
  InFlight guard(inFlight_);
  std::unique_ptr<Vertex> fresh;
  Vertex* pred = head_.get();
  while (true) {
    Vertex* curr = pred->next.load(std::memory_order_acquire);
    while (curr->ts < ts) {
      pred = curr;
      curr = curr->next.load(std::memory_order_acquire);
    }
    if (curr->ts == ts) return Insert::AlreadyPresent;
    if (!fresh) fresh = std::make_unique<Vertex>(ts, auId);
    fresh->next.store(curr, std::memory_order_relaxed);
    if (pred->next.compare_exchange_strong(curr, fresh.get(), std::memory_order_acq_rel,
                                           std::memory_order_acquire)) {
      fresh.release();
      vertexCount_.fetch_add(1);
      return Insert::Added;
    }
    // Lost the race at pred; rescan from pred.
  }
}

BlockGraph::Vertex* BlockGraph::findVertex(Timestamp ts) const {
  Vertex* v = head_->next.load(std::memory_order_acquire);
  while (v->ts < ts) v = v->next.load(std::memory_order_acquire);
  return v->ts == ts && v != tail_.get() ? v : nullptr;
}

BlockGraph::Insert BlockGraph::addEdge(Timestamp from, Timestamp to) {
  if (from >= to)
    throw InputError("edge " + std::to_string(from) + "->" + std::to_string(to) +
                     " must go from lower to higher timestamp");
  InFlight guard(inFlight_);
  Vertex* src = findVertex(from);
  Vertex* dst = findVertex(to);
  if (!src || !dst)
    throw UsageError("edge " + std::to_string(from) + "->" + std::to_string(to) +
                     " references a missing vertex");

  std::unique_ptr<Edge> fresh;
  Edge* pred = &src->edgeHead;
  while (true) {
    Edge* curr = pred->next.load(std::memory_order_acquire);
    while (curr->ts < to) {
      pred = curr;
      curr = curr->next.load(std::memory_order_acquire);
    }
    if (curr->ts == to) return Insert::AlreadyPresent;
    if (!fresh) fresh = std::make_unique<Edge>(to, dst);
    fresh->next.store(curr, std::memory_order_relaxed);
    if (pred->next.compare_exchange_strong(curr, fresh.get(), std::memory_order_acq_rel,
                                           std::memory_order_acquire)) {
      fresh.release();
      dst->inCnt.fetch_add(1);
      edgeCount_.fetch_add(1);
      return Insert::Added;
    }
  }
}

BlockGraph::Vertex* BlockGraph::searchLocal(CacheList& cache) {
  while (!cache.empty()) {
    Vertex* v = cache.front();
    cache.pop_front();
    std::int64_t source = 0;
    if (v->inCnt.compare_exchange_strong(source, -1)) {
      claimed_.fetch_add(1);
      return v;
    }
  }
  return nullptr;
}

BlockGraph::Vertex* BlockGraph::searchGlobal() {
  for (Vertex* v = head_->next.load(std::memory_order_acquire); v != tail_.get();
       v = v->next.load(std::memory_order_acquire)) {
    std::int64_t source = 0;
    if (v->inCnt.compare_exchange_strong(source, -1)) {
      claimed_.fetch_add(1);
      return v;
    }
  }
  return nullptr;
}

void BlockGraph::decInCount(Vertex& claimed, CacheList& cache) {
  if (claimed.inCnt.load() != -1)
    throw UsageError("decInCount on unclaimed vertex " + std::to_string(claimed.ts));
  for (Edge* e = claimed.edgeHead.next.load(std::memory_order_acquire); e != &claimed.edgeTail;
       e = e->next.load(std::memory_order_acquire)) {
    if (e->vref->inCnt.fetch_sub(1) == 1) cache.push_back(e->vref);
  }
}

void BlockGraph::forEachVertex(const std::function<void(const Vertex&)>& fn) const {
  for (Vertex* v = head_->next.load(std::memory_order_acquire); v != tail_.get();
       v = v->next.load(std::memory_order_acquire))
    fn(*v);
}

SerializedBG BlockGraph::serialize() const {
  SerializedBG out;
  forEachVertex([&](const Vertex& v) {
    out.vertices.push_back({v.ts, v.auId});
    for (Edge* e = v.edgeHead.next.load(std::memory_order_acquire); e != &v.edgeTail;
         e = e->next.load(std::memory_order_acquire))
      out.edges.push_back({v.ts, e->ts});
  });
  return out;
}

std::unique_ptr<BlockGraph> BlockGraph::deserialize(const SerializedBG& bg) {
  auto g = std::make_unique<BlockGraph>();
  for (const auto& v : bg.vertices) {
    if (g->addVertex(v.ts, v.auId) == Insert::AlreadyPresent)
      throw InputError("duplicate vertex " + std::to_string(v.ts));
  }
  for (const auto& e : bg.edges) {
    if (g->addEdge(e.from, e.to) == Insert::AlreadyPresent)
      throw InputError("duplicate edge " + std::to_string(e.from) + "->" + std::to_string(e.to));
  }
  return g;
}

void buildForCommit(BlockGraph& bg, Timestamp ts, AuId auId, std::span<const Timestamp> conflicts,
                    const std::function<AuId(Timestamp)>& auIdOf) {
  if (std::find(conflicts.begin(), conflicts.end(), ts) != conflicts.end())
    throw InputError("transaction " + std::to_string(ts) + " listed as its own conflict");
  for (Timestamp other : conflicts) {
    bg.addVertex(other, auIdOf(other));
    bg.addVertex(ts, auId);
    if (other < ts)
      bg.addEdge(other, ts);
    else
      bg.addEdge(ts, other);
  }
}

void writeBg(std::ostream& out, const SerializedBG& bg) {
  out << "BG " << bg.vertices.size() << ' ' << bg.edges.size() << '\n';
  for (const auto& v : bg.vertices) out << "V " << v.ts << ' ' << v.auId << '\n';
  for (const auto& e : bg.edges) out << "E " << e.from << ' ' << e.to << '\n';
}

std::string formatBg(const SerializedBG& bg) {
  std::ostringstream out;
  writeBg(out, bg);
  return out.str();
}

namespace {

std::int64_t toInt(const std::string& s, std::size_t line) {
  try {
    std::size_t used = 0;
    long long v = std::stoll(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw ParseError(line, "bad integer '" + s + "'");
}

}  // namespace

SerializedBG parseBg(std::span<const std::string> lines, std::size_t firstLine) {
  SerializedBG bg;
  std::size_t expectV = 0, expectE = 0;
  bool header = false;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t lineNo = firstLine + i;
    if (lines[i].empty()) continue;
    std::istringstream fields(lines[i]);
    std::string tag, a, b, extra;
    if (!(fields >> tag >> a >> b) || (fields >> extra))
      throw ParseError(lineNo, "expected 3 fields");
    if (!header) {
      if (tag != "BG") throw ParseError(lineNo, "missing BG header");
      expectV = static_cast<std::size_t>(toInt(a, lineNo));
      expectE = static_cast<std::size_t>(toInt(b, lineNo));
      header = true;
      continue;
    }
    if (tag == "V") {
      if (!bg.edges.empty()) throw ParseError(lineNo, "vertex record after edge records");
      SerializedBG::VertexRecord v{toInt(a, lineNo), toInt(b, lineNo)};
      if (v.ts < 0) throw ParseError(lineNo, "negative vertex timestamp");
      if (!bg.vertices.empty() && bg.vertices.back().ts >= v.ts)
        throw ParseError(lineNo, "vertices not strictly ascending");
      bg.vertices.push_back(v);
    } else if (tag == "E") {
      SerializedBG::EdgeRecord e{toInt(a, lineNo), toInt(b, lineNo)};
      if (e.from >= e.to) throw ParseError(lineNo, "edge must go from lower to higher ts");
      if (!bg.edges.empty() && !(bg.edges.back() < e))
        throw ParseError(lineNo, "edges not strictly ascending");
      auto known = [&](Timestamp ts) {
        return std::binary_search(
            bg.vertices.begin(), bg.vertices.end(), SerializedBG::VertexRecord{ts, 0},
            [](const auto& x, const auto& y) { return x.ts < y.ts; });
      };
      if (!known(e.from) || !known(e.to)) throw ParseError(lineNo, "edge endpoint is not a vertex");
      bg.edges.push_back(e);
    } else {
      throw ParseError(lineNo, "unknown record '" + tag + "'");
    }
  }
  if (!header) throw ParseError(firstLine, "missing BG header");
  if (bg.vertices.size() != expectV || bg.edges.size() != expectE)
    throw ParseError(firstLine, "header counts do not match records");
  return bg;
}

SerializedBG readBg(std::istream& in) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return parseBg(lines, 1);
}

}  // namespace optsmart
