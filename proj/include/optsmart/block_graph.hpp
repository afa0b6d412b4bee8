#pragma once

#include <atomic>
#include <cstdint>
#include <deque>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "optsmart/types.hpp"

namespace optsmart {

/// Flat, ordered description of a block graph: what a block carries.
struct SerializedBG {
  struct VertexRecord {
    Timestamp ts;
    AuId auId;
    friend bool operator==(const VertexRecord&, const VertexRecord&) = default;
    friend auto operator<=>(const VertexRecord&, const VertexRecord&) = default;
  };
  struct EdgeRecord {
    Timestamp from;
    Timestamp to;
    friend bool operator==(const EdgeRecord&, const EdgeRecord&) = default;
    friend auto operator<=>(const EdgeRecord&, const EdgeRecord&) = default;
  };

  std::vector<VertexRecord> vertices;  // ascending ts
  std::vector<EdgeRecord> edges;       // ascending (from, to)

  friend bool operator==(const SerializedBG&, const SerializedBG&) = default;
};

/// Lock-free adjacency-list DAG of dependent atomic-units.
///
/// Vertices live in one list sorted by timestamp between -inf/+inf
/// sentinels; each vertex owns an edge list sorted the same way. Nodes are
/// only ever inserted, never removed, so a failed CAS can always restart
/// from the predecessor it already holds.
///
/// inCnt doubles as the claim word during replay: >0 pending predecessors,
/// 0 source, -1 claimed (terminal).
class BlockGraph {
 public:
  struct Vertex;

  struct Edge {
    Edge(Timestamp ts, Vertex* vref) : ts(ts), vref(vref) {}
    const Timestamp ts;
    Vertex* const vref;
    std::atomic<Edge*> next{nullptr};
  };

  struct Vertex {
    Vertex(Timestamp ts, AuId auId);
    const Timestamp ts;
    const AuId auId;
    std::atomic<std::int64_t> inCnt{0};
    std::atomic<Vertex*> next{nullptr};
    Edge edgeHead;
    Edge edgeTail;
  };

  enum class Insert { Added, AlreadyPresent };

  /// Sources discovered by one validator thread.
  using CacheList = std::deque<Vertex*>;

  BlockGraph();
  ~BlockGraph();
  BlockGraph(const BlockGraph&) = delete;
  BlockGraph& operator=(const BlockGraph&) = delete;

  Insert addVertex(Timestamp ts, AuId auId);

  /// Inserts from -> to and bumps the target's inCnt on a fresh insert.
  /// Throws InputError if from >= to and UsageError if an endpoint is missing.
  Insert addEdge(Timestamp from, Timestamp to);

  /// Claims the first cached vertex whose inCnt moves 0 -> -1. Entries that
  /// cannot be claimed are dropped from the cache.
  Vertex* searchLocal(CacheList& cache);

  /// Claims the first source found by a head-to-tail scan.
  Vertex* searchGlobal();

  /// Relaxes every out-edge of a claimed vertex. The thread whose decrement
  /// reaches zero caches the target.
  void decInCount(Vertex& claimed, CacheList& cache);

  Vertex* findVertex(Timestamp ts) const;

  std::size_t vertexCount() const noexcept { return vertexCount_.load(); }
  std::size_t edgeCount() const noexcept { return edgeCount_.load(); }
  std::size_t claimedCount() const noexcept { return claimed_.load(); }

  /// True when no addVertex/addEdge call is in progress.
  bool quiescent() const noexcept { return inFlight_.load() == 0; }

  /// Walks the vertex list in ts order.
  void forEachVertex(const std::function<void(const Vertex&)>& fn) const;

  SerializedBG serialize() const;

  /// Rebuilds a graph; inCnt is recomputed from the edges.
  static std::unique_ptr<BlockGraph> deserialize(const SerializedBG& bg);

 private:
  struct InFlight;

  std::unique_ptr<Vertex> head_;
  std::unique_ptr<Vertex> tail_;
  std::atomic<std::size_t> vertexCount_{0};
  std::atomic<std::size_t> edgeCount_{0};
  std::atomic<std::size_t> claimed_{0};
  std::atomic<std::size_t> inFlight_{0};
};

/// Adds vertices for `ts` and every conflict partner, then one edge per
/// partner oriented from the lower to the higher timestamp.
void buildForCommit(BlockGraph& bg, Timestamp ts, AuId auId, std::span<const Timestamp> conflicts,
                    const std::function<AuId(Timestamp)>& auIdOf);

/// Text form: a `BG <vertices> <edges>` header, then `V ts auId` lines, then
/// `E fromTs toTs` lines, ascending.
void writeBg(std::ostream& out, const SerializedBG& bg);
std::string formatBg(const SerializedBG& bg);

/// Parses the text form. `firstLine` is the file line number of lines[0],
/// used in ParseError messages.
SerializedBG parseBg(std::span<const std::string> lines, std::size_t firstLine = 1);
SerializedBG readBg(std::istream& in);

}  // namespace optsmart
