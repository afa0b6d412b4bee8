#pragma once

#include <atomic>
#include <cstdint>
#include <iosfwd>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "optsmart/types.hpp"

namespace optsmart {

enum class EventKind { Begin, Read, Write, TryCommit, TryAbort };

/// Response attached to an event. Reads answer Ok/Abort, tryC answers
/// Commit/Abort, and BEGIN/WRITE carry no outcome.
enum class Outcome { None, Ok, Commit, Abort };

struct HistoryEvent {
  std::uint64_t seq = 0;
  Timestamp ts = 0;
  EventKind kind = EventKind::Begin;
  std::optional<ObjectId> obj;
  std::optional<Value> val;
  Outcome outcome = Outcome::None;

  friend bool operator==(const HistoryEvent&, const HistoryEvent&) = default;
};

/// Totally ordered event log shared by all worker threads.
///
/// Sequence numbers come from one atomic counter, so the order of `seq` is
/// the order in which callers reached `record`. Protocols call `record`
/// while still holding the object lock that linearizes the operation.
class History {
 public:
  explicit History(bool enabled = true) : enabled_(enabled) {}

  History(const History&) = delete;
  History& operator=(const History&) = delete;

  bool enabled() const noexcept { return enabled_; }
  void setEnabled(bool on) noexcept { enabled_ = on; }

  /// Appends an event with the next sequence number. No-op when disabled.
  void record(Timestamp ts, EventKind kind, std::optional<ObjectId> obj = std::nullopt,
              std::optional<Value> val = std::nullopt, Outcome outcome = Outcome::None);

  /// Events sorted by sequence number.
  std::vector<HistoryEvent> events() const;

  std::size_t size() const;

 private:
  bool enabled_;
  std::atomic<std::uint64_t> nextSeq_{1};
  mutable std::mutex mutex_;
  std::vector<HistoryEvent> events_;
};

const char* toString(EventKind k);
const char* toString(Outcome o);

/// One event per line: `seq ts kind obj val outcome`, `-` for absent fields.
void writeHistory(std::ostream& out, const std::vector<HistoryEvent>& events);
std::string formatEvent(const HistoryEvent& e);

/// Inverse of writeHistory. Throws ParseError with the offending line.
std::vector<HistoryEvent> readHistory(std::istream& in);

}  // namespace optsmart
