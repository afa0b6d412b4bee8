#include "optsmart/history.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

#include "optsmart/errors.hpp"

namespace optsmart {

void History::record(Timestamp ts, EventKind kind, std::optional<ObjectId> obj,
                     std::optional<Value> val, Outcome outcome) {
  if (!enabled_) return;
  HistoryEvent e{nextSeq_.fetch_add(1), ts, kind, obj, val, outcome};
  std::lock_guard lock(mutex_);
  events_.push_back(e);
}

std::vector<HistoryEvent> History::events() const {
  std::vector<HistoryEvent> out;
  {
    std::lock_guard lock(mutex_);
    out = events_;
  }
  std::sort(out.begin(), out.end(),
            [](const HistoryEvent& a, const HistoryEvent& b) { return a.seq < b.seq; });
  return out;
}

std::size_t History::size() const {
  std::lock_guard lock(mutex_);
  return events_.size();
}

const char* toString(EventKind k) {
  switch (k) {
    case EventKind::Begin: return "BEGIN";
    case EventKind::Read: return "READ";
    case EventKind::Write: return "WRITE";
    case EventKind::TryCommit: return "TRYC";
    case EventKind::TryAbort: return "TRYA";
  }
  return "?";
}

const char* toString(Outcome o) {
  switch (o) {
    case Outcome::None: return "-";
    case Outcome::Ok: return "ok";
    case Outcome::Commit: return "C";
    case Outcome::Abort: return "A";
  }
  return "?";
}

std::string formatEvent(const HistoryEvent& e) {
  std::ostringstream line;
  line << e.seq << ' ' << e.ts << ' ' << toString(e.kind) << ' ';
  if (e.obj) line << *e.obj; else line << '-';
  line << ' ';
  if (e.val) line << *e.val; else line << '-';
  line << ' ' << toString(e.outcome);
  return line.str();
}

void writeHistory(std::ostream& out, const std::vector<HistoryEvent>& events) {
  for (const auto& e : events) out << formatEvent(e) << '\n';
}

namespace {

EventKind parseKind(const std::string& s, std::size_t line) {
  if (s == "BEGIN") return EventKind::Begin;
  if (s == "READ") return EventKind::Read;
  if (s == "WRITE") return EventKind::Write;
  if (s == "TRYC") return EventKind::TryCommit;
  if (s == "TRYA") return EventKind::TryAbort;
  throw ParseError(line, "unknown event kind '" + s + "'");
}

Outcome parseOutcome(const std::string& s, std::size_t line) {
  if (s == "-") return Outcome::None;
  if (s == "ok") return Outcome::Ok;
  if (s == "C") return Outcome::Commit;
  if (s == "A") return Outcome::Abort;
  throw ParseError(line, "unknown outcome '" + s + "'");
}

std::optional<std::int64_t> parseOptional(const std::string& s, std::size_t line) {
  if (s == "-") return std::nullopt;
  try {
    std::size_t used = 0;
    long long v = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(line, "bad integer '" + s + "'");
  }
}

}  // namespace

std::vector<HistoryEvent> readHistory(std::istream& in) {
  std::vector<HistoryEvent> out;
  std::string text;
  std::size_t lineNo = 0;
  while (std::getline(in, text)) {
    ++lineNo;
    if (text.empty()) continue;
    std::istringstream fields(text);
    std::string seq, ts, kind, obj, val, outcome, extra;
    if (!(fields >> seq >> ts >> kind >> obj >> val >> outcome) || (fields >> extra))
      throw ParseError(lineNo, "expected 6 fields");
    auto seqV = parseOptional(seq, lineNo);
    auto tsV = parseOptional(ts, lineNo);
    if (!seqV || !tsV) throw ParseError(lineNo, "seq and ts are required");
    HistoryEvent e;
    e.seq = static_cast<std::uint64_t>(*seqV);
    e.ts = *tsV;
    e.kind = parseKind(kind, lineNo);
    e.obj = parseOptional(obj, lineNo);
    e.val = parseOptional(val, lineNo);
    e.outcome = parseOutcome(outcome, lineNo);
    out.push_back(e);
  }
  return out;
}

}  // namespace optsmart
