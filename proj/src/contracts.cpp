#include "optsmart/contracts.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "optsmart/errors.hpp"

namespace optsmart {

const char* toString(Contract c) {
  switch (c) {
    case Contract::Coin: return "coin";
    case Contract::Ballot: return "ballot";
    case Contract::Auction: return "auction";
  }
  return "?";
}

const char* toString(ContractKind c) {
  switch (c) {
    case ContractKind::Coin: return "coin";
    case ContractKind::Ballot: return "ballot";
    case ContractKind::Auction: return "auction";
    case ContractKind::Mix: return "mix";
  }
  return "?";
}

Contract parseContract(const std::string& text) {
  if (text == "coin") return Contract::Coin;
  if (text == "ballot") return Contract::Ballot;
  if (text == "auction") return Contract::Auction;
  throw InputError("unknown contract: " + text);
}

ContractKind parseContractKind(const std::string& text) {
  if (text == "mix") return ContractKind::Mix;
  return static_cast<ContractKind>(parseContract(text));
}

namespace {

void expectParams(const std::string& method, const std::vector<std::int64_t>& p, std::size_t n) {
  if (p.size() != n)
    throw InputError(method + " takes " + std::to_string(n) + " parameters, got " +
                     std::to_string(p.size()));
}

Step read(int dst, ObjectId obj) { return {Op::Read, dst, 0, 0, 0, {obj, -1}}; }
Step readVia(int dst, ObjectId base, int reg) { return {Op::Read, dst, 0, 0, 0, {base, reg}}; }
Step write(ObjectId obj, int src) { return {Op::Write, 0, src, 0, 0, {obj, -1}}; }
Step writeVia(ObjectId base, int reg, int src) { return {Op::Write, 0, src, 0, 0, {base, reg}}; }
Step constant(int dst, Value v) { return {Op::Const, dst, 0, 0, v, {}}; }
Step binary(Op op, int dst, int a, int b) { return {op, dst, a, b, 0, {}}; }
Step require(Op op, int a, int b) { return {op, 0, a, b, 0, {}}; }

std::vector<Step> coinSteps(const std::string& m, const std::vector<std::int64_t>& p) {
  if (m == "getbalance") {
    expectParams(m, p, 1);
    return {read(0, p[0])};
  }
  if (m == "transfer") {
    expectParams(m, p, 3);
    if (p[0] == p[1]) throw InputError("transfer to the sending account");
    if (p[2] <= 0) throw InputError("transfer amount must be positive");
    return {read(0, p[0]),
            constant(1, p[2]),
            require(Op::RequireGe, 0, 1),
            read(2, p[1]),
            binary(Op::Sub, 0, 0, 1),
            binary(Op::Add, 2, 2, 1),
            write(p[0], 0),
            write(p[1], 2)};
  }
  throw InputError("unknown coin method: " + m);
}

std::vector<Step> ballotSteps(const std::string& m, const std::vector<std::int64_t>& p) {
  if (m == "vote") {
    expectParams(m, p, 2);
    return {read(0, p[0]),          constant(1, 0),  require(Op::RequireGt, 0, 1),
            read(2, p[1]),          binary(Op::Add, 2, 2, 0),
            write(p[1], 2),         write(p[0], 1)};
  }
  if (m == "delegate") {
    expectParams(m, p, 2);
    if (p[0] == p[1]) throw InputError("voter delegating to itself");
    // Weight moves to a voter that has not voted yet.
    return {read(0, p[0]),
            constant(1, 0),
            require(Op::RequireGt, 0, 1),
            read(2, p[1]),
            require(Op::RequireGt, 2, 1),
            binary(Op::Add, 2, 2, 0),
            write(p[1], 2),
            write(p[0], 1)};
  }
  if (m == "winningproposal") {
    expectParams(m, p, 2);
    if (p[1] < 1) throw InputError("winningproposal needs at least one proposal");
    std::vector<Step> s{constant(0, 0)};
    for (std::int64_t i = 0; i < p[1]; ++i) {
      s.push_back(read(1, p[0] + i));
      s.push_back(binary(Op::Max, 0, 0, 1));
    }
    return s;
  }
  throw InputError("unknown ballot method: " + m);
}

std::vector<Step> auctionSteps(const std::string& m, const std::vector<std::int64_t>& p) {
  if (m == "bid") {
    expectParams(m, p, 4);
    const ObjectId bidder = p[0], maxBid = p[2], maxBidder = p[3];
    if (p[1] <= 0) throw InputError("bid amount must be positive");
    // maxBidder holds (bidder object + 1); the outbid bidder is refunded
    // into its pending-return slot through an indirect object reference.
    return {read(0, maxBid),
            constant(1, p[1]),
            require(Op::RequireGt, 1, 0),
            read(2, maxBidder),
            {Op::SkipIfZero, 0, 2, 0, 3, {}},
            readVia(3, -1, 2),
            binary(Op::Add, 3, 3, 0),
            writeVia(-1, 2, 3),
            write(maxBid, 1),
            constant(4, bidder + 1),
            write(maxBidder, 4)};
  }
  if (m == "withdraw") {
    expectParams(m, p, 1);
    return {read(0, p[0]), constant(1, 0), require(Op::RequireGt, 0, 1), write(p[0], 1)};
  }
  if (m == "bidEnd") {
    expectParams(m, p, 2);
    return {read(0, p[0]), read(1, p[1])};
  }
  throw InputError("unknown auction method: " + m);
}

void validateSteps(const std::vector<Step>& steps) {
  bool seenWrite = false;
  auto regOk = [](int r) { return r >= 0 && r < kRegisters; };
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const Step& s = steps[i];
    if (!regOk(s.dst) || !regOk(s.a) || !regOk(s.b) || s.obj.reg >= kRegisters)
      throw InputError("register index out of range");
    if (s.op == Op::Write) seenWrite = true;
    if ((s.op == Op::RequireGe || s.op == Op::RequireGt) && seenWrite)
      throw InputError("require step after a write step");
    if (s.op == Op::SkipIfZero && (s.imm < 0 || i + static_cast<std::size_t>(s.imm) >= steps.size()))
      throw InputError("skip target out of range");
  }
}

ObjectId resolve(const ObjRef& ref, const std::array<Value, kRegisters>& r) {
  return ref.reg >= 0 ? ref.base + r[static_cast<std::size_t>(ref.reg)] : ref.base;
}

void localWork(std::int64_t rounds) {
  // Stands in for the pure computation a contract performs between
  // accesses. The volatile sink keeps the loop from being optimized away.
  static volatile std::uint64_t sink = 0;
  std::uint64_t x = 0x9E3779B97F4A7C15ull;
  for (std::int64_t i = 0; i < rounds; ++i) {
    x ^= x << 13;
    x ^= x >> 7;
    x ^= x << 17;
  }
  sink = sink + x;
}

template <class Access>
bool runSteps(const AtomicUnit& au, Access& access) {
  std::array<Value, kRegisters> r{};
  const auto& steps = au.steps;
  for (std::size_t pc = 0; pc < steps.size(); ++pc) {
    const Step& s = steps[pc];
    switch (s.op) {
      case Op::Read: {
        auto v = access.read(resolve(s.obj, r));
        if (!v) return false;
        r[s.dst] = *v;
        break;
      }
      case Op::Write: access.write(resolve(s.obj, r), r[s.a]); break;
      case Op::Const: r[s.dst] = s.imm; break;
      case Op::Add: r[s.dst] = r[s.a] + r[s.b]; break;
      case Op::Sub: r[s.dst] = r[s.a] - r[s.b]; break;
      case Op::Max: r[s.dst] = std::max(r[s.a], r[s.b]); break;
      case Op::RequireGe:
        if (!(r[s.a] >= r[s.b])) return true;
        break;
      case Op::RequireGt:
        if (!(r[s.a] > r[s.b])) return true;
        break;
      case Op::SkipIfZero:
        if (r[s.a] == 0) pc += static_cast<std::size_t>(s.imm);
        break;
      case Op::Work: localWork(s.imm); break;
    }
  }
  return true;
}

struct StmAccess {
  TxnDescriptor& txn;
  Stm& stm;
  std::optional<Value> read(ObjectId o) { return stm.read(txn, o); }
  void write(ObjectId o, Value v) { stm.write(txn, o, v); }
};

struct VectorAccess {
  std::vector<Value>& store;
  ObjectId check(ObjectId o) const {
    if (o < 0 || static_cast<std::size_t>(o) >= store.size())
      throw InputError("object id " + std::to_string(o) + " outside the store");
    return o;
  }
  std::optional<Value> read(ObjectId o) { return store[static_cast<std::size_t>(check(o))]; }
  void write(ObjectId o, Value v) { store[static_cast<std::size_t>(check(o))] = v; }
};

struct DirectAccess {
  std::span<std::atomic<Value>> store;
  AccessSet* log;
  std::size_t check(ObjectId o) const {
    if (o < 0 || static_cast<std::size_t>(o) >= store.size())
      throw InputError("object id " + std::to_string(o) + " outside the store");
    return static_cast<std::size_t>(o);
  }
  std::optional<Value> read(ObjectId o) {
    const auto i = check(o);
    if (log) log->reads.push_back(o);
    return store[i].load(std::memory_order_relaxed);
  }
  void write(ObjectId o, Value v) {
    const auto i = check(o);
    if (log) log->writes.push_back(o);
    store[i].store(v, std::memory_order_relaxed);
  }
};

}  // namespace

AtomicUnit makeAu(AuId auId, Contract contract, const std::string& method,
                  std::vector<std::int64_t> params, std::int64_t work) {
  if (work < 0) throw InputError("work must be non-negative");
  AtomicUnit au;
  au.auId = auId;
  au.contract = contract;
  au.method = method;
  au.work = work;
  switch (contract) {
    case Contract::Coin: au.steps = coinSteps(method, params); break;
    case Contract::Ballot: au.steps = ballotSteps(method, params); break;
    case Contract::Auction: au.steps = auctionSteps(method, params); break;
  }
  au.params = std::move(params);
  if (work > 0) {
    // The work sits right after the first read so it widens the window in
    // which a concurrent writer can invalidate that read.
    const std::size_t pos = au.steps.empty() ? 0 : 1;
    for (std::size_t i = 0; i < pos; ++i)
      if (au.steps[i].op == Op::SkipIfZero && i + static_cast<std::size_t>(au.steps[i].imm) >= pos)
        ++au.steps[i].imm;
    au.steps.insert(au.steps.begin() + static_cast<std::ptrdiff_t>(pos),
                    Step{Op::Work, 0, 0, 0, work, {}});
  }
  validateSteps(au.steps);
  return au;
}

ExecResult executeCode(const AtomicUnit& au, TxnDescriptor& txn, Stm& stm) {
  StmAccess access{txn, stm};
  return runSteps(au, access) ? ExecResult::Done : ExecResult::Aborted;
}

void executeSerial(const AtomicUnit& au, std::vector<Value>& store) {
  VectorAccess access{store};
  runSteps(au, access);
}

void executeDirect(const AtomicUnit& au, std::span<std::atomic<Value>> store, AccessSet* log) {
  DirectAccess access{store, log};
  runSteps(au, access);
}

std::vector<std::size_t> methodCounts(std::size_t n, std::span<const int> percents) {
  if (std::accumulate(percents.begin(), percents.end(), 0) != 100)
    throw InputError("method percentages must sum to 100");
  std::vector<std::size_t> counts;
  std::size_t used = 0;
  for (int pct : percents) {
    counts.push_back(static_cast<std::size_t>(pct) * n / 100);
    used += counts.back();
  }
  const auto largest = std::max_element(percents.begin(), percents.end()) - percents.begin();
  counts[static_cast<std::size_t>(largest)] += n - used;
  return counts;
}

namespace {

struct Call {
  Contract contract;
  std::string method;
  std::vector<std::int64_t> params;
};

/// Picks indices in [0, n) uniformly or with a Zipf law over the index.
class Picker {
 public:
  Picker(std::size_t n, bool zipf, double exponent) : n_(n), zipf_(zipf) {
    if (zipf_) {
      std::vector<double> w(n);
      for (std::size_t k = 0; k < n; ++k) w[k] = 1.0 / std::pow(static_cast<double>(k + 1), exponent);
      dist_ = std::discrete_distribution<std::size_t>(w.begin(), w.end());
    }
  }
  std::size_t operator()(std::mt19937_64& rng) {
    if (zipf_) return dist_(rng);
    return std::uniform_int_distribution<std::size_t>(0, n_ - 1)(rng);
  }
  std::size_t other(std::mt19937_64& rng, std::size_t not_) {
    std::size_t k = (*this)(rng);
    while (k == not_) k = std::uniform_int_distribution<std::size_t>(0, n_ - 1)(rng);
    return k;
  }

 private:
  std::size_t n_;
  bool zipf_;
  std::discrete_distribution<std::size_t> dist_;
};

struct Part {
  std::vector<Call> calls;
  std::optional<Call> trailing;
  ContractRegion region;
  std::vector<Value> initial;
};

Part coinPart(std::size_t nAus, std::size_t nObjects, ObjectId base, std::mt19937_64& rng,
              const WorkloadSpec& spec) {
  if (nObjects == 0) throw InputError("coin workload needs at least one account");
  static constexpr std::array<int, 2> kMix{75, 25};
  const auto counts = methodCounts(nAus, kMix);
  if (counts[1] > 0 && nObjects < 2) throw InputError("transfer needs at least two accounts");
  std::vector<int> order;
  order.insert(order.end(), counts[0], 0);
  order.insert(order.end(), counts[1], 1);
  std::shuffle(order.begin(), order.end(), rng);

  Part part;
  part.region = {Contract::Coin, base, nObjects, 0};
  part.initial.assign(nObjects, kInitialBalance);
  Picker pick(nObjects, spec.zipf, spec.zipfExponent);
  std::uniform_int_distribution<std::int64_t> amount(1, 100);
  for (int m : order) {
    const auto from = pick(rng);
    if (m == 0) {
      part.calls.push_back({Contract::Coin, "getbalance", {base + static_cast<ObjectId>(from)}});
    } else {
      const auto to = pick.other(rng, from);
      part.calls.push_back({Contract::Coin,
                            "transfer",
                            {base + static_cast<ObjectId>(from), base + static_cast<ObjectId>(to),
                             amount(rng)}});
    }
  }
  return part;
}

/// `voteAus` vote/delegate calls plus one trailing winningproposal.
Part ballotPart(std::size_t voteAus, std::size_t nObjects, ObjectId base, std::mt19937_64& rng,
                const WorkloadSpec& spec) {
  const std::size_t proposals = nObjects * 5 / 100;
  if (proposals < 1) throw InputError("ballot workload needs at least 20 objects for one proposal");
  const std::size_t voters = nObjects - proposals;
  static constexpr std::array<int, 2> kMix{90, 10};
  const auto counts = methodCounts(voteAus, kMix);
  if (voteAus > voters)
    throw InputError("ballot workload has more vote/delegate calls than voters");
  if (counts[1] > 0 && voters < 2) throw InputError("delegate needs at least two voters");

  std::vector<int> order;
  order.insert(order.end(), counts[0], 0);
  order.insert(order.end(), counts[1], 1);
  std::shuffle(order.begin(), order.end(), rng);

  // Each voter acts in at most one call.
  std::vector<std::size_t> actors(voters);
  std::iota(actors.begin(), actors.end(), 0);
  std::shuffle(actors.begin(), actors.end(), rng);

  Part part;
  part.region = {Contract::Ballot, base, nObjects, proposals};
  part.initial.assign(nObjects, 0);
  std::fill(part.initial.begin() + static_cast<std::ptrdiff_t>(proposals), part.initial.end(), 1);
  const ObjectId voterBase = base + static_cast<ObjectId>(proposals);
  Picker pickProposal(proposals, spec.zipf, spec.zipfExponent);
  Picker pickVoter(voters, spec.zipf, spec.zipfExponent);
  for (std::size_t i = 0; i < order.size(); ++i) {
    const ObjectId voter = voterBase + static_cast<ObjectId>(actors[i]);
    if (order[i] == 0) {
      part.calls.push_back(
          {Contract::Ballot, "vote", {voter, base + static_cast<ObjectId>(pickProposal(rng))}});
    } else {
      const auto to = pickVoter.other(rng, actors[i]);
      part.calls.push_back(
          {Contract::Ballot, "delegate", {voter, voterBase + static_cast<ObjectId>(to)}});
    }
  }
  part.trailing = Call{Contract::Ballot, "winningproposal", {base, static_cast<ObjectId>(proposals)}};
  return part;
}

Part auctionPart(std::size_t nAus, std::size_t nObjects, ObjectId base, std::mt19937_64& rng,
                 const WorkloadSpec& spec) {
  if (nObjects < 3) throw InputError("auction workload needs at least one bidder plus two slots");
  const std::size_t bidders = nObjects - 2;
  const ObjectId maxBid = base + static_cast<ObjectId>(bidders);
  const ObjectId maxBidder = maxBid + 1;
  static constexpr std::array<int, 3> kMix{8, 90, 2};
  const auto counts = methodCounts(nAus, kMix);
  std::vector<int> order;
  for (int m = 0; m < 3; ++m) order.insert(order.end(), counts[static_cast<std::size_t>(m)], m);
  std::shuffle(order.begin(), order.end(), rng);

  Part part;
  part.region = {Contract::Auction, base, nObjects, 0};
  part.initial.assign(nObjects, 0);
  Picker pick(bidders, spec.zipf, spec.zipfExponent);
  std::uniform_int_distribution<std::int64_t> amount(1, 1000);
  for (int m : order) {
    if (m == 0) {
      part.calls.push_back({Contract::Auction,
                            "bid",
                            {base + static_cast<ObjectId>(pick(rng)), amount(rng), maxBid, maxBidder}});
    } else if (m == 1) {
      part.calls.push_back({Contract::Auction, "withdraw", {base + static_cast<ObjectId>(pick(rng))}});
    } else {
      part.calls.push_back({Contract::Auction, "bidEnd", {maxBid, maxBidder}});
    }
  }
  return part;
}

Workload assemble(std::vector<Call> calls, std::vector<Part>& parts, const WorkloadSpec& spec) {
  Workload w;
  for (auto& p : parts) {
    w.regions.push_back(p.region);
    w.initialState.insert(w.initialState.end(), p.initial.begin(), p.initial.end());
  }
  for (auto& p : parts)
    if (p.trailing) calls.push_back(*p.trailing);
  w.aus.reserve(calls.size());
  for (auto& c : calls)
    w.aus.push_back(makeAu(static_cast<AuId>(w.aus.size()), c.contract, c.method,
                           std::move(c.params), spec.work));
  return w;
}

Workload single(const WorkloadSpec& spec, Part (*gen)(std::size_t, std::size_t, ObjectId,
                                                      std::mt19937_64&, const WorkloadSpec&)) {
  std::mt19937_64 rng(spec.seed);
  std::vector<Part> parts{gen(spec.nAUs, spec.nObjects, 0, rng, spec)};
  return assemble(std::move(parts[0].calls), parts, spec);
}

}  // namespace

Workload genCoinWorkload(const WorkloadSpec& spec) { return single(spec, coinPart); }
Workload genBallotWorkload(const WorkloadSpec& spec) { return single(spec, ballotPart); }
Workload genAuctionWorkload(const WorkloadSpec& spec) { return single(spec, auctionPart); }

Workload genMixWorkload(const WorkloadSpec& spec) {
  std::array<std::size_t, 3> aus{}, objs{};
  for (std::size_t k = 0; k < 3; ++k) {
    aus[k] = spec.nAUs / 3 + (k < spec.nAUs % 3 ? 1 : 0);
    objs[k] = spec.nObjects / 3 + (k < spec.nObjects % 3 ? 1 : 0);
  }
  std::mt19937_64 rng(spec.seed);
  std::vector<Part> parts;
  ObjectId base = 0;
  parts.push_back(coinPart(aus[0], objs[0], base, rng, spec));
  base += static_cast<ObjectId>(objs[0]);
  // The ballot share includes its trailing winningproposal call.
  parts.push_back(ballotPart(aus[1] == 0 ? 0 : aus[1] - 1, objs[1], base, rng, spec));
  if (aus[1] == 0) parts.back().trailing.reset();
  base += static_cast<ObjectId>(objs[1]);
  parts.push_back(auctionPart(aus[2], objs[2], base, rng, spec));

  std::vector<Call> calls;
  for (auto& p : parts) calls.insert(calls.end(), p.calls.begin(), p.calls.end());
  std::shuffle(calls.begin(), calls.end(), rng);
  return assemble(std::move(calls), parts, spec);
}

Workload generateWorkload(const WorkloadSpec& spec) {
  switch (spec.kind) {
    case ContractKind::Coin: return genCoinWorkload(spec);
    case ContractKind::Ballot: return genBallotWorkload(spec);
    case ContractKind::Auction: return genAuctionWorkload(spec);
    case ContractKind::Mix: return genMixWorkload(spec);
  }
  throw InputError("unknown contract kind");
}

std::vector<Value> highestBids(const Workload& w) {
  std::vector<Value> out;
  for (const auto& region : w.regions) {
    if (region.contract != Contract::Auction) continue;
    const ObjectId maxBid = region.first + static_cast<ObjectId>(region.count) - 2;
    Value best = 0;
    for (const auto& au : w.aus)
      if (au.contract == Contract::Auction && au.method == "bid" && au.params[2] == maxBid)
        best = std::max(best, au.params[1]);
    out.push_back(best);
  }
  return out;
}

std::vector<std::string> checkInvariants(const Workload& w, std::span<const Value> before,
                                         std::span<const Value> after) {
  std::vector<std::string> bad;
  if (before.size() != after.size() || before.size() != w.initialState.size()) {
    bad.push_back("state size mismatch");
    return bad;
  }
  auto sum = [](std::span<const Value> s, ObjectId first, std::size_t n) {
    Value total = 0;
    for (std::size_t i = 0; i < n; ++i) total += s[static_cast<std::size_t>(first) + i];
    return total;
  };
  const auto bids = highestBids(w);
  std::size_t auctionIndex = 0;
  for (const auto& r : w.regions) {
    const std::string where = std::string(toString(r.contract)) + " region at " +
                              std::to_string(r.first) + ": ";
    switch (r.contract) {
      case Contract::Coin:
        if (sum(before, r.first, r.count) != sum(after, r.first, r.count))
          bad.push_back(where + "balance sum changed");
        for (std::size_t i = 0; i < r.count; ++i)
          if (after[static_cast<std::size_t>(r.first) + i] < 0)
            bad.push_back(where + "negative balance");
        break;
      case Contract::Ballot: {
        if (sum(before, r.first, r.count) != sum(after, r.first, r.count))
          bad.push_back(where + "tallies plus weights not conserved");
        for (std::size_t i = r.proposals; i < r.count; ++i) {
          const auto k = static_cast<std::size_t>(r.first) + i;
          if (after[k] < 0) bad.push_back(where + "negative voter weight");
          if (before[k] == 0 && after[k] != 0) bad.push_back(where + "voter voted twice");
        }
        break;
      }
      case Contract::Auction: {
        const auto maxBid = static_cast<std::size_t>(r.first) + r.count - 2;
        if (after[maxBid] < before[maxBid]) bad.push_back(where + "max bid decreased");
        if (after[maxBid] != std::max(before[maxBid], bids[auctionIndex]))
          bad.push_back(where + "max bid is not the highest bid");
        for (std::size_t i = 0; i + 2 < r.count; ++i)
          if (after[static_cast<std::size_t>(r.first) + i] < 0)
            bad.push_back(where + "negative pending return");
        ++auctionIndex;
        break;
      }
    }
  }
  return bad;
}

std::string formatAu(const AtomicUnit& au) {
  std::ostringstream out;
  out << au.auId << ' ' << toString(au.contract) << ' ' << au.method << ' ' << au.work;
  for (auto p : au.params) out << ' ' << p;
  return out.str();
}

void writeAus(std::ostream& out, std::span<const AtomicUnit> aus) {
  for (const auto& au : aus) out << formatAu(au) << '\n';
}

namespace {

std::int64_t parseInt(const std::string& s, std::size_t lineNo) {
  try {
    std::size_t used = 0;
    long long v = std::stoll(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw ParseError(lineNo, "bad integer '" + s + "'");
}

}  // namespace

AtomicUnit parseAu(const std::string& line, std::size_t lineNo) {
  std::istringstream in(line);
  std::string id, contract, method, work, tok;
  if (!(in >> id >> contract >> method >> work))
    throw ParseError(lineNo, "expected `auId contract method work params...`");
  std::vector<std::int64_t> params;
  while (in >> tok) params.push_back(parseInt(tok, lineNo));
  try {
    return makeAu(parseInt(id, lineNo), parseContract(contract), method, std::move(params),
                  parseInt(work, lineNo));
  } catch (const InputError& e) {
    throw ParseError(lineNo, e.what());
  }
}

std::vector<AtomicUnit> readAus(std::istream& in) {
  std::vector<AtomicUnit> aus;
  std::string line;
  std::size_t lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (!line.empty()) aus.push_back(parseAu(line, lineNo));
  }
  return aus;
}

void writeWorkload(std::ostream& out, const Workload& w) {
  out << "[REGIONS]\n";
  for (const auto& r : w.regions)
    out << toString(r.contract) << ' ' << r.first << ' ' << r.count << ' ' << r.proposals << '\n';
  out << "[INITSTATE]\n";
  for (std::size_t i = 0; i < w.initialState.size(); ++i) out << i << ' ' << w.initialState[i] << '\n';
  out << "[AUS]\n";
  writeAus(out, w.aus);
}

Workload readWorkload(std::istream& in) {
  Workload w;
  std::string line, section;
  std::size_t lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (line.empty()) continue;
    if (line.front() == '[') {
      section = line;
      continue;
    }
    std::istringstream fields(line);
    if (section == "[REGIONS]") {
      std::string c, first, count, proposals;
      if (!(fields >> c >> first >> count >> proposals)) throw ParseError(lineNo, "bad region");
      try {
        w.regions.push_back({parseContract(c), parseInt(first, lineNo),
                             static_cast<std::size_t>(parseInt(count, lineNo)),
                             static_cast<std::size_t>(parseInt(proposals, lineNo))});
      } catch (const InputError& e) {
        throw ParseError(lineNo, e.what());
      }
    } else if (section == "[INITSTATE]") {
      std::string obj, val;
      if (!(fields >> obj >> val)) throw ParseError(lineNo, "expected `obj value`");
      if (parseInt(obj, lineNo) != static_cast<std::int64_t>(w.initialState.size()))
        throw ParseError(lineNo, "initial state must list objects densely in order");
      w.initialState.push_back(parseInt(val, lineNo));
    } else if (section == "[AUS]") {
      w.aus.push_back(parseAu(line, lineNo));
    } else {
      throw ParseError(lineNo, "record outside a known section");
    }
  }
  return w;
}

}  // namespace optsmart
