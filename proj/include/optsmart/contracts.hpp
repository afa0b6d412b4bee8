#pragma once

#include <atomic>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "optsmart/stm.hpp"
#include "optsmart/types.hpp"

namespace optsmart {

enum class Contract { Coin, Ballot, Auction };
enum class ContractKind { Coin, Ballot, Auction, Mix };

const char* toString(Contract c);
const char* toString(ContractKind c);
Contract parseContract(const std::string& text);
ContractKind parseContractKind(const std::string& text);

/// Opcodes of the atomic-unit step machine. Registers are 64-bit; every
/// step reads and writes registers by index.
enum class Op {
  Read,        // r[dst] = read(obj)
  Write,       // write(obj, r[a])
  Const,       // r[dst] = imm
  Add,         // r[dst] = r[a] + r[b]
  Sub,         // r[dst] = r[a] - r[b]
  Max,         // r[dst] = max(r[a], r[b])
  RequireGe,   // stop (no further steps) unless r[a] >= r[b]
  RequireGt,   // stop unless r[a] > r[b]
  SkipIfZero,  // skip the next imm steps if r[a] == 0
  Work,        // LOCAL: imm rounds of pure computation
};

/// Object operand: base + r[reg] when reg >= 0, else base.
struct ObjRef {
  ObjectId base = 0;
  int reg = -1;
};

struct Step {
  Op op;
  int dst = 0;
  int a = 0;
  int b = 0;
  Value imm = 0;
  ObjRef obj{};
};

inline constexpr int kRegisters = 8;

/// One smart-contract method call.
///
/// Every Require step precedes every Write step, so a failed business rule
/// always leaves the store untouched whether the writes are buffered by an
/// STM or applied directly.
struct AtomicUnit {
  AuId auId = 0;
  Contract contract = Contract::Coin;
  std::string method;
  std::vector<std::int64_t> params;
  std::int64_t work = 0;
  std::vector<Step> steps;
};

/// Builds the step list for a method call. Throws InputError for unknown
/// methods or wrong parameter counts.
///
///   coin     getbalance(acct) | transfer(from, to, amount)
///   ballot   vote(voter, proposal) | delegate(voter, to)
///            | winningproposal(firstProposal, nProposals)
///   auction  bid(bidder, amount, maxBidObj, maxBidderObj) | withdraw(bidder)
///            | bidEnd(maxBidObj, maxBidderObj)
AtomicUnit makeAu(AuId auId, Contract contract, const std::string& method,
                  std::vector<std::int64_t> params, std::int64_t work = 0);

enum class ExecResult { Done, Aborted };

/// Runs the AU inside an STM transaction. Aborted means the protocol
/// aborted a read; a failed business rule still returns Done.
ExecResult executeCode(const AtomicUnit& au, TxnDescriptor& txn, Stm& stm);

/// Runs the AU straight against a plain store.
void executeSerial(const AtomicUnit& au, std::vector<Value>& store);

/// Objects touched by one direct execution.
struct AccessSet {
  std::vector<ObjectId> reads;
  std::vector<ObjectId> writes;
};

/// Runs the AU against shared word-atomic storage without concurrency
/// control. Touched objects are appended to `log` when it is non-null.
/// Throws InputError on an object id outside the store.
void executeDirect(const AtomicUnit& au, std::span<std::atomic<Value>> store, AccessSet* log);

/// Object-id ranges owned by one contract inside a workload.
struct ContractRegion {
  Contract contract = Contract::Coin;
  ObjectId first = 0;
  std::size_t count = 0;
  // ballot: proposals [first, first+proposals), voters after them
  std::size_t proposals = 0;
  // auction: bidders [first, first+count-2), then maxBid, then maxBidder
};

struct WorkloadSpec {
  ContractKind kind = ContractKind::Coin;
  std::size_t nAUs = 0;
  std::size_t nObjects = 0;
  std::uint64_t seed = 0;
  bool zipf = false;
  double zipfExponent = 1.0;
  std::int64_t work = 0;
};

struct Workload {
  std::vector<AtomicUnit> aus;
  std::vector<Value> initialState;
  std::vector<ContractRegion> regions;
};

inline constexpr Value kInitialBalance = 1000;

Workload genCoinWorkload(const WorkloadSpec& spec);
Workload genBallotWorkload(const WorkloadSpec& spec);
Workload genAuctionWorkload(const WorkloadSpec& spec);
Workload genMixWorkload(const WorkloadSpec& spec);
Workload generateWorkload(const WorkloadSpec& spec);

/// floor(pct*n/100) per method, remainder to the largest share.
std::vector<std::size_t> methodCounts(std::size_t n, std::span<const int> percents);

/// Checks conservation laws between two states of the same workload:
/// coin balance sum, ballot tallies plus undelegated weight, auction
/// max-bid monotonicity. Returns a description of each violation.
std::vector<std::string> checkInvariants(const Workload& w, std::span<const Value> before,
                                         std::span<const Value> after);

/// Highest bid amount in the AU list per auction region (0 if none).
std::vector<Value> highestBids(const Workload& w);

/// Line-delimited dump: `auId contract method work params...`.
void writeAus(std::ostream& out, std::span<const AtomicUnit> aus);
std::string formatAu(const AtomicUnit& au);
/// `firstLine` is used for ParseError line numbers.
AtomicUnit parseAu(const std::string& line, std::size_t lineNo);
std::vector<AtomicUnit> readAus(std::istream& in);

/// Workload dump: `[REGIONS]`, `[INITSTATE]`, `[AUS]` sections.
void writeWorkload(std::ostream& out, const Workload& w);
Workload readWorkload(std::istream& in);

}  // namespace optsmart
