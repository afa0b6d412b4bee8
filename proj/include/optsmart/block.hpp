#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "optsmart/block_graph.hpp"
#include "optsmart/contracts.hpp"

namespace optsmart {

using Digest = std::array<std::uint8_t, 32>;

/// What the miner proposes: the AUs, the conflict-free bin, the block
/// graph over the dependent AUs, the previous block's digest and the final
/// value of every object.
struct Block {
  std::vector<AtomicUnit> aus;
  std::vector<Value> initialState;
  std::vector<AuId> concBin;  // ascending
  SerializedBG bg;
  Digest prevHash{};
  std::vector<Value> finalState;
};

/// Sections `[AUS] [INITSTATE] [CONCBIN] [BG] [PREVHASH] [FINALSTATE]`.
void writeBlock(std::ostream& out, const Block& block);
std::string serializeBlock(const Block& block);
/// Throws ParseError with the file line number.
Block readBlock(std::istream& in);
Block parseBlock(const std::string& text);

/// SHA-256 of the serialized block.
Digest blockDigest(const Block& block);
Digest sha256(const std::string& bytes);
std::string toHex(const Digest& d);
Digest digestFromHex(const std::string& hex);

/// Genesis predecessor.
inline constexpr Digest kZeroDigest{};

}  // namespace optsmart
