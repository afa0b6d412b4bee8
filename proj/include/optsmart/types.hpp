#pragma once

#include <cstdint>
#include <limits>

namespace optsmart {

/// Transaction timestamp. T0 (the initializer) is 0; live transactions start at 1.
using Timestamp = std::int64_t;

/// Index of a shared t-object in the store.
using ObjectId = std::int64_t;

/// Value held by a t-object.
using Value = std::int64_t;

/// Position of an atomic-unit inside a block's AU list.
using AuId = std::int64_t;

inline constexpr Timestamp kInitialTs = 0;
inline constexpr Timestamp kMinusInfinity = std::numeric_limits<Timestamp>::min();
inline constexpr Timestamp kPlusInfinity = std::numeric_limits<Timestamp>::max();

enum class Protocol { Bto, Mvto };

/// DEFAULT gives every committed AU a vertex; OPTIMIZED only dependent ones.
enum class MinerMode { Default, Optimized };

const char* toString(Protocol p);
const char* toString(MinerMode m);
Protocol parseProtocol(const char* text);
MinerMode parseMinerMode(const char* text);

}  // namespace optsmart
