#pragma once

#include <string>
#include <vector>

#include "optsmart/block.hpp"

namespace optsmart {

enum class ValidatorKind { Dec, Fj, Serial };

const char* toString(ValidatorKind v);
ValidatorKind parseValidatorKind(const std::string& text);

struct ValidatorOutcome {
  std::vector<Value> finalState;
  /// Final state matches the block and no structural check failed.
  bool accept = false;
  double wallMs = 0.0;
  double phase1Ms = 0.0;
  double phase2Ms = 0.0;
  /// AU ids in the order their executions started.
  std::vector<AuId> executionOrder;
  std::size_t claimedCount = 0;
  std::size_t vertexCount = 0;
  /// Every AU executed exactly once.
  bool exactlyOnce = false;
  /// Conflicting AU pairs (common object, one writing) that the bin and
  /// graph leave unordered.
  std::size_t accessViolations = 0;
  /// Fork-join only: number of dispatched waves in phase 2.
  std::size_t waves = 0;
  std::string rejectReason;
};

/// Two phases: the bin AUs run from a shared index, then after a barrier
/// threads claim graph sources from a private cache or a global scan.
ValidatorOutcome decValidator(const Block& block, std::size_t threads);

/// A master collects the current sources into a wave, slaves execute the
/// wave, the master relaxes the wave's out-edges.
ValidatorOutcome fjValidator(const Block& block, std::size_t threads);

/// The bin in id order, then graph vertices in ascending timestamp.
ValidatorOutcome serialValidator(const Block& block);

ValidatorOutcome validateBlock(ValidatorKind kind, const Block& block, std::size_t threads);

}  // namespace optsmart
