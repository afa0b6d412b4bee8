#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "optsmart/contracts.hpp"
#include "optsmart/types.hpp"
#include "optsmart/validator.hpp"

namespace optsmart {

/// Bytes of a block holding `nAUs` transactions of 200 bytes each.
std::int64_t blockSizeBytes(std::int64_t nAUs);

/// Graph storage: 28 bytes per vertex, 20 bytes per edge.
std::int64_t bgSizeBytes(std::int64_t nVertices, std::int64_t nEdges);
double bgSizeBytes(double nVertices, double nEdges);

/// 100 * bgBytes / blockBytes. Throws std::domain_error if blockBytes is 0.
double bgOverheadPct(double bgBytes, double blockBytes);

/// Average of per-block times over n iterations of m blocks, dropping the
/// first (warm-up) block of every iteration. times[i][b] is block b of
/// iteration i. Throws UsageError if m < 2 or the grid is ragged.
double averageBlockTime(const std::vector<std::vector<double>>& times);

enum class WorkloadKind { W1, W2, W3 };
const char* toString(WorkloadKind w);
WorkloadKind parseWorkloadKind(const std::string& text);

struct ExperimentConfig {
  ContractKind contract = ContractKind::Coin;
  WorkloadKind workload = WorkloadKind::W1;
  /// Fixed values for the dimensions a workload does not sweep.
  std::size_t aus = 300;
  std::size_t threads = 50;
  std::size_t objects = 2000;
  Protocol protocol = Protocol::Bto;
  MinerMode mode = MinerMode::Optimized;
  ValidatorKind validator = ValidatorKind::Dec;
  std::size_t iterations = 3;
  std::size_t blocks = 4;
  /// Validators re-executing every block; their times are averaged per block.
  std::size_t validators = 3;
  std::uint64_t seed = 1;
  bool zipf = false;
  std::int64_t work = 0;
  /// Points of the swept dimension. Empty means the profile default.
  std::vector<std::size_t> sweep;
};

/// Desk profile: 3 iterations of 4 blocks, 3 validators, at most 300 AUs
/// and at most `hardwareThreads` threads. Full-scale profile: 15 x 10 blocks,
/// 10 validators, the full sweeps.
ExperimentConfig deskProfile(WorkloadKind w, std::size_t hardwareThreads);
ExperimentConfig fullScaleProfile(WorkloadKind w);

/// Sweep points of the configured workload.
std::vector<std::size_t> sweepPoints(const ExperimentConfig& config);

struct MetricsRow {
  std::string contract;
  std::string workload;
  std::size_t aus = 0;
  std::size_t threads = 0;
  std::size_t objects = 0;
  std::string protocol;
  std::string mode;
  std::string validator;
  std::size_t iterations = 0;
  std::size_t blocks = 0;
  std::uint64_t seed = 0;
  double minerTimeMs = 0;
  double serialMinerTimeMs = 0;
  double minerSpeedup = 0;
  double validatorTimeMs = 0;
  double serialValidatorTimeMs = 0;
  double validatorSpeedup = 0;
  double bgVertices = 0;
  double bgEdges = 0;
  double bgBytes = 0;
  double blockBytes = 0;
  double bgPct = 0;
  double aborts = 0;
  double concBin = 0;

  friend bool operator==(const MetricsRow&, const MetricsRow&) = default;
};

/// Column order of the CSV, shared with the plotting scripts.
const std::vector<std::string>& csvColumns();

/// One reading: n x m blocks at a single point of the sweep. Every block is
/// validated; a rejected block throws std::runtime_error.
MetricsRow runReading(const ExperimentConfig& config);

/// One row per sweep point. UsageError for infeasible configurations.
std::vector<MetricsRow> runExperiment(const ExperimentConfig& config);

void writeCsv(std::ostream& out, const std::vector<MetricsRow>& rows);
/// Throws std::runtime_error if the file cannot be written.
void writeCsvFile(const std::string& path, const std::vector<MetricsRow>& rows);
/// Throws ParseError for malformed input.
std::vector<MetricsRow> readCsv(std::istream& in);

}  // namespace optsmart
